#pragma once

#include <vector>

namespace arht {

/// Benjamini-Hochberg step-up adjusted p-values, returned in input order.
/// Throws std::invalid_argument for entries outside [0, 1].
std::vector<double> bh_adjust(const std::vector<double>& pvals);

}  // namespace arht
