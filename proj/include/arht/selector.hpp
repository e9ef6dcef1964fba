#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arht/estimators.hpp"
#include "arht/spectral.hpp"

namespace arht {

/// Sorted search grid over [lo, hi], endpoints included.
struct LambdaGrid {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> points;
};

/// (p^-1 tr S / 100, 20 ||S||).
std::pair<double, double> lambda_bounds(const SampleSummary& s);

/// Log-uniform grid: constant ratio between neighbours, so absolute spacing
/// grows with lambda.
LambdaGrid build_grid(double lo, double hi, int n_points = 200);

/// Q objective at each grid point; nullopt where the estimates are degenerate.
std::vector<std::optional<double>> q_profile(const SampleSummary& s, const PriorWeights& weights,
                                             const LambdaGrid& grid);

struct Selection {
    double lambda = 0.0;
    double objective = 0.0;
    std::size_t index = 0;
    std::vector<std::string> warnings;
};

/// Grid argmax of the Q objective; ties go to the smallest lambda.
Selection select_lambda_detail(const SampleSummary& s, const PriorWeights& weights,
                               const LambdaGrid& grid);
double select_lambda(const SampleSummary& s, const PriorWeights& weights, const LambdaGrid& grid);

struct LambdaSet {
    std::vector<double> lambdas;             // distinct, ascending
    std::vector<double> per_prior;           // selection for each prior, input order
    std::vector<std::size_t> prior_to_index; // per_prior[i] == lambdas[prior_to_index[i]] (after merging)
    std::vector<PriorWeights> priors;
    std::vector<std::string> warnings;
};

LambdaSet select_lambda_set(const SampleSummary& s, const std::vector<PriorWeights>& priors,
                            const LambdaGrid& grid);

/// The minimax rule picks the upper end of the range.
double minimax_lambda(const LambdaGrid& grid);

}  // namespace arht
