#pragma once

#include <stdexcept>
#include <string>

namespace arht {

/// Malformed or inconsistent input data (bad shapes, non-finite cells, parse failures).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The estimates needed by a statistic are degenerate for the given data and lambda.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace arht
