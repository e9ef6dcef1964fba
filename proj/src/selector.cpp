#include "arht/selector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "arht/error.hpp"

namespace arht {

std::pair<double, double> lambda_bounds(const SampleSummary& s) {
    if (!(s.trace_s > 0.0) || !(s.top_eigenvalue() > 0.0)) {
        throw NumericalError("all-zero spectrum: lambda bounds undefined");
    }
    return {s.trace_s / 100.0, 20.0 * s.top_eigenvalue()};
}

LambdaGrid build_grid(double lo, double hi, int n_points) {
    if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("grid range must satisfy 0 < lo < hi");
    }
    if (n_points < 2) throw std::invalid_argument("grid needs at least 2 points");
    LambdaGrid g;
    g.lo = lo;
    g.hi = hi;
    g.points.resize(static_cast<std::size_t>(n_points));
    const double ratio = hi / lo;
    for (int i = 0; i < n_points; ++i) {
        g.points[i] = lo * std::pow(ratio, static_cast<double>(i) / (n_points - 1));
    }
    g.points.front() = lo;
    g.points.back() = hi;
    return g;
}

std::vector<std::optional<double>> q_profile(const SampleSummary& s, const PriorWeights& weights,
                                             const LambdaGrid& grid) {
    std::vector<std::optional<double>> out;
    out.reserve(grid.points.size());
    for (double l : grid.points) {
        try {
            const double q = q_objective(s, l, weights);
            out.emplace_back(std::isfinite(q) ? std::optional<double>(q) : std::nullopt);
        } catch (const NumericalError&) {
            out.emplace_back(std::nullopt);
        }
    }
    return out;
}

Selection select_lambda_detail(const SampleSummary& s, const PriorWeights& weights,
                               const LambdaGrid& grid) {
    if (grid.points.empty()) throw std::invalid_argument("empty lambda grid");
    if (!weights.nonnegative_on(s.top_eigenvalue())) {
        throw std::invalid_argument("prior polynomial is negative on the observed spectral range");
    }
    const auto profile = q_profile(s, weights, grid);
    Selection sel;
    std::size_t skipped = 0;
    bool found = false;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (!profile[i]) {
            ++skipped;
            continue;
        }
        if (!found || *profile[i] > sel.objective) {
            found = true;
            sel.objective = *profile[i];
            sel.index = i;
        }
    }
    if (!found) throw NumericalError("no grid point has valid estimates");
    if (skipped > 0) {
        sel.warnings.push_back(std::to_string(skipped) + " grid points skipped: degenerate estimates");
    }
    sel.lambda = grid.points[sel.index];
    return sel;
}

double select_lambda(const SampleSummary& s, const PriorWeights& weights, const LambdaGrid& grid) {
    return select_lambda_detail(s, weights, grid).lambda;
}

LambdaSet select_lambda_set(const SampleSummary& s, const std::vector<PriorWeights>& priors,
                            const LambdaGrid& grid) {
    if (priors.empty()) throw std::invalid_argument("at least one prior is required");
    LambdaSet set;
    set.priors = priors;
    for (const auto& prior : priors) {
        Selection sel = select_lambda_detail(s, prior, grid);
        set.per_prior.push_back(sel.lambda);
        for (auto& w : sel.warnings) set.warnings.push_back(std::move(w));
    }
    set.lambdas = dedup_lambdas(set.per_prior);
    std::sort(set.lambdas.begin(), set.lambdas.end());
    for (double l : set.per_prior) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < set.lambdas.size(); ++j) {
            if (std::abs(set.lambdas[j] - l) < std::abs(set.lambdas[best] - l)) best = j;
        }
        set.prior_to_index.push_back(best);
    }
    return set;
}

double minimax_lambda(const LambdaGrid& grid) {
    if (grid.points.size() < 2 || !(grid.hi > grid.lo)) throw std::invalid_argument("invalid grid");
    return grid.hi;
}

}  // namespace arht
