#include "arht/fdr.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace arht {

std::vector<double> bh_adjust(const std::vector<double>& pvals) {
    for (double p : pvals) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p-values must lie in [0, 1]");
    }
    const std::size_t m = pvals.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });

    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t k = m; k-- > 0;) {
        const double candidate = static_cast<double>(m) * pvals[order[k]] / static_cast<double>(k + 1);
        running = std::min(running, candidate);
        adjusted[order[k]] = std::min(running, 1.0);
    }
    return adjusted;
}

}  // namespace arht
