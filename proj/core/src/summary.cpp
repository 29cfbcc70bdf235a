#include "pqr/summary.hpp"

#include <algorithm>
#include <cmath>

#include "pqr/errors.hpp"
#include "pqr/model.hpp"

namespace pqr {

using Eigen::Index;
using Eigen::MatrixXd;

double sorted_quantile(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw InvalidInput("quantile of an empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) throw InvalidInput("sample quantile probability must lie in [0, 1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

IntervalSummary summarize_draws(std::span<const double> draws, double credibility) {
    if (draws.empty()) throw InvalidInput("cannot summarize an empty chain");
    if (!(credibility > 0.0 && credibility < 1.0)) throw InvalidInput("credibility must lie in (0, 1)");
    std::vector<double> sorted(draws.begin(), draws.end());
    std::sort(sorted.begin(), sorted.end());
    IntervalSummary out;
    double sum = 0.0;
    for (double d : draws) sum += d;
    out.mean = sum / static_cast<double>(draws.size());
    double ss = 0.0;
    for (double d : draws) ss += (d - out.mean) * (d - out.mean);
    out.sd = draws.size() > 1 ? std::sqrt(ss / static_cast<double>(draws.size() - 1)) : 0.0;
    out.median = sorted_quantile(sorted, 0.5);
    out.lower = sorted_quantile(sorted, 0.5 * (1.0 - credibility));
    out.upper = sorted_quantile(sorted, 0.5 * (1.0 + credibility));
    return out;
}

MatrixXd coefficient_trace(const std::vector<RegressionState>& states, const PivotFrame& frame, Index t) {
    MatrixXd out(static_cast<Index>(states.size()), frame.dimension() + 1);
    for (std::size_t s = 0; s < states.size(); ++s)
        out.row(static_cast<Index>(s)) = coefficients(states[s], frame, t).transpose();
    return out;
}

std::vector<CoefficientSummary> summarize(const std::vector<RegressionState>& states, const PivotFrame& frame,
                                          const QuantileGrid& grid, double credibility) {
    if (states.empty()) throw InvalidInput("cannot summarize an empty chain");
    std::vector<CoefficientSummary> out;
    for (Index t = 0; t < static_cast<Index>(grid.size()); ++t) {
        const MatrixXd trace = coefficient_trace(states, frame, t);
        for (Index j = 0; j < trace.cols(); ++j) {
            const Eigen::VectorXd col = trace.col(j);
            out.push_back({j, t, grid[static_cast<std::size_t>(t)],
                           summarize_draws({col.data(), static_cast<std::size_t>(col.size())}, credibility)});
        }
    }
    return out;
}

std::vector<CoefficientSummary> summarize_knots(const std::vector<RegressionState>& states, const QuantileGrid& grid,
                                                double credibility) {
    if (states.empty()) throw InvalidInput("cannot summarize an empty chain");
    const Index knots = states.front().pivot_count();
    std::vector<CoefficientSummary> out;
    std::vector<double> draws(states.size());
    for (Index t = 0; t < static_cast<Index>(grid.size()); ++t) {
        for (Index k = 0; k < knots; ++k) {
            for (std::size_t s = 0; s < states.size(); ++s) draws[s] = states[s].quantiles(k, t);
            out.push_back({k, t, grid[static_cast<std::size_t>(t)], summarize_draws(draws, credibility)});
        }
    }
    return out;
}

}  // namespace pqr
