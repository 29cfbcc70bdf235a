#include "pqr/quantile_pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "pqr/errors.hpp"

namespace pqr {

QuantileGrid::QuantileGrid(std::vector<double> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw InvalidInput("quantile grid is empty");
    for (std::size_t t = 0; t < levels_.size(); ++t) {
        const double tau = levels_[t];
        if (!(tau > 0.0 && tau < 1.0))
            throw InvalidInput("quantile level " + std::to_string(tau) + " is outside (0,1)");
        if (t > 0 && !(tau > levels_[t - 1]))
            throw InvalidInput("quantile levels must be strictly increasing");
    }
}

PyramidTree build_oblique_tree(const QuantileGrid& grid) {
    if (grid.size() == 0) throw InvalidInput("cannot build a pyramid over an empty grid");

    struct Pending {
        std::size_t lo, hi;  // half-open sublist of grid indices
        std::size_t left, right;
        int depth;
    };

    PyramidTree tree;
    tree.grid = grid;
    tree.nodes.reserve(grid.size());

    // Breadth-first so that nodes come out level by level.
    std::deque<Pending> queue{{0, grid.size(), kBoundary, kBoundary, 1}};
    while (!queue.empty()) {
        const Pending job = queue.front();
        queue.pop_front();
        if (job.lo >= job.hi) continue;

        const std::size_t mid = job.lo + (job.hi - job.lo - 1) / 2;
        PyramidNode node;
        node.depth = job.depth;
        node.index = mid;
        node.level = grid[mid];
        node.left_index = job.left;
        node.right_index = job.right;
        node.left_level = job.left == kBoundary ? 0.0 : grid[job.left];
        node.right_level = job.right == kBoundary ? 1.0 : grid[job.right];
        tree.nodes.push_back(node);
        tree.depth = std::max(tree.depth, job.depth);

        queue.push_back({job.lo, mid, job.left, mid, job.depth + 1});
        queue.push_back({mid + 1, job.hi, mid, job.right, job.depth + 1});
    }
    return tree;
}

double expected_split(const PyramidNode& node) {
    return (node.level - node.left_level) / (node.right_level - node.left_level);
}

PyramidTree assign_beta_params(PyramidTree tree, BetaSchedule schedule) {
    for (auto& node : tree.nodes) {
        const double mean = expected_split(node);
        const double base = schedule.per_level * node.depth;
        if (mean < 0.5) {
            node.alpha = base;
            node.beta = base * (1.0 - mean) / mean;
        } else {
            node.beta = base;
            node.alpha = base * mean / (1.0 - mean);
        }
        node.log_beta_fn = std::lgamma(node.alpha) + std::lgamma(node.beta) - std::lgamma(node.alpha + node.beta);
    }
    return tree;
}

PyramidTree make_pyramid(const QuantileGrid& grid, BetaSchedule schedule) {
    return assign_beta_params(build_oblique_tree(grid), schedule);
}

namespace {

double ancestor_value(std::span<const double> q, std::size_t index, double boundary) {
    return index == kBoundary ? boundary : q[index];
}

}  // namespace

std::vector<double> unit_quantiles_from_splits(const PyramidTree& tree, std::span<const double> splits) {
    if (splits.size() != tree.nodes.size()) throw InvalidInput("one split variable per pyramid node is required");
    std::vector<double> q(tree.grid.size(), 0.0);
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
        const auto& node = tree.nodes[k];
        const double lo = ancestor_value(q, node.left_index, 0.0);
        const double hi = ancestor_value(q, node.right_index, 1.0);
        q[node.index] = lo * (1.0 - splits[k]) + hi * splits[k];
    }
    return q;
}

double sample_beta(double alpha, double beta, Rng& rng) {
    std::gamma_distribution<double> ga(alpha, 1.0);
    std::gamma_distribution<double> gb(beta, 1.0);
    for (;;) {
        const double x = ga(rng);
        const double y = gb(rng);
        const double v = x / (x + y);
        if (v > 0.0 && v < 1.0) return v;
    }
}

std::vector<double> sample_unit_pyramid(const PyramidTree& tree, Rng& rng) {
    std::vector<double> splits(tree.nodes.size());
    for (std::size_t k = 0; k < tree.nodes.size(); ++k)
        splits[k] = sample_beta(tree.nodes[k].alpha, tree.nodes[k].beta, rng);
    auto q = unit_quantiles_from_splits(tree, splits);
    // A convex combination can round onto an ancestor when V sits within an ulp of 0 or 1.
    for (std::size_t t = 0; t < q.size(); ++t) {
        const double lo = t == 0 ? 0.0 : q[t - 1];
        if (!(q[t] > lo)) q[t] = std::nextafter(lo, 1.0);
    }
    return q;
}

double beta_logdensity(double v, double alpha, double beta, double log_beta_fn) {
    if (!(v > 0.0 && v < 1.0)) return -std::numeric_limits<double>::infinity();
    return (alpha - 1.0) * std::log(v) + (beta - 1.0) * std::log1p(-v) - log_beta_fn;
}

double unit_prior_logdensity(const PyramidTree& tree, std::span<const double> q) {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (q.size() != tree.grid.size()) throw InvalidInput("quantile vector does not match the grid");
    double total = 0.0;
    for (const auto& node : tree.nodes) {
        const double lo = ancestor_value(q, node.left_index, 0.0);
        const double hi = ancestor_value(q, node.right_index, 1.0);
        const double width = hi - lo;
        if (!(width > 0.0)) return kNegInf;
        const double v = (q[node.index] - lo) / width;
        const double term = beta_logdensity(v, node.alpha, node.beta, node.log_beta_fn);
        if (term == kNegInf) return kNegInf;
        total += term - std::log(width);
    }
    return total;
}

}  // namespace pqr
