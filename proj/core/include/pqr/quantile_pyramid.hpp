#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "pqr/random.hpp"

namespace pqr {

/// Strictly increasing probabilities, each in the open unit interval.
class QuantileGrid {
public:
    QuantileGrid() = default;
    /// Throws InvalidInput when empty, unsorted, duplicated, or outside (0,1).
    explicit QuantileGrid(std::vector<double> levels);

    [[nodiscard]] std::size_t size() const noexcept { return levels_.size(); }
    [[nodiscard]] double operator[](std::size_t t) const { return levels_[t]; }
    [[nodiscard]] const std::vector<double>& levels() const noexcept { return levels_; }

private:
    std::vector<double> levels_;
};

/// Index value for an ancestor that is the boundary 0 or 1 rather than a grid level.
inline constexpr std::size_t kBoundary = std::numeric_limits<std::size_t>::max();

struct PyramidNode {
    int depth = 1;                       // recursion depth, root = 1
    std::size_t index = 0;               // position of this level in the grid
    double level = 0.5;
    double left_level = 0.0;             // nearest placed level below, or 0
    double right_level = 1.0;            // nearest placed level above, or 1
    std::size_t left_index = kBoundary;  // grid index of that ancestor, kBoundary for 0
    std::size_t right_index = kBoundary; // grid index of that ancestor, kBoundary for 1
    double alpha = 1.0;
    double beta = 1.0;
    double log_beta_fn = 0.0;            // log B(alpha, beta), cached
};

/// Beta concentration schedule: the smaller of (alpha, beta) is `per_level * depth`.
struct BetaSchedule {
    double per_level = 2.0;
};

/// Binary tree of quantile levels in generation order (root first, then by depth).
struct PyramidTree {
    QuantileGrid grid;
    std::vector<PyramidNode> nodes;
    int depth = 0;
};

/// Places the middle level of the grid at the root and recurses on the left and
/// right sublists; even-length sublists take the smaller of the two middle levels.
/// Beta parameters are left at (1, 1); see assign_beta_params.
PyramidTree build_oblique_tree(const QuantileGrid& grid);

/// Relative position of the node's level between its two ancestors.
double expected_split(const PyramidNode& node);

PyramidTree assign_beta_params(PyramidTree tree, BetaSchedule schedule = {});

/// Convenience: build_oblique_tree followed by assign_beta_params.
PyramidTree make_pyramid(const QuantileGrid& grid, BetaSchedule schedule = {});

/// Evaluates the pyramid recursion for given split variables, one per node in
/// generation order. Returned values are aligned with the grid.
std::vector<double> unit_quantiles_from_splits(const PyramidTree& tree, std::span<const double> splits);

/// One draw of the uniform-centred pyramid; aligned with the grid, strictly increasing in (0,1).
std::vector<double> sample_unit_pyramid(const PyramidTree& tree, Rng& rng);

/// Draw from Beta(alpha, beta) strictly inside (0, 1).
double sample_beta(double alpha, double beta, Rng& rng);

double beta_logdensity(double v, double alpha, double beta, double log_beta_fn);

/// Joint log-density of the pyramid quantiles on [0,1]. Returns -inf if any
/// implied split leaves (0,1), which covers every monotonicity violation.
double unit_prior_logdensity(const PyramidTree& tree, std::span<const double> q);

}  // namespace pqr
