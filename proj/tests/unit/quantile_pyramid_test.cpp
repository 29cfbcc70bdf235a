#include <gtest/gtest.h>

#include <boost/math/distributions/beta.hpp>
#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "pqr/errors.hpp"
#include "pqr/quantile_pyramid.hpp"

namespace pqr {
namespace {

std::vector<double> generation_levels(const PyramidTree& tree) {
    std::vector<double> out;
    for (const auto& n : tree.nodes) out.push_back(n.level);
    return out;
}

const PyramidNode& node_at(const PyramidTree& tree, double level) {
    for (const auto& n : tree.nodes)
        if (n.level == level) return n;
    throw std::runtime_error("level not in tree");
}

std::vector<std::vector<double>> sample_grids() {
    return {{0.5},
            {0.25, 0.5, 0.75},
            {0.1, 0.25, 0.5, 0.75, 0.9},
            {0.01, 0.05, 0.5},
            {0.1, 0.9},
            {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99},
            {0.3, 0.31, 0.32, 0.33, 0.99, 0.999}};
}

TEST(QuantileGrid, RejectsInvalidLevels) {
    EXPECT_THROW(QuantileGrid(std::vector<double>{}), InvalidInput);
    EXPECT_THROW(QuantileGrid({0.0, 0.5}), InvalidInput);
    EXPECT_THROW(QuantileGrid({0.5, 1.0}), InvalidInput);
    EXPECT_THROW(QuantileGrid({0.5, 0.4}), InvalidInput);
    EXPECT_THROW(QuantileGrid({0.5, 0.5}), InvalidInput);
    EXPECT_THROW(QuantileGrid({std::nan("")}), InvalidInput);
    EXPECT_NO_THROW(QuantileGrid({0.01, 0.99}));
}

TEST(ObliqueTree, SingleLevel) {
    const auto tree = build_oblique_tree(QuantileGrid({0.5}));
    ASSERT_EQ(tree.nodes.size(), 1u);
    EXPECT_EQ(tree.nodes[0].depth, 1);
    EXPECT_EQ(tree.nodes[0].left_level, 0.0);
    EXPECT_EQ(tree.nodes[0].right_level, 1.0);
    EXPECT_EQ(tree.depth, 1);
}

TEST(ObliqueTree, DyadicGrid) {
    const auto tree = build_oblique_tree(QuantileGrid({0.25, 0.5, 0.75}));
    EXPECT_EQ(generation_levels(tree), (std::vector<double>{0.5, 0.25, 0.75}));
    EXPECT_EQ(tree.depth, 2);
    const auto& q = node_at(tree, 0.25);
    EXPECT_EQ(q.left_level, 0.0);
    EXPECT_EQ(q.right_level, 0.5);
    EXPECT_EQ(q.depth, 2);
}

TEST(ObliqueTree, EvenSublistTakesSmallerMiddle) {
    const auto tree = build_oblique_tree(QuantileGrid({0.1, 0.25, 0.5, 0.75, 0.9}));
    EXPECT_EQ(generation_levels(tree), (std::vector<double>{0.5, 0.1, 0.75, 0.25, 0.9}));
    const auto& q = node_at(tree, 0.25);
    EXPECT_EQ(q.left_level, 0.1);
    EXPECT_EQ(q.right_level, 0.5);
    EXPECT_EQ(q.depth, 3);
    EXPECT_EQ(tree.depth, 3);
}

TEST(ObliqueTree, EvenRootTakesSmallerMiddle) {
    const auto tree = build_oblique_tree(QuantileGrid({0.1, 0.2, 0.3, 0.4}));
    EXPECT_EQ(tree.nodes.front().level, 0.2);
}

TEST(ObliqueTree, StructuralInvariants) {
    for (const auto& levels : sample_grids()) {
        const QuantileGrid grid(levels);
        const auto tree = build_oblique_tree(grid);
        ASSERT_EQ(tree.nodes.size(), grid.size());
        EXPECT_EQ(tree.depth, static_cast<int>(std::ceil(std::log2(grid.size() + 1.0))));
        std::vector<bool> placed(grid.size(), false);
        for (const auto& n : tree.nodes) {
            EXPECT_EQ(grid[n.index], n.level);
            EXPECT_LT(n.left_level, n.level);
            EXPECT_LT(n.level, n.right_level);
            // Ancestors are boundaries or already placed, and nothing placed lies between them.
            if (n.left_index != kBoundary) {
                EXPECT_TRUE(placed[n.left_index]);
                EXPECT_EQ(grid[n.left_index], n.left_level);
            } else {
                EXPECT_EQ(n.left_level, 0.0);
            }
            if (n.right_index != kBoundary) {
                EXPECT_TRUE(placed[n.right_index]);
                EXPECT_EQ(grid[n.right_index], n.right_level);
            } else {
                EXPECT_EQ(n.right_level, 1.0);
            }
            for (std::size_t k = 0; k < grid.size(); ++k)
                if (placed[k]) EXPECT_FALSE(grid[k] > n.left_level && grid[k] < n.right_level);
            placed[n.index] = true;
        }
    }
}

TEST(ExpectedSplit, Examples) {
    PyramidNode n;
    n.level = 0.5;
    EXPECT_DOUBLE_EQ(expected_split(n), 0.5);
    n.level = 0.05;
    n.left_level = 0.01;
    n.right_level = 0.5;
    EXPECT_NEAR(expected_split(n), 0.04 / 0.49, 1e-15);
    EXPECT_NEAR(expected_split(n), 0.081633, 1e-6);
    n.level = 0.75;
    n.left_level = 0.5;
    n.right_level = 1.0;
    EXPECT_DOUBLE_EQ(expected_split(n), 0.5);
}

PyramidTree one_node(int depth, double level, double left, double right) {
    PyramidTree tree;
    tree.grid = QuantileGrid({level});
    PyramidNode n;
    n.depth = depth;
    n.level = level;
    n.left_level = left;
    n.right_level = right;
    tree.nodes.push_back(n);
    tree.depth = depth;
    return assign_beta_params(tree);
}

TEST(BetaParams, Examples) {
    auto a = one_node(1, 0.5, 0.0, 1.0).nodes[0];
    EXPECT_DOUBLE_EQ(a.alpha, 2.0);
    EXPECT_DOUBLE_EQ(a.beta, 2.0);
    auto b = one_node(2, 0.25, 0.0, 1.0).nodes[0];
    EXPECT_DOUBLE_EQ(b.alpha, 4.0);
    EXPECT_DOUBLE_EQ(b.beta, 12.0);
    auto c = one_node(3, 0.8, 0.0, 1.0).nodes[0];
    EXPECT_DOUBLE_EQ(c.beta, 6.0);
    EXPECT_NEAR(c.alpha, 24.0, 1e-12);
}

TEST(BetaParams, MeanMatchesExpectedSplitAndScheduleKnob) {
    for (const auto& levels : sample_grids()) {
        for (double per_level : {1.0, 2.0, 5.0}) {
            const auto tree = make_pyramid(QuantileGrid(levels), BetaSchedule{per_level});
            for (const auto& n : tree.nodes) {
                EXPECT_NEAR(n.alpha / (n.alpha + n.beta), expected_split(n), 1e-14);
                EXPECT_DOUBLE_EQ(std::min(n.alpha, n.beta), per_level * n.depth);
                EXPECT_NEAR(n.log_beta_fn, std::lgamma(n.alpha) + std::lgamma(n.beta) - std::lgamma(n.alpha + n.beta),
                            1e-12);
            }
        }
    }
}

TEST(UnitPyramid, ForcedSplits) {
    const auto single = make_pyramid(QuantileGrid({0.5}));
    EXPECT_EQ(unit_quantiles_from_splits(single, std::vector<double>{0.37}), std::vector<double>{0.37});

    const auto dyadic = make_pyramid(QuantileGrid({0.25, 0.5, 0.75}));
    const auto q = unit_quantiles_from_splits(dyadic, std::vector<double>{0.6, 0.5, 0.5});
    EXPECT_DOUBLE_EQ(q[0], 0.3);
    EXPECT_DOUBLE_EQ(q[1], 0.6);
    EXPECT_DOUBLE_EQ(q[2], 0.8);
}

TEST(UnitPyramid, SplitsAtMeansReproduceGrid) {
    for (const auto& levels : sample_grids()) {
        const auto tree = make_pyramid(QuantileGrid(levels));
        std::vector<double> means;
        for (const auto& n : tree.nodes) means.push_back(n.alpha / (n.alpha + n.beta));
        const auto q = unit_quantiles_from_splits(tree, means);
        for (std::size_t t = 0; t < levels.size(); ++t) EXPECT_NEAR(q[t], levels[t], 1e-14);
    }
}

TEST(UnitPyramid, SamplesAreStrictlyMonotone) {
    for (const auto& levels : sample_grids()) {
        const auto tree = make_pyramid(QuantileGrid(levels));
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng rng = make_stream(seed, 3);
            for (int draw = 0; draw < 500; ++draw) {
                const auto q = sample_unit_pyramid(tree, rng);
                ASSERT_GT(q.front(), 0.0);
                ASSERT_LT(q.back(), 1.0);
                for (std::size_t t = 1; t < q.size(); ++t) ASSERT_GT(q[t], q[t - 1]);
            }
        }
    }
}

TEST(UnitPyramid, MonteCarloCentring) {
    const QuantileGrid grid({0.01, 0.05, 0.1, 0.5, 0.75, 0.9, 0.99});
    const auto tree = make_pyramid(grid);
    Rng rng = make_stream(11, 0);
    const int draws = 100000;
    std::vector<double> sum(grid.size(), 0.0), sumsq(grid.size(), 0.0);
    for (int d = 0; d < draws; ++d) {
        const auto q = sample_unit_pyramid(tree, rng);
        for (std::size_t t = 0; t < q.size(); ++t) {
            sum[t] += q[t];
            sumsq[t] += q[t] * q[t];
        }
    }
    for (std::size_t t = 0; t < grid.size(); ++t) {
        const double mean = sum[t] / draws;
        const double se = std::sqrt((sumsq[t] / draws - mean * mean) / draws);
        EXPECT_LT(std::fabs(mean - grid[t]), 3.0 * se + 1e-12) << "level " << grid[t];
    }
}

TEST(UnitPyramid, SingleNodeMatchesBetaByKs) {
    for (double level : {0.5, 0.1, 0.9}) {
        const auto tree = make_pyramid(QuantileGrid({level}));
        const auto& n = tree.nodes[0];
        boost::math::beta_distribution<> dist(n.alpha, n.beta);
        Rng rng = make_stream(5, static_cast<std::uint64_t>(level * 100));
        std::vector<double> s(100000);
        for (auto& v : s) v = sample_unit_pyramid(tree, rng)[0];
        const double d = testing::ks_statistic(s, [&](double x) { return boost::math::cdf(dist, x); });
        EXPECT_GT(testing::ks_pvalue(d, s.size()), 1e-3) << "level " << level;
    }
}

TEST(UnitPrior, Examples) {
    auto flat = make_pyramid(QuantileGrid({0.5}), BetaSchedule{0.5});
    flat.nodes[0].alpha = flat.nodes[0].beta = 1.0;
    flat.nodes[0].log_beta_fn = 0.0;
    EXPECT_NEAR(unit_prior_logdensity(flat, std::vector<double>{0.3}), 0.0, 1e-15);

    const auto single = make_pyramid(QuantileGrid({0.5}));
    EXPECT_NEAR(unit_prior_logdensity(single, std::vector<double>{0.5}), std::log(1.5), 1e-14);

    const auto dyadic = make_pyramid(QuantileGrid({0.25, 0.5, 0.75}), BetaSchedule{1.0});
    // Beta(2,2) everywhere requires per-level 1 at depth 2 and per-level 2 at depth 1; set directly.
    auto tree = make_pyramid(QuantileGrid({0.25, 0.5, 0.75}));
    for (auto& n : tree.nodes) {
        n.alpha = n.beta = 2.0;
        n.log_beta_fn = std::lgamma(2.0) * 2 - std::lgamma(4.0);
    }
    const auto fb = [](double v) { return 6.0 * v * (1.0 - v); };
    const double expected = std::log(fb(0.6)) + std::log(fb(0.5) / 0.6) + std::log(fb(0.5) / 0.4);
    EXPECT_NEAR(unit_prior_logdensity(tree, std::vector<double>{0.3, 0.6, 0.8}), expected, 1e-13);
    (void)dyadic;
}

TEST(UnitPrior, InvalidInputGivesMinusInfinity) {
    const auto tree = make_pyramid(QuantileGrid({0.25, 0.5, 0.75}));
    const double ninf = -std::numeric_limits<double>::infinity();
    EXPECT_EQ(unit_prior_logdensity(tree, std::vector<double>{0.3, 0.2, 0.8}), ninf);
    EXPECT_EQ(unit_prior_logdensity(tree, std::vector<double>{0.3, 0.3, 0.8}), ninf);
    EXPECT_EQ(unit_prior_logdensity(tree, std::vector<double>{0.0, 0.5, 0.8}), ninf);
    EXPECT_EQ(unit_prior_logdensity(tree, std::vector<double>{0.1, 0.5, 1.0}), ninf);
}

// Integrates exp(unit_prior_logdensity) over the ordered simplex in generation order.
double integrate_prior(const PyramidTree& tree) {
    std::vector<double> q(tree.grid.size(), 0.0);
    std::function<double(std::size_t)> step = [&](std::size_t k) -> double {
        if (k == tree.nodes.size()) return std::exp(unit_prior_logdensity(tree, q));
        const auto& n = tree.nodes[k];
        const double lo = n.left_index == kBoundary ? 0.0 : q[n.left_index];
        const double hi = n.right_index == kBoundary ? 1.0 : q[n.right_index];
        return testing::integrate(
            [&](double v) {
                q[n.index] = v;
                return step(k + 1);
            },
            lo, hi, 1e-10);
    };
    return step(0);
}

TEST(UnitPrior, IntegratesToOneOnSmallTrees) {
    for (const auto& levels : std::vector<std::vector<double>>{
             {0.5}, {0.2}, {0.3, 0.6}, {0.25, 0.5, 0.75}, {0.01, 0.05, 0.5}, {0.1, 0.5, 0.9}}) {
        EXPECT_NEAR(integrate_prior(make_pyramid(QuantileGrid(levels))), 1.0, 1e-4);
    }
}

}  // namespace
}  // namespace pqr
