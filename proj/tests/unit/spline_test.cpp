#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pqr/errors.hpp"
#include "pqr/spline.hpp"

namespace pqr {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST(SplineKnots, Validation) {
    EXPECT_THROW(SplineKnots({1.0}), InvalidInput);
    EXPECT_THROW(SplineKnots({0.0, 0.0}), InvalidInput);
    EXPECT_THROW(SplineKnots({1.0, 0.0}), InvalidInput);
    EXPECT_THROW(SplineKnots({0.0, std::nan("")}), InvalidInput);
    EXPECT_THROW(SplineKnots::equally_spaced(0.0, 1.0, 1), InvalidInput);
    EXPECT_THROW(SplineKnots::equally_spaced(1.0, 1.0, 3), InvalidInput);
}

TEST(SplineKnots, EquallySpacedGrid) {
    const auto k = SplineKnots::equally_spaced(390.0, 720.0, 7);
    ASSERT_EQ(k.size(), 7u);
    EXPECT_EQ(k[0], 390.0);
    EXPECT_EQ(k[6], 720.0);
    for (std::size_t j = 1; j < 7; ++j) EXPECT_NEAR(k[j] - k[j - 1], 55.0, 1e-12);
}

TEST(SplineKnots, Weights) {
    const SplineKnots k({0.0, 1.0, 3.0});
    EXPECT_EQ(k.weights(0.0), (VectorXd(3) << 1.0, 0.0, 0.0).finished());
    EXPECT_EQ(k.weights(1.0), (VectorXd(3) << 0.0, 1.0, 0.0).finished());
    EXPECT_EQ(k.weights(3.0), (VectorXd(3) << 0.0, 0.0, 1.0).finished());
    const VectorXd w = k.weights(2.5);
    EXPECT_DOUBLE_EQ(w(1), 0.25);
    EXPECT_DOUBLE_EQ(w(2), 0.75);
    EXPECT_THROW(k.weights(-0.1), InvalidInput);
    EXPECT_THROW(k.weights(3.1), InvalidInput);
}

TEST(SplineQuantiles, Examples) {
    const SplineKnots k({0.0, 2.0});
    RegressionState s = RegressionState::zeros(2, 1);
    s.quantiles << 0.0, 10.0;
    EXPECT_DOUBLE_EQ(spline_quantiles(k, s, 1.0)(0), 5.0);
    EXPECT_EQ(spline_quantiles(k, s, 0.0)(0), 0.0);
    EXPECT_EQ(spline_quantiles(k, s, 2.0)(0), 10.0);
    EXPECT_THROW(spline_quantiles(k, s, 2.5), InvalidInput);
    EXPECT_THROW(spline_quantiles(SplineKnots({0.0, 1.0, 2.0}), s, 0.5), InvalidInput);
}

TEST(SplineQuantiles, ContinuousAcrossKnotsAndExactAtKnots) {
    const auto k = SplineKnots::equally_spaced(-2.0, 5.0, 7);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    RegressionState s = RegressionState::zeros(7, 3);
    for (Index j = 0; j < 7; ++j) {
        double base = 3.0 * g(rng);
        for (Index t = 0; t < 3; ++t) s.quantiles(j, t) = base += 0.1 + std::fabs(g(rng));
    }
    for (std::size_t j = 0; j < 7; ++j) {
        EXPECT_EQ(spline_quantiles(k, s, k[j]), s.quantiles.row(static_cast<Index>(j)).transpose());
        if (j == 0 || j == 6) continue;
        const double eps = 1e-10;
        const VectorXd left = spline_quantiles(k, s, k[j] - eps);
        const VectorXd right = spline_quantiles(k, s, k[j] + eps);
        EXPECT_LT((left - right).cwiseAbs().maxCoeff(), 1e-8);
    }
    for (double x = -2.0; x <= 5.0; x += 0.01) {
        const VectorXd q = spline_quantiles(k, s, x);
        for (Index t = 1; t < 3; ++t) ASSERT_GT(q(t), q(t - 1));
    }
}

TEST(SplineModel, WeightsAndCentering) {
    const SplineKnots k({0.0, 1.0, 2.0});
    VectorXd x(4), y(4);
    x << 0.0, 0.5, 1.5, 2.0;
    y << 1.0, 2.0, 3.0, 4.0;
    const auto model = make_spline_model(y, x, k, ModelSpec::make(QuantileGrid({0.5})));
    EXPECT_EQ(model.pivot_count(), 3);
    EXPECT_EQ(model.constraint_weights().rows(), 0);
    EXPECT_DOUBLE_EQ(model.obs_weights()(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(model.obs_weights()(2, 2), 0.5);
    RegressionState s = RegressionState::zeros(3, 1);
    s.location << 0.0, 2.0, 6.0;
    s.scale << 1.0, 3.0, 1.0;
    const auto c = spline_centering(model.spec(), k, s, 1.5);
    EXPECT_DOUBLE_EQ(c.location, 4.0);
    EXPECT_DOUBLE_EQ(c.scale, 2.0);
    const auto at_obs = model.centering_at(s, 1);
    EXPECT_DOUBLE_EQ(at_obs.location, 1.0);
    EXPECT_THROW(make_spline_model(y, VectorXd::Zero(3), k, ModelSpec::make(QuantileGrid({0.5}))), InvalidInput);
}

}  // namespace
}  // namespace pqr
