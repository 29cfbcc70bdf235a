#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <cmath>
#include <random>

#include <Eigen/LU>

#include "oracles.hpp"
#include "pqr/errors.hpp"
#include "pqr/sampler.hpp"
#include "pqr/simulation.hpp"
#include "pqr/summary.hpp"

namespace pqr {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

McmcConfig short_config(std::size_t iterations, std::uint64_t seed = 1) {
    McmcConfig c;
    c.iterations = iterations;
    c.burn_in = iterations / 4;
    c.thin = 5;
    c.seed = seed;
    return c;
}

Dataset design_data(int design, Index n, std::uint64_t seed) {
    DesignSpec s;
    s.design = design;
    s.n = n;
    s.seed = seed;
    return generate_design(s, 0);
}

std::vector<double> slope_draws(const PosteriorSamples& post, const PivotFrame& frame, Index t, Index j) {
    const MatrixXd trace = coefficient_trace(post.states, frame, t);
    return {trace.col(j).data(), trace.col(j).data() + trace.rows()};
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Batch-means standard error of the mean of a correlated chain.
double batch_se(const std::vector<double>& v) {
    const std::size_t batches = 20;
    const std::size_t len = v.size() / batches;
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b)
        means.push_back(mean_of({v.begin() + static_cast<long>(b * len), v.begin() + static_cast<long>((b + 1) * len)}));
    return sd_of(means) / std::sqrt(static_cast<double>(batches));
}

TEST(McmcConfig, Validation) {
    McmcConfig c;
    EXPECT_NO_THROW(c.validate());
    c.burn_in = c.iterations;
    EXPECT_THROW(c.validate(), InvalidInput);
    c = {};
    c.thin = 0;
    EXPECT_THROW(c.validate(), InvalidInput);
    c = {};
    c.quantile_step = 0.0;
    EXPECT_THROW(c.validate(), InvalidInput);
    c = {};
    c.log_scale_step = std::nan("");
    EXPECT_THROW(c.validate(), InvalidInput);
    c = {};
    c.target_acceptance = 1.0;
    EXPECT_THROW(c.validate(), InvalidInput);
}

TEST(Reparam, Examples) {
    const std::vector<double> q{1.0, 3.0};
    const auto theta = reparam_forward(q, 4.0);
    EXPECT_DOUBLE_EQ(theta[0], std::log(2.0));
    EXPECT_DOUBLE_EQ(theta[1], std::log(8.0));
    const auto back = reparam_inverse(theta, 4.0);
    EXPECT_NEAR(back[0], 1.0, 1e-14);
    EXPECT_NEAR(back[1], 3.0, 1e-14);
    EXPECT_DOUBLE_EQ(reparam_forward(std::vector<double>{0.7}, 2.0)[0], std::log(3.4));
    EXPECT_THROW(reparam_forward(std::vector<double>{1.0, 1.0}, 4.0), InvalidInput);
    EXPECT_THROW(reparam_forward(std::vector<double>{-5.0, -4.0}, 4.0), InvalidInput);
}

TEST(Reparam, BijectionAndJacobian) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t levels = 1 + rep % 6;
        std::vector<double> q(levels);
        double v = g(rng);
        for (auto& x : q) x = v += 0.01 + std::fabs(g(rng));
        const double c = 2.0 * std::fabs(q.front()) + std::fabs(q.back()) + 1.0;
        const auto back = reparam_inverse(reparam_forward(q, c), c);
        for (std::size_t t = 0; t < levels; ++t) EXPECT_NEAR(back[t], q[t], 1e-10 * (1.0 + std::fabs(q[t])));
        // Finite-difference log|det dq/dtheta| agrees with the closed form up to the constant -log 2.
        auto theta = reparam_forward(q, c);
        MatrixXd jac(static_cast<Index>(levels), static_cast<Index>(levels));
        for (std::size_t k = 0; k < levels; ++k) {
            const double h = 1e-6;
            auto up = theta, dn = theta;
            up[k] += h;
            dn[k] -= h;
            const auto qu = reparam_inverse(up, c), qd = reparam_inverse(dn, c);
            for (std::size_t t = 0; t < levels; ++t)
                jac(static_cast<Index>(t), static_cast<Index>(k)) = (qu[t] - qd[t]) / (2.0 * h);
        }
        const double numeric = std::log(std::fabs(jac.determinant()));
        const double closed = reparam_log_jacobian(q, c);
        EXPECT_NEAR(numeric - closed, -std::log(2.0), 1e-5) << levels;
    }
}

TEST(Reparam, OffsetKeepsStateRepresentable) {
    VectorXd y(3);
    y << -2.0, 1.0, 4.0;
    RegressionState s = RegressionState::zeros(2, 2);
    s.quantiles << -3.0, -1.0, -9.0, -8.0;
    const double c = reparam_offset(y, s);
    EXPECT_GE(c, 4.0);
    for (Index p = 0; p < 2; ++p) EXPECT_GT(s.quantiles(p, 0) + s.quantiles(p, 1) + c, 0.0);
}

TEST(InitializeState, StandardNormalInterceptModel) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    VectorXd y(4000);
    for (Index i = 0; i < y.size(); ++i) y(i) = g(rng);
    const QuantileGrid grid({0.1, 0.5, 0.9});
    const auto model = make_linear_model(make_dataset(y, MatrixXd(y.size(), 0)), ModelSpec::make(grid));
    const auto s = initialize_state(model);
    EXPECT_NEAR(s.location(0), 0.0, 0.1);
    EXPECT_NEAR(s.scale(0), 1.0, 0.1);
    for (Index t = 0; t < 3; ++t)
        EXPECT_NEAR(s.quantiles(0, t), s.location(0) + s.scale(0) * normal_quantile(grid[static_cast<std::size_t>(t)]),
                    1e-12);
    EXPECT_TRUE(std::isfinite(model.log_posterior(s)));
}

TEST(InitializeState, FeasibleOnEveryDesignAndWithOutliers) {
    for (int design = 1; design <= 4; ++design) {
        auto data = design_data(design, 150, 3);
        const auto model = make_linear_model(data, ModelSpec::make(QuantileGrid({0.01, 0.05, 0.5, 0.95})));
        EXPECT_TRUE(std::isfinite(model.log_posterior(initialize_state(model)))) << design;
        data.y(0) = 1e6;
        data.y(1) = -1e5;
        const auto adversarial = make_linear_model(data, ModelSpec::make(QuantileGrid({0.01, 0.05, 0.5, 0.95})));
        EXPECT_TRUE(std::isfinite(adversarial.log_posterior(initialize_state(adversarial)))) << design;
    }
    VectorXd y(60);
    MatrixXd x(60, 1);
    std::mt19937_64 rng(1);
    for (Index i = 0; i < 60; ++i) {
        x(i, 0) = i;
        y(i) = 96.0 + std::exponential_distribution<double>(0.2)(rng);
    }
    const auto gpd = make_linear_model(make_dataset(y, x),
                                       ModelSpec::make(QuantileGrid({0.25, 0.5, 0.9}), CenteringKind::Gpd, 96.0));
    EXPECT_TRUE(std::isfinite(gpd.log_posterior(initialize_state(gpd))));
}

TEST(RunChain, RejectsInfeasibleStart) {
    const auto data = design_data(1, 50, 2);
    const auto model = make_linear_model(data, ModelSpec::make(QuantileGrid({0.25, 0.75})));
    RegressionState s = RegressionState::zeros(2, 2);
    s.quantiles << 1.0, 0.0, 1.0, 2.0;
    EXPECT_THROW(run_chain(model, short_config(100), s), InitializationError);
}

TEST(RunChain, DeterministicAndSeedSensitive) {
    const auto data = design_data(2, 80, 4);
    const auto model = make_linear_model(data, ModelSpec::make(QuantileGrid({0.1, 0.5, 0.9})));
    for (auto mode : {UpdateMode::CoordinateUniform, UpdateMode::Reparametrized}) {
        auto cfg = short_config(800, 11);
        cfg.mode = mode;
        const auto a = run_chain(model, cfg);
        const auto b = run_chain(model, cfg);
        ASSERT_EQ(a.size(), b.size());
        EXPECT_EQ(a.states, b.states);
        EXPECT_EQ(a.log_posterior, b.log_posterior);
        cfg.seed = 12;
        const auto c = run_chain(model, cfg);
        EXPECT_NE(a.states, c.states);
    }
}

TEST(RunChain, StoredStatesFeasibleWithExactLogPosterior) {
    struct Case {
        int design;
        CenteringKind kind;
        std::optional<UpdateMode> mode;
    };
    for (const Case& c : {Case{1, CenteringKind::Normal, UpdateMode::Reparametrized},
                          Case{3, CenteringKind::Normal, UpdateMode::CoordinateUniform},
                          Case{4, CenteringKind::Normal, std::nullopt}}) {
        const auto data = design_data(c.design, 120, 5);
        const auto model = make_linear_model(data, ModelSpec::make(QuantileGrid({0.05, 0.5, 0.95}), c.kind));
        auto cfg = short_config(1000, 3);
        cfg.mode = c.mode;
        const auto post = run_chain(model, cfg);
        EXPECT_EQ(post.size(), 150u);
        for (std::size_t s = 0; s < post.size(); ++s) {
            ASSERT_TRUE(model.feasible(post.states[s]));
            ASSERT_EQ(post.log_posterior[s], model.log_posterior(post.states[s]));
        }
        EXPECT_EQ(post.mode, c.mode.value_or(UpdateMode::CoordinateUniform));
    }
}

TEST(RunChain, DefaultModeFollowsPivotCount) {
    const auto one = make_linear_model(design_data(1, 40, 1), ModelSpec::make(QuantileGrid({0.5})));
    EXPECT_EQ(run_chain(one, short_config(200)).mode, UpdateMode::Reparametrized);
    const auto four = make_linear_model(design_data(4, 60, 1), ModelSpec::make(QuantileGrid({0.5})));
    EXPECT_EQ(run_chain(four, short_config(200)).mode, UpdateMode::CoordinateUniform);
}

TEST(RunChain, ReparamNeverCrossesOnTwoPivots) {
    const auto data = design_data(2, 200, 6);
    const auto model = make_linear_model(data, ModelSpec::make(QuantileGrid({0.05, 0.25, 0.5, 0.75, 0.95})));
    auto cfg = short_config(3000, 4);
    cfg.thin = 1;
    const auto post = run_chain_reparam(model, cfg);
    EXPECT_GT(post.reparam_offset, 0.0);
    for (const auto& s : post.states) ASSERT_TRUE(noncrossing_at(s, model.check_weights()));
}

TEST(RunChain, GpdChainKeepsSupport) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    VectorXd y(150);
    MatrixXd x(150, 1);
    for (Index i = 0; i < 150; ++i) {
        x(i, 0) = u(rng);
        y(i) = CenteringDistribution::gpd(96.0, 5.0 + 5.0 * x(i, 0), 0.1).quantile(u(rng));
    }
    const auto model =
        make_linear_model(make_dataset(y, x), ModelSpec::make(QuantileGrid({0.5, 0.9}), CenteringKind::Gpd, 96.0));
    const auto post = run_chain(model, short_config(2000, 9));
    for (std::size_t s = 0; s < post.size(); ++s) {
        ASSERT_TRUE(model.feasible(post.states[s]));
        ASSERT_GT(post.states[s].quantiles.minCoeff(), 96.0);
    }
}

TEST(RunChain, AcceptanceRatesAfterAdaptation) {
    const auto data = design_data(1, 300, 7);
    const auto model = make_linear_model(data, ModelSpec::make(QuantileGrid({0.1, 0.5, 0.9})));
    for (auto mode : {UpdateMode::CoordinateUniform, UpdateMode::Reparametrized}) {
        auto cfg = short_config(6000, 5);
        cfg.burn_in = 3000;
        cfg.mode = mode;
        const auto post = run_chain(model, cfg);
        const auto& a = post.acceptance;
        const auto check = [&](double r) {
            EXPECT_GE(r, 0.1) << to_string(mode);
            EXPECT_LE(r, 0.6) << to_string(mode);
        };
        for (Index i = 0; i < a.location.size(); ++i) check(a.location(i));
        for (Index i = 0; i < a.scale.size(); ++i) check(a.scale(i));
        if (mode == UpdateMode::Reparametrized)
            for (Index i = 0; i < a.quantiles.size(); ++i) check(a.quantiles(i));
        else
            for (Index i = 0; i < a.quantiles.size(); ++i) EXPECT_GT(a.quantiles(i), 0.1);
    }
}

TEST(RunChain, ZeroDataReproducesPriorMedian) {
    const auto model =
        make_linear_model(make_dataset(VectorXd(0), MatrixXd(0, 0)), ModelSpec::make(QuantileGrid({0.5})));
    RegressionState start = RegressionState::zeros(1, 1);
    start.location << 3.0;
    start.scale << 2.0;
    start.quantiles << 3.0;
    auto cfg = short_config(40000, 13);
    cfg.update_centering = false;
    cfg.mode = UpdateMode::CoordinateUniform;
    const auto post = run_chain(model, cfg, start);
    std::vector<double> below;
    for (const auto& s : post.states) below.push_back(s.quantiles(0, 0) < 3.0 ? 1.0 : 0.0);
    EXPECT_NEAR(mean_of(below), 0.5, 4.0 * batch_se(below));
}

TEST(RunChain, ModesAgreeOnDesignOne) {
    const auto data = design_data(1, 300, 10);
    const auto model = make_linear_model(data, ModelSpec::make(QuantileGrid({0.1, 0.5, 0.9})));
    auto cfg = short_config(12000, 21);
    cfg.burn_in = 3000;
    cfg.mode = UpdateMode::CoordinateUniform;
    const auto a = slope_draws(run_chain(model, cfg), data.frame, 1, 1);
    cfg.mode = UpdateMode::Reparametrized;
    const auto b = slope_draws(run_chain(model, cfg), data.frame, 1, 1);
    const double se = std::hypot(batch_se(a), batch_se(b));
    EXPECT_LT(std::fabs(mean_of(a) - mean_of(b)), 3.0 * se) << mean_of(a) << " vs " << mean_of(b);
}

TEST(RunChain, DesignOneSlopeRecovered) {
    const auto data = design_data(1, 500, 14);
    const auto model = make_linear_model(data, ModelSpec::make(QuantileGrid({0.1, 0.5, 0.9})));
    auto cfg = short_config(20000, 15);
    cfg.burn_in = 5000;
    const auto draws = slope_draws(run_chain(model, cfg), data.frame, 1, 1);
    EXPECT_LT(std::fabs(mean_of(draws) - 2.0), 3.0 * sd_of(draws));
}

TEST(RunChains, IndependentSeedsConverge) {
    const auto data = design_data(1, 200, 16);
    const auto model = make_linear_model(data, ModelSpec::make(QuantileGrid({0.25, 0.5, 0.75})));
    auto cfg = short_config(8000, 17);
    cfg.burn_in = 2000;
    const auto chains = run_chains(model, cfg, 4, 2);
    ASSERT_EQ(chains.size(), 4u);
    EXPECT_NE(chains[0].states, chains[1].states);
    for (Index t = 0; t < 3; ++t) {
        for (Index j = 0; j < 2; ++j) {
            std::vector<std::vector<double>> traces;
            for (const auto& c : chains) traces.push_back(slope_draws(c, data.frame, t, j));
            EXPECT_LT(gelman_rubin(traces), 1.05) << "level " << t << " coefficient " << j;
        }
    }
    const auto again = run_chains(model, cfg, 4, 1);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(again[c].states, chains[c].states);
}

TEST(GelmanRubin, Basics) {
    EXPECT_THROW(gelman_rubin({{1.0, 2.0}}), InvalidInput);
    EXPECT_THROW(gelman_rubin({{1.0, 2.0}, {1.0}}), InvalidInput);
    EXPECT_NEAR(gelman_rubin({{1.0, 2.0, 3.0, 4.0}, {4.0, 3.0, 2.0, 1.0}}), std::sqrt(0.75), 1e-12);
    EXPECT_GT(gelman_rubin({{0.0, 0.1, 0.0, 0.1}, {5.0, 5.1, 5.0, 5.1}}), 10.0);
}

TEST(RunChain, UniformCenteringPriorRecovery) {
    // Beta(2,2) root on the unit interval, with a narrow window so that proposals are clipped.
    const auto model = make_linear_model(make_dataset(VectorXd(0), MatrixXd(0, 0)),
                                         ModelSpec::make(QuantileGrid({0.5}), CenteringKind::Uniform));
    auto cfg = short_config(60000, 19);
    cfg.burn_in = 5000;
    cfg.thin = 10;
    cfg.quantile_step = 0.3;
    cfg.mode = UpdateMode::CoordinateUniform;
    const auto post = run_chain(model, cfg);
    std::vector<double> q;
    for (const auto& s : post.states) q.push_back(s.quantiles(0, 0));
    boost::math::beta_distribution<> dist(2.0, 2.0);
    const double d = testing::ks_statistic(q, [&](double v) { return boost::math::cdf(dist, v); });
    EXPECT_GT(testing::ks_pvalue(d, q.size()), 1e-3) << "D = " << d;
}

}  // namespace
}  // namespace pqr
