#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pqr/centering.hpp"
#include "pqr/dataset.hpp"
#include "pqr/sampler.hpp"

namespace pqr {

/// One of the four simulation designs: y = b_0(u) + sum_j x_j b_j(u) with
/// x_j ~ Unif(-1, 1) and u ~ Unif(0, 1).
struct DesignSpec {
    int design = 1;
    Eigen::Index n = 100;
    std::size_t replicates = 20;
    std::vector<double> taus{0.01, 0.05, 0.5};
    std::uint64_t seed = 1;

    /// Throws InvalidInput unless design is 1..4, n >= 1 and replicates >= 1.
    void validate() const;
};

/// Number of covariates of a design (1 for designs 1-3, 5 for design 4).
Eigen::Index design_dimension(int design);

/// b_j(tau) of a design; j = 0 is the intercept.
double true_coefficient(int design, Eigen::Index j, double tau);

/// Response for covariates x and quantile index u.
double design_response(int design, const Eigen::VectorXd& x, double u);

/// Data of one replicate; reproducible per (spec.seed, replicate).
Dataset generate_design(const DesignSpec& spec, std::size_t replicate);

/// Root mean squared error of estimates against the truth (not scaled).
/// Throws InvalidInput for no estimates.
double rmse(std::span<const double> estimates, double truth);

/// Fraction of closed intervals containing the truth. Throws InvalidInput when empty.
double coverage(std::span<const std::pair<double, double>> intervals, double truth);

struct BenchConfig {
    DesignSpec design;
    McmcConfig mcmc;
    CenteringKind centering = CenteringKind::Normal;
    double credibility = 0.95;
    bool checkloss_baseline = true;
    std::size_t threads = 1;
};

/// Estimates of one replicate, rows = levels, columns = coefficients.
struct ReplicateResult {
    std::size_t replicate = 0;
    Eigen::MatrixXd posterior_mean;
    Eigen::MatrixXd lower;
    Eigen::MatrixXd upper;
    Eigen::MatrixXd checkloss;   // empty when the baseline is off
    double seconds = 0.0;
};

struct BenchRow {
    std::string method;          // "pqr" or "checkloss"
    double tau = 0.0;
    Eigen::Index coefficient = 0;
    double truth = 0.0;
    double mean_estimate = 0.0;
    double rmse100 = 0.0;        // RMSE x 100
    double coverage = 0.0;       // NaN for the baseline, which has no intervals
};

struct BenchReport {
    BenchConfig config;
    std::vector<ReplicateResult> replicates;
    std::vector<BenchRow> rows;  // per method, level, coefficient
    double seconds = 0.0;
};

/// Runs every replicate (at most config.threads at once): a chain on the design
/// data, posterior means and equal-tailed intervals, and the check-loss baseline.
BenchReport run_bench(const BenchConfig& config);

}  // namespace pqr
