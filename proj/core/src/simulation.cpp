#include "pqr/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "pqr/checkloss.hpp"
#include "pqr/errors.hpp"
#include "pqr/model.hpp"
#include "pqr/random.hpp"
#include "pqr/summary.hpp"

namespace pqr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void DesignSpec::validate() const {
    if (design < 1 || design > 4) throw InvalidInput("design must be 1, 2, 3 or 4");
    if (n < 1) throw InvalidInput("sample size must be at least 1");
    if (replicates < 1) throw InvalidInput("replicate count must be at least 1");
    QuantileGrid check(taus);
    (void)check;
}

Index design_dimension(int design) {
    if (design < 1 || design > 4) throw InvalidInput("design must be 1, 2, 3 or 4");
    return design == 4 ? 5 : 1;
}

double true_coefficient(int design, Index j, double tau) {
    if (j < 0 || j > design_dimension(design)) throw InvalidInput("coefficient index out of range");
    switch (design) {
        case 1:
            return j == 0 ? std::log(tau / (1.0 - tau)) : 2.0;
        case 2:
            if (j == 1) return 2.0 * tau;
            return (tau < 0.5 ? 1.0 : tau > 0.5 ? -1.0 : 0.0) * std::log(1.0 - 2.0 * std::fabs(0.5 - tau));
        case 3:
            return j == 0 ? normal_quantile(tau) : 2.0 * std::min(tau - 0.5, 0.0);
        default:
            switch (j) {
                case 0: return 2.0 * normal_quantile(tau);
                case 1: return 2.0 * std::min(tau - 0.5, 0.0);
                case 2: return 2.0 * tau;
                case 3: return 2.0;
                case 4: return 1.0;
                default: return 0.0;
            }
    }
}

double design_response(int design, const VectorXd& x, double u) {
    const Index dim = design_dimension(design);
    if (x.size() != dim) throw InvalidInput("covariate vector does not match the design");
    double y = true_coefficient(design, 0, u);
    for (Index j = 0; j < dim; ++j) y += x(j) * true_coefficient(design, j + 1, u);
    return y;
}

Dataset generate_design(const DesignSpec& spec, std::size_t replicate) {
    spec.validate();
    Rng rng = make_stream(spec.seed, replicate);
    const Index dim = design_dimension(spec.design);
    MatrixXd x(spec.n, dim);
    VectorXd y(spec.n);
    for (Index i = 0; i < spec.n; ++i) {
        for (Index j = 0; j < dim; ++j) x(i, j) = 2.0 * uniform_open(rng) - 1.0;
        const double u = uniform_open(rng);
        y(i) = design_response(spec.design, x.row(i).transpose(), u);
    }
    return make_dataset(std::move(y), std::move(x));
}

double rmse(std::span<const double> estimates, double truth) {
    if (estimates.empty()) throw InvalidInput("RMSE of no estimates");
    double ss = 0.0;
    for (double e : estimates) ss += (e - truth) * (e - truth);
    return std::sqrt(ss / static_cast<double>(estimates.size()));
}

double coverage(std::span<const std::pair<double, double>> intervals, double truth) {
    if (intervals.empty()) throw InvalidInput("coverage of an empty interval set");
    std::size_t hits = 0;
    for (const auto& [lo, hi] : intervals)
        if (lo <= truth && truth <= hi) ++hits;
    return static_cast<double>(hits) / static_cast<double>(intervals.size());
}

namespace {

ReplicateResult run_replicate(const BenchConfig& config, std::size_t replicate) {
    const auto start = std::chrono::steady_clock::now();
    const DesignSpec& spec = config.design;
    const Dataset data = generate_design(spec, replicate);
    const QuantileGrid grid(spec.taus);
    const QuantileModel model = make_linear_model(data, ModelSpec::make(grid, config.centering));

    McmcConfig mcmc = config.mcmc;
    Rng seeder = make_stream(config.mcmc.seed, replicate);
    mcmc.seed = seeder();
    const PosteriorSamples samples = run_chain(model, mcmc);
    const auto table = summarize(samples.states, data.frame, grid, config.credibility);

    const Index levels = static_cast<Index>(grid.size());
    const Index coefs = data.dimension() + 1;
    ReplicateResult out;
    out.replicate = replicate;
    out.posterior_mean.resize(levels, coefs);
    out.lower.resize(levels, coefs);
    out.upper.resize(levels, coefs);
    for (const auto& row : table) {
        out.posterior_mean(row.level, row.coefficient) = row.stats.mean;
        out.lower(row.level, row.coefficient) = row.stats.lower;
        out.upper(row.level, row.coefficient) = row.stats.upper;
    }
    if (config.checkloss_baseline) {
        out.checkloss.resize(levels, coefs);
        for (Index t = 0; t < levels; ++t)
            out.checkloss.row(t) = checkloss_fit(data.y, data.x, grid[static_cast<std::size_t>(t)]).transpose();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace

BenchReport run_bench(const BenchConfig& config) {
    config.design.validate();
    config.mcmc.validate();
    const auto start = std::chrono::steady_clock::now();
    const std::size_t count = config.design.replicates;

    BenchReport report;
    report.config = config;
    report.replicates.resize(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < count; r = next++) {
            try {
                report.replicates[r] = run_replicate(config, r);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(config.threads, 1, count);
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    const auto& taus = config.design.taus;
    const Index coefs = design_dimension(config.design.design) + 1;
    std::vector<double> est(count);
    std::vector<std::pair<double, double>> intervals(count);
    for (const std::string method : {"pqr", "checkloss"}) {
        if (method == "checkloss" && !config.checkloss_baseline) continue;
        for (std::size_t t = 0; t < taus.size(); ++t) {
            for (Index j = 0; j < coefs; ++j) {
                const double truth = true_coefficient(config.design.design, j, taus[t]);
                for (std::size_t r = 0; r < count; ++r) {
                    const ReplicateResult& rep = report.replicates[r];
                    const auto ti = static_cast<Index>(t);
                    est[r] = method == "pqr" ? rep.posterior_mean(ti, j) : rep.checkloss(ti, j);
                    intervals[r] = {rep.lower(ti, j), rep.upper(ti, j)};
                }
                BenchRow row;
                row.method = method;
                row.tau = taus[t];
                row.coefficient = j;
                row.truth = truth;
                double sum = 0.0;
                for (double e : est) sum += e;
                row.mean_estimate = sum / static_cast<double>(count);
                row.rmse100 = 100.0 * rmse(est, truth);
                row.coverage = method == "pqr" ? coverage(intervals, truth) : std::numeric_limits<double>::quiet_NaN();
                report.rows.push_back(row);
            }
        }
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace pqr
