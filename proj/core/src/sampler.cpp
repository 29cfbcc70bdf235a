#include "pqr/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "pqr/errors.hpp"
#include "pqr/random.hpp"

namespace pqr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinStep = 1e-10;
constexpr double kMaxStep = 1e10;

double log_uniform(Rng& rng) { return std::log(uniform_open(rng)); }

bool accept(double log_ratio, Rng& rng) {
    if (std::isnan(log_ratio)) return false;
    if (log_ratio >= 0.0) return true;
    return log_uniform(rng) < log_ratio;
}

// Robbins-Monro step on the log scale, applied once per adaptation window.
double adapt(double step, double rate, double target, std::size_t window_index) {
    const double gain = 2.0 / std::sqrt(static_cast<double>(window_index));
    return std::clamp(step * std::exp(gain * (rate - target)), kMinStep, kMaxStep);
}

struct Counter {
    MatrixXd tried;
    MatrixXd taken;

    void reset(Index rows, Index cols) {
        tried = MatrixXd::Zero(rows, cols);
        taken = MatrixXd::Zero(rows, cols);
    }
    void record(Index r, Index c, bool ok) {
        tried(r, c) += 1.0;
        if (ok) taken(r, c) += 1.0;
    }
    [[nodiscard]] double rate(Index r, Index c) const { return tried(r, c) > 0 ? taken(r, c) / tried(r, c) : 0.0; }
    [[nodiscard]] MatrixXd rates() const {
        MatrixXd out = MatrixXd::Zero(tried.rows(), tried.cols());
        for (Index r = 0; r < out.rows(); ++r)
            for (Index c = 0; c < out.cols(); ++c) out(r, c) = rate(r, c);
        return out;
    }
};

enum Param : Index { kLocation = 0, kScale = 1, kShape = 2 };

class Chain {
public:
    Chain(const QuantileModel& model, const McmcConfig& config, RegressionState start, UpdateMode mode)
        : model_(model),
          spec_(model.spec()),
          cfg_(config),
          mode_(mode),
          state_(std::move(start)),
          rng_(make_stream(config.seed, 0)),
          pivots_(model.pivot_count()),
          levels_(model.spec().levels()) {
        if (!std::isfinite(model_.log_posterior(state_)))
            throw InitializationError("starting state has zero posterior density");
        obs_loglik_.resize(static_cast<std::size_t>(model_.size()));
        for (Index i = 0; i < model_.size(); ++i) obs_loglik_[static_cast<std::size_t>(i)] = model_.log_likelihood_obs(state_, i);
        pivot_prior_.resize(static_cast<std::size_t>(pivots_));
        for (Index p = 0; p < pivots_; ++p) pivot_prior_[static_cast<std::size_t>(p)] = model_.log_pivot_prior(state_, p);
        if (!refresh_edges(state_, lower_edge_, upper_edge_))
            throw InitializationError("starting state has a non-positive scale at a constraint point");

        quantile_steps_ = MatrixXd::Constant(pivots_, levels_,
                                             mode_ == UpdateMode::Reparametrized ? cfg_.reparam_step : cfg_.quantile_step);
        centering_steps_.resize(pivots_, 3);
        centering_steps_.col(kLocation).setConstant(cfg_.location_step);
        centering_steps_.col(kScale).setConstant(cfg_.log_scale_step);
        centering_steps_.col(kShape).setConstant(cfg_.shape_step);
        quantile_counts_.reset(pivots_, levels_);
        centering_counts_.reset(pivots_, 3);

        if (mode_ == UpdateMode::Reparametrized) offset_ = reparam_offset(model_.y(), state_);
    }

    PosteriorSamples run() {
        PosteriorSamples out;
        out.mode = mode_;
        out.reparam_offset = offset_;
        const std::size_t kept = (cfg_.iterations - cfg_.burn_in) / cfg_.thin;
        out.states.reserve(kept);
        out.log_posterior.reserve(kept);

        std::size_t window = 0;
        for (std::size_t it = 0; it < cfg_.iterations; ++it) {
            if (it == cfg_.burn_in) {
                quantile_counts_.reset(pivots_, levels_);
                centering_counts_.reset(pivots_, 3);
            }
            sweep();
            if (it < cfg_.burn_in && (it + 1) % cfg_.adapt_window == 0) {
                ++window;
                adapt_steps(window);
            }
            if (it >= cfg_.burn_in && (it - cfg_.burn_in + 1) % cfg_.thin == 0) {
                const double lp = model_.log_posterior(state_);
                if (!std::isfinite(lp)) {
                    std::ostringstream msg;
                    msg << "stored state at iteration " << it << " is infeasible";
                    throw LogicError(msg.str());
                }
                out.states.push_back(state_);
                out.log_posterior.push_back(lp);
            }
        }
        out.acceptance.quantiles = quantile_counts_.rates();
        const MatrixXd centering = centering_counts_.rates();
        out.acceptance.location = centering.col(kLocation);
        out.acceptance.scale = centering.col(kScale);
        out.acceptance.shape = centering.col(kShape);
        return out;
    }

private:
    void sweep() {
        for (Index p = 0; p < pivots_; ++p) {
            for (Index t = 0; t < levels_; ++t) {
                if (mode_ == UpdateMode::Reparametrized)
                    update_theta(p, t);
                else
                    update_quantile(p, t);
            }
        }
        if (!cfg_.update_centering) return;
        for (Index p = 0; p < pivots_; ++p) {
            if (spec_.centering == CenteringKind::Normal) update_location(p);
            if (spec_.centering != CenteringKind::Uniform) update_scale(p);
            if (spec_.centering == CenteringKind::Gpd) update_shape(p);
        }
    }

    void adapt_steps(std::size_t window) {
        const double target = cfg_.target_acceptance;
        for (Index p = 0; p < pivots_; ++p)
            for (Index t = 0; t < levels_; ++t)
                quantile_steps_(p, t) = adapt(quantile_steps_(p, t), quantile_counts_.rate(p, t), target, window);
        for (Index p = 0; p < pivots_; ++p)
            for (Index k = 0; k < 3; ++k)
                if (centering_counts_.tried(p, k) > 0)
                    centering_steps_(p, k) = adapt(centering_steps_(p, k), centering_counts_.rate(p, k), target, window);
        quantile_counts_.reset(pivots_, levels_);
        centering_counts_.reset(pivots_, 3);
    }

    [[nodiscard]] double scale_unit(Index p) const {
        return spec_.centering == CenteringKind::Uniform ? 1.0 : state_.scale(p);
    }

    // Support limits at every check point for the given centering; false if any scale is not positive.
    bool refresh_edges(const RegressionState& s, VectorXd& lower, VectorXd& upper) const {
        const MatrixXd& w = model_.check_weights();
        lower.resize(w.rows());
        upper.resize(w.rows());
        if (spec_.centering == CenteringKind::Normal) {
            const VectorXd scales = w * s.scale;
            if ((scales.array() <= 0.0).any()) return false;
            lower.setConstant(-kInf);
            upper.setConstant(kInf);
            return true;
        }
        for (Index v = 0; v < w.rows(); ++v) {
            const auto dist = make_centering(spec_, centering_at_weights(spec_, s, w.row(v).transpose()));
            if (!dist) return false;
            lower(v) = dist->lower_support();
            upper(v) = dist->upper_support();
        }
        return true;
    }

    // Ordering and support at every check point.
    [[nodiscard]] bool quantiles_ok(const RegressionState& s, const VectorXd& lower, const VectorXd& upper) const {
        const MatrixXd at = model_.check_weights() * s.quantiles;
        for (Index v = 0; v < at.rows(); ++v) {
            if (!(at(v, 0) > lower(v)) || !(at(v, levels_ - 1) < upper(v))) return false;
            for (Index t = 1; t < levels_; ++t)
                if (!(at(v, t) > at(v, t - 1))) return false;
        }
        return true;
    }

    // Ordering of level t against its neighbours at every check point.
    [[nodiscard]] bool level_ok(Index t) const {
        const MatrixXd& w = model_.check_weights();
        const VectorXd mid = w * state_.quantiles.col(t);
        const VectorXd below = t > 0 ? VectorXd(w * state_.quantiles.col(t - 1)) : lower_edge_;
        const VectorXd above = t + 1 < levels_ ? VectorXd(w * state_.quantiles.col(t + 1)) : upper_edge_;
        return ((mid.array() > below.array()) && (mid.array() < above.array())).all();
    }

    // Sum of new minus cached log-likelihoods for observations touching pivot p.
    // With `level` set only quantile `level` changed, so observations outside the
    // neighbouring quantiles keep their segment and density and are skipped.
    // Records the new values in scratch_; returns -inf as soon as one is impossible.
    double likelihood_delta(Index p, Index level = -1) {
        scratch_.clear();
        double delta = 0.0;
        for (const Index i : model_.touching(p)) {
            if (level >= 0) {
                const double yi = model_.y()(i);
                if (level > 0 && yi <= model_.obs_quantile(state_, i, level - 1)) continue;
                if (level + 1 < levels_ && yi > model_.obs_quantile(state_, i, level + 1)) continue;
            }
            const double v = model_.log_likelihood_obs(state_, i);
            if (v == -kInf) return -kInf;
            scratch_.emplace_back(i, v);
            delta += v - obs_loglik_[static_cast<std::size_t>(i)];
        }
        return delta;
    }

    void commit_likelihood() {
        for (const auto& [i, v] : scratch_) obs_loglik_[static_cast<std::size_t>(i)] = v;
    }

    // Uniform proposal on the non-crossing interval, clipped to a window around
    // the current value; the ratio of window lengths keeps the kernel reversible.
    void update_quantile(Index p, Index t) {
        ProposalBounds b = combined_bounds(state_, model_.constraint_weights(), p, t, model_.support_edges(state_));
        if (std::isfinite(b.width())) {
            // Keep proposals off exact ties with the neighbouring quantiles.
            const double margin = 1e-12 * b.width();
            b.lower += margin;
            b.upper -= margin;
        }
        const double current = state_.quantiles(p, t);
        const double h = quantile_steps_(p, t) * scale_unit(p);
        const double lo = std::max(b.lower, current - h);
        const double hi = std::min(b.upper, current + h);
        const double proposal = lo + (hi - lo) * uniform_open(rng_);
        const double rlo = std::max(b.lower, proposal - h);
        const double rhi = std::min(b.upper, proposal + h);
        bool ok = false;
        if (proposal > lo && proposal < hi && current > rlo && current < rhi) {
            state_.quantiles(p, t) = proposal;
            ok = try_accept_quantiles(p, t, std::log(hi - lo) - std::log(rhi - rlo), [&] { return level_ok(t); });
            if (!ok) state_.quantiles(p, t) = current;
        }
        quantile_counts_.record(p, t, ok);
    }

    // Gaussian random walk on one log-gap coordinate of pivot p.
    void update_theta(Index p, Index j) {
        const VectorXd row = state_.quantiles.row(p).transpose();
        const std::span<const double> q{row.data(), static_cast<std::size_t>(levels_)};
        std::vector<double> theta = reparam_forward(q, offset_);
        theta[static_cast<std::size_t>(j)] += quantile_steps_(p, j) * standard_normal(rng_);
        const std::vector<double> proposal = reparam_inverse(theta, offset_);
        bool ok = false;
        if (std::all_of(proposal.begin(), proposal.end(), [](double v) { return std::isfinite(v); })) {
            const double log_jac = reparam_log_jacobian(proposal, offset_) - reparam_log_jacobian(q, offset_);
            for (Index t = 0; t < levels_; ++t) state_.quantiles(p, t) = proposal[static_cast<std::size_t>(t)];
            ok = try_accept_quantiles(p, -1, log_jac, [&] { return quantiles_ok(state_, lower_edge_, upper_edge_); });
            if (!ok) state_.quantiles.row(p) = row.transpose();
        }
        quantile_counts_.record(p, j, ok);
    }

    // state_ already holds the proposed quantiles of pivot p.
    template <typename Check>
    bool try_accept_quantiles(Index p, Index level, double log_correction, Check&& feasible) {
        if (!feasible()) return false;
        const double prior = model_.log_pivot_prior(state_, p);
        if (prior == -kInf) return false;
        const double delta = likelihood_delta(p, level);
        if (delta == -kInf) return false;
        const double log_ratio = prior - pivot_prior_[static_cast<std::size_t>(p)] + delta + log_correction;
        if (!accept(log_ratio, rng_)) return false;
        pivot_prior_[static_cast<std::size_t>(p)] = prior;
        commit_likelihood();
        return true;
    }

    // state_ already holds the proposed centering of pivot p.
    bool try_accept_centering(Index p, double old_hyper, double log_correction) {
        VectorXd lower, upper;
        if (!refresh_edges(state_, lower, upper)) return false;
        if (spec_.centering != CenteringKind::Normal && !quantiles_ok(state_, lower, upper)) return false;
        const double hyper = model_.log_hyperprior(state_, p);
        if (hyper == -kInf) return false;
        const double prior = model_.log_pivot_prior(state_, p);
        if (prior == -kInf) return false;
        const double delta = likelihood_delta(p);
        if (delta == -kInf) return false;
        const double log_ratio =
            hyper - old_hyper + prior - pivot_prior_[static_cast<std::size_t>(p)] + delta + log_correction;
        if (!accept(log_ratio, rng_)) return false;
        pivot_prior_[static_cast<std::size_t>(p)] = prior;
        commit_likelihood();
        lower_edge_ = std::move(lower);
        upper_edge_ = std::move(upper);
        return true;
    }

    void update_location(Index p) {
        const double old = state_.location(p);
        const double old_hyper = model_.log_hyperprior(state_, p);
        state_.location(p) = old + centering_steps_(p, kLocation) * state_.scale(p) * standard_normal(rng_);
        const bool ok = try_accept_centering(p, old_hyper, 0.0);
        if (!ok) state_.location(p) = old;
        centering_counts_.record(p, kLocation, ok);
    }

    void update_scale(Index p) {
        const double old = state_.scale(p);
        const double old_hyper = model_.log_hyperprior(state_, p);
        const double proposal = old * std::exp(centering_steps_(p, kScale) * standard_normal(rng_));
        state_.scale(p) = proposal;
        // Random walk on log scale: Jacobian sigma'/sigma.
        const bool ok = proposal > 0.0 && std::isfinite(proposal) &&
                        try_accept_centering(p, old_hyper, std::log(proposal) - std::log(old));
        if (!ok) state_.scale(p) = old;
        centering_counts_.record(p, kScale, ok);
    }

    void update_shape(Index p) {
        const double old = state_.shape(p);
        const double old_hyper = model_.log_hyperprior(state_, p);
        state_.shape(p) = old + centering_steps_(p, kShape) * standard_normal(rng_);
        const bool ok = try_accept_centering(p, old_hyper, 0.0);
        if (!ok) state_.shape(p) = old;
        centering_counts_.record(p, kShape, ok);
    }

    const QuantileModel& model_;
    const ModelSpec& spec_;
    McmcConfig cfg_;
    UpdateMode mode_;
    RegressionState state_;
    Rng rng_;
    Index pivots_;
    Index levels_;
    double offset_ = 0.0;

    std::vector<double> obs_loglik_;
    std::vector<double> pivot_prior_;
    std::vector<std::pair<Index, double>> scratch_;
    VectorXd lower_edge_;
    VectorXd upper_edge_;

    MatrixXd quantile_steps_;
    MatrixXd centering_steps_;
    Counter quantile_counts_;
    Counter centering_counts_;
};

UpdateMode default_mode(const QuantileModel& model) {
    return model.pivot_count() == 2 ? UpdateMode::Reparametrized : UpdateMode::CoordinateUniform;
}

// ---------------------------------------------------------------------------
// Initialization helpers.

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Moment estimates of the centering parameters from a response sample.
CenteringParams moment_centering(const ModelSpec& spec, const std::vector<double>& ys) {
    CenteringParams params;
    if (spec.centering == CenteringKind::Uniform) return params;
    if (spec.centering == CenteringKind::Normal) {
        if (ys.empty()) {
            params.location = spec.hyper.location_mean;
            params.scale = 1.0;
            return params;
        }
        params.location = mean_of(ys);
        const double sd = sd_of(ys, params.location);
        params.scale = sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
        return params;
    }
    params.location = spec.threshold;
    std::vector<double> excess;
    for (double y : ys)
        if (y > spec.threshold) excess.push_back(y - spec.threshold);
    if (excess.size() < 2) {
        params.scale = excess.empty() ? 1.0 : excess.front();
        params.shape = 0.1;
        return params;
    }
    const double m = mean_of(excess);
    const double s = sd_of(excess, m);
    double xi = s > 0.0 ? 0.5 * (1.0 - m * m / (s * s)) : 0.0;
    xi = std::clamp(xi, 0.0, 0.9);
    params.shape = xi;
    params.scale = m * (1.0 - xi);
    if (!(params.scale > 0.0)) params.scale = 1.0;
    return params;
}

VectorXd centering_quantiles(const ModelSpec& spec, const CenteringParams& params) {
    const auto dist = make_centering(spec, params);
    if (!dist) throw InitializationError("moment estimates gave a non-positive centering scale");
    VectorXd q(spec.levels());
    for (Index t = 0; t < spec.levels(); ++t) q(t) = dist->quantile(spec.grid()[static_cast<std::size_t>(t)]);
    return q;
}

}  // namespace

std::string_view to_string(UpdateMode mode) {
    return mode == UpdateMode::Reparametrized ? "reparametrized" : "coordinate-uniform";
}

void McmcConfig::validate() const {
    if (iterations == 0) throw InvalidInput("iterations must be positive");
    if (burn_in >= iterations) throw InvalidInput("burn-in must be smaller than the number of iterations");
    if (thin == 0) throw InvalidInput("thinning interval must be at least 1");
    if (adapt_window == 0) throw InvalidInput("adaptation window must be at least 1");
    for (double step : {quantile_step, reparam_step, location_step, log_scale_step, shape_step})
        if (!(step > 0.0) || !std::isfinite(step)) throw InvalidInput("proposal scales must be positive and finite");
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
        throw InvalidInput("target acceptance must lie in (0, 1)");
}

std::vector<double> reparam_forward(std::span<const double> q, double offset) {
    const std::size_t levels = q.size();
    if (levels == 0) throw InvalidInput("empty quantile vector");
    std::vector<double> theta(levels);
    for (std::size_t t = 1; t < levels; ++t) {
        const double gap = q[t] - q[t - 1];
        if (!(gap > 0.0)) throw InvalidInput("quantile vector is not strictly increasing");
        theta[t - 1] = std::log(gap);
    }
    const double sum = q.front() + q.back() + offset;
    if (!(sum > 0.0)) throw InvalidInput("q_1 + q_T + c must be positive");
    theta[levels - 1] = std::log(sum);
    return theta;
}

std::vector<double> reparam_inverse(std::span<const double> theta, double offset) {
    const std::size_t levels = theta.size();
    if (levels == 0) throw InvalidInput("empty parameter vector");
    double total_gap = 0.0;
    for (std::size_t t = 0; t + 1 < levels; ++t) total_gap += std::exp(theta[t]);
    // s = q_1 + q_T + c and q_T = q_1 + total_gap.
    const double s = std::exp(theta[levels - 1]);
    std::vector<double> q(levels);
    q[0] = 0.5 * (s - offset - total_gap);
    for (std::size_t t = 1; t < levels; ++t) q[t] = q[t - 1] + std::exp(theta[t - 1]);
    return q;
}

double reparam_log_jacobian(std::span<const double> q, double offset) {
    double out = std::log(q.front() + q.back() + offset);
    for (std::size_t t = 1; t < q.size(); ++t) out += std::log(q[t] - q[t - 1]);
    return out;
}

double reparam_offset(const VectorXd& y, const RegressionState& state) {
    double c = y.size() > 0 ? 2.0 * std::abs(y.minCoeff()) : 0.0;
    double worst = 0.0;
    bool representable = true;
    for (Index p = 0; p < state.pivot_count(); ++p) {
        const double sum = state.quantiles(p, 0) + state.quantiles(p, state.level_count() - 1);
        worst = std::max(worst, std::abs(sum));
        if (!(sum + c > 0.0)) representable = false;
    }
    if (!representable) c = 2.0 * worst + 1.0;
    return c;
}

RegressionState initialize_state(const QuantileModel& model) {
    const ModelSpec& spec = model.spec();
    const Index pivots = model.pivot_count();
    const Index levels = spec.levels();
    const Index n = model.size();
    const VectorXd& y = model.y();

    const std::vector<double> all(y.data(), y.data() + n);
    const CenteringParams global = moment_centering(spec, all);
    const VectorXd global_q = centering_quantiles(spec, global);

    RegressionState local = RegressionState::zeros(pivots, levels);
    const Index nearest = static_cast<Index>(std::ceil(0.3 * static_cast<double>(n)));
    for (Index p = 0; p < pivots; ++p) {
        std::vector<double> ys;
        if (nearest >= 5) {
            std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n));
            for (Index i = 0; i < n; ++i)
                dist[static_cast<std::size_t>(i)] = {
                    (model.obs_coordinates().row(i) - model.pivot_coordinates().row(p)).squaredNorm(), i};
            std::partial_sort(dist.begin(), dist.begin() + nearest, dist.end());
            for (Index k = 0; k < nearest; ++k) ys.push_back(y(dist[static_cast<std::size_t>(k)].second));
        } else {
            ys = all;
        }
        const CenteringParams params = moment_centering(spec, ys);
        local.location(p) = params.location;
        local.scale(p) = params.scale;
        local.shape(p) = params.shape;
        local.quantiles.row(p) = centering_quantiles(spec, params).transpose();
    }

    RegressionState flat = RegressionState::zeros(pivots, levels);
    flat.location.setConstant(global.location);
    flat.scale.setConstant(global.scale);
    flat.shape.setConstant(global.shape);
    for (Index p = 0; p < pivots; ++p) flat.quantiles.row(p) = global_q.transpose();

    for (int halving = 0; halving <= 40; ++halving) {
        const double lambda = halving == 40 ? 0.0 : std::ldexp(1.0, -halving);
        RegressionState s = flat;
        s.quantiles = lambda * local.quantiles + (1.0 - lambda) * flat.quantiles;
        s.location = lambda * local.location + (1.0 - lambda) * flat.location;
        s.scale = lambda * local.scale + (1.0 - lambda) * flat.scale;
        s.shape = lambda * local.shape + (1.0 - lambda) * flat.shape;
        if (std::isfinite(model.log_posterior(s))) return s;
    }
    std::ostringstream msg;
    msg << "no feasible starting state: the flat plane at the sample moments has zero posterior density";
    if (spec.centering == CenteringKind::Gpd)
        msg << " (responses at or below the threshold " << spec.threshold << "?)";
    throw InitializationError(msg.str());
}

PosteriorSamples run_chain(const QuantileModel& model, const McmcConfig& config,
                           const std::optional<RegressionState>& start) {
    config.validate();
    const UpdateMode mode = config.mode.value_or(default_mode(model));
    Chain chain(model, config, start ? *start : initialize_state(model), mode);
    return chain.run();
}

PosteriorSamples run_chain_reparam(const QuantileModel& model, McmcConfig config,
                                   const std::optional<RegressionState>& start) {
    config.mode = UpdateMode::Reparametrized;
    return run_chain(model, config, start);
}

std::vector<PosteriorSamples> run_chains(const QuantileModel& model, const McmcConfig& config, std::size_t chains,
                                         std::size_t threads) {
    config.validate();
    std::vector<PosteriorSamples> out(chains);
    std::vector<std::exception_ptr> errors(chains);
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(chains, 1));
    auto work = [&](std::size_t c) {
        try {
            McmcConfig cfg = config;
            Rng seeder = make_stream(config.seed, c + 1);
            cfg.seed = seeder();
            out[c] = run_chain(model, cfg);
        } catch (...) {
            errors[c] = std::current_exception();
        }
    };
    for (std::size_t first = 0; first < chains; first += threads) {
        std::vector<std::thread> pool;
        for (std::size_t c = first; c < std::min(chains, first + threads); ++c) pool.emplace_back(work, c);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
    if (chains.size() < 2) throw InvalidInput("potential scale reduction needs at least two chains");
    const std::size_t n = chains.front().size();
    if (n < 2) throw InvalidInput("potential scale reduction needs at least two draws per chain");
    for (const auto& c : chains)
        if (c.size() != n) throw InvalidInput("chains must have equal length");
    const double m = static_cast<double>(chains.size());
    const double len = static_cast<double>(n);
    std::vector<double> means;
    double within = 0.0;
    for (const auto& c : chains) {
        const double mu = mean_of(c);
        means.push_back(mu);
        const double sd = sd_of(c, mu);
        within += sd * sd;
    }
    within /= m;
    const double grand = mean_of(means);
    double between = 0.0;
    for (double mu : means) between += (mu - grand) * (mu - grand);
    between *= len / (m - 1.0);
    if (within == 0.0) return between == 0.0 ? 1.0 : kInf;
    const double pooled = (len - 1.0) / len * within + between / len;
    return std::sqrt(pooled / within);
}

}  // namespace pqr
