#include "pqr/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "pqr/errors.hpp"

namespace pqr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double segment_mass(const QuantileGrid& grid, std::size_t segment) {
    const double upper = segment == grid.size() ? 1.0 : grid[segment];
    const double lower = segment == 0 ? 0.0 : grid[segment - 1];
    return upper - lower;
}

bool ordered_inside(std::span<const double> q, double lo, double hi) {
    if (q.empty()) return true;
    if (!(q.front() > lo) || !(q.back() < hi)) return false;
    for (std::size_t t = 1; t < q.size(); ++t)
        if (!(q[t] > q[t - 1])) return false;
    return true;
}

double gamma_logpdf(double x, double shape, double rate) {
    if (!(x > 0.0)) return -kInf;
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace

ModelSpec ModelSpec::make(const QuantileGrid& grid, CenteringKind centering, double threshold, BetaSchedule schedule) {
    ModelSpec spec;
    spec.tree = make_pyramid(grid, schedule);
    spec.centering = centering;
    spec.threshold = threshold;
    return spec;
}

std::optional<CenteringDistribution> make_centering(const ModelSpec& spec, const CenteringParams& params) {
    switch (spec.centering) {
        case CenteringKind::Uniform: return CenteringDistribution::uniform();
        case CenteringKind::Normal:
            if (!(params.scale > 0.0) || !std::isfinite(params.scale) || !std::isfinite(params.location))
                return std::nullopt;
            return CenteringDistribution::normal(params.location, params.scale);
        case CenteringKind::Gpd:
            if (!(params.scale > 0.0) || !std::isfinite(params.scale) || !std::isfinite(params.shape))
                return std::nullopt;
            return CenteringDistribution::gpd(spec.threshold, params.scale, params.shape);
    }
    return std::nullopt;
}

VectorXd quantiles_at_weights(const RegressionState& state, const VectorXd& weights) {
    return state.quantiles.transpose() * weights;
}

VectorXd conditional_quantiles(const RegressionState& state, const VectorXd& z) {
    return quantiles_at_weights(state, PivotFrame::barycentric(z));
}

VectorXd coefficients(const RegressionState& state, const PivotFrame& frame, Index t) {
    const Index dim = frame.dimension();
    if (t < 0 || t >= state.level_count()) throw InvalidInput("level index out of range");
    if (state.pivot_count() != dim + 1) throw InvalidInput("state does not match the pivot frame");
    VectorXd pivot_slopes(dim);
    for (Index p = 0; p < dim; ++p) pivot_slopes(p) = state.quantiles(p + 1, t) - state.quantiles(0, t);
    // Q = b0 + s'z with z = A^{-1}(x - origin)  =>  raw slopes A^{-T} s.
    VectorXd out(dim + 1);
    const VectorXd raw_slopes = frame.inverse().transpose() * pivot_slopes;
    out(0) = state.quantiles(0, t) - raw_slopes.dot(frame.origin());
    out.tail(dim) = raw_slopes;
    return out;
}

CenteringParams centering_at_weights(const ModelSpec& spec, const RegressionState& state, const VectorXd& weights) {
    CenteringParams params;
    params.location = spec.centering == CenteringKind::Gpd ? spec.threshold : weights.dot(state.location);
    params.scale = weights.dot(state.scale);
    params.shape = spec.centering == CenteringKind::Gpd ? weights.dot(state.shape) : 0.0;
    return params;
}

CenteringParams centering_plane(const ModelSpec& spec, const RegressionState& state, const VectorXd& z) {
    return centering_at_weights(spec, state, PivotFrame::barycentric(z));
}

double log_conditional_density(const QuantileGrid& grid, std::span<const double> quantiles,
                               const CenteringDistribution& dist, double y) {
    const double lo = dist.lower_support();
    const double hi = dist.upper_support();
    if (!ordered_inside(quantiles, lo, hi)) return -kInf;
    if (y < lo || y > hi) return -kInf;
    const auto segment = static_cast<std::size_t>(std::lower_bound(quantiles.begin(), quantiles.end(), y) -
                                                  quantiles.begin());
    const double a = segment == 0 ? lo : quantiles[segment - 1];
    const double b = segment == quantiles.size() ? hi : quantiles[segment];
    const double log_norm = dist.log_mass(a, b);
    if (log_norm == -kInf) return -kInf;
    return std::log(segment_mass(grid, segment)) + dist.log_density(y) - log_norm;
}

double conditional_cdf(const QuantileGrid& grid, std::span<const double> quantiles, const CenteringDistribution& dist,
                       double y) {
    const double lo = dist.lower_support();
    const double hi = dist.upper_support();
    if (y <= lo) return 0.0;
    if (y >= hi) return 1.0;
    const auto segment = static_cast<std::size_t>(std::lower_bound(quantiles.begin(), quantiles.end(), y) -
                                                  quantiles.begin());
    const double a = segment == 0 ? lo : quantiles[segment - 1];
    const double b = segment == quantiles.size() ? hi : quantiles[segment];
    const double below = segment == 0 ? 0.0 : grid[segment - 1];
    const double fraction = y == b ? 1.0 : std::exp(dist.log_mass(a, y) - dist.log_mass(a, b));
    return below + segment_mass(grid, segment) * fraction;
}

double loglik_single(const ModelSpec& spec, const RegressionState& state, const VectorXd& z, double y) {
    const VectorXd w = PivotFrame::barycentric(z);
    const auto dist = make_centering(spec, centering_at_weights(spec, state, w));
    if (!dist) return -kInf;
    const VectorXd q = quantiles_at_weights(state, w);
    return log_conditional_density(spec.grid(), {q.data(), static_cast<std::size_t>(q.size())}, *dist, y);
}

// ---------------------------------------------------------------------------

QuantileModel::QuantileModel(ModelSpec spec, VectorXd y, MatrixXd obs_weights, MatrixXd constraint_weights,
                             MatrixXd obs_coordinates, MatrixXd pivot_coordinates)
    : spec_(std::move(spec)),
      y_(std::move(y)),
      obs_weights_(std::move(obs_weights)),
      constraint_weights_(std::move(constraint_weights)),
      obs_coordinates_(std::move(obs_coordinates)),
      pivot_coordinates_(std::move(pivot_coordinates)) {
    const Index pivots = pivot_coordinates_.rows();
    if (pivots < 1) throw InvalidInput("a model needs at least one pivot");
    if (obs_weights_.rows() != y_.size() || (y_.size() > 0 && obs_weights_.cols() != pivots))
        throw InvalidInput("observation weights must be N x K");
    if (obs_weights_.cols() != pivots) obs_weights_.resize(y_.size(), pivots);
    if (constraint_weights_.rows() > 0 && constraint_weights_.cols() != pivots)
        throw InvalidInput("constraint weights must have one column per pivot");
    if (constraint_weights_.rows() == 0) constraint_weights_.resize(0, pivots);
    if (obs_coordinates_.rows() != y_.size()) throw InvalidInput("observation coordinates must have N rows");
    if (!y_.allFinite()) throw InvalidInput("responses must be finite");

    obs_rows_ = obs_weights_;
    check_weights_.resize(pivots + constraint_weights_.rows(), pivots);
    check_weights_.topRows(pivots).setIdentity();
    check_weights_.bottomRows(constraint_weights_.rows()) = constraint_weights_;

    touching_.assign(static_cast<std::size_t>(pivots), {});
    for (Index i = 0; i < y_.size(); ++i)
        for (Index p = 0; p < pivots; ++p)
            if (obs_weights_(i, p) != 0.0) touching_[static_cast<std::size_t>(p)].push_back(i);
}

CenteringParams QuantileModel::centering_at(const RegressionState& state, Index obs) const {
    CenteringParams params;
    const double* w = obs_rows_.row(obs).data();
    double scale = 0.0, location = 0.0, shape = 0.0;
    for (Index p = 0; p < pivot_count(); ++p) {
        scale += w[p] * state.scale(p);
        location += w[p] * state.location(p);
        shape += w[p] * state.shape(p);
    }
    params.scale = scale;
    params.location = spec_.centering == CenteringKind::Gpd ? spec_.threshold : location;
    params.shape = spec_.centering == CenteringKind::Gpd ? shape : 0.0;
    return params;
}

CenteringDistribution QuantileModel::pivot_centering(const RegressionState& state, Index p) const {
    CenteringParams params;
    params.location = spec_.centering == CenteringKind::Gpd ? spec_.threshold : state.location(p);
    params.scale = state.scale(p);
    params.shape = state.shape(p);
    const auto dist = make_centering(spec_, params);
    if (!dist) throw LogicError("pivot centering has a non-positive scale");
    return *dist;
}

double QuantileModel::obs_quantile(const RegressionState& state, Index obs, Index t) const {
    const double* w = obs_rows_.row(obs).data();
    double acc = 0.0;
    for (Index p = 0; p < pivot_count(); ++p) acc += w[p] * state.quantiles(p, t);
    return acc;
}

double QuantileModel::log_likelihood_obs(const RegressionState& state, Index obs) const {
    const Index levels = spec_.levels();
    const Index pivots = pivot_count();
    std::array<double, 64> stack{};
    std::vector<double> heap;
    double* q = stack.data();
    if (levels > static_cast<Index>(stack.size())) {
        heap.resize(static_cast<std::size_t>(levels));
        q = heap.data();
    }
    const double* w = obs_rows_.row(obs).data();
    for (Index t = 0; t < levels; ++t) {
        double acc = 0.0;
        for (Index p = 0; p < pivots; ++p) acc += w[p] * state.quantiles(p, t);
        q[t] = acc;
    }
    const auto dist = make_centering(spec_, centering_at(state, obs));
    if (!dist) return -kInf;
    return log_conditional_density(spec_.grid(), {q, static_cast<std::size_t>(levels)}, *dist, y_(obs));
}

double QuantileModel::log_likelihood(const RegressionState& state) const {
    double total = 0.0;
    for (Index i = 0; i < size(); ++i) {
        const double term = log_likelihood_obs(state, i);
        if (term == -kInf) return -kInf;
        total += term;
    }
    return total;
}

double QuantileModel::log_pivot_prior(const RegressionState& state, Index p) const {
    const auto dist = make_centering(spec_, {spec_.centering == CenteringKind::Gpd ? spec_.threshold : state.location(p),
                                             state.scale(p), state.shape(p)});
    if (!dist) return -kInf;
    const VectorXd row = state.quantiles.row(p).transpose();
    return transformed_prior_logdensity(spec_.tree, *dist, {row.data(), static_cast<std::size_t>(row.size())});
}

double QuantileModel::log_hyperprior(const RegressionState& state, Index p) const {
    const Hyperpriors& h = spec_.hyper;
    switch (spec_.centering) {
        case CenteringKind::Uniform: return 0.0;
        case CenteringKind::Normal: {
            const double dev = state.location(p) - h.location_mean;
            const double loc = -0.5 * dev * dev / h.location_variance - 0.5 * std::log(h.location_variance) - kLogSqrt2Pi;
            return loc + gamma_logpdf(state.scale(p), h.scale_shape, h.scale_rate);
        }
        case CenteringKind::Gpd: {
            const double xi = state.shape(p);
            if (!(xi > h.shape_lower && xi < h.shape_upper)) return -kInf;
            const double zmass = normal_cdf((h.shape_upper - h.shape_mean) / h.shape_sd) -
                                 normal_cdf((h.shape_lower - h.shape_mean) / h.shape_sd);
            const double shape_term =
                normal_log_pdf((xi - h.shape_mean) / h.shape_sd) - std::log(h.shape_sd) - std::log(zmass);
            return shape_term + gamma_logpdf(state.scale(p), h.scale_shape, h.scale_rate);
        }
    }
    return 0.0;
}

double QuantileModel::log_prior(const RegressionState& state) const {
    double total = 0.0;
    for (Index p = 0; p < pivot_count(); ++p) {
        const double term = log_pivot_prior(state, p) + log_hyperprior(state, p);
        if (term == -kInf) return -kInf;
        total += term;
    }
    return total;
}

bool QuantileModel::feasible(const RegressionState& state) const {
    const Index pivots = pivot_count();
    if (state.pivot_count() != pivots || state.level_count() != spec_.levels()) return false;
    if (!state.quantiles.allFinite()) return false;
    const MatrixXd at = check_weights_ * state.quantiles;
    for (Index v = 0; v < check_weights_.rows(); ++v) {
        const VectorXd w = check_weights_.row(v).transpose();
        const auto dist = make_centering(spec_, centering_at_weights(spec_, state, w));
        if (!dist) return false;
        const VectorXd q = at.row(v).transpose();
        if (!ordered_inside({q.data(), static_cast<std::size_t>(q.size())}, dist->lower_support(),
                            dist->upper_support()))
            return false;
    }
    return true;
}

double QuantileModel::log_posterior(const RegressionState& state) const {
    if (!feasible(state)) return -kInf;
    const double prior = log_prior(state);
    if (prior == -kInf) return -kInf;
    const double lik = log_likelihood(state);
    if (lik == -kInf) return -kInf;
    return prior + lik;
}

SupportEdges QuantileModel::support_edges(const RegressionState& state) const {
    if (spec_.centering == CenteringKind::Normal) return {};
    return [this, &state](const VectorXd& weights) -> std::pair<double, double> {
        const auto dist = make_centering(spec_, centering_at_weights(spec_, state, weights));
        if (!dist) return {kInf, -kInf};
        return {dist->lower_support(), dist->upper_support()};
    };
}

QuantileModel make_linear_model(const Dataset& data, ModelSpec spec) {
    const Index dim = data.dimension();
    MatrixXd weights(data.size(), dim + 1);
    for (Index i = 0; i < data.size(); ++i)
        weights.row(i) = PivotFrame::barycentric(data.z.row(i).transpose()).transpose();
    MatrixXd pivots = MatrixXd::Zero(dim + 1, dim);
    pivots.bottomRows(dim).setIdentity();
    return QuantileModel(std::move(spec), data.y, std::move(weights), data.constraint_weights, data.z,
                         std::move(pivots));
}

double log_posterior(const RegressionState& state, const QuantileModel& model) { return model.log_posterior(state); }

}  // namespace pqr
