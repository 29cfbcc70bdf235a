#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "pqr/centering.hpp"
#include "pqr/dataset.hpp"
#include "pqr/noncrossing.hpp"
#include "pqr/quantile_pyramid.hpp"
#include "pqr/state.hpp"

namespace pqr {

/// Priors on the centering parameters of each pivot.
struct Hyperpriors {
    double location_mean = 0.0;
    double location_variance = 20.0;
    double scale_shape = 0.001;   // Gamma shape
    double scale_rate = 0.001;    // Gamma rate
    // GPD shape: Normal(shape_mean, shape_sd) truncated to (shape_lower, shape_upper).
    double shape_mean = 0.0;
    double shape_sd = 1.0;
    double shape_lower = -0.5;
    double shape_upper = 1.0;
};

/// Everything about the model that does not depend on data.
struct ModelSpec {
    PyramidTree tree;
    CenteringKind centering = CenteringKind::Normal;
    double threshold = 0.0;       // GPD location, fixed at every covariate value
    Hyperpriors hyper;

    [[nodiscard]] const QuantileGrid& grid() const { return tree.grid; }
    [[nodiscard]] Eigen::Index levels() const { return static_cast<Eigen::Index>(tree.grid.size()); }

    static ModelSpec make(const QuantileGrid& grid, CenteringKind centering = CenteringKind::Normal,
                          double threshold = 0.0, BetaSchedule schedule = {});
};

/// Centering parameters interpolated to a covariate value.
struct CenteringParams {
    double location = 0.0;
    double scale = 1.0;
    double shape = 0.0;
};

/// Centering distribution of `spec` with the given parameters; nullopt when the scale is not positive.
std::optional<CenteringDistribution> make_centering(const ModelSpec& spec, const CenteringParams& params);

// ---------------------------------------------------------------------------
// Point evaluations of the linear model in pivot coordinates z.

/// Q_t(Y | z) = sum_p w_p(z) Q^p_t, with w = (1 - sum z, z).
Eigen::VectorXd conditional_quantiles(const RegressionState& state, const Eigen::VectorXd& z);

/// Same, for explicit pivot weights.
Eigen::VectorXd quantiles_at_weights(const RegressionState& state, const Eigen::VectorXd& weights);

/// Intercept and slopes of level t in raw covariate units.
Eigen::VectorXd coefficients(const RegressionState& state, const PivotFrame& frame, Eigen::Index t);

/// Linear interpolation of the centering parameters; GPD keeps the threshold as location.
CenteringParams centering_plane(const ModelSpec& spec, const RegressionState& state, const Eigen::VectorXd& z);
CenteringParams centering_at_weights(const ModelSpec& spec, const RegressionState& state,
                                     const Eigen::VectorXd& weights);

/// Piecewise-scaled centering density: T+1 segments split at the conditional
/// quantiles, segment t carrying mass tau_t - tau_{t-1} (tau_0 = 0, tau_{T+1} = 1).
/// Returns -inf for out-of-order quantiles, quantiles outside the support, or y outside the support.
double log_conditional_density(const QuantileGrid& grid, std::span<const double> quantiles,
                               const CenteringDistribution& dist, double y);

/// Cumulative distribution implied by log_conditional_density.
double conditional_cdf(const QuantileGrid& grid, std::span<const double> quantiles,
                       const CenteringDistribution& dist, double y);

/// log f(y | z) for the linear model.
double loglik_single(const ModelSpec& spec, const RegressionState& state, const Eigen::VectorXd& z, double y);

// ---------------------------------------------------------------------------

/// A model over K pivots: each observation and each constraint point is
/// described by its pivot weights. Linear regressions and linear splines are
/// both instances.
class QuantileModel {
public:
    QuantileModel(ModelSpec spec, Eigen::VectorXd y, Eigen::MatrixXd obs_weights, Eigen::MatrixXd constraint_weights,
                  Eigen::MatrixXd obs_coordinates, Eigen::MatrixXd pivot_coordinates);

    [[nodiscard]] const ModelSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] Eigen::Index pivot_count() const noexcept { return pivot_coordinates_.rows(); }
    [[nodiscard]] Eigen::Index size() const noexcept { return y_.size(); }
    [[nodiscard]] const Eigen::VectorXd& y() const noexcept { return y_; }
    [[nodiscard]] const Eigen::MatrixXd& obs_weights() const noexcept { return obs_weights_; }
    /// Non-pivotal constraint points (V x K).
    [[nodiscard]] const Eigen::MatrixXd& constraint_weights() const noexcept { return constraint_weights_; }
    /// Pivots followed by constraint points; every point where feasibility is checked.
    [[nodiscard]] const Eigen::MatrixXd& check_weights() const noexcept { return check_weights_; }
    /// Observation locations and pivot locations in a common space, used only for initialization.
    [[nodiscard]] const Eigen::MatrixXd& obs_coordinates() const noexcept { return obs_coordinates_; }
    [[nodiscard]] const Eigen::MatrixXd& pivot_coordinates() const noexcept { return pivot_coordinates_; }
    /// Observations with non-zero weight on pivot p.
    [[nodiscard]] const std::vector<Eigen::Index>& touching(Eigen::Index p) const { return touching_[p]; }

    [[nodiscard]] CenteringParams centering_at(const RegressionState& state, Eigen::Index obs) const;
    [[nodiscard]] CenteringDistribution pivot_centering(const RegressionState& state, Eigen::Index p) const;

    /// Conditional quantile of level t at observation `obs`.
    [[nodiscard]] double obs_quantile(const RegressionState& state, Eigen::Index obs, Eigen::Index t) const;

    [[nodiscard]] double log_likelihood_obs(const RegressionState& state, Eigen::Index obs) const;
    [[nodiscard]] double log_likelihood(const RegressionState& state) const;
    [[nodiscard]] double log_pivot_prior(const RegressionState& state, Eigen::Index p) const;
    [[nodiscard]] double log_hyperprior(const RegressionState& state, Eigen::Index p) const;
    [[nodiscard]] double log_prior(const RegressionState& state) const;

    /// Positive scale, ordered quantiles and quantiles inside the support at every check point.
    [[nodiscard]] bool feasible(const RegressionState& state) const;
    /// Unnormalized log posterior; -inf for any infeasible state.
    [[nodiscard]] double log_posterior(const RegressionState& state) const;

    /// Support limits at a point, for combined_bounds.
    [[nodiscard]] SupportEdges support_edges(const RegressionState& state) const;

private:
    ModelSpec spec_;
    Eigen::VectorXd y_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> obs_rows_;
    Eigen::MatrixXd obs_weights_;
    Eigen::MatrixXd constraint_weights_;
    Eigen::MatrixXd check_weights_;
    Eigen::MatrixXd obs_coordinates_;
    Eigen::MatrixXd pivot_coordinates_;
    std::vector<std::vector<Eigen::Index>> touching_;
};

/// Linear quantile regression over the pivots of `data`.
QuantileModel make_linear_model(const Dataset& data, ModelSpec spec);

/// log_posterior of the linear model.
double log_posterior(const RegressionState& state, const QuantileModel& model);

}  // namespace pqr
