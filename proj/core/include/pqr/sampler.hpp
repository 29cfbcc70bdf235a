#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pqr/model.hpp"
#include "pqr/state.hpp"

namespace pqr {

enum class UpdateMode {
    /// Uniform proposals inside the non-crossing interval of each quantile coordinate.
    CoordinateUniform,
    /// Gaussian random walks on log gaps between adjacent quantiles plus log(q_1 + q_T + c).
    Reparametrized,
};

std::string_view to_string(UpdateMode mode);

/// Chain settings. `iterations` counts burn-in. Step sizes are initial values;
/// they adapt during burn-in towards `target_acceptance` and are frozen afterwards.
struct McmcConfig {
    std::size_t iterations = 20000;
    std::size_t burn_in = 5000;
    std::size_t thin = 10;
    std::uint64_t seed = 1;

    /// Half-width of the uniform quantile window, in units of the pivot's centering scale.
    double quantile_step = 1.0;
    /// Random-walk sd on reparametrized coordinates.
    double reparam_step = 0.3;
    /// Random-walk sd for centering locations, in units of the pivot's scale.
    double location_step = 0.5;
    /// Random-walk sd on log scale.
    double log_scale_step = 0.2;
    /// Random-walk sd for GPD shapes.
    double shape_step = 0.05;

    std::size_t adapt_window = 50;
    double target_acceptance = 0.35;

    /// Defaults to Reparametrized for models with two pivots, CoordinateUniform otherwise.
    std::optional<UpdateMode> mode;

    /// When false the centering parameters stay at their initial values.
    bool update_centering = true;

    /// Throws InvalidInput when burn_in >= iterations, thin == 0 or a step is not positive.
    void validate() const;
};

/// Acceptance rate per updated coordinate, measured after burn-in.
struct AcceptanceRates {
    Eigen::MatrixXd quantiles;  // pivots x levels (reparametrized: per theta coordinate)
    Eigen::VectorXd location;
    Eigen::VectorXd scale;
    Eigen::VectorXd shape;
};

struct PosteriorSamples {
    std::vector<RegressionState> states;
    std::vector<double> log_posterior;
    AcceptanceRates acceptance;
    UpdateMode mode = UpdateMode::CoordinateUniform;
    double reparam_offset = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return states.size(); }
};

// ---------------------------------------------------------------------------
// Log-gap reparametrization of one quantile vector.

/// theta = (log(q_2 - q_1), ..., log(q_T - q_{T-1}), log(q_1 + q_T + c)).
/// Throws InvalidInput for non-increasing input or q_1 + q_T + c <= 0.
std::vector<double> reparam_forward(std::span<const double> q, double offset);
std::vector<double> reparam_inverse(std::span<const double> theta, double offset);
/// log |dq/dtheta| up to an additive constant.
double reparam_log_jacobian(std::span<const double> q, double offset);

/// Offset c = 2 |min y|, raised when needed so that `state` is representable.
double reparam_offset(const Eigen::VectorXd& y, const RegressionState& state);

// ---------------------------------------------------------------------------

/// Feasible starting state: centering parameters from moments of the 30% of
/// observations nearest each pivot (full sample when that is too few), pivot
/// quantiles at the centering quantiles, then shrunk towards a common flat
/// quantile plane until the whole state is feasible.
/// Throws InitializationError if even the flat plane is infeasible.
RegressionState initialize_state(const QuantileModel& model);

/// Metropolis-within-Gibbs: a systematic scan over pivots then levels for the
/// quantiles, followed by random-walk updates of each pivot's centering parameters.
/// Deterministic given config.seed.
PosteriorSamples run_chain(const QuantileModel& model, const McmcConfig& config,
                           const std::optional<RegressionState>& start = std::nullopt);

/// run_chain with the reparametrized quantile updates.
PosteriorSamples run_chain_reparam(const QuantileModel& model, McmcConfig config,
                                   const std::optional<RegressionState>& start = std::nullopt);

/// Independent chains on seeds derived from config.seed, at most `threads` at once.
std::vector<PosteriorSamples> run_chains(const QuantileModel& model, const McmcConfig& config, std::size_t chains,
                                         std::size_t threads);

/// Gelman-Rubin potential scale reduction for equal-length chains of one scalar.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

}  // namespace pqr
