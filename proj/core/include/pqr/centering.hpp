#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "pqr/quantile_pyramid.hpp"

namespace pqr {

// Standard normal helpers. normal_quantile uses Wichura's AS241 (about 1e-16 relative).
double normal_pdf(double z);
double normal_log_pdf(double z);
double normal_cdf(double z);
/// log Phi(z), accurate far into the lower tail.
double normal_log_cdf(double z);
double normal_quantile(double p);

enum class CenteringKind { Uniform, Normal, Gpd };

std::string_view to_string(CenteringKind kind);
/// Accepts "uniform", "normal", "gpd"; throws InvalidInput otherwise.
CenteringKind parse_centering_kind(std::string_view name);

/// Quantile/cdf/density triple used to centre a pyramid.
///
/// Uniform is the standard uniform on [0,1] (parameters ignored). Normal is
/// N(location, scale^2). Gpd is the generalized Pareto with threshold `location`,
/// scale `scale` and shape `shape`; support is [location, location - scale/shape]
/// for negative shape and [location, inf) otherwise. Shapes with magnitude below
/// kGpdExponentialLimit use the exponential limit.
class CenteringDistribution {
public:
    static constexpr double kGpdExponentialLimit = 1e-8;

    CenteringDistribution() = default;

    static CenteringDistribution uniform();
    /// Throws InvalidInput unless scale > 0.
    static CenteringDistribution normal(double location, double scale);
    /// Throws InvalidInput unless scale > 0.
    static CenteringDistribution gpd(double threshold, double scale, double shape);

    [[nodiscard]] CenteringKind kind() const noexcept { return kind_; }
    [[nodiscard]] double location() const noexcept { return location_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] double shape() const noexcept { return shape_; }

    [[nodiscard]] double lower_support() const noexcept;
    [[nodiscard]] double upper_support() const noexcept;

    /// Throws InvalidInput for tau outside (0,1).
    [[nodiscard]] double quantile(double tau) const;
    [[nodiscard]] double cdf(double y) const noexcept;
    [[nodiscard]] double log_density(double y) const noexcept;
    [[nodiscard]] double density(double y) const noexcept;
    /// log(cdf(b) - cdf(a)) for a < b, computed on the log scale in both tails.
    /// Either end may be infinite. Returns -inf for empty or zero-mass intervals.
    [[nodiscard]] double log_mass(double a, double b) const noexcept;

private:
    CenteringDistribution(CenteringKind kind, double location, double scale, double shape)
        : kind_(kind), location_(location), scale_(scale), shape_(shape) {}

    [[nodiscard]] double gpd_log_survival(double y) const noexcept;

    CenteringKind kind_ = CenteringKind::Uniform;
    double location_ = 0.0;
    double scale_ = 1.0;
    double shape_ = 0.0;
};

/// Elementwise quantile of `dist` at unit-pyramid values.
std::vector<double> transform_unit(const CenteringDistribution& dist, std::span<const double> unit_quantiles);

/// Pyramid prior density of quantiles on the response scale: each node contributes
/// g(split) * f(Q) / (F(Q_R) - F(Q_L)) with F = 0, 1 at the boundary ancestors.
/// Returns -inf for values outside the support or out of order.
double transformed_prior_logdensity(const PyramidTree& tree, const CenteringDistribution& dist,
                                    std::span<const double> quantiles);

}  // namespace pqr
