#pragma once

#include <Eigen/Core>
#include <vector>

#include "pqr/model.hpp"
#include "pqr/state.hpp"

namespace pqr {

/// Knot locations of a piecewise-linear quantile regression on one covariate.
class SplineKnots {
public:
    /// Throws InvalidInput unless at least two strictly increasing finite knots are given.
    explicit SplineKnots(std::vector<double> knots);

    /// `count` equally spaced knots from `lo` to `hi` inclusive.
    static SplineKnots equally_spaced(double lo, double hi, std::size_t count);

    [[nodiscard]] std::size_t size() const noexcept { return knots_.size(); }
    [[nodiscard]] double operator[](std::size_t j) const { return knots_[j]; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return knots_; }

    /// Interpolation weights on the knots at x; throws InvalidInput outside [k_0, k_K].
    [[nodiscard]] Eigen::VectorXd weights(double x) const;

private:
    std::vector<double> knots_;
};

/// Quantile vector at x: linear interpolation between the two bracketing knots.
Eigen::VectorXd spline_quantiles(const SplineKnots& knots, const RegressionState& state, double x);

/// Centering parameters interpolated between knots.
CenteringParams spline_centering(const ModelSpec& spec, const SplineKnots& knots, const RegressionState& state,
                                 double x);

/// One pyramid per knot; observations are weighted on their two bracketing knots.
/// Non-crossing holds everywhere once each knot's vector is ordered.
QuantileModel make_spline_model(const Eigen::VectorXd& y, const Eigen::VectorXd& x, const SplineKnots& knots,
                                ModelSpec spec);

}  // namespace pqr
