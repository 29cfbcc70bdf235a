#include "pqr/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pqr/errors.hpp"

namespace pqr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

SplineKnots::SplineKnots(std::vector<double> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) throw InvalidInput("a linear spline needs at least two knots");
    for (std::size_t j = 0; j < knots_.size(); ++j) {
        if (!std::isfinite(knots_[j])) throw InvalidInput("knots must be finite");
        if (j > 0 && !(knots_[j] > knots_[j - 1])) throw InvalidInput("knots must be strictly increasing");
    }
}

SplineKnots SplineKnots::equally_spaced(double lo, double hi, std::size_t count) {
    if (count < 2 || !(hi > lo)) throw InvalidInput("equally spaced knots need count >= 2 and hi > lo");
    std::vector<double> knots(count);
    for (std::size_t j = 0; j < count; ++j)
        knots[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count - 1);
    knots.back() = hi;
    return SplineKnots(std::move(knots));
}

VectorXd SplineKnots::weights(double x) const {
    if (!(x >= knots_.front() && x <= knots_.back()))
        throw InvalidInput("x = " + std::to_string(x) + " lies outside the knot span");
    VectorXd w = VectorXd::Zero(static_cast<Index>(knots_.size()));
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    if (it == knots_.end()) {
        w(w.size() - 1) = 1.0;
        return w;
    }
    const auto right = static_cast<Index>(it - knots_.begin());
    const Index left = right - 1;
    const double lambda = (x - knots_[static_cast<std::size_t>(left)]) /
                          (knots_[static_cast<std::size_t>(right)] - knots_[static_cast<std::size_t>(left)]);
    w(left) = 1.0 - lambda;
    w(right) = lambda;
    return w;
}

VectorXd spline_quantiles(const SplineKnots& knots, const RegressionState& state, double x) {
    if (static_cast<std::size_t>(state.pivot_count()) != knots.size())
        throw InvalidInput("state must hold one quantile vector per knot");
    return quantiles_at_weights(state, knots.weights(x));
}

CenteringParams spline_centering(const ModelSpec& spec, const SplineKnots& knots, const RegressionState& state,
                                 double x) {
    return centering_at_weights(spec, state, knots.weights(x));
}

QuantileModel make_spline_model(const VectorXd& y, const VectorXd& x, const SplineKnots& knots, ModelSpec spec) {
    if (y.size() != x.size()) throw InvalidInput("response and covariate lengths differ");
    const auto count = static_cast<Index>(knots.size());
    MatrixXd weights(y.size(), count);
    for (Index i = 0; i < y.size(); ++i) weights.row(i) = knots.weights(x(i)).transpose();
    MatrixXd coords = x;
    MatrixXd pivots(count, 1);
    for (Index j = 0; j < count; ++j) pivots(j, 0) = knots[static_cast<std::size_t>(j)];
    return QuantileModel(std::move(spec), y, std::move(weights), MatrixXd(0, count), std::move(coords),
                         std::move(pivots));
}

}  // namespace pqr
