#pragma once

#include <Eigen/Core>

namespace pqr {

/// Full parameter vector of a fitted model.
///
/// Row p of `quantiles` is the quantile vector of pivot p (one column per grid
/// level). `location` is the centering mean per pivot in normal mode and is
/// unused in GPD mode, where the threshold is fixed; `shape` is only used in GPD mode.
struct RegressionState {
    Eigen::MatrixXd quantiles;
    Eigen::VectorXd location;
    Eigen::VectorXd scale;
    Eigen::VectorXd shape;

    [[nodiscard]] Eigen::Index pivot_count() const { return quantiles.rows(); }
    [[nodiscard]] Eigen::Index level_count() const { return quantiles.cols(); }

    static RegressionState zeros(Eigen::Index pivots, Eigen::Index levels) {
        RegressionState s;
        s.quantiles = Eigen::MatrixXd::Zero(pivots, levels);
        s.location = Eigen::VectorXd::Zero(pivots);
        s.scale = Eigen::VectorXd::Ones(pivots);
        s.shape = Eigen::VectorXd::Zero(pivots);
        return s;
    }

    bool operator==(const RegressionState&) const = default;
};

}  // namespace pqr
