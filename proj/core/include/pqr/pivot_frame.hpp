#pragma once

#include <Eigen/Core>

namespace pqr {

/// Affine map between raw covariates and pivot coordinates, where the pivots
/// sit at the origin and the unit vectors: x_raw = origin + basis * z.
class PivotFrame {
public:
    /// Zero-dimensional frame (intercept-only models).
    PivotFrame() = default;
    /// `basis` columns are x^p - x^0. Throws DegenerateData when singular.
    PivotFrame(Eigen::VectorXd origin, Eigen::MatrixXd basis);

    [[nodiscard]] Eigen::Index dimension() const noexcept { return origin_.size(); }
    [[nodiscard]] const Eigen::VectorXd& origin() const noexcept { return origin_; }
    [[nodiscard]] const Eigen::MatrixXd& basis() const noexcept { return basis_; }
    [[nodiscard]] const Eigen::MatrixXd& inverse() const noexcept { return inverse_; }

    [[nodiscard]] Eigen::VectorXd to_pivot(const Eigen::VectorXd& raw) const;
    [[nodiscard]] Eigen::VectorXd to_raw(const Eigen::VectorXd& z) const;
    /// Raw location of pivot p (p = 0 is the origin).
    [[nodiscard]] Eigen::VectorXd pivot_location(Eigen::Index p) const;

    /// Weights (1 - sum z, z_1, ..., z_P) of the pivots at pivot coordinates z.
    static Eigen::VectorXd barycentric(const Eigen::VectorXd& z);

private:
    Eigen::VectorXd origin_;
    Eigen::MatrixXd basis_;
    Eigen::MatrixXd inverse_;
};

}  // namespace pqr
