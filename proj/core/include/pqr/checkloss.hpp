#pragma once

#include <Eigen/Core>

namespace pqr {

/// rho_tau(e): tau * e for e >= 0, (tau - 1) * e otherwise.
double check_loss(double residual, double tau);

/// Sum of check losses of y - b0 - X b.  `beta` holds (b0, b).
double checkloss_objective(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                           double tau);

/// Frequentist linear quantile regression at one level: exact minimizer of the
/// check loss via the simplex method on the standard primal LP, then polished by
/// re-solving the interpolation system of the zero-residual observations.
/// Returns (intercept, slopes) in raw units.
/// Throws InvalidInput for N < P + 1 or tau outside (0,1), SolverError if the LP fails.
Eigen::VectorXd checkloss_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, double tau);

}  // namespace pqr
