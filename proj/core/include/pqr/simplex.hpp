#pragma once

#include <Eigen/Core>
#include <span>

namespace pqr {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
};

/// Dense two-phase tableau simplex for  min c'x  s.t.  A x = b,  x >= 0.
///
/// `initial_basis`, when non-empty, lists one column per row whose entries form
/// the identity with b >= 0; phase one is then skipped. Dantzig pricing falls
/// back to Bland's rule after a run of degenerate pivots.
/// Throws SolverError if the iteration cap is hit.
LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  std::span<const Eigen::Index> initial_basis = {});

/// True if `point` is a convex combination of the columns of `points`.
bool in_convex_hull(const Eigen::MatrixXd& points, const Eigen::VectorXd& point, double tol = 1e-9);

}  // namespace pqr
