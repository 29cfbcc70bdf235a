#include "pqr/checkloss.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "pqr/errors.hpp"
#include "pqr/simplex.hpp"

namespace pqr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double check_loss(double residual, double tau) { return residual >= 0.0 ? tau * residual : (tau - 1.0) * residual; }

double checkloss_objective(const VectorXd& y, const MatrixXd& x, const VectorXd& beta, double tau) {
    if (beta.size() != x.cols() + 1 || x.rows() != y.size()) throw InvalidInput("coefficient and data shapes disagree");
    double total = 0.0;
    for (Index i = 0; i < y.size(); ++i) total += check_loss(y(i) - beta(0) - x.row(i).dot(beta.tail(x.cols())), tau);
    return total;
}

namespace {

// Interpolating fit through K observations with (near) zero residual, picked
// greedily for linear independence. Empty when no such set exists.
VectorXd polish(const VectorXd& y, const MatrixXd& design, const VectorXd& beta) {
    const Index k = design.cols();
    const VectorXd resid = y - design * beta;
    const double scale = 1.0 + y.cwiseAbs().maxCoeff();
    std::vector<Index> order;
    for (Index i = 0; i < y.size(); ++i)
        if (std::fabs(resid(i)) <= 1e-7 * scale) order.push_back(i);
    MatrixXd rows(0, k);
    VectorXd rhs(0);
    for (Index i : order) {
        MatrixXd trial(rows.rows() + 1, k);
        trial << rows, design.row(i);
        Eigen::FullPivLU<MatrixXd> lu(trial);
        lu.setThreshold(1e-10);
        if (lu.rank() == trial.rows()) {
            rows = trial;
            rhs.conservativeResize(rhs.size() + 1);
            rhs(rhs.size() - 1) = y(i);
            if (rows.rows() == k) break;
        }
    }
    if (rows.rows() != k) return {};
    return rows.fullPivLu().solve(rhs);
}

}  // namespace

VectorXd checkloss_fit(const VectorXd& y, const MatrixXd& x, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("quantile level must lie in (0, 1)");
    const Index n = y.size();
    const Index p = x.cols();
    const Index k = p + 1;
    if (x.rows() != n) throw InvalidInput("covariate rows must match responses");
    if (n < k) throw InvalidInput("check-loss fit needs at least P + 1 observations");

    MatrixXd design(n, k);
    design.col(0).setOnes();
    design.rightCols(p) = x;

    // Columns: beta+ (k), beta- (k), u (n), v (n);  design (beta+ - beta-) + u - v = y.
    const Index cols = 2 * k + 2 * n;
    MatrixXd a = MatrixXd::Zero(n, cols);
    VectorXd b(n);
    std::vector<Index> basis(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const double sign = y(i) < 0.0 ? -1.0 : 1.0;
        a.block(i, 0, 1, k) = sign * design.row(i);
        a.block(i, k, 1, k) = -sign * design.row(i);
        a(i, 2 * k + i) = sign;
        a(i, 2 * k + n + i) = -sign;
        b(i) = sign * y(i);
        basis[static_cast<std::size_t>(i)] = sign > 0.0 ? 2 * k + i : 2 * k + n + i;
    }
    VectorXd c = VectorXd::Zero(cols);
    c.segment(2 * k, n).setConstant(tau);
    c.segment(2 * k + n, n).setConstant(1.0 - tau);

    const LpResult res = solve_lp(a, b, c, basis);
    if (res.status != LpStatus::Optimal) throw SolverError("check-loss linear program has no optimal solution");
    VectorXd beta = res.x.head(k) - res.x.segment(k, k);

    const VectorXd polished = polish(y, design, beta);
    if (polished.size() == k && polished.allFinite() &&
        checkloss_objective(y, x, polished, tau) <= checkloss_objective(y, x, beta, tau) + 1e-12 * (1.0 + res.objective))
        beta = polished;
    return beta;
}

}  // namespace pqr
