#include "pqr/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "pqr/errors.hpp"

namespace pqr {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-10;
constexpr int kDegenerateRunBeforeBland = 50;

// Tableau: rows 0..m-1 hold [B^-1 A | B^-1 b]; row m holds reduced costs and -objective.
class Tableau {
public:
    Tableau(MatrixXd table, std::vector<Index> basis) : t_(std::move(table)), basis_(std::move(basis)) {}

    [[nodiscard]] Index rows() const { return t_.rows() - 1; }
    [[nodiscard]] Index cols() const { return t_.cols() - 1; }
    MatrixXd& table() { return t_; }
    std::vector<Index>& basis() { return basis_; }

    void price_out(const VectorXd& cost) {
        const Index m = rows();
        t_.row(m).setZero();
        t_.row(m).head(cols()) = cost.transpose();
        for (Index r = 0; r < m; ++r) t_.row(m) -= cost(basis_[r]) * t_.row(r);
    }

    void pivot(Index r, Index col) {
        t_.row(r) /= t_(r, col);
        for (Index i = 0; i < t_.rows(); ++i) {
            if (i == r) continue;
            const double factor = t_(i, col);
            if (factor != 0.0) t_.row(i) -= factor * t_.row(r);
        }
        basis_[r] = col;
    }

    // Returns false if unbounded. `allowed` limits entering columns.
    bool run(Index allowed) {
        const Index m = rows();
        const long cap = 50000 + 50 * static_cast<long>(m + allowed);
        int degenerate_run = 0;
        for (long iter = 0; iter < cap; ++iter) {
            const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
            Index enter = -1;
            double best = -kCostTol;
            for (Index j = 0; j < allowed; ++j) {
                const double rc = t_(m, j);
                if (rc < best) {
                    enter = j;
                    if (bland) break;
                    best = rc;
                }
            }
            if (enter < 0) return true;

            Index leave = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (Index r = 0; r < m; ++r) {
                const double a = t_(r, enter);
                if (a <= kPivotTol) continue;
                const double ratio = t_(r, cols()) / a;
                if (ratio < best_ratio - 1e-14 ||
                    (ratio <= best_ratio + 1e-14 && leave >= 0 && basis_[r] < basis_[leave])) {
                    best_ratio = std::min(ratio, best_ratio);
                    leave = r;
                }
            }
            if (leave < 0) return false;
            degenerate_run = best_ratio <= 1e-14 ? degenerate_run + 1 : 0;
            pivot(leave, enter);
        }
        throw SolverError("simplex iteration cap reached");
    }

    [[nodiscard]] VectorXd solution(Index n) const {
        VectorXd x = VectorXd::Zero(n);
        for (Index r = 0; r < static_cast<Index>(basis_.size()); ++r)
            if (basis_[r] < n) x(basis_[r]) = std::max(0.0, t_(r, t_.cols() - 1));
        return x;
    }

private:
    MatrixXd t_;
    std::vector<Index> basis_;
};

}  // namespace

LpResult solve_lp(const MatrixXd& A, const VectorXd& b, const VectorXd& c, std::span<const Index> initial_basis) {
    const Index m = A.rows();
    const Index n = A.cols();
    if (b.size() != m || c.size() != n) throw InvalidInput("LP dimensions do not agree");

    LpResult result;
    if (!initial_basis.empty()) {
        if (static_cast<Index>(initial_basis.size()) != m) throw InvalidInput("initial basis needs one column per row");
        MatrixXd table(m + 1, n + 1);
        table.topLeftCorner(m, n) = A;
        table.topRightCorner(m, 1) = b;
        Tableau tab(std::move(table), {initial_basis.begin(), initial_basis.end()});
        tab.price_out(c);
        if (!tab.run(n)) {
            result.status = LpStatus::Unbounded;
            return result;
        }
        result.status = LpStatus::Optimal;
        result.x = tab.solution(n);
        result.objective = c.dot(result.x);
        return result;
    }

    // Phase one with one artificial per row.
    MatrixXd table = MatrixXd::Zero(m + 1, n + m + 1);
    for (Index r = 0; r < m; ++r) {
        const double sign = b(r) < 0.0 ? -1.0 : 1.0;
        table.row(r).head(n) = sign * A.row(r);
        table(r, n + r) = 1.0;
        table(r, n + m) = sign * b(r);
    }
    std::vector<Index> basis(m);
    for (Index r = 0; r < m; ++r) basis[r] = n + r;
    Tableau tab(std::move(table), std::move(basis));

    VectorXd phase1_cost = VectorXd::Zero(n + m);
    phase1_cost.tail(m).setOnes();
    tab.price_out(phase1_cost);
    tab.run(n + m);
    const double infeasibility = -tab.table()(m, n + m);
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    if (infeasibility > 1e-9 * scale) {
        result.status = LpStatus::Infeasible;
        return result;
    }

    // Drive remaining artificials out of the basis where possible.
    for (Index r = 0; r < m; ++r) {
        if (tab.basis()[r] < n) continue;
        for (Index j = 0; j < n; ++j) {
            if (std::fabs(tab.table()(r, j)) > 1e-9) {
                tab.pivot(r, j);
                break;
            }
        }
    }

    VectorXd phase2_cost = VectorXd::Zero(n + m);
    phase2_cost.head(n) = c;
    tab.price_out(phase2_cost);
    if (!tab.run(n)) {
        result.status = LpStatus::Unbounded;
        return result;
    }
    result.status = LpStatus::Optimal;
    result.x = tab.solution(n);
    result.objective = c.dot(result.x);
    return result;
}

bool in_convex_hull(const MatrixXd& points, const VectorXd& point, double tol) {
    const Index dim = points.rows();
    const Index count = points.cols();
    if (count == 0) return false;
    MatrixXd A(dim + 1, count);
    A.topRows(dim) = points;
    A.row(dim).setOnes();
    VectorXd b(dim + 1);
    b.head(dim) = point;
    b(dim) = 1.0;
    const double scale = 1.0 + points.cwiseAbs().maxCoeff() + point.cwiseAbs().maxCoeff();
    // Feasibility only; tolerance folded into the phase-one residual test.
    A.topRows(dim) /= scale;
    b.head(dim) /= scale;
    const LpResult res = solve_lp(A, b, VectorXd::Zero(count));
    if (res.status != LpStatus::Optimal) return false;
    return (A * res.x - b).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace pqr
