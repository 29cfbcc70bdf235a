#include "pqr/dataset.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "pqr/errors.hpp"

namespace pqr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

PivotFrame::PivotFrame(VectorXd origin, MatrixXd basis) : origin_(std::move(origin)), basis_(std::move(basis)) {
    if (basis_.rows() != origin_.size() || basis_.cols() != origin_.size())
        throw InvalidInput("pivot frame basis must be square and match the origin");
    if (origin_.size() == 0) return;
    Eigen::FullPivLU<MatrixXd> lu(basis_);
    if (!lu.isInvertible()) throw DegenerateData("pivot locations are affinely dependent");
    inverse_ = lu.inverse();
}

VectorXd PivotFrame::to_pivot(const VectorXd& raw) const { return inverse_ * (raw - origin_); }

VectorXd PivotFrame::to_raw(const VectorXd& z) const { return origin_ + basis_ * z; }

VectorXd PivotFrame::pivot_location(Index p) const {
    return p == 0 ? origin_ : VectorXd(origin_ + basis_.col(p - 1));
}

VectorXd PivotFrame::barycentric(const VectorXd& z) {
    VectorXd w(z.size() + 1);
    w(0) = 1.0 - z.sum();
    w.tail(z.size()) = z;
    return w;
}

Dataset make_dataset(VectorXd y, MatrixXd x, std::vector<std::string> covariate_names) {
    if (x.rows() != y.size()) {
        if (!(x.cols() == 0 && x.rows() == 0)) throw InvalidInput("response and covariate row counts differ");
        x.resize(y.size(), 0);
    }
    if (!y.allFinite() || !x.allFinite()) throw InvalidInput("responses and covariates must be finite");
    const Index dim = x.cols();
    if (dim > 0 && y.size() <= dim)
        throw InvalidInput("need more observations than covariates (N=" + std::to_string(y.size()) +
                           ", P=" + std::to_string(dim) + ")");

    Dataset data;
    data.y = std::move(y);
    data.x = std::move(x);
    if (covariate_names.empty())
        for (Index p = 0; p < dim; ++p) covariate_names.push_back("x" + std::to_string(p + 1));
    if (static_cast<Index>(covariate_names.size()) != dim) throw InvalidInput("one name per covariate is required");
    data.covariate_names = std::move(covariate_names);

    data.hull = compute_hull(data.x);
    const PivotChoice choice = choose_pivots(data.hull);
    data.frame = choice.frame;

    data.z.resize(data.size(), dim);
    for (Index i = 0; i < data.size(); ++i) data.z.row(i) = data.frame.to_pivot(data.x.row(i).transpose()).transpose();

    Index extra = 0;
    for (bool pivotal : data.hull.pivotal) extra += pivotal ? 0 : 1;
    data.constraint_weights.resize(extra, dim + 1);
    Index row = 0;
    for (Index v = 0; v < data.hull.size(); ++v) {
        if (data.hull.pivotal[static_cast<std::size_t>(v)]) continue;
        const VectorXd zv = data.frame.to_pivot(data.hull.vertices.col(v));
        data.constraint_weights.row(row++) = PivotFrame::barycentric(zv).transpose();
    }
    return data;
}

}  // namespace pqr
