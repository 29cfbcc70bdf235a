#include "pqr/noncrossing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "pqr/errors.hpp"
#include "pqr/simplex.hpp"

namespace pqr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Error-free transformations for the exact orientation fallback.
struct Pair {
    double hi, lo;
};

Pair two_sum(double a, double b) {
    const double x = a + b;
    const double bv = x - a;
    const double av = x - bv;
    return {x, (a - av) + (b - bv)};
}

Pair two_diff(double a, double b) {
    const double x = a - b;
    const double bv = a - x;
    const double av = x + bv;
    return {x, (a - av) + (bv - b)};
}

Pair two_product(double a, double b) {
    const double x = a * b;
    return {x, std::fma(a, b, -x)};
}

// Adds `term` into a nonoverlapping expansion kept in increasing magnitude.
void grow_expansion(std::vector<double>& e, double term) {
    double q = term;
    for (double& component : e) {
        const Pair s = two_sum(q, component);
        component = s.lo;
        q = s.hi;
    }
    e.push_back(q);
}

int orient2d_exact(double ax, double ay, double bx, double by, double cx, double cy) {
    const Pair acx = two_diff(ax, cx), bcy = two_diff(by, cy);
    const Pair acy = two_diff(ay, cy), bcx = two_diff(bx, cx);
    std::vector<double> e;
    e.reserve(16);
    for (double u : {acx.hi, acx.lo})
        for (double v : {bcy.hi, bcy.lo}) {
            const Pair pr = two_product(u, v);
            grow_expansion(e, pr.lo);
            grow_expansion(e, pr.hi);
        }
    for (double u : {acy.hi, acy.lo})
        for (double v : {bcx.hi, bcx.lo}) {
            const Pair pr = two_product(u, v);
            grow_expansion(e, -pr.lo);
            grow_expansion(e, -pr.hi);
        }
    for (auto it = e.rbegin(); it != e.rend(); ++it)
        if (*it != 0.0) return *it > 0.0 ? 1 : -1;
    return 0;
}

MatrixXd bounding_box_corners(const VectorXd& lo, const VectorXd& hi) {
    const Index dim = lo.size();
    const Index count = Index{1} << dim;
    MatrixXd corners(dim, count);
    for (Index mask = 0; mask < count; ++mask)
        for (Index d = 0; d < dim; ++d) corners(d, mask) = (mask >> d) & 1 ? hi(d) : lo(d);
    return corners;
}

HullVertexSet box_hull(const MatrixXd& points, const VectorXd& lo, const VectorXd& hi, const std::string& reason) {
    HullVertexSet hull;
    hull.bounding_box = true;
    hull.vertices = bounding_box_corners(lo, hi);
    const VectorXd extent = hi - lo;
    const double box_volume = extent.prod();

    // Monte Carlo estimate of the hull's share of the box, for the trade-off diagnostic.
    std::mt19937_64 rng(20240917);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int probes = 128;
    int inside = 0;
    const MatrixXd cloud = points.transpose();
    for (int k = 0; k < probes; ++k) {
        VectorXd probe(lo.size());
        for (Index d = 0; d < lo.size(); ++d) probe(d) = lo(d) + extent(d) * unif(rng);
        if (in_convex_hull(cloud, probe)) ++inside;
    }
    std::ostringstream msg;
    msg << reason << "; using covariate bounding box with " << hull.vertices.cols() << " vertices, box volume "
        << box_volume << ", estimated hull volume " << box_volume * inside / probes << " (" << inside << "/" << probes
        << " probes inside)";
    hull.diagnostic = msg.str();
    return hull;
}

MatrixXd monotone_chain(const MatrixXd& points) {
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(static_cast<std::size_t>(points.rows()));
    for (Index i = 0; i < points.rows(); ++i) pts.emplace_back(points(i, 0), points(i, 1));
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) {
        MatrixXd out(2, static_cast<Index>(pts.size()));
        for (std::size_t i = 0; i < pts.size(); ++i) out.col(static_cast<Index>(i)) = pts[i];
        return out;
    }

    std::vector<Eigen::Vector2d> chain(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && orient2d(chain[k - 2], chain[k - 1], pts[i]) <= 0) --k;
        chain[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && orient2d(chain[k - 2], chain[k - 1], pts[i]) <= 0) --k;
        chain[k++] = pts[i];
    }
    chain.resize(k - 1);
    MatrixXd out(2, static_cast<Index>(chain.size()));
    for (std::size_t i = 0; i < chain.size(); ++i) out.col(static_cast<Index>(i)) = chain[i];
    return out;
}

MatrixXd lp_extreme_points(const MatrixXd& points) {
    // Deduplicate, then keep the points that are not convex combinations of the rest.
    std::vector<VectorXd> pts;
    for (Index i = 0; i < points.rows(); ++i) {
        VectorXd p = points.row(i).transpose();
        if (std::none_of(pts.begin(), pts.end(), [&](const VectorXd& q) { return q == p; })) pts.push_back(p);
    }
    const Index dim = points.cols();
    std::vector<VectorXd> extreme;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        MatrixXd others(dim, static_cast<Index>(pts.size() - 1));
        Index c = 0;
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (j != i) others.col(c++) = pts[j];
        if (!in_convex_hull(others, pts[i])) extreme.push_back(pts[i]);
    }
    MatrixXd out(dim, static_cast<Index>(extreme.size()));
    for (std::size_t i = 0; i < extreme.size(); ++i) out.col(static_cast<Index>(i)) = extreme[i];
    return out;
}

Index affine_rank(const MatrixXd& points) {
    if (points.rows() < 2) return 0;
    MatrixXd centered = points.rowwise() - points.row(0);
    Eigen::ColPivHouseholderQR<MatrixXd> qr(centered);
    qr.setThreshold(1e-10);
    return qr.rank();
}

double distance_to_affine_span(const VectorXd& point, const std::vector<VectorXd>& chosen) {
    VectorXd r = point - chosen.front();
    if (chosen.size() == 1) return r.norm();
    MatrixXd dirs(point.size(), static_cast<Index>(chosen.size() - 1));
    for (std::size_t k = 1; k < chosen.size(); ++k) dirs.col(static_cast<Index>(k - 1)) = chosen[k] - chosen.front();
    const VectorXd coef = dirs.colPivHouseholderQr().solve(r);
    return (r - dirs * coef).norm();
}

}  // namespace

int orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    const double left = (a.x() - c.x()) * (b.y() - c.y());
    const double right = (a.y() - c.y()) * (b.x() - c.x());
    const double det = left - right;
    const double bound = 3.3306690738754716e-16 * (std::fabs(left) + std::fabs(right));
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return orient2d_exact(a.x(), a.y(), b.x(), b.y(), c.x(), c.y());
}

HullVertexSet compute_hull(const MatrixXd& points) {
    const Index dim = points.cols();
    HullVertexSet hull;
    if (dim == 0) {
        hull.vertices.resize(0, 0);
        return hull;
    }
    if (dim > 10) throw InvalidInput("at most 10 covariates are supported");
    if (points.rows() == 0) throw DegenerateData("no covariate rows");

    const VectorXd lo = points.colwise().minCoeff();
    const VectorXd hi = points.colwise().maxCoeff();
    if ((hi - lo).maxCoeff() <= 0.0) throw DegenerateData("all covariate points are identical");

    if (dim == 1) {
        hull.vertices.resize(1, 2);
        hull.vertices << lo(0), hi(0);
        return hull;
    }
    if (affine_rank(points) < dim) {
        if ((hi - lo).minCoeff() <= 0.0)
            throw DegenerateData("covariates are constant along an axis; the region has no interior");
        return box_hull(points, lo, hi, "covariate points are affinely degenerate");
    }
    if (dim == 2) {
        hull.vertices = monotone_chain(points);
        return hull;
    }
    if (dim == 3) {
        hull.vertices = lp_extreme_points(points);
        return hull;
    }
    return box_hull(points, lo, hi, "exact hull enumeration skipped for more than 3 covariates");
}

PivotChoice choose_pivots(HullVertexSet& hull) {
    const Index dim = hull.dimension();
    const Index count = hull.size();
    hull.pivotal.assign(static_cast<std::size_t>(count), false);
    PivotChoice choice;
    if (dim == 0) return choice;

    std::vector<Index> picked;
    if (dim == 1) {
        const Index lo = hull.vertices(0, 0) <= hull.vertices(0, 1) ? 0 : 1;
        picked = {lo, 1 - lo};
    } else if (hull.bounding_box) {
        // Corner bit d set means coordinate d at the upper end; see bounding_box_corners.
        picked.push_back(0);
        for (Index d = 0; d < dim; ++d) picked.push_back(Index{1} << d);
    } else {
        Index seed = 0;
        for (Index v = 1; v < count; ++v) {
            const auto a = hull.vertices.col(v);
            const auto b = hull.vertices.col(seed);
            if (std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end())) seed = v;
        }
        picked.push_back(seed);
        std::vector<VectorXd> chosen{hull.vertices.col(seed)};
        while (static_cast<Index>(picked.size()) < dim + 1) {
            Index best = -1;
            double best_dist = 0.0;
            for (Index v = 0; v < count; ++v) {
                if (std::find(picked.begin(), picked.end(), v) != picked.end()) continue;
                const double dist = distance_to_affine_span(hull.vertices.col(v), chosen);
                if (dist > best_dist) {
                    best_dist = dist;
                    best = v;
                }
            }
            if (best < 0) throw DegenerateData("hull vertices do not span the covariate space");
            picked.push_back(best);
            chosen.push_back(hull.vertices.col(best));
        }
    }

    const VectorXd origin = hull.vertices.col(picked[0]);
    MatrixXd basis(dim, dim);
    for (Index p = 1; p <= dim; ++p) basis.col(p - 1) = hull.vertices.col(picked[static_cast<std::size_t>(p)]) - origin;
    choice.frame = PivotFrame(origin, basis);
    choice.vertex_of_pivot = picked;
    for (Index v : picked) hull.pivotal[static_cast<std::size_t>(v)] = true;
    return choice;
}

ProposalBounds vertex_bounds_weighted(const RegressionState& state, const VectorXd& weights, Index p, Index t,
                                      double lower_edge, double upper_edge) {
    ProposalBounds out;
    const double w = weights(p);
    if (w == 0.0) return out;
    const Index levels = state.level_count();
    const auto at = [&](Index level) { return weights.dot(state.quantiles.col(level)); };
    const double rest = at(t) - w * state.quantiles(p, t);
    const double below = t > 0 ? at(t - 1) : lower_edge;
    const double above = t + 1 < levels ? at(t + 1) : upper_edge;
    const double from_below = (below - rest) / w;
    const double from_above = (above - rest) / w;
    if (w > 0.0) {
        out.lower = std::isfinite(below) ? from_below : -kInf;
        out.upper = std::isfinite(above) ? from_above : kInf;
    } else {
        out.lower = std::isfinite(above) ? from_above : -kInf;
        out.upper = std::isfinite(below) ? from_below : kInf;
    }
    return out;
}

ProposalBounds vertex_bounds(const RegressionState& state, const VectorXd& vertex, Index p, Index t) {
    return vertex_bounds_weighted(state, PivotFrame::barycentric(vertex), p, t);
}

namespace {

ProposalBounds own_window(const RegressionState& state, Index p, Index t, const SupportEdges& edges) {
    VectorXd unit = VectorXd::Zero(state.pivot_count());
    unit(p) = 1.0;
    double lower_edge = -kInf, upper_edge = kInf;
    if (edges) std::tie(lower_edge, upper_edge) = edges(unit);
    return vertex_bounds_weighted(state, unit, p, t, lower_edge, upper_edge);
}

void check_nonempty(const ProposalBounds& b, Index p, Index t) {
    if (b.empty()) {
        std::ostringstream msg;
        msg << "empty proposal interval for pivot " << p << ", level " << t << ": [" << b.lower << ", " << b.upper
            << "]; the current state crosses";
        throw LogicError(msg.str());
    }
}

}  // namespace

ProposalBounds combined_bounds(const RegressionState& state, const MatrixXd& vertex_weights, Index p, Index t,
                               const SupportEdges& edges) {
    ProposalBounds out = own_window(state, p, t, edges);
    for (Index v = 0; v < vertex_weights.rows(); ++v) {
        const VectorXd w = vertex_weights.row(v).transpose();
        double lower_edge = -kInf, upper_edge = kInf;
        if (edges) std::tie(lower_edge, upper_edge) = edges(w);
        const ProposalBounds b = vertex_bounds_weighted(state, w, p, t, lower_edge, upper_edge);
        out.lower = std::max(out.lower, b.lower);
        out.upper = std::min(out.upper, b.upper);
    }
    check_nonempty(out, p, t);
    return out;
}

ProposalBounds combined_bounds_matrix(const RegressionState& state, const MatrixXd& vertex_weights, Index p, Index t,
                                      const SupportEdges& edges) {
    ProposalBounds out = own_window(state, p, t, edges);
    const Index count = vertex_weights.rows();
    if (count == 0) {
        check_nonempty(out, p, t);
        return out;
    }
    const Index levels = state.level_count();
    const Eigen::ArrayXd w = vertex_weights.col(p).array();
    const Eigen::ArrayXd rest = (vertex_weights * state.quantiles.col(t)).array() - w * state.quantiles(p, t);
    Eigen::ArrayXd below(count), above(count);
    if (t > 0) below = (vertex_weights * state.quantiles.col(t - 1)).array();
    if (t + 1 < levels) above = (vertex_weights * state.quantiles.col(t + 1)).array();
    if (edges && (t == 0 || t + 1 == levels)) {
        for (Index v = 0; v < count; ++v) {
            const auto [lo_edge, hi_edge] = edges(vertex_weights.row(v).transpose());
            if (t == 0) below(v) = lo_edge;
            if (t + 1 == levels) above(v) = hi_edge;
        }
    } else {
        if (t == 0) below.setConstant(-kInf);
        if (t + 1 == levels) above.setConstant(kInf);
    }
    const Eigen::ArrayXd from_below = (below - rest) / w;
    const Eigen::ArrayXd from_above = (above - rest) / w;
    for (Index v = 0; v < count; ++v) {
        if (w(v) == 0.0) continue;
        const bool pos = w(v) > 0.0;
        const double lo_src = pos ? below(v) : above(v);
        const double hi_src = pos ? above(v) : below(v);
        if (std::isfinite(lo_src)) out.lower = std::max(out.lower, pos ? from_below(v) : from_above(v));
        if (std::isfinite(hi_src)) out.upper = std::min(out.upper, pos ? from_above(v) : from_below(v));
    }
    check_nonempty(out, p, t);
    return out;
}

bool noncrossing_at(const RegressionState& state, const MatrixXd& vertex_weights) {
    if (vertex_weights.rows() == 0) return true;
    const MatrixXd at = vertex_weights * state.quantiles;
    for (Index v = 0; v < at.rows(); ++v)
        for (Index t = 1; t < at.cols(); ++t)
            if (!(at(v, t) > at(v, t - 1))) return false;
    return true;
}

}  // namespace pqr
