#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pqr/pivot_frame.hpp"
#include "pqr/state.hpp"

namespace pqr {

/// Sign of the orientation determinant of (a, b, c): +1 counter-clockwise,
/// -1 clockwise, 0 collinear. Exact for all finite double inputs.
int orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c);

/// Vertices of the covariate region where non-crossing is enforced.
struct HullVertexSet {
    Eigen::MatrixXd vertices;    // P x V, raw covariate units
    std::vector<bool> pivotal;   // filled once a pivot frame is chosen
    bool bounding_box = false;   // true when the box replaced the exact hull (P > 3 or degenerate input)
    std::string diagnostic;      // human-readable note about the fallback, empty otherwise

    [[nodiscard]] Eigen::Index dimension() const { return vertices.rows(); }
    [[nodiscard]] Eigen::Index size() const { return vertices.cols(); }
};

/// Hull of the rows of `points` (N x P).
///
/// P = 1: the two endpoints. P = 2: monotone chain with exact orientation tests,
/// collinear boundary points dropped. P = 3: a point is a vertex iff it is not a
/// convex combination of the others (LP test). P > 3 (up to 10) or affinely
/// degenerate input: corners of the bounding box.
/// Throws DegenerateData when all points coincide, InvalidInput for P > 10.
HullVertexSet compute_hull(const Eigen::MatrixXd& points);

struct PivotChoice {
    PivotFrame frame;
    std::vector<Eigen::Index> vertex_of_pivot;  // index into hull.vertices, one per pivot
};

/// Chooses P+1 hull vertices as pivots and marks them in `hull.pivotal`.
///
/// P = 1: minimum then maximum. Bounding boxes: the lower corner and its P
/// adjacent corners, so the box maps onto the unit cube. Otherwise greedy
/// farthest-point traversal seeded at the lexicographic minimum, each step taking
/// the vertex farthest from the affine span of those already chosen.
PivotChoice choose_pivots(HullVertexSet& hull);

struct ProposalBounds {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    [[nodiscard]] bool empty() const noexcept { return !(lower < upper); }
    [[nodiscard]] double width() const noexcept { return upper - lower; }
};

/// Support limits (lower, upper) of the centering distribution at a point with
/// the given pivot weights; the outer neighbours of the first and last level.
using SupportEdges = std::function<std::pair<double, double>(const Eigen::VectorXd& weights)>;

/// Bounds on quantiles(p, t) keeping level t strictly between its neighbours at a
/// point with pivot weights `weights`. Weight zero gives the whole line; a
/// negative weight swaps the roles of the two neighbours.
ProposalBounds vertex_bounds_weighted(const RegressionState& state, const Eigen::VectorXd& weights, Eigen::Index p,
                                      Eigen::Index t, double lower_edge = -std::numeric_limits<double>::infinity(),
                                      double upper_edge = std::numeric_limits<double>::infinity());

/// Same, for a vertex given in pivot coordinates of a linear model.
ProposalBounds vertex_bounds(const RegressionState& state, const Eigen::VectorXd& vertex, Eigen::Index p,
                             Eigen::Index t);

/// Intersection of the pivot's own monotonicity window with the bounds from
/// every row of `vertex_weights` (V x K, one constraint point per row).
/// Throws LogicError when the result is empty, which means the current state
/// was already infeasible.
ProposalBounds combined_bounds(const RegressionState& state, const Eigen::MatrixXd& vertex_weights, Eigen::Index p,
                               Eigen::Index t, const SupportEdges& edges = {});

/// Matrix formulation of combined_bounds: all vertex quantiles in one product.
ProposalBounds combined_bounds_matrix(const RegressionState& state, const Eigen::MatrixXd& vertex_weights,
                                      Eigen::Index p, Eigen::Index t, const SupportEdges& edges = {});

/// True if quantiles are strictly increasing at every row of `vertex_weights`.
bool noncrossing_at(const RegressionState& state, const Eigen::MatrixXd& vertex_weights);

}  // namespace pqr
