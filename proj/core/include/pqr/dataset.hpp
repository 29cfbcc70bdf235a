#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "pqr/noncrossing.hpp"
#include "pqr/pivot_frame.hpp"

namespace pqr {

/// Responses, raw covariates and the derived pivot geometry.
struct Dataset {
    Eigen::VectorXd y;                    // N responses
    Eigen::MatrixXd x;                    // N x P raw covariates
    Eigen::MatrixXd z;                    // N x P pivot coordinates
    PivotFrame frame;
    HullVertexSet hull;
    Eigen::MatrixXd constraint_weights;   // non-pivotal hull vertices, pivot weights per row
    std::vector<std::string> covariate_names;

    [[nodiscard]] Eigen::Index size() const { return y.size(); }
    [[nodiscard]] Eigen::Index dimension() const { return x.cols(); }
};

/// Builds hull, pivot frame and constraint weights. Throws InvalidInput on
/// mismatched shapes or non-finite values, DegenerateData via compute_hull.
/// With P = 0 any N >= 0 is accepted.
Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd x, std::vector<std::string> covariate_names = {});

}  // namespace pqr
