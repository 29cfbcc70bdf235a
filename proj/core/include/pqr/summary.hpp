#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "pqr/pivot_frame.hpp"
#include "pqr/quantile_pyramid.hpp"
#include "pqr/state.hpp"

namespace pqr {

/// Type-7 sample quantile (linear interpolation between order statistics) of sorted data.
double sorted_quantile(std::span<const double> sorted, double prob);

struct IntervalSummary {
    double mean = 0.0;
    double sd = 0.0;
    double median = 0.0;
    double lower = 0.0;   // (1 - credibility) / 2 sample quantile
    double upper = 0.0;   // (1 + credibility) / 2 sample quantile
};

/// Throws InvalidInput for empty draws or credibility outside (0, 1).
IntervalSummary summarize_draws(std::span<const double> draws, double credibility);

struct CoefficientSummary {
    Eigen::Index coefficient = 0;  // 0 = intercept, j = slope of covariate j (or knot j for splines)
    Eigen::Index level = 0;        // grid index
    double tau = 0.0;
    IntervalSummary stats;
};

/// Draws of the raw-unit coefficients of level t: one row per state, (intercept, slopes).
Eigen::MatrixXd coefficient_trace(const std::vector<RegressionState>& states, const PivotFrame& frame,
                                  Eigen::Index t);

/// Per (coefficient, level) summaries of a linear model, level-major.
std::vector<CoefficientSummary> summarize(const std::vector<RegressionState>& states, const PivotFrame& frame,
                                          const QuantileGrid& grid, double credibility);

/// Per (knot, level) summaries of the knot quantiles of a spline model, level-major.
std::vector<CoefficientSummary> summarize_knots(const std::vector<RegressionState>& states, const QuantileGrid& grid,
                                                double credibility);

}  // namespace pqr
