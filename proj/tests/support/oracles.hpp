#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pqr::testing {

/// One-sample Kolmogorov-Smirnov statistic of `sample` against `cdf`.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

/// Asymptotic p-value of the KS statistic with Stephens' small-sample correction.
inline double ks_pvalue(double d, std::size_t n) {
    const double rn = std::sqrt(static_cast<double>(n));
    const double lambda = (rn + 0.12 + 0.11 / rn) * d;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

/// Adaptive Gauss-Kronrod integral on a finite interval.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, tol);
}

/// Integral of f over [a, inf) by an exp-sinh rule.
inline double integrate_upper_tail(const std::function<double(double)>& f, double a, double tol = 1e-12) {
    boost::math::quadrature::exp_sinh<double> rule;
    return rule.integrate([&](double u) { return f(a + u); }, 0.0, std::numeric_limits<double>::infinity(), tol);
}

/// Integral of f over (-inf, b].
inline double integrate_lower_tail(const std::function<double(double)>& f, double b, double tol = 1e-12) {
    boost::math::quadrature::exp_sinh<double> rule;
    return rule.integrate([&](double u) { return f(b - u); }, 0.0, std::numeric_limits<double>::infinity(), tol);
}

}  // namespace pqr::testing
