#include "pqr/centering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pqr/errors.hpp"

namespace pqr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

template <std::size_t N>
double horner(const double (&coef)[N], double x) {
    double acc = coef[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) acc = acc * x + coef[i];
    return acc;
}

// log(1 - exp(x)) for x <= 0.
double log1mexp(double x) {
    if (x > -std::numbers::ln2) return std::log(-std::expm1(x));
    return std::log1p(-std::exp(x));
}

double normal_log_mass(double a, double b) {
    if (!(a < b)) return -kInf;
    if (a >= 0.0) return normal_log_mass(-b, -a);
    if (b <= 0.0) {
        const double lb = normal_log_cdf(b);
        const double la = normal_log_cdf(a);
        if (lb == -kInf) return -kInf;
        return lb + log1mexp(la - lb);
    }
    // a < 0 < b: the mass is at least min(Phi(b), 1 - Phi(a)) - 0.5 away from zero.
    return std::log1p(-(normal_cdf(a) + normal_cdf(-b)));
}

}  // namespace

double normal_pdf(double z) { return std::exp(normal_log_pdf(z)); }

double normal_log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_log_cdf(double z) {
    if (z == -kInf) return -kInf;
    if (z >= 0.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
    if (z > -30.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
    // Mills-ratio asymptotic series; truncation error below 1e-14 for z <= -30.
    const double w = 1.0 / (z * z);
    const double series = 1.0 + w * (-1.0 + w * (3.0 + w * (-15.0 + w * (105.0 + w * -945.0))));
    return normal_log_pdf(z) - std::log(-z) + std::log(series);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -kInf;
        if (p == 1.0) return kInf;
        return std::numeric_limits<double>::quiet_NaN();
    }
    static constexpr double a[] = {3.3871328727963666080e0,  1.3314166789178437745e+2, 1.9715909503065514427e+3,
                                   1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                   3.3430575583588128105e+4, 2.5090809287301226727e+3};
    static constexpr double b[] = {1.0,                      4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                   5.3941960214247511077e+3, 2.1213794301586595867e+4, 3.9307895800092710610e+4,
                                   2.8729085735721942674e+4, 5.2264952788528545610e+3};
    static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
                                   3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
                                   2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[] = {1.0,                      2.05319162663775882187e0, 1.67638483018380384940e0,
                                   6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
                                   5.47593808499534494600e-4, 1.05075007164441684324e-9};
    static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
                                   2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                   2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[] = {1.0,                      5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                   1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
                                   1.42151175831644588870e-7, 2.04426310338993978564e-15};

    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * horner(a, r) / horner(b, r);
    }
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = horner(c, r) / horner(d, r);
    } else {
        r -= 5.0;
        val = horner(e, r) / horner(f, r);
    }
    return q < 0.0 ? -val : val;
}

std::string_view to_string(CenteringKind kind) {
    switch (kind) {
        case CenteringKind::Uniform: return "uniform";
        case CenteringKind::Normal: return "normal";
        case CenteringKind::Gpd: return "gpd";
    }
    return "unknown";
}

CenteringKind parse_centering_kind(std::string_view name) {
    if (name == "uniform") return CenteringKind::Uniform;
    if (name == "normal") return CenteringKind::Normal;
    if (name == "gpd") return CenteringKind::Gpd;
    throw InvalidInput("unknown centering distribution '" + std::string(name) + "'");
}

CenteringDistribution CenteringDistribution::uniform() { return {CenteringKind::Uniform, 0.0, 1.0, 0.0}; }

CenteringDistribution CenteringDistribution::normal(double location, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(location))
        throw InvalidInput("normal centering needs a finite location and positive scale");
    return {CenteringKind::Normal, location, scale, 0.0};
}

CenteringDistribution CenteringDistribution::gpd(double threshold, double scale, double shape) {
    if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(threshold) || !std::isfinite(shape))
        throw InvalidInput("GPD centering needs a finite threshold, positive scale and finite shape");
    return {CenteringKind::Gpd, threshold, scale, shape};
}

double CenteringDistribution::lower_support() const noexcept {
    switch (kind_) {
        case CenteringKind::Uniform: return 0.0;
        case CenteringKind::Normal: return -kInf;
        case CenteringKind::Gpd: return location_;
    }
    return -kInf;
}

double CenteringDistribution::upper_support() const noexcept {
    switch (kind_) {
        case CenteringKind::Uniform: return 1.0;
        case CenteringKind::Normal: return kInf;
        case CenteringKind::Gpd:
            return shape_ < -kGpdExponentialLimit ? location_ - scale_ / shape_ : kInf;
    }
    return kInf;
}

double CenteringDistribution::gpd_log_survival(double y) const noexcept {
    const double z = (y - location_) / scale_;
    if (z <= 0.0) return 0.0;
    if (std::fabs(shape_) < kGpdExponentialLimit) return -z;
    const double arg = shape_ * z;
    if (arg <= -1.0) return -kInf;
    return -std::log1p(arg) / shape_;
}

double CenteringDistribution::quantile(double tau) const {
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("quantile level must lie in (0,1)");
    switch (kind_) {
        case CenteringKind::Uniform: return tau;
        case CenteringKind::Normal: return location_ + scale_ * normal_quantile(tau);
        case CenteringKind::Gpd: {
            const double log_tail = std::log1p(-tau);
            if (std::fabs(shape_) < kGpdExponentialLimit) return location_ - scale_ * log_tail;
            return location_ + scale_ * std::expm1(-shape_ * log_tail) / shape_;
        }
    }
    return 0.0;
}

double CenteringDistribution::cdf(double y) const noexcept {
    switch (kind_) {
        case CenteringKind::Uniform: return y <= 0.0 ? 0.0 : (y >= 1.0 ? 1.0 : y);
        case CenteringKind::Normal: return normal_cdf((y - location_) / scale_);
        case CenteringKind::Gpd: return -std::expm1(gpd_log_survival(y));
    }
    return 0.0;
}

double CenteringDistribution::log_density(double y) const noexcept {
    switch (kind_) {
        case CenteringKind::Uniform: return (y >= 0.0 && y <= 1.0) ? 0.0 : -kInf;
        case CenteringKind::Normal: return normal_log_pdf((y - location_) / scale_) - std::log(scale_);
        case CenteringKind::Gpd: {
            const double z = (y - location_) / scale_;
            if (z < 0.0) return -kInf;
            if (std::fabs(shape_) < kGpdExponentialLimit) return -std::log(scale_) - z;
            const double arg = shape_ * z;
            if (arg <= -1.0) return -kInf;
            return -std::log(scale_) - (1.0 + 1.0 / shape_) * std::log1p(arg);
        }
    }
    return -kInf;
}

double CenteringDistribution::density(double y) const noexcept { return std::exp(log_density(y)); }

double CenteringDistribution::log_mass(double a, double b) const noexcept {
    if (!(a < b)) return -kInf;
    switch (kind_) {
        case CenteringKind::Uniform: {
            const double width = std::min(b, 1.0) - std::max(a, 0.0);
            return width > 0.0 ? std::log(width) : -kInf;
        }
        case CenteringKind::Normal:
            return normal_log_mass((a - location_) / scale_, (b - location_) / scale_);
        case CenteringKind::Gpd: {
            const double la = gpd_log_survival(a);
            const double lb = gpd_log_survival(b);
            if (la == -kInf) return -kInf;
            if (lb == -kInf) return la;
            return la + log1mexp(lb - la);
        }
    }
    return -kInf;
}

std::vector<double> transform_unit(const CenteringDistribution& dist, std::span<const double> unit_quantiles) {
    std::vector<double> out(unit_quantiles.size());
    for (std::size_t t = 0; t < unit_quantiles.size(); ++t) out[t] = dist.quantile(unit_quantiles[t]);
    return out;
}

double transformed_prior_logdensity(const PyramidTree& tree, const CenteringDistribution& dist,
                                    std::span<const double> quantiles) {
    if (quantiles.size() != tree.grid.size()) throw InvalidInput("quantile vector does not match the grid");
    const double lo_support = dist.lower_support();
    const double hi_support = dist.upper_support();
    for (std::size_t t = 0; t < quantiles.size(); ++t) {
        if (!(quantiles[t] > lo_support && quantiles[t] < hi_support)) return -kInf;
        if (t > 0 && !(quantiles[t] > quantiles[t - 1])) return -kInf;
    }

    double total = 0.0;
    for (const auto& node : tree.nodes) {
        const double q = quantiles[node.index];
        const double lo = node.left_index == kBoundary ? lo_support : quantiles[node.left_index];
        const double hi = node.right_index == kBoundary ? hi_support : quantiles[node.right_index];
        // Split V = (F(q) - F(lo)) / (F(hi) - F(lo)), evaluated through interval masses.
        const double log_width = dist.log_mass(lo, hi);
        const double log_v = dist.log_mass(lo, q) - log_width;
        const double log_1mv = dist.log_mass(q, hi) - log_width;
        if (!std::isfinite(log_v) || !std::isfinite(log_1mv)) return -kInf;
        total += (node.alpha - 1.0) * log_v + (node.beta - 1.0) * log_1mv - node.log_beta_fn
                 + dist.log_density(q) - log_width;
    }
    return total;
}

}  // namespace pqr
