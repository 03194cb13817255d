#ifndef STRAINTAIL_KERNEL_HPP
#define STRAINTAIL_KERNEL_HPP

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>

#include "straintail/errors.hpp"
#include "straintail/numerics.hpp"

namespace straintail {

enum class KernelFamily { SquaredExponential, CustomAnalytic };

/// Stationary unit-variance correlation C(x) together with its spectral
/// moments: delta = -C''(0) (variance of the field derivative) and
/// a4 = C''''(0) (variance of the second derivative). b6 is the sixth-order
/// Taylor coefficient in C(x) = 1 - delta x^2/2 + a4 x^4/24 - b6 x^6 + o(x^6),
/// kept for diagnostics only. Admissibility requires a4 > delta^2.
struct StationaryKernel {
    KernelFamily family = KernelFamily::SquaredExponential;
    std::function<double(double)> C;
    double delta = 1.0;
    double a4 = 3.0;
    double b6 = std::numeric_limits<double>::quiet_NaN();
    double length_scale = 1.0; // meaningful for the squared-exponential family

    double operator()(double x) const { return C(std::abs(x)); }
};

/// C(x) evaluated at lag x (forced even in x).
inline double eval_cov(const StationaryKernel& k, double x) { return k(x); }

struct SpectralMoments {
    double delta;
    double a4;
    double b6;
};

inline SpectralMoments spectral_moments(const StationaryKernel& k)
{
    return {k.delta, k.a4, k.b6};
}

/// Covariance of (xi(x), xi'(x), xi''(x)) at any fixed x:
/// [[1, 0, -delta], [0, delta, 0], [-delta, 0, a4]].
inline std::array<std::array<double, 3>, 3> joint_deriv_cov(const StationaryKernel& k)
{
    return {{{1.0, 0.0, -k.delta},
             {0.0, k.delta, 0.0},
             {-k.delta, 0.0, k.a4}}};
}

/// det of joint_deriv_cov: delta * (a4 - delta^2). Positive iff admissible.
inline double joint_deriv_cov_det(const StationaryKernel& k)
{
    return k.delta * (k.a4 - k.delta * k.delta);
}

/// exp(-x^2 / (2 l^2)): delta = l^-2, a4 = 3 l^-4, b6 = 1/(48 l^6).
inline StationaryKernel make_se_kernel(double length_scale)
{
    if (!(length_scale > 0.0))
        throw ConfigError("make_se_kernel: length_scale must be positive");
    StationaryKernel k;
    k.family = KernelFamily::SquaredExponential;
    const double l2 = length_scale * length_scale;
    k.C = [l2](double x) { return std::exp(-0.5 * x * x / l2); };
    k.delta = 1.0 / l2;
    k.a4 = 3.0 / (l2 * l2);
    k.b6 = 1.0 / (48.0 * l2 * l2 * l2);
    k.length_scale = length_scale;
    return k;
}

namespace detail {

/// Finite-difference checks of the stated spectral moments, with step sizes
/// scaled to the correlation length 1/sqrt(delta).
inline std::pair<double, double> fd_spectral_moments(const std::function<double(double)>& C,
                                                     double delta_hint)
{
    const double scale = 1.0 / std::sqrt(delta_hint);
    const double d2 = second_derivative(C, 0.0, 0.02 * scale);
    const double d4 = fourth_derivative(C, 0.0, 0.03 * scale);
    return {-d2, d4};
}

} // namespace detail

/// Wrap a user-supplied analytic correlation. The stated delta and a4 are
/// validated against Richardson-extrapolated central differences (1e-6
/// relative); a4 <= delta^2 is rejected outright.
inline StationaryKernel make_custom_kernel(std::function<double(double)> C,
                                           double delta, double a4,
                                           double b6 = std::numeric_limits<double>::quiet_NaN())
{
    if (!(delta > 0.0) || !(a4 > 0.0))
        throw ConfigError("make_custom_kernel: delta and a4 must be positive");
    if (!(a4 > delta * delta))
        throw AssumptionError("make_custom_kernel: need a4 > delta^2 (degenerate joint law otherwise)");
    if (std::abs(C(0.0) - 1.0) > 1e-12)
        throw AssumptionError("make_custom_kernel: C(0) must equal 1 (unit variance)");
    const auto [fd_delta, fd_a4] = detail::fd_spectral_moments(C, delta);
    if (std::abs(fd_delta - delta) > 1e-6 * delta) {
        std::ostringstream os;
        os << "make_custom_kernel: stated delta=" << delta
           << " disagrees with -C''(0)=" << fd_delta;
        throw AssumptionError(os.str());
    }
    if (std::abs(fd_a4 - a4) > 1e-6 * a4) {
        std::ostringstream os;
        os << "make_custom_kernel: stated a4=" << a4
           << " disagrees with C''''(0)=" << fd_a4;
        throw AssumptionError(os.str());
    }
    StationaryKernel k;
    k.family = KernelFamily::CustomAnalytic;
    k.C = std::move(C);
    k.delta = delta;
    k.a4 = a4;
    k.b6 = b6;
    k.length_scale = 1.0 / std::sqrt(delta);
    return k;
}

/// Outcome of the admissibility checks on a kernel over lags [0, L].
struct AssumptionReport {
    bool unit_variance_ok = false; // C(0) = 1, |C| <= 1 on the lag grid
    bool expansion_ok = false;     // quartic fit recovers delta/a4; a4 > delta^2
    bool monotone_ok = false;      // C non-increasing on [0, L]
    double fitted_delta = 0.0;
    double fitted_a4 = 0.0;
    std::string detail;

    bool all_ok() const { return unit_variance_ok && expansion_ok && monotone_ok; }
};

/// Grid checks of the three kernel assumptions: unit variance and |C| <= 1;
/// the short-lag quartic expansion (fitted on the three smallest lags) with
/// a4 > delta^2; monotone decay of C. Purely diagnostic: callers decide
/// whether a failure is fatal.
inline AssumptionReport check_assumptions(const StationaryKernel& k, double L, int grid_n = 512)
{
    if (!(L > 0.0) || grid_n < 8)
        throw ConfigError("check_assumptions: need L > 0 and grid_n >= 8");
    AssumptionReport r;
    std::ostringstream detail;

    const double h = L / grid_n;
    bool unit = std::abs(k(0.0) - 1.0) <= 1e-12;
    bool bounded = true, monotone = true;
    double prev = k(0.0);
    for (int i = 1; i <= grid_n; ++i) {
        const double c = k(i * h);
        if (std::abs(c) > 1.0 + 1e-12) bounded = false;
        if (c > prev + 1e-12) monotone = false;
        prev = c;
    }
    r.unit_variance_ok = unit && bounded;
    if (!unit) detail << "C(0) != 1; ";
    if (!bounded) detail << "|C| exceeds 1 on the lag grid; ";
    r.monotone_ok = monotone;
    if (!monotone) detail << "C increases somewhere on [0, L]; ";

    // least-squares fit of 1 - C(x) = delta x^2/2 - a4 x^4/24 on the three
    // smallest lags; meaningful only if the grid resolves the correlation
    // length (h * sqrt(delta) small)
    const double hfit = std::min(h, 0.05 / std::sqrt(k.delta));
    double s22 = 0, s24 = 0, s44 = 0, r2 = 0, r4 = 0;
    for (int j = 1; j <= 3; ++j) {
        const double x = j * hfit;
        const double u2 = 0.5 * x * x, u4 = -x * x * x * x / 24.0;
        const double y = 1.0 - k(x);
        s22 += u2 * u2; s24 += u2 * u4; s44 += u4 * u4;
        r2 += u2 * y;   r4 += u4 * y;
    }
    const double det = s22 * s44 - s24 * s24;
    if (det != 0.0) {
        r.fitted_delta = (r2 * s44 - r4 * s24) / det;
        r.fitted_a4 = (s22 * r4 - s24 * r2) / det;
    }
    const bool fit_ok = std::abs(r.fitted_delta - k.delta) <= 1e-3 * k.delta
                     && std::abs(r.fitted_a4 - k.a4) <= 1e-2 * k.a4;
    const bool strict = k.a4 > k.delta * k.delta;
    r.expansion_ok = fit_ok && strict;
    if (!fit_ok) detail << "quartic fit does not recover the stated moments; ";
    if (!strict) detail << "a4 <= delta^2; ";

    r.detail = detail.str();
    return r;
}

} // namespace straintail

#endif
