#ifndef STRAINTAIL_NORMAL_HPP
#define STRAINTAIL_NORMAL_HPP

#include <array>
#include <cassert>
#include <cmath>
#include <limits>

namespace straintail {

inline constexpr double pi_v = 3.141592653589793238462643383279502884;

/// Standard normal density.
inline double normal_pdf(double z)
{
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * pi_v);
}

/// Standard normal CDF via erfc (keeps relative accuracy deep in the left tail).
inline double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Upper tail P(Z > z).
inline double normal_sf(double z)
{
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

namespace detail {

/// Laplace continued fraction for the Mills ratio Phi_bar(t)/phi(t), t > 0:
/// 1/(t + 1/(t + 2/(t + 3/(...)))). Accurate for t >= ~6.
inline double mills_ratio_cf(double t)
{
    assert(t > 0.0);
    double r = 0.0;
    for (int k = 60; k >= 1; --k)
        r = k / (t + r);
    return 1.0 / (t + r);
}

} // namespace detail

/// Hazard q(z) = phi(z)/Phi(z). Direct ratio for z > -8; continued-fraction
/// branch below, where Phi underflows / loses relative precision. Never NaN.
inline double normal_hazard_lower(double z)
{
    if (z == std::numeric_limits<double>::infinity())
        return 0.0;
    if (z > -8.0)
        return normal_pdf(z) / normal_cdf(z);
    // Phi(z) = Phi_bar(-z) = phi(-z) * mills(-z), and phi(-z) = phi(z)
    return 1.0 / detail::mills_ratio_cf(-z);
}

/// log P(Z > z), finite for all z (asymptotic branch once erfc underflows).
inline double log_normal_sf(double z)
{
    if (z < 30.0) {
        const double s = normal_sf(z);
        return std::log(s);
    }
    return -0.5 * z * z - 0.5 * std::log(2.0 * pi_v) + std::log(detail::mills_ratio_cf(z));
}

/// Moments m_k = E[Z^k | Z <= zeta], k = 0..5, of the standard normal
/// truncated to the lower tail. Built from the recurrence
/// m_k = (k-1) m_{k-2} - zeta^{k-1} q(zeta), q = phi/Phi, which follows
/// from integrating z^{k-1} phi'(z) by parts. zeta = +inf gives the
/// untruncated moments (1, 0, 1, 0, 3, 0).
struct TruncMoments {
    std::array<double, 6> m{};

    double operator[](int k) const { assert(k >= 0 && k < 6); return m[static_cast<std::size_t>(k)]; }
};

inline TruncMoments trunc_moments(double zeta)
{
    assert(!std::isnan(zeta));
    TruncMoments t;
    if (zeta == std::numeric_limits<double>::infinity()) {
        t.m = {1.0, 0.0, 1.0, 0.0, 3.0, 0.0};
        return t;
    }
    const double q = normal_hazard_lower(zeta);
    t.m[0] = 1.0;
    t.m[1] = -q;
    double zp = zeta; // zeta^{k-1}
    for (int k = 2; k <= 5; ++k) {
        t.m[static_cast<std::size_t>(k)] = (k - 1) * t.m[static_cast<std::size_t>(k - 2)] - zp * q;
        zp *= zeta;
    }
    return t;
}

/// E[(x - Z)^k | Z <= zeta] for k = 1, 2, 3, by binomial expansion in the
/// truncated moments.
inline double shifted_moment(double x, double zeta, int k)
{
    const TruncMoments t = trunc_moments(zeta);
    switch (k) {
    case 1: return x - t[1];
    case 2: return x * x - 2.0 * x * t[1] + t[2];
    case 3: return x * x * x - 3.0 * x * x * t[1] + 3.0 * x * t[2] - t[3];
    default: assert(false && "shifted_moment: k must be 1, 2, or 3"); return 0.0;
    }
}

/// E[Z^4 (x - Z) | Z <= zeta] = x m4 - m5.
inline double weighted_quartic_gap(double x, double zeta)
{
    const TruncMoments t = trunc_moments(zeta);
    return x * t[4] - t[5];
}

} // namespace straintail

#endif
