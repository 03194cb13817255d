#ifndef STRAINTAIL_FORCING_HPP
#define STRAINTAIL_FORCING_HPP

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "straintail/errors.hpp"
#include "straintail/normal.hpp"
#include "straintail/numerics.hpp"

namespace straintail {

enum class ForcingKind { Constant, GaussianBump, CosineBump, Custom };

inline std::string to_string(ForcingKind k)
{
    switch (k) {
    case ForcingKind::Constant:     return "constant";
    case ForcingKind::GaussianBump: return "gaussian-bump";
    case ForcingKind::CosineBump:   return "cosine-bump";
    default:                        return "custom";
    }
}

/// Right-hand side p of (a v')' = p with its first two derivatives and the
/// antiderivative F(x) = int_0^x p (F(0) = 0). The named families carry F in
/// closed form; custom callables fall back to adaptive quadrature.
struct ForcingProfile {
    ForcingKind kind = ForcingKind::Constant;
    std::function<double(double)> p, dp, ddp;
    std::function<double(double)> F;

    // family parameters, for reporting
    double p0 = 0.0;                            // constant
    double offset = 0.0, amp = 0.0, center = 0.0, width = 0.0; // bumps
};

/// Antiderivative of the forcing, F(0) = 0.
inline double antiderivative_F(const ForcingProfile& f, double x)
{
    return f.F(x);
}

/// p(x) = p0, the spatially homogeneous case. p0 must be nonzero.
inline ForcingProfile make_constant_forcing(double p0)
{
    if (p0 == 0.0 || !std::isfinite(p0))
        throw ConfigError("constant forcing: p0 must be finite and nonzero");
    ForcingProfile f;
    f.kind = ForcingKind::Constant;
    f.p0 = p0;
    f.p   = [p0](double) { return p0; };
    f.dp  = [](double) { return 0.0; };
    f.ddp = [](double) { return 0.0; };
    f.F   = [p0](double x) { return p0 * x; };
    return f;
}

/// p(x) = offset + amp * exp(-(x-center)^2 / (2 width^2)).
inline ForcingProfile make_gaussian_bump_forcing(double offset, double amp,
                                                 double center, double width)
{
    if (!(width > 0.0))
        throw ConfigError("gaussian-bump forcing: width must be positive");
    if (amp == 0.0)
        throw ConfigError("gaussian-bump forcing: amp must be nonzero");
    ForcingProfile f;
    f.kind = ForcingKind::GaussianBump;
    f.offset = offset; f.amp = amp; f.center = center; f.width = width;
    const double w2 = width * width;
    f.p = [=](double x) {
        const double d = x - center;
        return offset + amp * std::exp(-0.5 * d * d / w2);
    };
    f.dp = [=](double x) {
        const double d = x - center;
        return -amp * d / w2 * std::exp(-0.5 * d * d / w2);
    };
    f.ddp = [=](double x) {
        const double d = x - center;
        return amp / w2 * (d * d / w2 - 1.0) * std::exp(-0.5 * d * d / w2);
    };
    const double root_half_pi = std::sqrt(0.5 * pi_v);
    f.F = [=](double x) {
        auto erf_arg = [&](double t) { return (t - center) / (width * std::sqrt(2.0)); };
        return offset * x
             + amp * width * root_half_pi * (std::erf(erf_arg(x)) - std::erf(erf_arg(0.0)));
    };
    return f;
}

/// p(x) = offset + amp * (1 + cos(2 pi (x - center) / period)) / 2.
/// One full cosine hump of the given period, riding on a constant offset so
/// the end values stay away from zero.
inline ForcingProfile make_cosine_bump_forcing(double offset, double amp,
                                               double center, double period)
{
    if (!(period > 0.0))
        throw ConfigError("cosine-bump forcing: period must be positive");
    if (amp == 0.0)
        throw ConfigError("cosine-bump forcing: amp must be nonzero");
    ForcingProfile f;
    f.kind = ForcingKind::CosineBump;
    f.offset = offset; f.amp = amp; f.center = center; f.width = period;
    const double k = 2.0 * pi_v / period;
    f.p = [=](double x) { return offset + 0.5 * amp * (1.0 + std::cos(k * (x - center))); };
    f.dp = [=](double x) { return -0.5 * amp * k * std::sin(k * (x - center)); };
    f.ddp = [=](double x) { return -0.5 * amp * k * k * std::cos(k * (x - center)); };
    f.F = [=](double x) {
        return offset * x
             + 0.5 * amp * (x + (std::sin(k * (x - center)) - std::sin(k * (0.0 - center))) / k);
    };
    return f;
}

/// Arbitrary analytic forcing; the antiderivative falls back to adaptive
/// quadrature from 0 (exact closed forms are used for the named families).
inline ForcingProfile make_custom_forcing(std::function<double(double)> p,
                                          std::function<double(double)> dp,
                                          std::function<double(double)> ddp)
{
    ForcingProfile f;
    f.kind = ForcingKind::Custom;
    f.p = std::move(p);
    f.dp = std::move(dp);
    f.ddp = std::move(ddp);
    f.F = [pf = f.p](double x) {
        if (x == 0.0) return 0.0;
        return integrate(pf, 0.0, x, 1e-12);
    };
    return f;
}

/// max F - min F over [0, L] (grid scan; F is C^1 so a fine grid suffices).
inline double osc_F(const ForcingProfile& f, double L, int grid_n = 4096)
{
    double lo = 0.0, hi = 0.0; // F(0) = 0 participates
    for (int i = 1; i <= grid_n; ++i) {
        const double v = f.F(L * i / grid_n);
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    return hi - lo;
}

} // namespace straintail

#endif
