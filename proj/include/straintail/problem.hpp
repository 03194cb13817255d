#ifndef STRAINTAIL_PROBLEM_HPP
#define STRAINTAIL_PROBLEM_HPP

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "straintail/errors.hpp"
#include "straintail/forcing.hpp"
#include "straintail/kernel.hpp"

namespace straintail {

/// The full model: (e^{-sigma xi} v')' = p on [0, L], v(0) = v(L) = 0,
/// xi a stationary unit-variance Gaussian field with correlation `kernel`.
struct ProblemSpec {
    StationaryKernel kernel;
    ForcingProfile forcing;
    double L = 1.0;
    double sigma = 1.0;
};

inline void validate(const ProblemSpec& s)
{
    if (!(s.L > 0.0))
        throw ConfigError("problem: L must be positive");
    if (!(s.sigma > 0.0))
        throw ConfigError("problem: sigma must be positive");
    if (!(s.kernel.a4 > s.kernel.delta * s.kernel.delta))
        throw AssumptionError("problem: kernel needs a4 > delta^2");
}

/// Where |p| attains its maximum, which drives which tail terms exist.
struct ForcingShape {
    bool homogeneous = false;            // p identically constant
    std::vector<double> interior_maxima; // refined interior arg maxima of |p|
    bool max_at_left = false;            // global max of |p| sits at x = 0
    bool max_at_right = false;           // ... or at x = L
    double pmax_abs = 0.0;               // sup_[0,L] |p|
};

/// Locate the global maxima of |p| on [0, L] by grid scan plus golden
/// refinement. An explicit x_star overrides the scan (still validated to be
/// a maximum). Ties within 1e-10 relative all count, supporting forcings
/// with several equally high peaks.
inline ForcingShape classify_forcing(const ProblemSpec& s,
                                     std::optional<double> x_star_hint = std::nullopt,
                                     int grid_n = 4096)
{
    ForcingShape shape;
    if (s.forcing.kind == ForcingKind::Constant) {
        shape.homogeneous = true;
        shape.pmax_abs = std::abs(s.forcing.p0);
        return shape;
    }
    auto absp = [&](double x) { return std::abs(s.forcing.p(x)); };

    const double h = s.L / grid_n;
    double pmax = 0.0;
    for (int i = 0; i <= grid_n; ++i)
        pmax = std::max(pmax, absp(i * h));
    if (!(pmax > 0.0))
        throw AssumptionError("forcing: p vanishes identically on the grid");
    shape.pmax_abs = pmax;

    if (x_star_hint) {
        const double x = *x_star_hint;
        if (!(x > 0.0 && x < s.L))
            throw ConfigError("x_star must lie strictly inside (0, L)");
        if (absp(x) < pmax * (1.0 - 1e-8)) {
            std::ostringstream os;
            os << "x_star=" << x << " is not a global maximum of |p| (|p(x_star)|="
               << absp(x) << " vs sup=" << pmax << ")";
            throw ConfigError(os.str());
        }
        shape.interior_maxima.push_back(x);
        shape.pmax_abs = absp(x);
        return shape;
    }

    // collect maximal cells, refine interior ones
    const double tie = pmax * (1.0 - 1e-10);
    int i = 0;
    while (i <= grid_n) {
        if (absp(i * h) >= tie) {
            int j = i;
            while (j + 1 <= grid_n && absp((j + 1) * h) >= tie) ++j;
            const int mid = (i + j) / 2;
            if (mid == 0) {
                shape.max_at_left = true;
            } else if (mid == grid_n) {
                shape.max_at_right = true;
            } else {
                const double lo = std::max(0.0, (mid - 1) * h);
                const double hi = std::min(s.L, (mid + 1) * h);
                const double x = golden_max(absp, lo, hi, 1e-13);
                // refined point may still be (numerically) a boundary max
                if (x < 1e-9 * s.L) shape.max_at_left = true;
                else if (x > s.L * (1.0 - 1e-9)) shape.max_at_right = true;
                else shape.interior_maxima.push_back(x);
            }
            i = j + 1;
        } else {
            ++i;
        }
    }
    for (double x : shape.interior_maxima)
        shape.pmax_abs = std::max(shape.pmax_abs, absp(x));
    return shape;
}

} // namespace straintail

#endif
