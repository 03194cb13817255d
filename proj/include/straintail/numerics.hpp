#ifndef STRAINTAIL_NUMERICS_HPP
#define STRAINTAIL_NUMERICS_HPP

#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "straintail/errors.hpp"

namespace straintail {

/// Composite trapezoid rule on a (possibly non-uniform) grid.
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y)
{
    assert(x.size() == y.size() && x.size() >= 2);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    return s;
}

/// Trapezoid weights w_i such that sum_i w_i y_i equals trapezoid(x, y).
inline std::vector<double> trapezoid_weights(const std::vector<double>& x)
{
    assert(x.size() >= 2);
    std::vector<double> w(x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double h2 = 0.5 * (x[i + 1] - x[i]);
        w[i] += h2;
        w[i + 1] += h2;
    }
    return w;
}

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm, double fb,
                                   double whole, double tol, int depth)
{
    const double m  = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left  = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = left + right - whole;
    if (depth <= 0)
        throw NumericError("adaptive quadrature: recursion limit reached");
    if (std::abs(err) <= 15.0 * tol)
        return left + right + err / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
         + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
/// The interval is pre-split so narrow features away from the midpoint are
/// still seen by the initial samples.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int initial_splits = 16)
{
    if (!(b > a))
        return a == b ? 0.0 : -integrate(f, b, a, tol, initial_splits);
    double total = 0.0;
    const double h = (b - a) / initial_splits;
    for (int k = 0; k < initial_splits; ++k) {
        const double x0 = a + k * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
        const double f0 = f(x0), fm = f(xm), f1 = f(x1);
        const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        total += detail::adaptive_simpson_rec(f, x0, x1, f0, fm, f1, whole,
                                              tol / initial_splits, 48);
    }
    return total;
}

/// Golden-section maximization of a unimodal f on [a, b].
/// Returns the abscissa; |interval| shrinks below xtol.
inline double golden_max(const std::function<double(double)>& f, double a, double b,
                         double xtol = 1e-12)
{
    assert(b > a);
    const double invphi  = (std::sqrt(5.0) - 1.0) / 2.0;  // 1/phi
    const double invphi2 = (3.0 - std::sqrt(5.0)) / 2.0;  // 1/phi^2
    double h = b - a;
    double c = a + invphi2 * h, d = a + invphi * h;
    double fc = f(c), fd = f(d);
    while (h > xtol) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            h = b - a;
            c = a + invphi2 * h;
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            h = b - a;
            d = a + invphi * h;
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// Maximize f on [a, b]: coarse scan on n points, then golden refinement
/// around the best cell. Robust to mild multimodality.
inline double scan_then_golden_max(const std::function<double(double)>& f,
                                   double a, double b, int n = 200, double xtol = 1e-12)
{
    assert(n >= 3 && b > a);
    const double h = (b - a) / (n - 1);
    int ibest = 0;
    double fbest = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double v = f(a + i * h);
        if (v > fbest) { fbest = v; ibest = i; }
    }
    const double lo = a + std::max(0, ibest - 1) * h;
    const double hi = a + std::min(n - 1, ibest + 1) * h;
    return golden_max(f, lo, hi, xtol);
}

/// Root of F on a sign-changing bracket [a, b]: bisection with secant
/// acceleration (a compact zeroin). Requires F(a) * F(b) <= 0.
inline double find_root(const std::function<double(double)>& F, double a, double b,
                        double xtol = 0.0, int max_iter = 200)
{
    double fa = F(a), fb = F(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw NumericError("find_root: bracket endpoints have the same sign");
    for (int it = 0; it < max_iter; ++it) {
        // secant candidate, clipped into the open bracket; fall back to bisection
        double m = b - fb * (b - a) / (fb - fa);
        const double mid = 0.5 * (a + b);
        if (!(m > std::min(a, b) && m < std::max(a, b)))
            m = mid;
        // keep at least bisection-rate progress every other step
        if (std::abs(m - mid) > 0.4 * std::abs(b - a))
            m = mid;
        const double fm = F(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) { a = m; fa = fm; }
        else                          { b = m; fb = fm; }
        const double scale = std::max({std::abs(a), std::abs(b), 1.0});
        if (std::abs(b - a) <= std::max(xtol, 4.0 * std::numeric_limits<double>::epsilon() * scale))
            return std::abs(fa) < std::abs(fb) ? a : b;
    }
    return std::abs(fa) < std::abs(fb) ? a : b;
}

/// Central second derivative with one Richardson step: O(h^4).
inline double second_derivative(const std::function<double(double)>& f, double x, double h)
{
    auto d2 = [&](double s) { return (f(x + s) - 2.0 * f(x) + f(x - s)) / (s * s); };
    const double coarse = d2(h), fine = d2(0.5 * h);
    return (4.0 * fine - coarse) / 3.0;
}

/// Central fourth derivative (5-point stencil) with one Richardson step: O(h^4).
inline double fourth_derivative(const std::function<double(double)>& f, double x, double h)
{
    auto d4 = [&](double s) {
        return (f(x - 2 * s) - 4.0 * f(x - s) + 6.0 * f(x) - 4.0 * f(x + s) + f(x + 2 * s))
               / (s * s * s * s);
    };
    const double coarse = d4(h), fine = d4(0.5 * h);
    return (4.0 * fine - coarse) / 3.0;
}

} // namespace straintail

#endif
