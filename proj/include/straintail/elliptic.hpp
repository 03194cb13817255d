#ifndef STRAINTAIL_ELLIPTIC_HPP
#define STRAINTAIL_ELLIPTIC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "straintail/errors.hpp"
#include "straintail/numerics.hpp"
#include "straintail/problem.hpp"
#include "straintail/sampler.hpp"

namespace straintail {

/// Strain v'(x_i) of the solution of (e^{-sigma xi} v')' = p, v(0)=v(L)=0,
/// in closed form:
///   v'(x) = e^{sigma xi(x)} (F(x) - c),
///   c     = int F e^{sigma xi} / int e^{sigma xi},
/// with both integrals by the composite trapezoid rule on the path grid and
/// the exponents shifted by max(sigma xi) so the ratio never overflows.
/// c is a weighted average of F, so it must lie inside [min F, max F]; that
/// is asserted per evaluation.
inline std::vector<double> strain_closed_form(const ProblemSpec& spec, const PathSample& path)
{
    const std::size_t n = path.grid.size();
    if (n < 2 || path.values.size() != n)
        throw ConfigError("strain_closed_form: path grid/values mismatch");

    std::vector<double> F(n);
    for (std::size_t i = 0; i < n; ++i)
        F[i] = spec.forcing.F(path.grid[i]);

    double m = -std::numeric_limits<double>::infinity();
    for (double xi : path.values)
        m = std::max(m, spec.sigma * xi);

    std::vector<double> e(n), Fe(n);
    for (std::size_t i = 0; i < n; ++i) {
        e[i] = std::exp(spec.sigma * path.values[i] - m);
        Fe[i] = F[i] * e[i];
    }
    const double denom = trapezoid(path.grid, e);
    const double c = trapezoid(path.grid, Fe) / denom;

    const auto [fmin, fmax] = std::minmax_element(F.begin(), F.end());
    if (!(c >= *fmin - 1e-12 && c <= *fmax + 1e-12))
        throw NumericError("strain_closed_form: weighted average of F left its range");

    std::vector<double> vp(n);
    for (std::size_t i = 0; i < n; ++i) {
        vp[i] = std::exp(spec.sigma * path.values[i]) * (F[i] - c);
        if (!std::isfinite(vp[i]))
            throw NumericError("strain_closed_form: overflow in e^{sigma xi}");
    }
    return vp;
}

struct StrainMax {
    double value = 0.0; // max_i |v'(x_i)|
    double x = 0.0;     // grid location of the max
    std::size_t index = 0;
};

inline StrainMax max_abs_strain(const ProblemSpec& spec, const PathSample& path)
{
    const std::vector<double> vp = strain_closed_form(spec, path);
    StrainMax out;
    for (std::size_t i = 0; i < vp.size(); ++i) {
        const double a = std::abs(vp[i]);
        if (a > out.value) {
            out.value = a;
            out.index = i;
            out.x = path.grid[i];
        }
    }
    return out;
}

namespace detail {

/// Derivative at `at` of the parabola through (xa,fa), (xb,fb), (xc,fc).
inline double lagrange3_deriv(double xa, double xb, double xc,
                              double fa, double fb, double fc, double at)
{
    return fa * (2.0 * at - xb - xc) / ((xa - xb) * (xa - xc))
         + fb * (2.0 * at - xa - xc) / ((xb - xa) * (xb - xc))
         + fc * (2.0 * at - xa - xb) / ((xc - xa) * (xc - xb));
}

} // namespace detail

struct FdSolution {
    std::vector<double> v;       // node displacements, v[0] = v[n-1] = 0
    std::vector<double> v_prime; // node strains via 3-point differences
};

/// Independent second-order oracle for the same boundary-value problem:
/// conservative finite volumes with face coefficients
/// a_{i+1/2} = e^{-sigma (xi_i + xi_{i+1})/2}, assembled as a tridiagonal
/// system and solved by the Thomas algorithm. Exponents are re-centered at
/// the path mean so the face coefficients stay in range; that rescales both
/// sides of the equation consistently.
inline FdSolution solve_fd_oracle(const ProblemSpec& spec, const PathSample& path)
{
    const std::size_t n = path.grid.size();
    if (n < 3 || path.values.size() != n)
        throw ConfigError("solve_fd_oracle: need at least 3 grid points");

    double mean = 0.0;
    for (double xi : path.values)
        mean += xi;
    mean /= static_cast<double>(n);
    const double shift = spec.sigma * mean;
    if (!(std::abs(shift) < 700.0))
        throw NumericError("solve_fd_oracle: e^{sigma xi} out of range even after centering");

    const std::vector<double>& x = path.grid;
    std::vector<double> face(n - 1); // a_{i+1/2} * e^{shift}
    for (std::size_t i = 0; i + 1 < n; ++i) {
        face[i] = std::exp(-0.5 * spec.sigma * (path.values[i] + path.values[i + 1]) + shift);
        if (!(face[i] > 0.0) || !std::isfinite(face[i]))
            throw NumericError("solve_fd_oracle: degenerate face coefficient");
    }

    // rows 1..n-2: sub v_{i-1} + diag v_i + sup v_{i+1} = rhs
    std::vector<double> sub(n, 0.0), diag(n, 1.0), sup(n, 0.0), rhs(n, 0.0);
    const double scale = std::exp(shift);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = x[i] - x[i - 1];
        const double hr = x[i + 1] - x[i];
        const double hm = 0.5 * (hl + hr);
        sub[i] = face[i - 1] / (hl * hm);
        sup[i] = face[i] / (hr * hm);
        diag[i] = -(sub[i] + sup[i]);
        rhs[i] = scale * spec.forcing.p(x[i]);
    }

    // Thomas sweep (Dirichlet rows are already identity)
    std::vector<double> cp(n, 0.0), dp(n, 0.0);
    cp[0] = 0.0;
    dp[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double denom = diag[i] - sub[i] * cp[i - 1];
        if (denom == 0.0)
            throw NumericError("solve_fd_oracle: singular tridiagonal system");
        cp[i] = sup[i] / denom;
        dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / denom;
    }
    FdSolution sol;
    sol.v.assign(n, 0.0);
    sol.v[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        sol.v[i] = dp[i] - cp[i] * sol.v[i + 1];

    sol.v_prime.assign(n, 0.0);
    sol.v_prime[0] = detail::lagrange3_deriv(x[0], x[1], x[2], sol.v[0], sol.v[1], sol.v[2], x[0]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        sol.v_prime[i] = detail::lagrange3_deriv(x[i - 1], x[i], x[i + 1],
                                                 sol.v[i - 1], sol.v[i], sol.v[i + 1], x[i]);
    sol.v_prime[n - 1] = detail::lagrange3_deriv(x[n - 3], x[n - 2], x[n - 1],
                                                 sol.v[n - 3], sol.v[n - 2], sol.v[n - 1], x[n - 1]);
    return sol;
}

/// Debug dump: columns x, v, v_prime.
inline void write_solution_csv(const std::vector<double>& x, const FdSolution& sol,
                               std::ostream& os)
{
    os << "x,v,v_prime\n";
    os.precision(17);
    for (std::size_t i = 0; i < x.size(); ++i)
        os << x[i] << ',' << sol.v[i] << ',' << sol.v_prime[i] << '\n';
}

} // namespace straintail

#endif
