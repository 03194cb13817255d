#ifndef STRAINTAIL_TESTS_SUPPORT_HPP
#define STRAINTAIL_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "straintail/kernel.hpp"
#include "straintail/normal.hpp"
#include "straintail/numerics.hpp"
#include "straintail/problem.hpp"

namespace straintail::testing {

/// Truncated-moment oracle: E[Z^k | Z <= zeta] by adaptive quadrature,
/// independent of the recurrence under test.
inline double trunc_moment_quadrature(int k, double zeta)
{
    // normalize inside the integrand so the quadrature tolerance bounds the
    // moment itself; dividing afterwards would blow the error up by 1/Phi(zeta)
    const double lo = std::min(zeta, 0.0) - 42.0;
    const double cdf = normal_cdf(zeta);
    return integrate(
        [k, cdf](double z) { return std::pow(z, k) * normal_pdf(z) / cdf; },
        lo, zeta, 1e-10);
}

/// E[(x - Z)^k | Z <= zeta] by quadrature.
inline double shifted_moment_quadrature(double x, double zeta, int k)
{
    const double lo = std::min(zeta, 0.0) - 42.0;
    const double cdf = normal_cdf(zeta);
    return integrate(
        [x, k, cdf](double z) { return std::pow(x - z, k) * normal_pdf(z) / cdf; },
        lo, zeta, 1e-10);
}

/// Nested adaptive 2D quadrature of f over [ylo, yhi] x [zlo, zhi].
inline double integrate2d(const std::function<double(double, double)>& f,
                          double ylo, double yhi, double zlo, double zhi,
                          double tol)
{
    return integrate(
        [&](double y) {
            return integrate([&](double z) { return f(y, z); }, zlo, zhi, tol);
        },
        ylo, yhi, tol, 24);
}

/// Basic online mean/stderr accumulator for Monte Carlo checks.
struct RunningStat {
    std::uint64_t n = 0;
    double sum = 0.0, sumsq = 0.0;

    void add(double v)
    {
        ++n;
        sum += v;
        sumsq += v * v;
    }
    double mean() const { return sum / static_cast<double>(n); }
    double variance() const
    {
        const double m = mean();
        return std::max(0.0, sumsq / static_cast<double>(n) - m * m);
    }
    double std_error() const { return std::sqrt(variance() / static_cast<double>(n)); }
};

/// A single smooth random path defined on all of [0, L]: the conditional
/// (kriging) mean of the field through an exact draw on a coarse anchor
/// grid. Being a fixed analytic function, it can be evaluated on grids of
/// any resolution, which is what a grid-refinement study needs; a fresh
/// Cholesky draw per resolution would decorrelate the grids.
class SmoothGaussianPath {
public:
    SmoothGaussianPath(const StationaryKernel& kernel, double L, int anchors,
                       std::uint64_t seed)
        : kernel_(kernel)
    {
        anchor_x_.resize(anchors);
        for (int i = 0; i < anchors; ++i)
            anchor_x_[i] = L * i / (anchors - 1);

        Eigen::MatrixXd K(anchors, anchors);
        for (int i = 0; i < anchors; ++i)
            for (int j = 0; j < anchors; ++j)
                K(i, j) = kernel_(anchor_x_[i] - anchor_x_[j]);
        K.diagonal().array() += 1e-10;

        Eigen::LLT<Eigen::MatrixXd> llt(K);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss;
        Eigen::VectorXd z(anchors);
        for (int i = 0; i < anchors; ++i)
            z(i) = gauss(rng);
        Eigen::VectorXd values = llt.matrixL() * z;
        weights_ = llt.solve(values); // K^{-1} values
    }

    double operator()(double x) const
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < anchor_x_.size(); ++i)
            acc += weights_(static_cast<Eigen::Index>(i)) * kernel_(x - anchor_x_[i]);
        return acc;
    }

    std::vector<double> sample(const std::vector<double>& grid) const
    {
        std::vector<double> out(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            out[i] = (*this)(grid[i]);
        return out;
    }

private:
    StationaryKernel kernel_;
    std::vector<double> anchor_x_;
    Eigen::VectorXd weights_;
};

inline ProblemSpec se_constant_spec(double sigma, double ell, double p0 = 1.0,
                                    double L = 1.0)
{
    ProblemSpec spec;
    spec.kernel = make_se_kernel(ell);
    spec.forcing = make_constant_forcing(p0);
    spec.L = L;
    spec.sigma = sigma;
    return spec;
}

} // namespace straintail::testing

#endif
