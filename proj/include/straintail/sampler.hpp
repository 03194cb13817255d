#ifndef STRAINTAIL_SAMPLER_HPP
#define STRAINTAIL_SAMPLER_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "straintail/errors.hpp"
#include "straintail/kernel.hpp"
#include "straintail/normal.hpp"
#include "straintail/numerics.hpp"

namespace straintail {

inline std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Independent sub-stream seed for one draw of a batch: hash of the master
/// seed and the draw index, so estimates do not depend on how draws are
/// distributed over workers.
inline std::uint64_t draw_seed(std::uint64_t master, std::uint64_t index)
{
    return splitmix64(splitmix64(master) ^ (0x9E3779B97F4A7C15ull + splitmix64(index)));
}

/// n_points uniformly spaced points covering [0, L].
inline std::vector<double> make_uniform_grid(double L, int n_points)
{
    if (!(L > 0.0) || n_points < 2)
        throw ConfigError("make_uniform_grid: need L > 0 and at least 2 points");
    std::vector<double> x(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i)
        x[static_cast<std::size_t>(i)] = L * i / (n_points - 1);
    x.front() = 0.0;
    x.back() = L;
    return x;
}

/// Exact sampler for Z | Z > lo, Z standard normal. Plain rejection for
/// lo <= 0; translated-exponential rejection (acceptance >= 0.76) above.
inline double trunc_normal_above(double lo, std::mt19937_64& rng)
{
    if (lo <= 0.0) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (;;) {
            const double x = gauss(rng);
            if (x > lo)
                return x;
        }
    }
    const double alpha = 0.5 * (lo + std::sqrt(lo * lo + 4.0));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (;;) {
        const double x = lo - std::log1p(-unif(rng)) / alpha;
        const double d = x - alpha;
        if (unif(rng) <= std::exp(-0.5 * d * d))
            return x;
    }
}

enum class SampleMethod { Direct, Conditional, ExcursionTilted };

/// One realization of the field on a grid. log_likelihood_ratio is
/// log dP/dQ of the nominal law P against the sampling law Q (0 when the
/// draw is from P itself), so E_Q[e^{llr} f(xi)] estimates E_P[f(xi)].
struct PathSample {
    std::vector<double> grid;
    std::vector<double> values;
    std::uint64_t seed = 0;
    SampleMethod method = SampleMethod::Direct;
    double log_likelihood_ratio = 0.0;
};

/// One grid-point pin for conditional sampling: grid index and pinned value.
struct Pin {
    std::size_t index;
    double value;
};

/// Draws Gaussian paths with covariance C(x_i - x_j) on a fixed grid.
/// The dense covariance is factorized once (lower Cholesky) and reused for
/// every draw; a jitter delta*I is escalated over {1e-12, 1e-10, 1e-8} until
/// the factorization succeeds, and the jittered matrix is treated as the
/// model covariance thereafter (tilted-draw bookkeeping uses the matching
/// marginal sd so importance weights stay exactly consistent).
class GridGaussianSampler {
public:
    GridGaussianSampler(const StationaryKernel& kernel, std::vector<double> grid)
        : grid_(std::move(grid))
    {
        const std::size_t n = grid_.size();
        if (n < 2)
            throw ConfigError("sampler: grid needs at least 2 points");
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(grid_[i + 1] > grid_[i]))
                throw ConfigError("sampler: grid must be strictly increasing");

        cov_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double c = kernel(grid_[i] - grid_[j]);
                cov_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
                cov_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c;
            }

        for (double delta : {1e-12, 1e-10, 1e-8}) {
            Eigen::MatrixXd jittered = cov_;
            jittered.diagonal().array() += delta;
            llt_.compute(jittered);
            if (llt_.info() == Eigen::Success) {
                jitter_ = delta;
                cov_ = jittered;
                return;
            }
        }
        std::ostringstream os;
        os << "sampler: covariance factorization failed for " << n
           << " grid points even with jitter 1e-8";
        throw NumericError(os.str());
    }

    const std::vector<double>& grid() const { return grid_; }
    double jitter() const { return jitter_; }
    double marginal_sd() const { return std::sqrt(1.0 + jitter_); }

    /// Unconditional draw: L z with z iid standard normal.
    PathSample draw(std::uint64_t seed) const
    {
        PathSample s;
        s.grid = grid_;
        s.seed = seed;
        s.method = SampleMethod::Direct;
        s.values = base_draw(seed);
        return s;
    }

    /// Draw conditioned on xi(grid[pin.index]) = pin.value for each pin,
    /// via the kriging residual of an unconditional draw:
    /// xi = M v + (xi0 - M xi0_P) with M = Cov_{:,P} Cov_{P,P}^{-1}.
    PathSample draw_conditional(const std::vector<Pin>& pins, std::uint64_t seed) const
    {
        PathSample s;
        s.grid = grid_;
        s.seed = seed;
        s.method = SampleMethod::Conditional;
        s.values = base_draw(seed);
        apply_pins(s.values, pins);
        return s;
    }

    /// Importance draw targeting excursions above zeta inside
    /// [region_lo, region_hi]: pick a grid node tau in the region with
    /// probability proportional to its trapezoid weight, draw
    /// xi(tau) | xi(tau) > zeta, fill in the rest conditionally. The
    /// likelihood ratio dP/dQ is E[mes]/mes where mes is the trapezoid
    /// measure of {xi > zeta} within the region on this grid and
    /// E[mes] = |region| P(xi > zeta); with node choice and measure
    /// discretized the same way the ratio is exactly unbiased for
    /// grid-path functionals supported on {mes > 0}.
    PathSample draw_excursion_tilted(double region_lo, double region_hi, double zeta,
                                     std::uint64_t seed) const
    {
        const auto [i0, i1] = region_indices(region_lo, region_hi);
        const std::vector<double> w = region_weights(i0, i1);
        const double W = grid_[i1] - grid_[i0];

        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);

        // node: inverse CDF over trapezoid weights
        const double u = unif(rng) * W;
        std::size_t tau = i0;
        double acc = 0.0;
        for (std::size_t j = i0; j <= i1; ++j) {
            acc += w[j - i0];
            if (u <= acc || j == i1) { tau = j; break; }
        }

        // height: marginal of the (jittered) model truncated above zeta
        const double sd = marginal_sd();
        const double height = sd * trunc_normal_above(zeta / sd, rng);

        PathSample s;
        s.grid = grid_;
        s.seed = seed;
        s.method = SampleMethod::ExcursionTilted;
        s.values = base_draw_from(rng);
        apply_pins(s.values, {Pin{tau, height}});

        double mes = 0.0;
        for (std::size_t j = i0; j <= i1; ++j)
            if (s.values[j] > zeta)
                mes += w[j - i0];
        if (!(mes > 0.0))
            throw NumericError("tilted draw: empty excursion set on the grid (grid too coarse)");
        s.log_likelihood_ratio = std::log(W) + log_normal_sf(zeta / sd) - std::log(mes);
        return s;
    }

    /// Trapezoid measure of {xi > zeta} within the region, on this grid.
    double excursion_measure(const PathSample& s, double region_lo, double region_hi,
                             double zeta) const
    {
        const auto [i0, i1] = region_indices(region_lo, region_hi);
        const std::vector<double> w = region_weights(i0, i1);
        double mes = 0.0;
        for (std::size_t j = i0; j <= i1; ++j)
            if (s.values[j] > zeta)
                mes += w[j - i0];
        return mes;
    }

private:
    std::vector<double> base_draw(std::uint64_t seed) const
    {
        std::mt19937_64 rng(seed);
        return base_draw_from(rng);
    }

    std::vector<double> base_draw_from(std::mt19937_64& rng) const
    {
        const Eigen::Index n = cov_.rows();
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i)
            z[i] = gauss(rng);
        Eigen::VectorXd v = llt_.matrixL() * z;
        return {v.data(), v.data() + n};
    }

    void apply_pins(std::vector<double>& values, const std::vector<Pin>& pins) const
    {
        if (pins.empty())
            return;
        const Eigen::Index n = cov_.rows();
        const Eigen::Index m = static_cast<Eigen::Index>(pins.size());
        Eigen::MatrixXd Kxp(n, m), Kpp(m, m);
        Eigen::VectorXd gap(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            const auto ia = static_cast<Eigen::Index>(pins[static_cast<std::size_t>(a)].index);
            if (ia < 0 || ia >= n)
                throw ConfigError("conditional draw: pin index outside the grid");
            Kxp.col(a) = cov_.col(ia);
            for (Eigen::Index b = 0; b < m; ++b)
                Kpp(a, b) = cov_(ia, static_cast<Eigen::Index>(pins[static_cast<std::size_t>(b)].index));
            gap[a] = pins[static_cast<std::size_t>(a)].value - values[pins[static_cast<std::size_t>(a)].index];
        }
        const Eigen::VectorXd coef = Kpp.ldlt().solve(gap);
        Eigen::Map<Eigen::VectorXd> v(values.data(), n);
        v += Kxp * coef;
    }

    std::pair<std::size_t, std::size_t> region_indices(double lo, double hi) const
    {
        if (!(hi > lo))
            throw ConfigError("tilted draw: region upper end must exceed lower end");
        const double tol = 1e-12 * (grid_.back() - grid_.front());
        std::size_t i0 = grid_.size(), i1 = 0;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            if (grid_[i] >= lo - tol && grid_[i] <= hi + tol) {
                i0 = std::min(i0, i);
                i1 = std::max(i1, i);
            }
        }
        if (i0 >= i1)
            throw ConfigError("tilted draw: region contains fewer than 2 grid points");
        return {i0, i1};
    }

    std::vector<double> region_weights(std::size_t i0, std::size_t i1) const
    {
        std::vector<double> sub(grid_.begin() + static_cast<std::ptrdiff_t>(i0),
                                grid_.begin() + static_cast<std::ptrdiff_t>(i1) + 1);
        return trapezoid_weights(sub);
    }

    std::vector<double> grid_;
    Eigen::MatrixXd cov_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double jitter_ = 0.0;
};

/// One-shot wrappers. Each factorizes the covariance for its call; batch
/// users should hold a GridGaussianSampler instead.
inline PathSample sample_path(const StationaryKernel& kernel, const std::vector<double>& grid,
                              std::uint64_t seed)
{
    return GridGaussianSampler(kernel, grid).draw(seed);
}

/// Pins are (location, value); locations must coincide with grid points.
inline PathSample sample_conditional(const StationaryKernel& kernel,
                                     const std::vector<double>& grid,
                                     const std::vector<std::pair<double, double>>& pins,
                                     std::uint64_t seed)
{
    GridGaussianSampler sampler(kernel, grid);
    const double tol = 1e-9 * (grid.back() - grid.front());
    std::vector<Pin> ipins;
    ipins.reserve(pins.size());
    for (const auto& [x, v] : pins) {
        std::size_t best = 0;
        double dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double d = std::abs(grid[i] - x);
            if (d < dist) { dist = d; best = i; }
        }
        if (dist > tol) {
            std::ostringstream os;
            os << "sample_conditional: pin location " << x << " is not a grid point";
            throw ConfigError(os.str());
        }
        ipins.push_back(Pin{best, v});
    }
    return sampler.draw_conditional(ipins, seed);
}

inline PathSample sample_excursion_tilted(const StationaryKernel& kernel,
                                          const std::vector<double>& grid,
                                          double region_lo, double region_hi, double zeta,
                                          std::uint64_t seed)
{
    return GridGaussianSampler(kernel, grid).draw_excursion_tilted(region_lo, region_hi, zeta, seed);
}

} // namespace straintail

#endif
