#ifndef STRAINTAIL_RARE_EVENT_HPP
#define STRAINTAIL_RARE_EVENT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "straintail/asymptotics.hpp"
#include "straintail/elliptic.hpp"
#include "straintail/errors.hpp"
#include "straintail/problem.hpp"
#include "straintail/sampler.hpp"

namespace straintail {

/// 0 means auto (hardware concurrency, at least 1).
inline int resolve_thread_count(int requested)
{
    if (requested < 0)
        throw ConfigError("thread count must be >= 0");
    if (requested > 0)
        return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

/// Run body(i) for i in [0, n) on `threads` workers, contiguous chunks.
/// Each index writes only its own output slot, so the result is identical
/// for any worker count.
template <typename Body>
void parallel_for(std::uint64_t n, int threads, const Body& body)
{
    const int t = std::max(1, threads);
    if (t == 1 || n < 2) {
        for (std::uint64_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    const std::uint64_t chunk = (n + static_cast<std::uint64_t>(t) - 1) / static_cast<std::uint64_t>(t);
    for (int w = 0; w < t; ++w) {
        const std::uint64_t lo = static_cast<std::uint64_t>(w) * chunk;
        const std::uint64_t hi = std::min(n, lo + chunk);
        if (lo >= hi)
            break;
        pool.emplace_back([lo, hi, &body] {
            for (std::uint64_t i = lo; i < hi; ++i)
                body(i);
        });
    }
    for (auto& th : pool)
        th.join();
}

} // namespace detail

/// Monte Carlo answer for P(max |v'| > b) with its sampling setup.
struct TailEstimate {
    double b = 0.0;
    std::string method;        // "direct" or "tilted"
    double p_hat = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
    int grid_n = 0;
    std::uint64_t seed = 0;
    double zeta = std::numeric_limits<double>::quiet_NaN(); // tilt level (tilted only)
};

/// Largest provably safe tilt level for target b:
/// |v'| <= e^{sigma sup xi} osc(F) pointwise, so max |v'| > b forces
/// sup xi >= (ln b - ln osc F)/sigma. Tilting above that level would cut
/// paths that can still realize the event.
inline double safe_tilt_level(const ProblemSpec& spec, double b)
{
    const double osc = osc_F(spec.forcing, spec.L);
    if (!(osc > 0.0))
        throw AssumptionError("tilt level: osc F must be positive");
    return (std::log(b) - std::log(osc)) / spec.sigma;
}

/// Plain Monte Carlo: n independent paths, indicator average.
/// Estimates are bit-identical for any worker count (per-draw sub-seeds,
/// per-draw result slots summed in index order).
inline TailEstimate mc_direct(const ProblemSpec& spec, double b, std::uint64_t n,
                              int grid_n, std::uint64_t seed, int threads = 0)
{
    validate(spec);
    if (n == 0)
        throw ConfigError("mc_direct: n must be positive");
    const GridGaussianSampler sampler(spec.kernel, make_uniform_grid(spec.L, grid_n));
    std::vector<std::uint8_t> hit(n, 0);
    detail::parallel_for(n, resolve_thread_count(threads), [&](std::uint64_t i) {
        const PathSample path = sampler.draw(draw_seed(seed, i));
        hit[i] = max_abs_strain(spec, path).value > b ? 1 : 0;
    });
    double sum = 0.0;
    for (std::uint64_t i = 0; i < n; ++i)
        sum += hit[i];
    TailEstimate est;
    est.b = b;
    est.method = "direct";
    est.n = n;
    est.grid_n = grid_n;
    est.seed = seed;
    est.p_hat = sum / static_cast<double>(n);
    est.std_error = std::sqrt(std::max(0.0, est.p_hat * (1.0 - est.p_hat) / static_cast<double>(n)));
    return est;
}

/// Importance-sampled Monte Carlo: excursion-tilted paths over the whole
/// interval at level zeta (default: the safe level for b), averaged with
/// their likelihood ratios. Unbiased as long as zeta does not exceed the
/// safe level; larger requested tilts are rejected.
inline TailEstimate mc_tilted(const ProblemSpec& spec, double b, std::uint64_t n,
                              int grid_n, std::uint64_t seed,
                              std::optional<double> zeta_opt = std::nullopt,
                              int threads = 0)
{
    validate(spec);
    if (n == 0)
        throw ConfigError("mc_tilted: n must be positive");
    const double zeta_max = safe_tilt_level(spec, b);
    const double zeta = zeta_opt.value_or(zeta_max);
    if (zeta > zeta_max + 1e-12) {
        std::ostringstream os;
        os << "mc_tilted: zeta=" << zeta << " exceeds the safe level " << zeta_max
           << " and would bias the estimator";
        throw ConfigError(os.str());
    }
    const GridGaussianSampler sampler(spec.kernel, make_uniform_grid(spec.L, grid_n));
    std::vector<double> w(n, 0.0);
    detail::parallel_for(n, resolve_thread_count(threads), [&](std::uint64_t i) {
        const PathSample path =
            sampler.draw_excursion_tilted(0.0, spec.L, zeta, draw_seed(seed, i));
        if (max_abs_strain(spec, path).value > b)
            w[i] = std::exp(path.log_likelihood_ratio);
    });
    double sum = 0.0, sumsq = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        sum += w[i];
        sumsq += w[i] * w[i];
    }
    const double nn = static_cast<double>(n);
    TailEstimate est;
    est.b = b;
    est.method = "tilted";
    est.n = n;
    est.grid_n = grid_n;
    est.seed = seed;
    est.zeta = zeta;
    est.p_hat = sum / nn;
    est.std_error = std::sqrt(std::max(0.0, (sumsq / nn - est.p_hat * est.p_hat) / nn));
    return est;
}

/// Weighted histogram of where |v'| attains its max, conditional on the
/// exceedance, from tilted draws. mass_* entries are conditional fractions;
/// standard errors come from the delta method for ratio estimators.
struct LocationHistogram {
    std::vector<double> bin_edges; // nbins + 1 edges spanning [0, L]
    std::vector<double> mass;      // conditional mass per bin, sums to 1

    double rho = 0.0;              // locality radius used below
    double mass_near_left = 0.0;   // argmax within rho of 0
    double mass_near_right = 0.0;  // ... of L
    double mass_near_interior = 0.0; // ... of any interior maximizer of |p|
    double mass_left_half = 0.0, mass_right_half = 0.0;
    double se_left_half = 0.0, se_right_half = 0.0;
    double se_half_diff = 0.0;     // se of (mass_left_half - mass_right_half)
    TailEstimate exceedance;       // the underlying tail estimate
};

inline LocationHistogram location_histogram(const ProblemSpec& spec, double b,
                                            std::uint64_t n, int grid_n, std::uint64_t seed,
                                            std::optional<double> rho_opt = std::nullopt,
                                            std::optional<double> zeta_opt = std::nullopt,
                                            int nbins = 64, int threads = 0)
{
    validate(spec);
    if (n == 0 || nbins < 1)
        throw ConfigError("location_histogram: need n >= 1 and nbins >= 1");
    double rho = rho_opt.value_or(2.0 * spec.kernel.length_scale);
    if (!(rho > 0.0))
        throw ConfigError("location_histogram: rho must be positive");

    const double zeta_max = safe_tilt_level(spec, b);
    const double zeta = zeta_opt.value_or(zeta_max);
    if (zeta > zeta_max + 1e-12)
        throw ConfigError("location_histogram: zeta exceeds the safe level");

    const GridGaussianSampler sampler(spec.kernel, make_uniform_grid(spec.L, grid_n));
    std::vector<double> w(n, 0.0), loc(n, 0.0);
    detail::parallel_for(n, resolve_thread_count(threads), [&](std::uint64_t i) {
        const PathSample path =
            sampler.draw_excursion_tilted(0.0, spec.L, zeta, draw_seed(seed, i));
        const StrainMax m = max_abs_strain(spec, path);
        if (m.value > b) {
            w[i] = std::exp(path.log_likelihood_ratio);
            loc[i] = m.x;
        }
    });

    std::vector<double> interior;
    if (spec.forcing.kind != ForcingKind::Constant)
        interior = classify_forcing(spec).interior_maxima;

    LocationHistogram h;
    h.rho = rho;
    h.bin_edges.resize(static_cast<std::size_t>(nbins) + 1);
    for (int k = 0; k <= nbins; ++k)
        h.bin_edges[static_cast<std::size_t>(k)] = spec.L * k / nbins;
    h.mass.assign(static_cast<std::size_t>(nbins), 0.0);

    const double nn = static_cast<double>(n);
    double wsum = 0.0, wsq = 0.0;
    double a_left = 0.0, a_right = 0.0; // weighted halves
    for (std::uint64_t i = 0; i < n; ++i) {
        if (w[i] == 0.0)
            continue;
        wsum += w[i];
        wsq += w[i] * w[i];
        const double x = loc[i];
        int bin = static_cast<int>(x / spec.L * nbins);
        bin = std::clamp(bin, 0, nbins - 1);
        h.mass[static_cast<std::size_t>(bin)] += w[i];
        if (x <= rho) h.mass_near_left += w[i];
        if (x >= spec.L - rho) h.mass_near_right += w[i];
        for (double xs : interior)
            if (std::abs(x - xs) <= rho) { h.mass_near_interior += w[i]; break; }
        if (x < 0.5 * spec.L) a_left += w[i]; else a_right += w[i];
    }
    if (!(wsum > 0.0))
        throw NumericError("location_histogram: no exceedances observed; "
                           "raise n or lower b");

    for (double& m : h.mass) m /= wsum;
    h.mass_near_left /= wsum;
    h.mass_near_right /= wsum;
    h.mass_near_interior /= wsum;
    h.mass_left_half = a_left / wsum;
    h.mass_right_half = a_right / wsum;

    // delta-method se for ratio sum(a_i)/sum(e_i): with means over draws,
    // Var = Var(a - m e) / (n ebar^2)
    auto ratio_se = [&](auto indicator) {
        const double ebar = wsum / nn;
        double m_num = 0.0;
        for (std::uint64_t i = 0; i < n; ++i)
            if (w[i] != 0.0)
                m_num += w[i] * indicator(loc[i]);
        const double m = m_num / wsum;
        double var = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
            const double a = w[i] == 0.0 ? 0.0 : w[i] * indicator(loc[i]);
            const double resid = a - m * w[i];
            var += resid * resid;
        }
        var = var / nn - 0.0; // E resid = 0 by construction of m
        return std::sqrt(var / nn) / ebar;
    };
    h.se_left_half = ratio_se([&](double x) { return x < 0.5 * spec.L ? 1.0 : 0.0; });
    h.se_right_half = ratio_se([&](double x) { return x >= 0.5 * spec.L ? 1.0 : 0.0; });
    h.se_half_diff = ratio_se([&](double x) { return x < 0.5 * spec.L ? 1.0 : -1.0; });

    h.exceedance.b = b;
    h.exceedance.method = "tilted";
    h.exceedance.n = n;
    h.exceedance.grid_n = grid_n;
    h.exceedance.seed = seed;
    h.exceedance.zeta = zeta;
    h.exceedance.p_hat = wsum / nn;
    h.exceedance.std_error = std::sqrt(std::max(0.0, (wsq / nn - h.exceedance.p_hat * h.exceedance.p_hat) / nn));
    return h;
}

/// One line of the approximation-vs-simulation table.
struct CompareRow {
    double b = 0.0;
    std::string method;
    double p_hat = 0.0;
    double std_error = 0.0;
    double approx_total = 0.0;
    double term_interior = 0.0;
    double term_left = 0.0;
    double term_right = 0.0;
    double ratio = 0.0; // approx_total / p_hat
};

/// Validate the tail approximation against simulation over a ladder of
/// levels. Each level gets its own seed sub-stream.
inline std::vector<CompareRow> compare(const ProblemSpec& spec,
                                       const std::vector<double>& b_list,
                                       const std::string& method,
                                       std::uint64_t n, int grid_n, std::uint64_t seed,
                                       const ApproxOptions& opts = {},
                                       std::optional<double> zeta_opt = std::nullopt,
                                       int threads = 0)
{
    if (method != "direct" && method != "tilted")
        throw ConfigError("compare: method must be 'direct' or 'tilted'");
    std::vector<CompareRow> rows;
    rows.reserve(b_list.size());
    for (std::size_t k = 0; k < b_list.size(); ++k) {
        const double b = b_list[k];
        const std::uint64_t level_seed = splitmix64(seed ^ (0xC0FFEEull + k));
        const TailEstimate est = method == "direct"
            ? mc_direct(spec, b, n, grid_n, level_seed, threads)
            : mc_tilted(spec, b, n, grid_n, level_seed, zeta_opt, threads);
        const ApproxReport rep = approximate_tail(spec, b, opts);
        CompareRow row;
        row.b = b;
        row.method = method;
        row.p_hat = est.p_hat;
        row.std_error = est.std_error;
        row.approx_total = rep.total;
        row.term_interior = rep.term_interior;
        row.term_left = rep.term_left;
        row.term_right = rep.term_right;
        row.ratio = est.p_hat > 0.0 ? rep.total / est.p_hat
                                    : std::numeric_limits<double>::infinity();
        rows.push_back(row);
    }
    return rows;
}

} // namespace straintail

#endif
