#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "straintail/asymptotics.hpp"
#include "straintail/errors.hpp"
#include "straintail/forcing.hpp"
#include "straintail/normal.hpp"
#include "straintail/numerics.hpp"
#include "support.hpp"

using namespace straintail;
using straintail::testing::integrate2d;
using straintail::testing::se_constant_spec;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ForcingProfile make_double_peak_forcing()
{
    // p = 0.5 + sin^2(2 pi x): equal peaks of height 1.5 at x = 1/4, 3/4,
    // end values 0.5
    const double twopi = 2.0 * std::numbers::pi;
    return make_custom_forcing(
        [twopi](double x) { const double s = std::sin(twopi * x); return 0.5 + s * s; },
        [twopi](double x) { return twopi * std::sin(2.0 * twopi * x); },
        [twopi](double x) { return 2.0 * twopi * twopi * std::cos(2.0 * twopi * x); });
}

} // namespace

TEST_CASE("excursion width scale and shape factor")
{
    const double u = 9.0, delta = 25.0, sigma = 0.5;
    const double g = gamma_star(u, delta, sigma);
    REQUIRE(g == Catch::Approx(1.0 / std::sqrt(u * delta * sigma)).epsilon(1e-15));
    const double xhat = golden_max(
        [&](double x) { return interior_shape(x, u, delta, sigma); }, 0.0, 1.0, 1e-12);
    REQUIRE(xhat == Catch::Approx(g).margin(1e-9));
    REQUIRE(interior_shape(g, u, delta, sigma)
            == Catch::Approx(g * std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("level equations: round trips and monotone growth")
{
    for (double sigma : {0.3, 1.0}) {
        const ProblemSpec spec = se_constant_spec(sigma, 1.0); // delta = 1
        const BoundaryInputs in = homogeneous_inputs(spec);
        double prev_ui = 0.0, prev_ub = 0.0;
        for (double b : {1e2, 1e4, 1e8}) {
            const double ui = solve_u_interior(spec, 1.0, b);
            const double lhs_i = 1.0 / std::sqrt(sigma * ui)
                               * std::exp(sigma * ui - 0.5);
            REQUIRE(std::abs(lhs_i - b) <= 1e-8 * b);
            REQUIRE(ui > prev_ui);
            prev_ui = ui;

            const double ub = solve_u_boundary(in, spec, b);
            const double S = scan_then_golden_max(
                [&](double z) { return detail::boundary_inner_sup(in, spec, z, ub).first; },
                -2.0, 3.0, 500, 1e-12);
            const double Sval = detail::boundary_inner_sup(in, spec, S, ub).first;
            const double lhs_b = std::exp(sigma * ub) / std::sqrt(sigma * ub) * Sval;
            REQUIRE(std::abs(lhs_b - b) <= 1e-8 * b);
            REQUIRE(ub > prev_ub);
            prev_ub = ub;
        }
    }
}

TEST_CASE("interior level at a pinned reference point")
{
    const ProblemSpec spec = se_constant_spec(1.0, 1.0);
    const double u = solve_u_interior(spec, 1.0, 100.0);
    REQUIRE(u == Catch::Approx(6.00114535799263).epsilon(1e-9));
}

TEST_CASE("limit boundary profile: maximizer, curvature, value")
{
    const ProblemSpec spec = se_constant_spec(0.5, 0.2);
    const BoundaryInputs unit{1.0, 0.0, 1.0};
    const BoundaryProfile prof = boundary_profile(unit, spec);
    REQUIRE(prof.zeta == Catch::Approx(0.4810583936277878).margin(2e-6));
    REQUIRE(prof.Xi == Catch::Approx(0.9621167931794794).margin(1e-5));
    REQUIRE(prof.G == Catch::Approx(-0.1157085858681789).margin(1e-10));

    // the limit profile never touches the kernel
    const ProblemSpec other = se_constant_spec(0.5, 1.0);
    const BoundaryProfile prof2 = boundary_profile(unit, other);
    REQUIRE(prof2.zeta == Catch::Approx(prof.zeta).margin(1e-8));
    REQUIRE(prof2.G == Catch::Approx(prof.G).margin(1e-12));
}

TEST_CASE("inner maximizer of the end functional is the stated closed form")
{
    const ProblemSpec spec = se_constant_spec(0.5, 0.2);
    const BoundaryInputs unit{1.0, 0.0, 1.0};
    for (double zeta = 0.0; zeta <= 0.84; zeta += 0.05) {
        const auto [sup_cf, x_cf] = detail::boundary_inner_sup(unit, spec, zeta, kInf);
        auto habs = [&](double x) { return std::abs(boundary_H(unit, spec, x, zeta, kInf)); };
        const double x_num = scan_then_golden_max(habs, zeta - 10.0, zeta, 4000, 1e-13);
        REQUIRE(sup_cf >= habs(x_num) - 1e-10);
        REQUIRE(sup_cf == Catch::Approx(habs(x_num)).margin(1e-10));
        const double m1 = trunc_moments(zeta)[1];
        REQUIRE(x_cf == Catch::Approx(std::min(zeta, 0.5 * (m1 + std::sqrt(m1 * m1 + 4.0))))
                        .margin(1e-12));
    }
}

TEST_CASE("location amplification constant")
{
    const double r = location_ratio_r();
    REQUIRE(r == Catch::Approx(1.4685733423563878).margin(1e-9));
    REQUIRE(r > 1.0);

    // coarse grid scan of the same objective stays within 1e-3
    auto val = [](double zeta) {
        const double m1 = trunc_moments(zeta)[1];
        const double x = std::min(zeta, 0.5 * (m1 + std::sqrt(m1 * m1 + 4.0)));
        return std::exp(0.5 * (1.0 - x * x)) * (x - m1);
    };
    double coarse = 0.0;
    for (int i = 0; i <= 500; ++i)
        coarse = std::max(coarse, val(-2.0 + 5.0 * i / 500));
    REQUIRE(coarse == Catch::Approx(r).epsilon(1e-3));
}

TEST_CASE("end-point prefactor against a raw double integral")
{
    const ProblemSpec spec = se_constant_spec(0.5, 0.2);
    const BoundaryInputs in = homogeneous_inputs(spec);
    const BoundaryProfile prof = boundary_profile(in, spec);
    const double kap = kappa_const(spec, prof.zeta, in.p_end, 0.0);
    const double D = D_boundary(spec, kap, prof.Xi);

    const double A = spec.kernel.a4, Del = spec.kernel.delta, sig = spec.sigma;
    const double gap = A - Del * Del;
    const double a = Del * Del / gap;
    auto f = [&](double y, double z) {
        return std::exp(-0.5 * a * z * z + z / (2.0 * sig)
                        - 0.5 * prof.Xi / Del * y * y);
    };
    const double zm = 1.0 / (2.0 * sig * a), zsd = 1.0 / std::sqrt(a);
    const double ysd = std::sqrt(Del / prof.Xi);
    const double iyz = integrate2d(f, -14.0 * ysd, 14.0 * ysd,
                                   zm - 14.0 * zsd, zm + 14.0 * zsd, 1e-10);
    const double D_oracle = std::sqrt(Del) * std::exp(kap / sig)
                          / (std::pow(2.0 * pi_v, 1.5) * std::sqrt(gap)) * iyz;
    REQUIRE(D == Catch::Approx(D_oracle).epsilon(1e-8));
}

TEST_CASE("interior prefactor against a raw double integral")
{
    ProblemSpec spec = se_constant_spec(0.5, 0.2);
    spec.forcing = make_gaussian_bump_forcing(1.0, 1.5, 0.4, 0.15);
    const double xs = 0.4;
    const double D = D_interior(spec, xs);

    const double A = spec.kernel.a4, Del = spec.kernel.delta, sig = spec.sigma;
    const double gap = A - Del * Del;
    const double a = Del * Del / gap;
    const double curv = spec.forcing.ddp(xs) / spec.forcing.p(xs);
    const double d4 = A / (4.0 * std::pow(Del, 4));
    const double d2 = A / (2.0 * sig * std::pow(Del, 3)) - curv / (sig * Del * Del);
    auto f = [&](double y, double z) {
        const double c = 1.0 / sig + y * y / Del;
        return std::exp(-0.5 * a * z * z + 0.5 * c * z
                        - 0.5 * (d4 * y * y * y * y + d2 * y * y));
    };
    const double iyz = integrate2d(f, -24.0, 24.0, -25.0, 50.0, 1e-10);
    const double pref = std::sqrt(Del)
                      * std::exp(A / (24.0 * sig * sig * Del * Del) + curv / (6.0 * sig * sig * Del))
                      / (std::pow(2.0 * pi_v, 1.5) * std::sqrt(gap));
    REQUIRE(D == Catch::Approx(pref * iyz).epsilon(1e-6));
}

TEST_CASE("uniform forcing: the two ends carry the whole tail")
{
    const ProblemSpec spec = se_constant_spec(0.5, 0.2);
    const ApproxReport rep = approximate_tail(spec, 1.0);
    REQUIRE(rep.homogeneous);
    REQUIRE(rep.dominant == TailChannel::BothEnds);
    REQUIRE(rep.u0 == rep.uL);
    REQUIRE(rep.term_left == rep.term_right);
    REQUIRE(rep.total == Catch::Approx(2.0 * rep.term_left).epsilon(1e-15));
    REQUIRE(rep.term_interior == 0.0);
    REQUIRE(std::isnan(rep.u));
    REQUIRE(rep.interior_x.empty());

    // companion value under the alternative damping convention
    REQUIRE(rep.homo_literal_total == Catch::Approx(rep.u0 * rep.total).epsilon(1e-12));
    const ApproxReport lit = approximate_tail(spec, 1.0, ApproxOptions{std::nullopt, true});
    REQUIRE(lit.total == Catch::Approx(rep.homo_literal_total).epsilon(1e-12));
    REQUIRE(lit.u0 == Catch::Approx(rep.u0).epsilon(1e-12));

    // flipping the sign of the forcing changes nothing
    const ApproxReport neg = approximate_tail(se_constant_spec(0.5, 0.2, -1.0), 1.0);
    REQUIRE(neg.total == Catch::Approx(rep.total).epsilon(1e-12));
    REQUIRE(neg.u0 == Catch::Approx(rep.u0).epsilon(1e-12));
    REQUIRE(neg.zeta0 == Catch::Approx(rep.zeta0).margin(1e-9));
}

TEST_CASE("log-slope of the uniform-forcing tail matches the level equation")
{
    const ProblemSpec spec = se_constant_spec(0.5, 0.2);
    const double b = 1e4;
    const ApproxReport mid = approximate_tail(spec, b);
    const double f = 1.05;
    const double hi = std::log(approximate_tail(spec, b * f).total);
    const double lo = std::log(approximate_tail(spec, b / f).total);
    const double slope = (hi - lo) / (2.0 * std::log(f));
    const double expected = -mid.u0 / (spec.sigma - 0.5 / mid.u0);
    REQUIRE(slope == Catch::Approx(expected).epsilon(0.05));
}

TEST_CASE("two equal interior peaks are both counted")
{
    ProblemSpec spec = se_constant_spec(0.5, 0.2);
    spec.forcing = make_double_peak_forcing();
    const ApproxReport rep = approximate_tail(spec, 50.0);
    REQUIRE(rep.interior_x.size() == 2);
    REQUIRE(rep.interior_x[0] == Catch::Approx(0.25).margin(1e-7));
    REQUIRE(rep.interior_x[1] == Catch::Approx(0.75).margin(1e-7));
    const double Dsum = D_interior(spec, rep.interior_x[0]) + D_interior(spec, rep.interior_x[1]);
    REQUIRE(rep.D == Catch::Approx(Dsum).epsilon(1e-12));
    REQUIRE(rep.u == Catch::Approx(solve_u_interior(spec, 1.5, 50.0)).epsilon(1e-12));
    REQUIRE(rep.term_interior
            == Catch::Approx(rep.D / std::sqrt(rep.u) * std::exp(-0.5 * rep.u * rep.u))
               .epsilon(1e-12));
    REQUIRE(rep.dominant == TailChannel::Interior);
}

TEST_CASE("end data orientation and sign handling")
{
    ProblemSpec spec = se_constant_spec(0.5, 0.2);
    spec.forcing = make_gaussian_bump_forcing(1.0, 1.5, 0.4, 0.15);
    const BoundaryInputs left = left_end_inputs(spec);
    const BoundaryInputs right = right_end_inputs(spec);
    REQUIRE(left.p_end == Catch::Approx(spec.forcing.p(0.0)));
    REQUIRE(left.dp_oriented == Catch::Approx(spec.forcing.dp(0.0)));
    REQUIRE(left.dp_oriented > 0.0);  // rising toward the bump
    REQUIRE(right.dp_oriented == Catch::Approx(-spec.forcing.dp(1.0)));
    REQUIRE(right.dp_oriented > 0.0); // falling away from the bump
    REQUIRE(left.sign == 1.0);

    REQUIRE(homogeneous_inputs(se_constant_spec(0.5, 0.2, -2.0)).sign == -1.0);

    ProblemSpec dead = spec;
    dead.forcing = make_custom_forcing(
        [](double x) { return std::sin(2.0 * std::numbers::pi * x); },
        [](double x) { return 2.0 * std::numbers::pi * std::cos(2.0 * std::numbers::pi * x); },
        [](double x) { return -4.0 * std::numbers::pi * std::numbers::pi
                              * std::sin(2.0 * std::numbers::pi * x); });
    REQUIRE_THROWS_AS(left_end_inputs(dead), AssumptionError);
}

TEST_CASE("channel dominance verdicts")
{
    ProblemSpec bump = se_constant_spec(0.5, 0.2);
    bump.forcing = make_gaussian_bump_forcing(1.0, 1.5, 0.4, 0.15);
    const DominanceVerdict vb = dominant_location(bump, 50.0);
    REQUIRE(vb.analytic == TailChannel::Interior);
    REQUIRE(vb.by_terms == TailChannel::Interior);
    REQUIRE(vb.agree);
    REQUIRE_FALSE(vb.tie);

    ProblemSpec slope = se_constant_spec(0.5, 0.2);
    slope.forcing = make_cosine_bump_forcing(0.5, 1.0, -0.2, 2.5);
    const DominanceVerdict vs = dominant_location(slope, 50.0);
    REQUIRE(vs.analytic == TailChannel::LeftEnd);
    REQUIRE(vs.agree);

    const DominanceVerdict vc = dominant_location(se_constant_spec(0.5, 0.2), 50.0);
    REQUIRE(vc.analytic == TailChannel::BothEnds);
    REQUIRE(vc.by_terms == TailChannel::BothEnds);
    REQUIRE(vc.agree);
    REQUIRE(vc.r == Catch::Approx(1.4685733423563878).margin(1e-9));
}

TEST_CASE("levels outside the admissible range are rejected")
{
    const ProblemSpec spec = se_constant_spec(0.5, 0.2);
    REQUIRE_THROWS_AS(approximate_tail(spec, 0.0), ConfigError);
    REQUIRE_THROWS_AS(approximate_tail(spec, -3.0), ConfigError);
    REQUIRE_THROWS_AS(approximate_tail(spec, 0.01), AssumptionError);
}

TEST_CASE("flat-topped forcing peak is rejected")
{
    ProblemSpec spec = se_constant_spec(0.5, 0.2);
    spec.forcing = make_custom_forcing(
        [](double x) { const double d = x - 0.5; return 1.0 - d * d * d * d; },
        [](double x) { const double d = x - 0.5; return -4.0 * d * d * d; },
        [](double x) { const double d = x - 0.5; return -12.0 * d * d; });
    REQUIRE_THROWS_AS(D_interior(spec, 0.5), AssumptionError);
    REQUIRE_THROWS_AS(approximate_tail(spec, 50.0, ApproxOptions{0.5, false}),
                      AssumptionError);
}
