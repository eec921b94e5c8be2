#include <cmath>
#include <random>

#include "doctest.h"

#include "ahm/hyperbolic.hpp"
#include "ahm/scattering.hpp"

using namespace ahm;

namespace {

std::mt19937_64 rng(23);
double uni(double a, double b) {
    return a + (b - a) * std::uniform_real_distribution<double>(0, 1)(rng);
}

PhasePoint pt(double x, Vec y, double xi, Vec eta) {
    PhasePoint p;
    p.x = x;
    p.y = std::move(y);
    p.xi = xi;
    p.eta = std::move(eta);
    return p;
}

PhasePoint unit_angle(const MetricModel& m, double x, double y0, double alpha) {
    double phi = conformal_factor<double>(m, x, {&y0, 1});
    return pt(x, {y0}, std::cos(alpha) / x, {std::sin(alpha) / (x * std::sqrt(phi))});
}

const IntegratorConfig icfg;
const ChartConfig ccfg;
const ShootingConfig scfg;

}  // namespace

TEST_SUITE_BEGIN("scattering");

TEST_CASE("one-sided sojourn of the vertical ray") {
    MetricModel m = MetricModel::hyperbolic(1);
    SojournResult s = sojourn_forward(m, pt(1, {0}, -1, {0}), Side::L, icfg, ccfg);
    REQUIRE(s.hit);
    CHECK(s.y_end[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(s.s_limit == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("rescaling the defining function shifts the sojourn exactly") {
    MetricModel m = MetricModel::perturbed(1, 0.05);
    PhasePoint z = unit_angle(m, 1.2, 0.3, 2.0);
    SojournResult s1 = sojourn_forward(m, z, Side::L, icfg, ccfg, 1.0);
    SojournResult s2 = sojourn_forward(m, z, Side::L, icfg, ccfg, 2.0);
    REQUIRE(s1.hit);
    REQUIRE(s2.hit);
    CHECK(std::abs(s2.s_limit - s1.s_limit - std::log(2.0)) < 1e-12);
}

TEST_CASE("rescaled route agrees with the plain interior limit") {
    MetricModel m = MetricModel::hyperbolic(1);
    PhasePoint z = unit_angle(m, 1.0, 0.0, M_PI / 2 + 0.4);
    SojournResult s = sojourn_forward(m, z, Side::L, icfg, ccfg);
    REQUIRE(s.hit);
    // run the geodesic in the interior out to t = 15 and read t + log x
    IntegratorConfig cfg = icfg;
    cfg.t_max = 15.0;
    Vec zi(interior_single_size(1));
    pack_phase_point(z, zi);
    FieldSpec fs{&m, ChartId::Interior, Side::L, false, 1.0};
    FlowResult fr = integrate(fs, zi, {}, cfg, false);
    double naive = 15.0 + std::log(fr.end_state[0]);
    CHECK(std::abs(s.s_limit - naive) < 1e-5);
}

TEST_CASE("scattering datum over semicircle apexes") {
    MetricModel m = MetricModel::hyperbolic(1);
    ScatteringDatum d = scattering_datum(m, pt(1, {0}, 0, {1}), icfg, ccfg);
    REQUIRE(d.complete);
    CHECK(d.y[0] == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(d.yp[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(d.S_soj == doctest::Approx(2 * std::log(2.0)).epsilon(1e-8));
    CHECK(d.s == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));

    double a = uni(0.4, 1.8), y0 = uni(-2, 2);
    ScatteringDatum g = scattering_datum(m, unit_angle(m, a, y0, M_PI / 2), icfg, ccfg);
    REQUIRE(g.complete);
    CHECK(g.y[0] == doctest::Approx(y0 - a).epsilon(1e-7));
    CHECK(g.yp[0] == doctest::Approx(y0 + a).epsilon(1e-7));
    CHECK(g.S_soj == doctest::Approx(2 * std::log(2 * a)).epsilon(1e-7));
    CHECK(g.S_soj == doctest::Approx(exact_sojourn(g.y, g.yp)).epsilon(1e-7));
}

TEST_CASE("S_soj matches the corner limit of r + log x + log x'") {
    // two-route check: the rescaled trace against shot distances between
    // points sliding to the ends of the same geodesic
    MetricModel m = MetricModel::hyperbolic(1);
    ScatteringDatum d = scattering_datum(m, pt(1, {0}, 0, {1}), icfg, ccfg);
    REQUIRE(d.complete);
    // unit semicircle: z(T) = (sech T, -tanh T), z'(T) = (sech T, tanh T)
    double T = 8.0;
    double xs = 1.0 / std::cosh(T);
    PhasePoint z = pt(xs, {-std::tanh(T)}, 0, {0});
    PhasePoint zp = pt(xs, {std::tanh(T)}, 0, {0});
    DistanceResult dr = distance_shooting(m, z, zp, icfg, scfg);
    REQUIRE(dr.converged);
    double corner = dr.r + 2 * std::log(xs);
    CHECK(std::abs(d.S_soj - corner) < 1e-4);
}

TEST_CASE("non-unit launch data is normalized") {
    MetricModel m = MetricModel::hyperbolic(1);
    ScatteringDatum d = scattering_datum(m, pt(1, {0}, 0, {2.5}), icfg, ccfg);
    REQUIRE(d.complete);
    CHECK(d.normalized_input);
    CHECK(d.S_soj == doctest::Approx(2 * std::log(2.0)).epsilon(1e-8));
}

TEST_CASE("the sojourn varies smoothly with the launch angle") {
    // exact model: the endpoint sweep follows cot(alpha/2) and is monotone
    MetricModel mh = MetricModel::hyperbolic(1);
    MetricModel mp = MetricModel::perturbed(1, 0.05);
    const int N = 100;
    Vec svals(N), yvals(N), yexact(N);
    double a0 = 0.9, a1 = M_PI - 0.9;
    for (int k = 0; k < N; ++k) {
        double alpha = a0 + (a1 - a0) * k / (N - 1);
        ScatteringDatum e = scattering_datum(mh, unit_angle(mh, 1.0, 0.0, alpha), icfg, ccfg);
        ScatteringDatum d = scattering_datum(mp, unit_angle(mp, 1.0, 0.0, alpha), icfg, ccfg);
        REQUIRE(e.complete);
        REQUIRE(d.complete);
        yexact[k] = e.yp[0];
        svals[k] = d.S_soj;
        yvals[k] = d.yp[0];
        CHECK(e.yp[0] == doctest::Approx(1.0 / std::tan(alpha / 2)).epsilon(1e-7));
    }
    double dal = (a1 - a0) / (N - 1);
    for (int k = 1; k < N; ++k) {
        CHECK(yexact[k] < yexact[k - 1]);  // monotone endpoint sweep
        // the perturbed sojourn stays smooth: bounded divided differences
        CHECK(std::abs(svals[k] - svals[k - 1]) / dal < 20.0);
        CHECK(std::abs(yvals[k] - yvals[k - 1]) / dal < 20.0);
    }
}

TEST_CASE("reversing the launch covector swaps the endpoints") {
    MetricModel m = MetricModel::perturbed(1, 0.05);
    PhasePoint z = unit_angle(m, 1.1, 0.2, 1.1);
    PhasePoint zq = z;
    zq.xi = -zq.xi;
    zq.eta[0] = -zq.eta[0];
    ScatteringDatum a = scattering_datum(m, z, icfg, ccfg);
    ScatteringDatum b = scattering_datum(m, zq, icfg, ccfg);
    REQUIRE(a.complete);
    REQUIRE(b.complete);
    CHECK(a.y[0] == doctest::Approx(b.yp[0]).epsilon(1e-9));
    CHECK(a.yp[0] == doctest::Approx(b.y[0]).epsilon(1e-9));
    CHECK(a.s == doctest::Approx(b.s).epsilon(1e-9));
    CHECK(a.S_soj == doctest::Approx(b.S_soj).epsilon(1e-9));
}

TEST_CASE("shooting recovers the closed-form distance") {
    MetricModel m = MetricModel::hyperbolic(1);
    DistanceResult dr = distance_shooting(m, pt(1, {0}, 0, {0}), pt(2, {0}, 0, {0}),
                                          icfg, scfg);
    REQUIRE(dr.converged);
    CHECK(dr.r == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK_THROWS_AS(
        distance_shooting(m, pt(1, {0}, 0, {0}), pt(1, {0}, 0, {0}), icfg, scfg),
        std::invalid_argument);
}

TEST_CASE("shooting converges from a deliberately bad seed") {
    MetricModel m = MetricModel::hyperbolic(1);
    PhasePoint z = pt(0.8, {1.1}, 0, {0}), zp = pt(1.4, {-0.4}, 0, {0});
    LaunchData seed = exact_launch(zp.x, zp.y, z.x, z.y);
    // rotate the direction and stretch the length
    double c = std::cos(0.25), s = std::sin(0.25);
    double a0 = zp.x * seed.xi, a1 = zp.x * seed.eta[0];
    seed.xi = (c * a0 - s * a1) / zp.x;
    seed.eta[0] = (s * a0 + c * a1) / zp.x;
    seed.r *= 1.3;
    DistanceResult dr = distance_shooting(m, z, zp, icfg, scfg, &seed);
    REQUIRE(dr.converged);
    CHECK(dr.iterations > 0);
    CHECK(dr.r == doctest::Approx(exact_distance(z.x, z.y, zp.x, zp.y)).epsilon(1e-8));
}

TEST_CASE("distance is symmetric and satisfies the triangle inequality") {
    MetricModel m = MetricModel::perturbed(1, 0.05);
    for (int trial = 0; trial < 10; ++trial) {
        PhasePoint a = pt(uni(0.4, 1.8), {uni(-1, 1)}, 0, {0});
        PhasePoint b = pt(uni(0.4, 1.8), {uni(-1, 1)}, 0, {0});
        PhasePoint c = pt(uni(0.4, 1.8), {uni(-1, 1)}, 0, {0});
        if (std::abs(a.x - b.x) + dist(a.y, b.y) < 0.1)
            continue;
        double rab = distance_shooting(m, a, b, icfg, scfg).r;
        double rba = distance_shooting(m, b, a, icfg, scfg).r;
        CHECK(rab == doctest::Approx(rba).epsilon(1e-8));
        double rac = distance_shooting(m, a, c, icfg, scfg).r;
        double rbc = distance_shooting(m, b, c, icfg, scfg).r;
        CHECK(rac <= rab + rbc + 1e-8);
    }
}

TEST_CASE("the squared distance is smooth across the diagonal") {
    MetricModel m = MetricModel::perturbed(1, 0.05);
    PhasePoint zp = pt(1.0, {0.2}, 0, {0});
    // r^2 along a short segment through z' should fit a parabola through 0
    Vec deltas{0.02, 0.04, 0.08};
    Vec r2(3);
    for (int i = 0; i < 3; ++i) {
        PhasePoint z = zp;
        z.y[0] += deltas[i];
        double r = distance_shooting(m, z, zp, icfg, scfg).r;
        r2[i] = r * r;
    }
    double c1 = r2[0] / (deltas[0] * deltas[0]);
    double c2 = r2[1] / (deltas[1] * deltas[1]);
    double c3 = r2[2] / (deltas[2] * deltas[2]);
    CHECK(c1 == doctest::Approx(c2).epsilon(1e-2));
    CHECK(c2 == doctest::Approx(c3).epsilon(1e-2));
}

TEST_CASE("the solved launch covector is the distance gradient") {
    MetricModel m = MetricModel::perturbed(1, 0.04);
    PhasePoint z = pt(1.3, {0.8}, 0, {0}), zp = pt(0.9, {-0.2}, 0, {0});
    DistanceResult dr = distance_shooting(m, z, zp, icfg, scfg);
    REQUIRE(dr.converged);
    const double h = 1e-5;
    auto r_of = [&](double dx, double dy) {
        PhasePoint q = zp;
        q.x += dx;
        q.y[0] += dy;
        return distance_shooting(m, z, q, icfg, scfg).r;
    };
    double drdx = (r_of(h, 0) - r_of(-h, 0)) / (2 * h);
    double drdy = (r_of(0, h) - r_of(0, -h)) / (2 * h);
    CHECK(dr.xi == doctest::Approx(-drdx).epsilon(1e-5).scale(1.0));
    CHECK(dr.eta[0] == doctest::Approx(-drdy).epsilon(1e-5).scale(1.0));
}

TEST_CASE("F from shooting matches the closed form") {
    MetricModel m = MetricModel::hyperbolic(1);
    for (int trial = 0; trial < 10; ++trial) {
        double R = uni(0.2, 0.6), rl = uni(0.1, 0.8), rr = uni(0.1, 0.8), yv = uni(0.2, 0.9);
        double s = std::sqrt(rl * rl + rr * rr + yv * yv);
        rl /= s;
        rr /= s;
        yv /= s;
        PhasePoint z = pt(R * rl, {R * yv}, 0, {0});
        PhasePoint zp = pt(R * rr, {0.0}, 0, {0});
        DistanceResult dr = F_value(m, z, zp, icfg, scfg);
        REQUIRE(dr.converged);
        CHECK(dr.F == doctest::Approx(exact_F(rl, rr, yv)).epsilon(1e-7));
    }
}

TEST_CASE("F approaches log(1/2) toward the diagonal fiber direction") {
    // rho_L = rho_R = 1/sqrt(2), Y -> 0: r -> 0 and log(rho_L rho_R) -> log(1/2)
    MetricModel m = MetricModel::hyperbolic(1);
    double delta = 1e-3;
    PhasePoint z = pt(0.5, {delta}, 0, {0}), zp = pt(0.5, {0.0}, 0, {0});
    DistanceResult dr = F_value(m, z, zp, icfg, scfg);
    REQUIRE(dr.converged);
    CHECK(dr.F == doctest::Approx(std::log(0.5)).epsilon(5e-3));
    CHECK(dr.polar.rho_l == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-5));
}

TEST_CASE("richardson extrapolation removes integer orders") {
    // f(h) = 3 - 2h + h^2 - 0.5 h^3 sampled on a ratio-2 sequence
    Vec f(4);
    for (int k = 0; k < 4; ++k) {
        double h = 0.4 / (1 << k);
        f[k] = 3 - 2 * h + h * h - 0.5 * h * h * h;
    }
    CHECK(richardson_limit(f) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("grid scan of F: exact model") {
    MetricModel m = MetricModel::hyperbolic(1);
    ScanGrid g;
    g.rho_l = {0.2, 0.5, 0.8};
    g.rho_r = {0.2, 0.5, 0.8};
    g.y_norm = {0.3, 0.7};
    g.R_values = {0.5, 0.25};
    ScanResult res = scan_F(m, g, icfg, scfg, 0.05, 1);
    CHECK(res.summary.failures == 0);
    for (const ScanRecord& rec : res.records) {
        CHECK(rec.ok);
        CHECK(rec.F == doctest::Approx(exact_F(rec.rho_l, rec.rho_r, rec.y_norm))
                           .epsilon(1e-7));
    }
    CHECK(std::abs(res.summary.corner_extrapolated) < 1e-4);
    CHECK(res.summary.max_R_dependence < 1e-7);
    // face limits of F along rho -> 0 exist and match the closed form
    CHECK(res.summary.face_l_extrapolated ==
          doctest::Approx(exact_F(0, 0.6 / std::hypot(0.6, 0.6), 0.6 / std::hypot(0.6, 0.6)))
              .epsilon(1e-4));

    ScanGrid empty;
    CHECK_THROWS_AS(scan_F(m, empty, icfg, scfg, 0.05, 1), std::invalid_argument);
}

TEST_CASE("grid scan of F: perturbed model stays regular") {
    MetricModel m = MetricModel::perturbed(1, 0.05);
    ScanGrid g;
    g.rho_l = {0.2, 0.5, 0.8};
    g.rho_r = {0.2, 0.5, 0.8};
    g.y_norm = {0.3, 0.7};
    g.R_values = {0.25};
    ScanResult res = scan_F(m, g, icfg, scfg, 0.05, 1);
    CHECK(res.summary.failures == 0);
    CHECK(std::isfinite(res.summary.max_abs_F));
    CHECK(res.summary.max_abs_F < 1.0);
}

TEST_SUITE_END();
