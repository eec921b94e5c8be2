#include <cmath>
#include <random>

#include "doctest.h"

#include "ahm/flow.hpp"
#include "ahm/phase.hpp"

using namespace ahm;

namespace {

PhasePoint pt(double x, Vec y, double xi, Vec eta) {
    PhasePoint p;
    p.x = x;
    p.y = std::move(y);
    p.xi = xi;
    p.eta = std::move(eta);
    return p;
}

}  // namespace

TEST_SUITE_BEGIN("phase");

TEST_CASE("energy symbol values") {
    MetricModel m = MetricModel::hyperbolic(1);
    CHECK(energy_p(m, pt(1, {0}, 1, {0})) == doctest::Approx(0.0));
    CHECK(energy_p(m, pt(1, {0}, 0, {0})) == doctest::Approx(-0.5));
    CHECK(energy_p(m, pt(2, {0}, 1, {0})) == doctest::Approx(1.5));
    CHECK_THROWS_AS(energy_p(m, pt(0, {0}, 1, {0})), std::domain_error);
}

TEST_CASE("wave symbol values") {
    MetricModel m = MetricModel::hyperbolic(1);
    ProductPhasePoint z;
    z.tau = 1;
    z.left = pt(1, {0}, 1, {0});
    z.right = pt(1, {0}, -1, {0});
    CHECK(symbol_Q(m, Side::L, z) == doctest::Approx(0.0));
    z.left = pt(2, {0}, 1, {0});
    CHECK(symbol_Q(m, Side::L, z) == doctest::Approx(-1.5));
    z.tau = 0;
    CHECK(symbol_Q(m, Side::L, z) < 0);
}

TEST_CASE("Hamilton field structure") {
    MetricModel m = MetricModel::hyperbolic(2);
    ProductPhasePoint z;
    z.tau = 1;
    z.left = pt(1, {0, 0}, -1, {0, 0});
    z.right = pt(0.7, {0.1, -0.3}, 0.5, {0.4, 0.2});
    TangentVector v = field_HQ(m, Side::L, z);
    CHECK(v.tau == 0.0);
    CHECK(v.t == doctest::Approx(1.0));
    CHECK(v.right.x == 0.0);
    CHECK(v.right.xi == 0.0);
    CHECK(v.right.eta[0] == 0.0);
    // x xi is conserved on the vertical ray: d(x xi) = dx xi + x dxi = 0
    CHECK(v.left.x * z.left.xi + z.left.x * v.left.xi == doctest::Approx(0.0));
}

TEST_CASE("vertical geodesic closed form under the interior flow") {
    MetricModel m = MetricModel::hyperbolic(1);
    IntegratorConfig icfg;
    FieldSpec fs{&m, ChartId::Interior, Side::L, false, 1.0};
    Vec z{1.0, 0.0, -1.0, 0.0};
    IntegratorConfig cfg = icfg;
    cfg.t_max = 1.0;
    FlowResult fr = integrate(fs, z, {}, cfg, false);
    CHECK(fr.end_state[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
    CHECK(fr.end_state[2] == doctest::Approx(-std::exp(1.0)).epsilon(1e-8));
}

TEST_CASE("energy conserved along the interior flow") {
    MetricModel m = MetricModel::perturbed(1, 0.1);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-12;
    cfg.t_max = 5.0;
    // unit covector at a generic point
    PhasePoint p = pt(0.8, {0.2}, 0, {0});
    double phi = conformal_factor<double>(m, p.x, p.y);
    p.xi = 0.6 / p.x;
    p.eta[0] = 0.8 / (p.x * std::sqrt(phi));
    Vec z(interior_single_size(1));
    pack_phase_point(p, z);
    FieldSpec fs{&m, ChartId::Interior, Side::L, false, 1.0};
    FlowResult fr = integrate(fs, z, {}, cfg, false);
    CHECK(fr.max_q_drift < 1e-9);
}

TEST_CASE("rotation equivariance of the exact model") {
    MetricModel m = MetricModel::hyperbolic(2);
    IntegratorConfig cfg;
    cfg.t_max = 1.5;
    FieldSpec fs{&m, ChartId::Interior, Side::L, false, 1.0};
    double c = std::cos(0.7), s = std::sin(0.7);
    Vec z1{1.0, 0.0, 0.0, 0.3, 0.55, 0.4};
    // rotate (eta, y) by the same orthogonal map
    Vec z2{1.0, 0.0, 0.0, 0.3, c * 0.55 - s * 0.4, s * 0.55 + c * 0.4};
    FlowResult a = integrate(fs, z1, {}, cfg, false);
    FlowResult b = integrate(fs, z2, {}, cfg, false);
    CHECK(b.end_state[0] == doctest::Approx(a.end_state[0]).epsilon(1e-10));
    double y1 = c * a.end_state[1] - s * a.end_state[2];
    double y2 = s * a.end_state[1] + c * a.end_state[2];
    CHECK(b.end_state[1] == doctest::Approx(y1).epsilon(1e-9));
    CHECK(b.end_state[2] == doctest::Approx(y2).epsilon(1e-9));
}

TEST_CASE("the two lifted flows commute") {
    MetricModel m = MetricModel::perturbed(1, 0.08);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-13;
    std::mt19937_64 rng(21);
    auto u = [&](double a, double b) {
        return a + (b - a) * std::uniform_real_distribution<double>(0, 1)(rng);
    };
    for (int trial = 0; trial < 5; ++trial) {
        Vec z0(product_size(1));
        layout::Product p{1};
        z0[p.t] = 0;
        z0[p.tau] = 1;
        z0[p.x()] = u(0.5, 1.5);
        z0[p.y()] = u(-1, 1);
        z0[p.xi()] = u(-0.5, 0.5);
        z0[p.eta()] = u(-0.5, 0.5);
        z0[p.xp()] = u(0.5, 1.5);
        z0[p.yp()] = u(-1, 1);
        z0[p.xip()] = u(-0.5, 0.5);
        z0[p.etap()] = u(-0.5, 0.5);
        double t1 = u(0.1, 0.5), t2 = u(0.1, 0.5);
        auto flow = [&](Vec z, Side side, double tlen) {
            FieldSpec fs{&m, ChartId::Interior, side, true, 1.0};
            IntegratorConfig c2 = cfg;
            c2.t_max = tlen;
            return integrate(fs, z, {}, c2, false).end_state;
        };
        Vec a = flow(flow(z0, Side::R, t1), Side::L, t2);
        Vec b = flow(flow(z0, Side::L, t2), Side::R, t1);
        CHECK(max_abs_diff(a, b) < 1e-9);
    }
}

TEST_CASE("conormal initial data stays characteristic along the flow") {
    MetricModel m = MetricModel::perturbed(1, 0.05);
    // z = z', zeta = -zeta', tau = |zeta|
    PhasePoint z0 = pt(1.0, {0.2}, 0, {0});
    double phi = conformal_factor<double>(m, z0.x, z0.y);
    z0.xi = std::cos(0.4) / z0.x;
    z0.eta[0] = std::sin(0.4) / (z0.x * std::sqrt(phi));
    Vec z(product_size(1));
    layout::Product p{1};
    z[p.t] = 0;
    z[p.tau] = 1;
    z[p.x()] = z0.x;
    z[p.y()] = z0.y[0];
    z[p.xi()] = z0.xi;
    z[p.eta()] = z0.eta[0];
    z[p.xp()] = z0.x;
    z[p.yp()] = z0.y[0];
    z[p.xip()] = -z0.xi;
    z[p.etap()] = -z0.eta[0];
    IntegratorConfig cfg;
    cfg.t_max = 2.0;
    for (Side side : {Side::L, Side::R}) {
        FieldSpec fs{&m, ChartId::Interior, side, true, 1.0};
        FlowResult fr = integrate(fs, z, {}, cfg, false);
        CHECK(fr.max_q_drift < 1e-9);
        ProductPhasePoint end = unpack_product_point(1, fr.end_state);
        CHECK(std::abs(symbol_Q(m, Side::L, end)) < 1e-9);
        CHECK(std::abs(symbol_Q(m, Side::R, end)) < 1e-9);
    }
}

TEST_SUITE_END();
