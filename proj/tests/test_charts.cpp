#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"

#include "ahm/charts.hpp"
#include "ahm/rescaled.hpp"

using namespace ahm;

namespace {

using Cx = std::complex<double>;

std::mt19937_64 rng(42);
double uni(double a, double b) {
    return a + (b - a) * std::uniform_real_distribution<double>(0, 1)(rng);
}

// random interior product pack with y_1 - y_1' = d > 0
Vec random_pair(int n, double x, double xp, double d) {
    layout::Product p{n};
    Vec z(product_size(n));
    z[p.t] = uni(0, 1);
    z[p.tau] = 1.0;
    z[p.x()] = x;
    z[p.xp()] = xp;
    z[p.y()] = d;
    z[p.yp()] = 0;
    for (int i = 1; i < n; ++i) {
        z[p.yp() + i] = uni(-0.5, 0.5);
        z[p.y() + i] = z[p.yp() + i] + uni(-0.3, 0.3);
    }
    for (int i = 0; i < n; ++i) {
        z[p.eta() + i] = uni(-1, 1);
        z[p.etap() + i] = uni(-1, 1);
    }
    z[p.xi()] = uni(-2, 2);
    z[p.xip()] = uni(-2, 2);
    return z;
}

// canonical two-form on interior product tangents
double omega_interior(int n, std::span<const double> u, std::span<const double> v) {
    layout::Product p{n};
    double w = u[p.tau] * v[p.t] - u[p.t] * v[p.tau];
    w += u[p.xi()] * v[p.x()] - u[p.x()] * v[p.xi()];
    w += u[p.xip()] * v[p.xp()] - u[p.xp()] * v[p.xip()];
    for (int i = 0; i < n; ++i) {
        w += u[p.eta() + i] * v[p.y() + i] - u[p.y() + i] * v[p.eta() + i];
        w += u[p.etap() + i] * v[p.yp() + i] - u[p.yp() + i] * v[p.etap() + i];
    }
    return w;
}

// canonical two-form in a product chart, given its (momentum, position) pairs
double omega_pairs(const std::vector<std::pair<int, int>>& pairs, std::span<const double> u,
                   std::span<const double> v) {
    double w = 0;
    for (auto [mom, pos] : pairs)
        w += u[mom] * v[pos] - u[pos] * v[mom];
    return w;
}

std::vector<std::pair<int, int>> pairs_r3(int n) {
    layout::R3 c{n};
    std::vector<std::pair<int, int>> ps{{c.sigma(), c.s()}, {c.xit(), c.x}, {c.xitp(), c.xp()}};
    for (int i = 0; i < n; ++i) {
        ps.push_back({c.eta() + i, c.y() + i});
        ps.push_back({c.etap() + i, c.yp() + i});
    }
    return ps;
}

std::vector<std::pair<int, int>> pairs_r2(int n) {
    layout::R2 c{n};
    std::vector<std::pair<int, int>> ps{{c.sigma(), c.s()}, {c.lt(), c.X}, {c.lp(), c.b()}};
    for (int i = 0; i < n; ++i) {
        ps.push_back({c.mu() + i, c.Y() + i});
        ps.push_back({c.mup() + i, c.yb() + i});
    }
    return ps;
}

std::vector<std::pair<int, int>> pairs_r4(int n) {
    layout::R4 c{n};
    std::vector<std::pair<int, int>> ps{{c.sigma(), c.s()},
                                        {c.lt(), c.w},
                                        {c.ltp(), c.wp},
                                        {c.nu(), c.u}};
    for (int j = 0; j + 1 < n; ++j)
        ps.push_back({c.mu() + j, c.Z() + j});
    for (int i = 0; i < n; ++i)
        ps.push_back({c.mup() + i, c.yp() + i});
    return ps;
}

// complex-step differential of a chart map along tangent u
template <class Map>
Vec push_tangent(int n, Map map, std::span<const double> z, std::span<const double> u) {
    const double h = 1e-100;
    std::vector<Cx> zc(z.size()), out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        zc[i] = Cx(z[i], h * u[i]);
    map(n, std::span<const Cx>(zc), std::span<Cx>(out));
    Vec v(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        v[i] = out[i].imag() / h;
    return v;
}

}  // namespace

TEST_SUITE_BEGIN("charts");

TEST_CASE("polar blow-down values") {
    Vec y{1.0}, yp{1.0};
    PolarBlowupPoint p = blowdown_polar(0.3, y, 0.4, yp);
    CHECK(p.R == doctest::Approx(0.5));
    CHECK(p.rho_l == doctest::Approx(0.6));
    CHECK(p.rho_r == doctest::Approx(0.8));
    CHECK(p.Y[0] == 0.0);

    Vec y2{2.0}, yp2{0.0};
    p = blowdown_polar(0.0, y2, 0.0, yp2);
    CHECK(p.R == doctest::Approx(2.0));
    CHECK(p.rho_l == 0.0);
    CHECK(p.rho_r == 0.0);
    CHECK(std::abs(p.Y[0]) == doctest::Approx(1.0));

    CHECK_THROWS_AS(blowdown_polar(0.0, y, 0.0, y), std::domain_error);
}

TEST_CASE("polar blow-up inverts the blow-down") {
    for (int trial = 0; trial < 100; ++trial) {
        double x = uni(0.01, 2), xp = uni(0.01, 2);
        Vec y{uni(-2, 2), uni(-2, 2)}, yp{uni(-2, 2), uni(-2, 2)};
        PolarBlowupPoint p = blowdown_polar(x, y, xp, yp);
        CHECK(std::abs(p.rho_l * p.rho_l + p.rho_r * p.rho_r + norm_sq<double>(p.Y) - 1) <
              1e-14);
        InteriorPair z = blowup_polar(p);
        CHECK(z.x == doctest::Approx(x).epsilon(1e-12));
        CHECK(z.xp == doctest::Approx(xp).epsilon(1e-12));
        CHECK(z.y[0] == doctest::Approx(y[0]).epsilon(1e-12));
        CHECK(z.y[1] == doctest::Approx(y[1]).epsilon(1e-12));
    }
    // pure face point: rho_L = 1 over the base point
    PolarBlowupPoint p;
    p.R = 1;
    p.rho_l = 1;
    p.rho_r = 0;
    p.Y = {0.0};
    p.yp = {0.7};
    InteriorPair z = blowup_polar(p);
    CHECK(z.x == doctest::Approx(1.0));
    CHECK(z.xp == 0.0);
    CHECK(z.y[0] == doctest::Approx(0.7));
    // a front-face point carries direction data only
    p.R = 0;
    p.rho_l = 0.6;
    p.rho_r = 0.8;
    z = blowup_polar(p);
    CHECK(z.x == 0.0);
    CHECK(z.xp == 0.0);
    CHECK(z.y[0] == doctest::Approx(0.7));
    // violated sphere constraint is rejected
    p.rho_l = 1.0;
    CHECK_THROWS_AS(blowup_polar(p), std::domain_error);
}

TEST_CASE("projective lift near one face") {
    ProductPhasePoint z;
    z.t = 0;
    z.tau = 1;
    z.left.x = 0.2;
    z.left.y = {1.0};
    z.right.x = 0.4;
    z.right.y = {0.0};
    z.left.xi = 7.5;  // lambda = x' xi = 3
    z.left.eta = {0.3};
    z.right.xi = 0.4;
    z.right.eta = {-0.2};
    Region2ChartPoint c = lift_region2(z, Side::L);
    CHECK(c.X == doctest::Approx(0.5));
    CHECK(c.Y[0] == doctest::Approx(2.5));
    // lambda_tilde = lambda - tau/X = 3 - 2
    CHECK(c.lambda_tilde == doctest::Approx(1.0));
    CHECK(c.s == doctest::Approx(std::log(0.5)));
}

TEST_CASE("projective lift near the corner") {
    ProductPhasePoint z;
    z.t = 0;
    z.tau = 1;
    z.left.x = 0.1;
    z.left.y = {1.0};
    z.left.xi = 0.5;
    z.left.eta = {0.3};
    z.right.x = 0.2;
    z.right.y = {0.5};
    z.right.xi = -0.4;
    z.right.eta = {0.1};
    Region4ChartPoint c = lift_region4(z);
    CHECK(c.u == doctest::Approx(0.5));
    CHECK(c.w == doctest::Approx(0.2));
    CHECK(c.wp == doctest::Approx(0.4));
    // n = 1: nu = xi w + xi' w' + eta_1, empty Z block
    CHECK(c.nu == doctest::Approx(0.5 * 0.2 - 0.4 * 0.4 + 0.3));
    CHECK(c.Z.empty());
    CHECK(c.mu.empty());
}

TEST_CASE("lifts preserve the canonical two-form") {
    const int n = 2;
    const int np = product_size(n);
    for (int trial = 0; trial < 20; ++trial) {
        Vec z = random_pair(n, uni(0.05, 0.3), uni(0.05, 0.3), uni(0.2, 0.6));
        Vec u(np), v(np);
        for (int i = 0; i < np; ++i) {
            u[i] = uni(-1, 1);
            v[i] = uni(-1, 1);
        }
        double w0 = omega_interior(n, u, v);

        auto check_chart = [&](auto map, const std::vector<std::pair<int, int>>& pairs) {
            Vec du = push_tangent(n, map, z, u);
            Vec dv = push_tangent(n, map, z, v);
            CHECK(omega_pairs(pairs, du, dv) == doctest::Approx(w0).epsilon(1e-12));
        };
        check_chart([](int nn, std::span<const Cx> a, std::span<Cx> b) {
            r3_from_interior<Cx>(nn, a, b);
        }, pairs_r3(n));
        check_chart([](int nn, std::span<const Cx> a, std::span<Cx> b) {
            r2_from_interior<Cx>(nn, Side::L, a, b);
        }, pairs_r2(n));
        check_chart([](int nn, std::span<const Cx> a, std::span<Cx> b) {
            r2_from_interior<Cx>(nn, Side::R, a, b);
        }, pairs_r2(n));
        check_chart([](int nn, std::span<const Cx> a, std::span<Cx> b) {
            r4_from_interior<Cx>(nn, a, b);
        }, pairs_r4(n));
    }
}

TEST_CASE("chart transfers compose through the interior") {
    const int n = 2;
    const int np = product_size(n);
    for (int trial = 0; trial < 30; ++trial) {
        // u and x' both inside (0.1, 0.5), the overlap of the two projective charts
        Vec zi = random_pair(n, uni(0.02, 0.08), uni(0.1, 0.3), uni(0.15, 0.45));
        Vec a(np), b(np), c(np);
        // region2L -> region4 -> region3 -> region2L round trip
        chart_from_interior(n, ChartId::Region2L, Side::L, zi, a);
        chart_transfer(n, ChartId::Region2L, Side::L, a, ChartId::Region4, Side::L, b);
        chart_transfer(n, ChartId::Region4, Side::L, b, ChartId::Region3, Side::L, c);
        chart_transfer(n, ChartId::Region3, Side::L, c, ChartId::Region2L, Side::L, b);
        CHECK(max_abs_diff(a, b) < 1e-10);
        // identity transfer
        chart_transfer(n, ChartId::Region2L, Side::L, a, ChartId::Region2L, Side::L, c);
        CHECK(max_abs_diff(a, c) == 0.0);
    }
    // out-of-overlap transfer is rejected: y_1 - y_1' < 0 cannot enter region 4
    Vec zi = random_pair(n, 0.05, 0.05, 0.2);
    layout::Product p{n};
    std::swap(zi[p.y()], zi[p.yp()]);  // now y_1 < y_1'
    Vec a(np), out(np);
    chart_from_interior(n, ChartId::Region3, Side::L, zi, a);
    CHECK_THROWS_AS(chart_transfer(n, ChartId::Region3, Side::L, a, ChartId::Region4,
                                   Side::L, out),
                    std::domain_error);
}

TEST_CASE("dual slot reconstruction in the corner chart") {
    const int n = 3;
    for (int trial = 0; trial < 20; ++trial) {
        Vec zi = random_pair(n, uni(0.02, 0.1), uni(0.02, 0.1), uni(0.1, 0.3));
        Vec ch(product_size(n));
        r4_from_interior<double>(n, zi, ch);
        Vec et(n);
        r4_eta_tilde<double>(MetricModel::hyperbolic(n), ch, et);
        layout::Product p{n};
        double u = zi[p.y()] - zi[p.yp()];
        for (int i = 0; i < n; ++i)
            CHECK(et[i] == doctest::Approx(u * zi[p.eta() + i]).epsilon(1e-12));
    }
}

TEST_CASE("every handoff geometry reaches some chart after finitely many halvings") {
    ChartConfig cfg;
    for (int trial = 0; trial < 200; ++trial) {
        double xp = uni(0.001, 0.3), d = uni(0.005, 0.5);
        Vec y{d}, yp{0.0};
        double x = cfg.x_switch;
        bool found = false;
        for (int k = 0; k < 40 && !found; ++k) {
            x *= 0.5;
            found = pick_chart(Side::L, x, y, xp, yp, cfg).has_value();
        }
        CHECK(found);
    }
}

TEST_SUITE_END();
