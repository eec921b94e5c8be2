#include <cmath>
#include <random>

#include "doctest.h"

#include "ahm/charts.hpp"
#include "ahm/hyperbolic.hpp"

using namespace ahm;

TEST_SUITE_BEGIN("hyperbolic");

TEST_CASE("distance closed form") {
    Vec o{0.0};
    CHECK(exact_distance(1, o, 1, o) == 0.0);
    CHECK(exact_distance(1, o, 2, o) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    Vec y1{1.0};
    // cosh r = (0.01 + 0.01 + 1) / 0.02 = 51
    CHECK(exact_distance(0.1, o, 0.1, y1) == doctest::Approx(std::acosh(51.0)).epsilon(1e-14));
    CHECK_THROWS_AS(exact_distance(0.0, o, 1.0, o), std::domain_error);
}

TEST_CASE("regular part closed form") {
    CHECK(exact_F(0, 0, 1) == doctest::Approx(0.0));
    double s = 1 / std::sqrt(2.0);
    CHECK(exact_F(s, s, 0) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
    // swap and Y-sign invariance
    CHECK(exact_F(0.3, 0.5, 0.6) == exact_F(0.5, 0.3, 0.6));
    CHECK(exact_F(0.3, 0.5, 0.6) == exact_F(0.3, 0.5, -0.6));
}

TEST_CASE("F matches distance plus logs through the blow-down") {
    std::mt19937_64 rng(3);
    auto u = [&](double a, double b) {
        return a + (b - a) * std::uniform_real_distribution<double>(0, 1)(rng);
    };
    for (int trial = 0; trial < 100; ++trial) {
        double x = u(0.05, 2), xp = u(0.05, 2);
        Vec y{u(-2, 2), u(-2, 2)}, yp{u(-2, 2), u(-2, 2)};
        if (std::abs(x - xp) + dist(y, yp) < 0.05) {
            --trial;
            continue;
        }
        PolarBlowupPoint p = blowdown_polar(x, y, xp, yp);
        double F = exact_distance(x, y, xp, yp) + std::log(p.rho_l) + std::log(p.rho_r);
        CHECK(F == doctest::Approx(exact_F(p.rho_l, p.rho_r, norm(p.Y))).epsilon(1e-12));
    }
}

TEST_CASE("corner sojourn value") {
    Vec a{0.0}, b{1.0}, c{2.0};
    CHECK(exact_sojourn(a, b) == doctest::Approx(0.0));
    CHECK(exact_sojourn(a, c) == doctest::Approx(2 * std::log(2.0)));
    Vec d{3.0};
    CHECK(exact_sojourn(a, d) - exact_sojourn(a, b) ==
          doctest::Approx(2 * std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("geodesic closed form") {
    Vec o{0.0}, zero_eta{0.0};
    // vertical ray x(t) = exp(-t) for the downward unit covector
    GeodesicPoint g = exact_geodesic(1.0, o, -1.0, zero_eta, 1.0);
    CHECK(g.x == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(g.y[0] == 0.0);

    // endpoint at t = r lands on the target
    std::mt19937_64 rng(5);
    auto u = [&](double a, double b) {
        return a + (b - a) * std::uniform_real_distribution<double>(0, 1)(rng);
    };
    for (int trial = 0; trial < 50; ++trial) {
        double xp = u(0.1, 2), x = u(0.1, 2);
        Vec yp{u(-2, 2)}, y{u(-2, 2)};
        if (std::abs(x - xp) + dist(y, yp) < 0.05) {
            --trial;
            continue;
        }
        LaunchData ld = exact_launch(xp, yp, x, y);
        GeodesicPoint e = exact_geodesic(xp, yp, ld.xi, ld.eta, ld.r);
        CHECK(e.x == doctest::Approx(x).epsilon(1e-10));
        CHECK(e.y[0] == doctest::Approx(y[0]).epsilon(1e-10));
    }
}

TEST_CASE("metric identities of the closed form") {
    std::mt19937_64 rng(9);
    auto u = [&](double a, double b) {
        return a + (b - a) * std::uniform_real_distribution<double>(0, 1)(rng);
    };
    for (int trial = 0; trial < 50; ++trial) {
        double xa = u(0.1, 3), xb = u(0.1, 3), xc = u(0.1, 3);
        Vec ya{u(-2, 2)}, yb{u(-2, 2)}, yc{u(-2, 2)};
        double ab = exact_distance(xa, ya, xb, yb);
        double ba = exact_distance(xb, yb, xa, ya);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-14));
        double ac = exact_distance(xa, ya, xc, yc);
        double bc = exact_distance(xb, yb, xc, yc);
        CHECK(ac <= ab + bc + 1e-12);
    }
}

TEST_SUITE_END();
