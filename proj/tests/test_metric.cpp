#include <random>

#include "doctest.h"

#include "ahm/metric.hpp"

using namespace ahm;

TEST_SUITE_BEGIN("metric");

TEST_CASE("dual form of the exact model is euclidean") {
    MetricModel m = MetricModel::hyperbolic(2);
    Vec y{0.3, -0.7}, eta{3, 4};
    CHECK(h_eval(m, 1.0, y, eta) == doctest::Approx(25.0).epsilon(1e-15));
    Vec zero{0, 0};
    CHECK(h_eval(m, 0.5, y, zero) == 0.0);
    CHECK_THROWS_AS(h_eval(m, -0.1, y, eta), std::domain_error);
}

TEST_CASE("bump value at the center") {
    MetricModel m = MetricModel::perturbed(2, 0.1);
    Vec y{0, 0}, eta{1, 0};
    CHECK(h_eval(m, 0.0, y, eta) == doctest::Approx(1.1).epsilon(1e-15));
}

TEST_CASE("closed-form derivatives of the exact model") {
    MetricModel m = MetricModel::hyperbolic(2);
    Vec y{0.2, 0.4}, eta{1, 1};
    HDerivatives d = h_derivatives(m, 0.7, y, eta);
    CHECK(d.dx == 0.0);
    CHECK(d.dy[0] == 0.0);
    CHECK(d.deta[0] == doctest::Approx(2.0));
    // Euler identity at degree two
    CHECK(eta[0] * d.deta[0] + eta[1] * d.deta[1] == doctest::Approx(2 * d.value));
    CHECK(d.value == doctest::Approx(2.0));
}

TEST_CASE("perturbed derivatives match central differences") {
    MetricModel m = MetricModel::perturbed(2, 0.07, 0.4, 0.8, {0.1, -0.2});
    std::mt19937_64 rng(11);
    auto u = [&](double a, double b) {
        return a + (b - a) * std::uniform_real_distribution<double>(0, 1)(rng);
    };
    const double h = 1e-6;
    for (int trial = 0; trial < 5; ++trial) {
        double x = u(0.01, 1.5);
        Vec y{u(-1, 1), u(-1, 1)}, eta{u(-2, 2), u(-2, 2)};
        HDerivatives d = h_derivatives(m, x, y, eta);
        double fd_x = (h_eval(m, x + h, y, eta) - h_eval(m, x - h, y, eta)) / (2 * h);
        CHECK(d.dx == doctest::Approx(fd_x).epsilon(1e-6));
        for (int i = 0; i < 2; ++i) {
            Vec yp = y, ym = y;
            yp[i] += h;
            ym[i] -= h;
            double fd = (h_eval(m, x, yp, eta) - h_eval(m, x, ym, eta)) / (2 * h);
            CHECK(d.dy[i] == doctest::Approx(fd).epsilon(1e-6));
            Vec ep = eta, em = eta;
            ep[i] += h;
            em[i] -= h;
            fd = (h_eval(m, x, y, ep) - h_eval(m, x, y, em)) / (2 * h);
            CHECK(d.deta[i] == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("dual metric norm") {
    MetricModel m = MetricModel::hyperbolic(2);
    Vec y{0, 0}, zero{0, 0}, eta{3, 4};
    CHECK(dual_norm_sq(m, 2.0, y, 1.0, zero) == doctest::Approx(4.0));
    CHECK(dual_norm_sq(m, 0.0, y, 5.0, eta) == 0.0);
    CHECK(dual_norm_sq(m, 1.0, y, 0.0, eta) == doctest::Approx(25.0));
}

TEST_CASE("grid validation") {
    MetricModel good = MetricModel::perturbed(1, 0.1);
    MetricReport rg = validate_metric(good, SampleGrid::default_grid(good));
    CHECK(rg.pass);

    MetricModel exact = MetricModel::hyperbolic(2);
    CHECK(validate_metric(exact, SampleGrid::default_grid(exact)).pass);

    MetricModel bad = MetricModel::perturbed(1, 10.0);
    MetricReport rb = validate_metric(bad, SampleGrid::default_grid(bad));
    CHECK_FALSE(rb.pass);
    // worst offender is located at the bump center on the boundary
    CHECK(rb.worst_x == 0.0);
    CHECK(std::abs(rb.worst_y[0]) < 1e-12);
    CHECK(rb.message.find("x=0") != std::string::npos);
}

TEST_CASE("positivity, Euler identity and decay bound on random samples") {
    MetricModel m = MetricModel::perturbed(2, 0.3, 0.6, 1.2, {0.5, 0.0});
    std::mt19937_64 rng(7);
    auto u = [&](double a, double b) {
        return a + (b - a) * std::uniform_real_distribution<double>(0, 1)(rng);
    };
    for (int trial = 0; trial < 200; ++trial) {
        double x = u(0, 3);
        Vec y{u(-3, 3), u(-3, 3)}, eta{u(-2, 2), u(-2, 2)};
        if (norm(eta) < 1e-9)
            continue;
        double h = h_eval(m, x, y, eta);
        double e2 = norm_sq<double>(eta);
        CHECK(h > 0);
        CHECK(std::abs(h - e2) <= m.epsilon * e2 + 1e-15);
        HDerivatives d = h_derivatives(m, x, y, eta);
        double euler = eta[0] * d.deta[0] + eta[1] * d.deta[1] - 2 * h;
        CHECK(std::abs(euler) <= 1e-12 * std::max(1.0, 2 * std::abs(h)));
    }
}

TEST_SUITE_END();
