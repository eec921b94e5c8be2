#include "ahm/hyperbolic.hpp"

#include <cmath>
#include <stdexcept>

namespace ahm {

namespace {

// arccosh with a log1p form that stays accurate for arguments near 1
double stable_arccosh(double c) {
    if (c < 1.0) {
        if (c > 1.0 - 1e-12)
            return 0.0;
        throw std::domain_error("arccosh argument below 1");
    }
    double u = c - 1.0;
    return std::log1p(u + std::sqrt(u * (c + 1.0)));
}

}  // namespace

double exact_distance(double x, std::span<const double> y, double xp,
                      std::span<const double> yp) {
    if (x <= 0 || xp <= 0)
        throw std::domain_error("exact_distance: interior points require x > 0");
    double d2 = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double d = y[i] - yp[i];
        d2 += d * d;
    }
    double c = (x * x + xp * xp + d2) / (2 * x * xp);
    return stable_arccosh(c);
}

double exact_F(double rho_l, double rho_r, double y_norm) {
    double y2 = y_norm * y_norm;
    double a = (rho_r + rho_l) * (rho_r + rho_l) + y2;
    double b = (rho_r - rho_l) * (rho_r - rho_l) + y2;
    return std::log(0.5 * (1.0 + std::sqrt(a * b)));
}

double exact_sojourn(std::span<const double> y, std::span<const double> yp) {
    double d = dist(y, yp);
    if (d <= 0)
        throw std::domain_error("exact_sojourn: coincident boundary points");
    return 2 * std::log(d);
}

GeodesicPoint exact_geodesic(double xp, std::span<const double> yp, double xip,
                             std::span<const double> etap, double t) {
    const int n = static_cast<int>(yp.size());
    GeodesicPoint g;
    g.y.assign(yp.begin(), yp.end());
    g.eta.assign(etap.begin(), etap.end());
    double he = norm(etap);
    if (he < 1e-14) {
        // vertical line, x(t) = x' exp(sign(xi') t), eta stays zero
        double sgn = xip >= 0 ? 1.0 : -1.0;
        g.x = xp * std::exp(sgn * t);
        g.xi = sgn / g.x;
        return g;
    }
    // semicircle centered on the boundary in the plane spanned by eta
    double pc = xp * xip / he;            // planar center offset
    double rc = std::sqrt(pc * pc + xp * xp);  // circle radius, equals 1/|eta'|
    double tau0 = std::atanh(-pc / rc);
    double tau = tau0 + t;
    g.x = rc / std::cosh(tau);
    double p = pc + rc * std::tanh(tau);
    for (int i = 0; i < n; ++i)
        g.y[i] = yp[i] + p * etap[i] / he;
    g.xi = -std::tanh(tau) / g.x;
    return g;
}

LaunchData exact_launch(double xp, std::span<const double> yp, double x,
                        std::span<const double> y) {
    const int n = static_cast<int>(yp.size());
    LaunchData ld;
    ld.eta.assign(n, 0.0);
    ld.r = exact_distance(x, y, xp, yp);
    double d = dist(y, yp);
    if (d < 1e-14) {
        ld.xi = (x >= xp ? 1.0 : -1.0) / xp;
        return ld;
    }
    double pc = (d * d + x * x - xp * xp) / (2 * d);
    double rc = std::sqrt(pc * pc + xp * xp);
    ld.xi = pc / (rc * xp);
    for (int i = 0; i < n; ++i)
        ld.eta[i] = (y[i] - yp[i]) / (d * rc);
    return ld;
}

}  // namespace ahm
