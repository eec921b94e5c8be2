#ifndef AHM_CHARTS_HPP
#define AHM_CHARTS_HPP

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "ahm/phase.hpp"
#include "ahm/smallvec.hpp"

namespace ahm {

// Charts on (R_s x) the 0-blown-up double space.  Boundary faces: L (left
// factor at x = 0), R (right factor at x' = 0), ff (front face over the
// boundary diagonal).
//
// Packed state layouts, n = boundary dimension:
//   interior single   (x, y[n], xi, eta[n])
//   interior product  (t, tau, x, y, xi, eta, x', y', xi', eta')
//   region1 single    (x, y, xit, eta, s, sigma)
//   region3 product   (x, y, xit, eta, x', y', xit', eta', s, sigma)
//   region2 product   (X, Y[n], b, yb[n], lt, mu[n], lp, mup[n], s, sigma)
//                     near factor written first, (b, yb) is the far factor
//   region4 product   (u, w, w', Z[n-1], y'[n], nu, lt, ltp, mu[n-1], mup[n], s, sigma)
enum class ChartId { Interior, Region1, Region2L, Region2R, Region3, Region4 };

std::string chart_name(ChartId c);

inline int region1_single_size(int n) { return 2 * n + 4; }
// all product charts share the packed size 4n+6 of product_size(n)

// ---- polar blow-up of the boundary diagonal ----

// rho_ff = [x^2 + x'^2 + |y-y'|^2]^(1/2), rho_L = x/rho_ff, rho_R = x'/rho_ff.
struct PolarBlowupPoint {
    double R = 0;  // front-face defining function
    double rho_l = 0;
    double rho_r = 0;
    Vec Y;   // (y - y')/R
    Vec yp;  // base point on the boundary diagonal
};

PolarBlowupPoint blowdown_polar(double x, std::span<const double> y, double xp,
                                std::span<const double> yp);

struct InteriorPair {
    double x;
    Vec y;
    double xp;
    Vec yp;
};

InteriorPair blowup_polar(const PolarBlowupPoint& p);

// ---- projective charts ----

struct Region2ChartPoint {
    Side near_side = Side::L;  // which factor sits by its face
    double X = 0;              // near-face defining function
    Vec Y;
    double base_x = 0;  // far factor position, also the ff defining function
    Vec base_y;
    double lambda_tilde = 0;
    Vec mu;
    double lambda_far = 0;
    Vec mu_far;
    double s = 0;
    double sigma = 1;
};

struct Region4ChartPoint {
    double u = 0;  // y_1 - y_1' > 0, ff defining function
    double w = 0;  // x/u, L defining function
    double wp = 0; // x'/u, R defining function
    Vec Z;         // (y_j - y_j')/u, j >= 2
    Vec yp;
    double nu = 0;
    double lambda_tilde = 0;
    double lambda_tilde_p = 0;
    Vec mu;   // n-1 components
    Vec mup;  // n components
    double s = 0;
    double sigma = 1;
};

Region2ChartPoint lift_region2(const ProductPhasePoint& z, Side near_side = Side::L);
Region4ChartPoint lift_region4(const ProductPhasePoint& z);

// ---- chart thresholds and validity ----

struct ChartConfig {
    double x_switch = 0.1;   // near-face threshold for regions 1 and 3
    double u_switch = 0.2;   // front-face threshold
    double r_switch = 0.3;   // away-from-far-face ratio for region 2
    double w_switch = 0.5;   // projective bounds for region 4
    double diag_margin = 0.05;
};

// Validity of a product chart for driving the given side, judged from the
// interior positions of the pair.
bool chart_valid(ChartId chart, Side side, double x, std::span<const double> y,
                 double xp, std::span<const double> yp, const ChartConfig& cfg);

std::optional<ChartId> pick_chart(Side side, double x, std::span<const double> y,
                                  double xp, std::span<const double> yp,
                                  const ChartConfig& cfg);

// ---- packed transforms, templated for derivative oracles ----

namespace layout {

struct Product {
    int n;
    int t = 0, tau = 1;
    int x() const { return 2; }
    int y() const { return 3; }
    int xi() const { return n + 3; }
    int eta() const { return n + 4; }
    int xp() const { return 2 * n + 4; }
    int yp() const { return 2 * n + 5; }
    int xip() const { return 3 * n + 5; }
    int etap() const { return 3 * n + 6; }
};

struct R3 {
    int n;
    int x = 0;
    int y() const { return 1; }
    int xit() const { return n + 1; }
    int eta() const { return n + 2; }
    int xp() const { return 2 * n + 2; }
    int yp() const { return 2 * n + 3; }
    int xitp() const { return 3 * n + 3; }
    int etap() const { return 3 * n + 4; }
    int s() const { return 4 * n + 4; }
    int sigma() const { return 4 * n + 5; }
};

struct R2 {
    int n;
    int X = 0;
    int Y() const { return 1; }
    int b() const { return n + 1; }
    int yb() const { return n + 2; }
    int lt() const { return 2 * n + 2; }
    int mu() const { return 2 * n + 3; }
    int lp() const { return 3 * n + 3; }
    int mup() const { return 3 * n + 4; }
    int s() const { return 4 * n + 4; }
    int sigma() const { return 4 * n + 5; }
};

struct R4 {
    int n;
    int u = 0, w = 1, wp = 2;
    int Z() const { return 3; }
    int yp() const { return n + 2; }
    int nu() const { return 2 * n + 2; }
    int lt() const { return 2 * n + 3; }
    int ltp() const { return 2 * n + 4; }
    int mu() const { return 2 * n + 5; }
    int mup() const { return 3 * n + 4; }
    int s() const { return 4 * n + 4; }
    int sigma() const { return 4 * n + 5; }
};

struct R1S {
    int n;
    int x = 0;
    int y() const { return 1; }
    int xit() const { return n + 1; }
    int eta() const { return n + 2; }
    int s() const { return 2 * n + 2; }
    int sigma() const { return 2 * n + 3; }
};

}  // namespace layout

// region 1, one factor: s = t + log x, xit = xi - sigma/x
template <class T>
void r1s_from_interior(int n, std::span<const T> z, const T& t, const T& sigma,
                       std::span<T> out) {
    using std::log;
    layout::R1S c{n};
    out[c.x] = z[0];
    for (int i = 0; i < n; ++i)
        out[c.y() + i] = z[1 + i];
    out[c.xit()] = z[1 + n] - sigma / z[0];
    for (int i = 0; i < n; ++i)
        out[c.eta() + i] = z[2 + n + i];
    out[c.s()] = t + log(z[0]);
    out[c.sigma()] = sigma;
}

template <class T>
void r1s_to_interior(int n, std::span<const T> ch, std::span<T> z, T& t, T& sigma) {
    using std::log;
    layout::R1S c{n};
    z[0] = ch[c.x];
    for (int i = 0; i < n; ++i)
        z[1 + i] = ch[c.y() + i];
    sigma = ch[c.sigma()];
    z[1 + n] = ch[c.xit()] + sigma / ch[c.x];
    for (int i = 0; i < n; ++i)
        z[2 + n + i] = ch[c.eta() + i];
    t = ch[c.s()] - log(ch[c.x]);
}

// region 3: both factors carry the region 1 change, s = t + log x + log x'
template <class T>
void r3_from_interior(int n, std::span<const T> zi, std::span<T> out) {
    using std::log;
    layout::Product p{n};
    layout::R3 c{n};
    const T& tau = zi[p.tau];
    out[c.x] = zi[p.x()];
    out[c.xp()] = zi[p.xp()];
    for (int i = 0; i < n; ++i) {
        out[c.y() + i] = zi[p.y() + i];
        out[c.yp() + i] = zi[p.yp() + i];
        out[c.eta() + i] = zi[p.eta() + i];
        out[c.etap() + i] = zi[p.etap() + i];
    }
    out[c.xit()] = zi[p.xi()] - tau / zi[p.x()];
    out[c.xitp()] = zi[p.xip()] - tau / zi[p.xp()];
    out[c.s()] = zi[p.t] + log(zi[p.x()]) + log(zi[p.xp()]);
    out[c.sigma()] = tau;
}

template <class T>
void r3_to_interior(int n, std::span<const T> ch, std::span<T> zi) {
    using std::log;
    layout::Product p{n};
    layout::R3 c{n};
    const T& sigma = ch[c.sigma()];
    zi[p.tau] = sigma;
    zi[p.x()] = ch[c.x];
    zi[p.xp()] = ch[c.xp()];
    for (int i = 0; i < n; ++i) {
        zi[p.y() + i] = ch[c.y() + i];
        zi[p.yp() + i] = ch[c.yp() + i];
        zi[p.eta() + i] = ch[c.eta() + i];
        zi[p.etap() + i] = ch[c.etap() + i];
    }
    zi[p.xi()] = ch[c.xit()] + sigma / ch[c.x];
    zi[p.xip()] = ch[c.xitp()] + sigma / ch[c.xp()];
    zi[p.t] = ch[c.s()] - log(ch[c.x]) - log(ch[c.xp()]);
}

// Swap the two factor blocks of an interior product pack in place.
template <class T>
void swap_factors(int n, std::span<T> zi) {
    const int k = 2 * n + 2;
    for (int i = 0; i < k; ++i)
        std::swap(zi[2 + i], zi[2 + k + i]);
}

// region 2 with the near factor written in the (x, y, xi, eta) slots:
//   X = x/b, Y = (y - yb)/b, lambda = b xi, mu = b eta,
//   lp = xi_far + xi X + eta.Y, mup = eta + eta_far,
//   lt = lambda - tau/X, s = t + log X.
template <class T>
void r2_from_interior_near_first(int n, std::span<const T> zi, std::span<T> out) {
    using std::log;
    layout::Product p{n};
    layout::R2 c{n};
    const T& tau = zi[p.tau];
    const T& x = zi[p.x()];
    const T& b = zi[p.xp()];
    T X = x / b;
    out[c.X] = X;
    out[c.b()] = b;
    T etaY{};
    for (int i = 0; i < n; ++i) {
        T Yi = (zi[p.y() + i] - zi[p.yp() + i]) / b;
        out[c.Y() + i] = Yi;
        out[c.yb() + i] = zi[p.yp() + i];
        out[c.mu() + i] = b * zi[p.eta() + i];
        out[c.mup() + i] = zi[p.eta() + i] + zi[p.etap() + i];
        etaY += zi[p.eta() + i] * Yi;
    }
    out[c.lt()] = b * zi[p.xi()] - tau / X;
    out[c.lp()] = zi[p.xip()] + zi[p.xi()] * X + etaY;
    out[c.s()] = zi[p.t] + log(X);
    out[c.sigma()] = tau;
}

template <class T>
void r2_to_interior_near_first(int n, std::span<const T> ch, std::span<T> zi) {
    using std::log;
    layout::Product p{n};
    layout::R2 c{n};
    const T& sigma = ch[c.sigma()];
    const T& X = ch[c.X];
    const T& b = ch[c.b()];
    zi[p.tau] = sigma;
    zi[p.x()] = X * b;
    zi[p.xp()] = b;
    T lambda = ch[c.lt()] + sigma / X;
    T xi = lambda / b;
    zi[p.xi()] = xi;
    T etaY{};
    for (int i = 0; i < n; ++i) {
        T eta_i = ch[c.mu() + i] / b;
        zi[p.eta() + i] = eta_i;
        zi[p.y() + i] = b * ch[c.Y() + i] + ch[c.yb() + i];
        zi[p.yp() + i] = ch[c.yb() + i];
        zi[p.etap() + i] = ch[c.mup() + i] - eta_i;
        etaY += eta_i * ch[c.Y() + i];
    }
    zi[p.xip()] = ch[c.lp()] - xi * X - etaY;
    zi[p.t] = ch[c.s()] - log(X);
}

template <class T>
void r2_from_interior(int n, Side near_side, std::span<const T> zi, std::span<T> out) {
    if (near_side == Side::L) {
        r2_from_interior_near_first(n, zi, out);
    } else {
        std::vector<T> sw(zi.begin(), zi.end());
        swap_factors<T>(n, sw);
        r2_from_interior_near_first<T>(n, sw, out);
    }
}

template <class T>
void r2_to_interior(int n, Side near_side, std::span<const T> ch, std::span<T> zi) {
    r2_to_interior_near_first(n, ch, zi);
    if (near_side == Side::R)
        swap_factors(n, zi);
}

// region 4 near the triple corner:
//   u = y1 - y1', w = x/u, w' = x'/u, Z_j = (y_j - y_j')/u,
//   nu = xi w + xi' w' + eta_1 + sum eta_j Z_j,
//   lt = xi u - sigma/w, ltp = xi' u - sigma/w',
//   mu_j = eta_j u (j >= 2), mup = eta + eta', s = t + log w + log w'.
template <class T>
void r4_from_interior(int n, std::span<const T> zi, std::span<T> out) {
    using std::log;
    layout::Product p{n};
    layout::R4 c{n};
    const T& tau = zi[p.tau];
    T u = zi[p.y()] - zi[p.yp()];
    T w = zi[p.x()] / u;
    T wp = zi[p.xp()] / u;
    out[c.u] = u;
    out[c.w] = w;
    out[c.wp] = wp;
    T nu = zi[p.xi()] * w + zi[p.xip()] * wp + zi[p.eta()];
    for (int i = 1; i < n; ++i) {
        T Zi = (zi[p.y() + i] - zi[p.yp() + i]) / u;
        out[c.Z() + i - 1] = Zi;
        out[c.mu() + i - 1] = zi[p.eta() + i] * u;
        nu += zi[p.eta() + i] * Zi;
    }
    out[c.nu()] = nu;
    out[c.lt()] = zi[p.xi()] * u - tau / w;
    out[c.ltp()] = zi[p.xip()] * u - tau / wp;
    for (int i = 0; i < n; ++i) {
        out[c.yp() + i] = zi[p.yp() + i];
        out[c.mup() + i] = zi[p.eta() + i] + zi[p.etap() + i];
    }
    out[c.s()] = zi[p.t] + log(w) + log(wp);
    out[c.sigma()] = tau;
}

template <class T>
void r4_to_interior(int n, std::span<const T> ch, std::span<T> zi) {
    using std::log;
    layout::Product p{n};
    layout::R4 c{n};
    const T& sigma = ch[c.sigma()];
    const T& u = ch[c.u];
    const T& w = ch[c.w];
    const T& wp = ch[c.wp];
    zi[p.tau] = sigma;
    zi[p.x()] = u * w;
    zi[p.xp()] = u * wp;
    T xi = (ch[c.lt()] + sigma / w) / u;
    T xip = (ch[c.ltp()] + sigma / wp) / u;
    zi[p.xi()] = xi;
    zi[p.xip()] = xip;
    T eta1 = ch[c.nu()] - xi * w - xip * wp;
    zi[p.y()] = ch[c.yp()] + u;
    zi[p.yp()] = ch[c.yp()];
    for (int i = 1; i < n; ++i) {
        T eta_i = ch[c.mu() + i - 1] / u;
        eta1 -= eta_i * ch[c.Z() + i - 1];
        zi[p.eta() + i] = eta_i;
        zi[p.y() + i] = ch[c.yp() + i] + u * ch[c.Z() + i - 1];
        zi[p.yp() + i] = ch[c.yp() + i];
        zi[p.etap() + i] = ch[c.mup() + i] - eta_i;
    }
    zi[p.eta()] = eta1;
    zi[p.etap()] = ch[c.mup()] - eta1;
    zi[p.t] = ch[c.s()] - log(w) - log(wp);
}

// Generic product transform dispatch.  Side is the near/driven factor for
// charts that need it.
void chart_from_interior(int n, ChartId chart, Side side, std::span<const double> zi,
                         std::span<double> out);
void chart_to_interior(int n, ChartId chart, Side side, std::span<const double> ch,
                       std::span<double> zi);

// Transfer a packed product state between charts through the interior
// coordinates.  Throws std::domain_error when the point leaves the overlap.
void chart_transfer(int n, ChartId from, Side from_side, std::span<const double> in,
                    ChartId to, Side to_side, std::span<double> out);

}  // namespace ahm

#endif
