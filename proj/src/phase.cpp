#include "ahm/phase.hpp"

#include <array>
#include <stdexcept>

namespace ahm {

namespace {

constexpr int kMaxDim = 8;

void require_interior(double x, const char* who) {
    if (x <= 0)
        throw std::domain_error(std::string(who) + ": interior chart requires x > 0");
}

}  // namespace

double energy_p(const MetricModel& m, const PhasePoint& z) {
    require_interior(z.x, "energy_p");
    return 0.5 * (dual_norm_sq(m, z.x, z.y, z.xi, z.eta) - 1.0);
}

double symbol_Q(const MetricModel& m, Side side, const ProductPhasePoint& z) {
    const PhasePoint& f = side == Side::L ? z.left : z.right;
    require_interior(f.x, "symbol_Q");
    return 0.5 * (z.tau * z.tau - dual_norm_sq(m, f.x, f.y, f.xi, f.eta));
}

void field_Hp_packed(const MetricModel& m, std::span<const double> z, std::span<double> dz) {
    const int n = m.dim;
    double x = z[0];
    auto y = z.subspan(1, n);
    double xi = z[1 + n];
    auto eta = z.subspan(2 + n, n);

    double h, hx;
    std::array<double, kMaxDim> hy, heta;
    h_derivatives_into(m, x, y, eta, h, hx, std::span(hy.data(), n),
                       std::span(heta.data(), n));

    double x2 = x * x;
    dz[0] = x2 * xi;                                        // dx = dp/dxi
    for (int i = 0; i < n; ++i)
        dz[1 + i] = 0.5 * x2 * heta[i];                     // dy = dp/deta
    dz[1 + n] = -(x * (xi * xi + h) + 0.5 * x2 * hx);       // dxi = -dp/dx
    for (int i = 0; i < n; ++i)
        dz[2 + n + i] = -0.5 * x2 * hy[i];                  // deta = -dp/dy
}

TangentVector field_Hp(const MetricModel& m, const PhasePoint& z) {
    require_interior(z.x, "field_Hp");
    const int n = m.dim;
    Vec in(interior_single_size(n)), out(interior_single_size(n));
    pack_phase_point(z, in);
    field_Hp_packed(m, in, out);
    TangentVector v;
    v.left = unpack_phase_point(n, out);
    v.right.x = 0;
    v.right.xi = 0;
    v.right.y.assign(n, 0.0);
    v.right.eta.assign(n, 0.0);
    return v;
}

void field_HQ_packed(const MetricModel& m, Side side, std::span<const double> z,
                     std::span<double> dz) {
    const int n = m.dim;
    const int k = interior_single_size(n);
    double tau = z[1];
    for (std::size_t i = 0; i < dz.size(); ++i)
        dz[i] = 0;
    dz[0] = tau;  // dt = dQ/dtau; tau itself is conserved
    const int off = side == Side::L ? 2 : 2 + k;
    auto f = z.subspan(off, k);
    auto df = dz.subspan(off, k);
    // Q = (1/2)(tau^2 - |zeta|^2), so the factor flows against H_p.
    field_Hp_packed(m, f, df);
    for (int i = 0; i < k; ++i)
        df[i] = -df[i];
}

TangentVector field_HQ(const MetricModel& m, Side side, const ProductPhasePoint& z) {
    const PhasePoint& f = side == Side::L ? z.left : z.right;
    require_interior(f.x, "field_HQ");
    const int n = m.dim;
    Vec in(product_size(n)), out(product_size(n));
    pack_product_point(z, in);
    field_HQ_packed(m, side, in, out);
    TangentVector v;
    ProductPhasePoint d = unpack_product_point(n, out);
    v.t = d.t;
    v.tau = d.tau;
    v.left = d.left;
    v.right = d.right;
    return v;
}

void pack_phase_point(const PhasePoint& z, std::span<double> out) {
    const int n = static_cast<int>(z.y.size());
    out[0] = z.x;
    for (int i = 0; i < n; ++i)
        out[1 + i] = z.y[i];
    out[1 + n] = z.xi;
    for (int i = 0; i < n; ++i)
        out[2 + n + i] = z.eta[i];
}

PhasePoint unpack_phase_point(int n, std::span<const double> z) {
    PhasePoint p;
    p.x = z[0];
    p.y.assign(z.begin() + 1, z.begin() + 1 + n);
    p.xi = z[1 + n];
    p.eta.assign(z.begin() + 2 + n, z.begin() + 2 + 2 * n);
    return p;
}

void pack_product_point(const ProductPhasePoint& z, std::span<double> out) {
    const int n = static_cast<int>(z.left.y.size());
    const int k = interior_single_size(n);
    out[0] = z.t;
    out[1] = z.tau;
    pack_phase_point(z.left, out.subspan(2, k));
    pack_phase_point(z.right, out.subspan(2 + k, k));
}

ProductPhasePoint unpack_product_point(int n, std::span<const double> z) {
    const int k = interior_single_size(n);
    ProductPhasePoint p;
    p.t = z[0];
    p.tau = z[1];
    p.left = unpack_phase_point(n, z.subspan(2, k));
    p.right = unpack_phase_point(n, z.subspan(2 + k, k));
    return p;
}

}  // namespace ahm
