#include "ahm/rescaled.hpp"

#include <array>
#include <stdexcept>

namespace ahm {

namespace {

constexpr int kMaxDim = 8;

void require_dim(int n) {
    if (n < 1 || n > kMaxDim)
        throw std::invalid_argument("boundary dimension out of supported range");
}

}  // namespace

double q_region1(const MetricModel& m, std::span<const double> z) {
    return q_region1_t<double>(m, z);
}
double q_region2(const MetricModel& m, std::span<const double> z) {
    return q_region2_t<double>(m, z);
}
double q_region3(const MetricModel& m, Side side, std::span<const double> z) {
    return q_region3_t<double>(m, side, z);
}
double q_region4(const MetricModel& m, Side side, std::span<const double> z) {
    return q_region4_t<double>(m, side, z);
}

void field_r1s(const MetricModel& m, std::span<const double> z, std::span<double> dz) {
    const int n = m.dim;
    require_dim(n);
    layout::R1S c{n};
    double x = z[c.x];
    auto y = z.subspan(c.y(), n);
    double xit = z[c.xit()];
    auto eta = z.subspan(c.eta(), n);
    double sigma = z[c.sigma()];

    double h, hx;
    std::array<double, kMaxDim> hy, he;
    h_derivatives_into(m, x, y, eta, h, hx, std::span(hy.data(), n), std::span(he.data(), n));

    dz[c.x] = sigma + x * xit;
    for (int i = 0; i < n; ++i) {
        dz[c.y() + i] = 0.5 * x * he[i];
        dz[c.eta() + i] = -0.5 * x * hy[i];
    }
    dz[c.xit()] = -0.5 * (xit * xit + h + x * hx);
    dz[c.s()] = xit;
    dz[c.sigma()] = 0;
}

void field_r3(const MetricModel& m, Side side, std::span<const double> z,
              std::span<double> dz) {
    const int n = m.dim;
    require_dim(n);
    layout::R3 c{n};
    for (std::size_t i = 0; i < dz.size(); ++i)
        dz[i] = 0;
    int ox = side == Side::L ? c.x : c.xp();
    int oy = side == Side::L ? c.y() : c.yp();
    int oxit = side == Side::L ? c.xit() : c.xitp();
    int oeta = side == Side::L ? c.eta() : c.etap();
    double x = z[ox];
    auto y = z.subspan(oy, n);
    double xit = z[oxit];
    auto eta = z.subspan(oeta, n);
    double sigma = z[c.sigma()];

    double h, hx;
    std::array<double, kMaxDim> hy, he;
    h_derivatives_into(m, x, y, eta, h, hx, std::span(hy.data(), n), std::span(he.data(), n));

    dz[ox] = sigma + x * xit;
    for (int i = 0; i < n; ++i) {
        dz[oy + i] = 0.5 * x * he[i];
        dz[oeta + i] = -0.5 * x * hy[i];
    }
    dz[oxit] = -0.5 * (xit * xit + h + x * hx);
    dz[c.s()] = xit;
    dz[c.sigma()] = 0;
}

void field_r2(const MetricModel& m, std::span<const double> z, std::span<double> dz) {
    const int n = m.dim;
    require_dim(n);
    layout::R2 c{n};
    double X = z[c.X];
    double b = z[c.b()];
    double lt = z[c.lt()];
    double sigma = z[c.sigma()];
    std::array<double, kMaxDim> yh;
    for (int i = 0; i < n; ++i)
        yh[i] = b * z[c.Y() + i] + z[c.yb() + i];
    auto mu = z.subspan(c.mu(), n);

    double h, hx;
    std::array<double, kMaxDim> hy, he;
    h_derivatives_into(m, b * X, std::span<const double>(yh.data(), n), mu, h, hx,
                       std::span(hy.data(), n), std::span(he.data(), n));

    double Yhy = 0;
    for (int i = 0; i < n; ++i)
        Yhy += z[c.Y() + i] * hy[i];

    dz[c.X] = sigma + X * lt;
    dz[c.b()] = 0;
    dz[c.lt()] = -0.5 * (lt * lt + h + X * b * hx);
    dz[c.lp()] = -0.5 * X * (X * hx + Yhy);
    for (int i = 0; i < n; ++i) {
        dz[c.Y() + i] = 0.5 * X * he[i];
        dz[c.yb() + i] = 0;
        dz[c.mu() + i] = -0.5 * X * b * hy[i];
        dz[c.mup() + i] = -0.5 * X * hy[i];
    }
    dz[c.s()] = lt;
    dz[c.sigma()] = 0;
}

void field_r4(const MetricModel& m, Side side, std::span<const double> z,
              std::span<double> dz) {
    const int n = m.dim;
    require_dim(n);
    layout::R4 c{n};
    const int mzn = n - 1;
    double u = z[c.u], w = z[c.w], wp = z[c.wp];
    double lt = z[c.lt()], ltp = z[c.ltp()];
    double nu = z[c.nu()], sigma = z[c.sigma()];

    std::array<double, kMaxDim> et;
    {
        std::array<double, kMaxDim> tmp;
        r4_eta_tilde<double>(m, z, std::span(tmp.data(), n));
        et = tmp;
    }

    double h, hx;
    std::array<double, kMaxDim> hy, he;

    if (side == Side::L) {
        std::array<double, kMaxDim> yh;
        yh[0] = z[c.yp()] + u;
        for (int j = 0; j < mzn; ++j)
            yh[1 + j] = z[c.yp() + 1 + j] + u * z[c.Z() + j];
        h_derivatives_into(m, u * w, std::span<const double>(yh.data(), n),
                           std::span<const double>(et.data(), n), h, hx,
                           std::span(hy.data(), n), std::span(he.data(), n));
        double D = he[0];
        dz[c.u] = 0.5 * w * u * D;
        dz[c.w] = sigma + w * lt - 0.5 * w * w * D;
        dz[c.wp] = -0.5 * w * wp * D;
        double hyZ = hy[0];
        for (int j = 0; j < mzn; ++j) {
            dz[c.Z() + j] = 0.5 * w * (he[1 + j] - D * z[c.Z() + j]);
            dz[c.mu() + j] = -0.5 * w * (u * hy[1 + j] - z[c.mu() + j] * D);
            hyZ += hy[1 + j] * z[c.Z() + j];
        }
        dz[c.nu()] = -0.5 * w * (w * hx + hyZ + nu * D);
        dz[c.lt()] = -0.5 * (lt * lt + h + w * u * hx - w * lt * D);
        dz[c.ltp()] = 0.5 * w * ltp * D;
        for (int i = 0; i < n; ++i) {
            dz[c.yp() + i] = 0;
            dz[c.mup() + i] = -0.5 * w * hy[i];
        }
        dz[c.s()] = lt - w * D;
        dz[c.sigma()] = 0;
        return;
    }

    // right side: dual slot is u mu' - eta_tilde
    std::array<double, kMaxDim> eh;
    for (int i = 0; i < n; ++i)
        eh[i] = u * z[c.mup() + i] - et[i];
    auto yp = z.subspan(c.yp(), n);
    h_derivatives_into(m, u * wp, yp, std::span<const double>(eh.data(), n), h, hx,
                       std::span(hy.data(), n), std::span(he.data(), n));
    double D = he[0];
    dz[c.u] = -0.5 * wp * u * D;
    dz[c.w] = 0.5 * w * wp * D;
    dz[c.wp] = sigma + wp * ltp + 0.5 * wp * wp * D;
    double mupD = he[0] * (z[c.mup()] - nu);  // D (mu'_1 - nu), extended below
    for (int j = 0; j < mzn; ++j) {
        dz[c.Z() + j] = 0.5 * wp * (D * z[c.Z() + j] - he[1 + j]);
        dz[c.mu() + j] = -0.5 * wp * D * z[c.mu() + j];
        mupD += he[1 + j] * z[c.mup() + 1 + j];
    }
    dz[c.nu()] = -0.5 * wp * (wp * hx + mupD);
    dz[c.lt()] = -0.5 * wp * lt * D;
    dz[c.ltp()] = -0.5 * (ltp * ltp + h + wp * u * hx + wp * ltp * D);
    for (int i = 0; i < n; ++i) {
        dz[c.yp() + i] = 0.5 * wp * u * he[i];
        dz[c.mup() + i] = -0.5 * wp * hy[i];
    }
    dz[c.s()] = ltp + wp * D;
    dz[c.sigma()] = 0;
}

RescaledField field_region1(const MetricModel& m, Side side, std::span<const double> z) {
    RescaledField f;
    f.region = ChartId::Region1;
    f.side = side;
    f.components.resize(region1_single_size(m.dim));
    field_r1s(m, z, f.components);
    return f;
}

RescaledField field_region3(const MetricModel& m, Side side, std::span<const double> z) {
    RescaledField f;
    f.region = ChartId::Region3;
    f.side = side;
    f.components.resize(product_size(m.dim));
    field_r3(m, side, z, f.components);
    return f;
}

void pack_region2(const Region2ChartPoint& p, std::span<double> out) {
    const int n = static_cast<int>(p.Y.size());
    layout::R2 c{n};
    out[c.X] = p.X;
    out[c.b()] = p.base_x;
    out[c.lt()] = p.lambda_tilde;
    out[c.lp()] = p.lambda_far;
    for (int i = 0; i < n; ++i) {
        out[c.Y() + i] = p.Y[i];
        out[c.yb() + i] = p.base_y[i];
        out[c.mu() + i] = p.mu[i];
        out[c.mup() + i] = p.mu_far[i];
    }
    out[c.s()] = p.s;
    out[c.sigma()] = p.sigma;
}

RescaledField field_region2(const MetricModel& m, const Region2ChartPoint& p) {
    RescaledField f;
    f.region = p.near_side == Side::L ? ChartId::Region2L : ChartId::Region2R;
    f.side = p.near_side;
    Vec z(product_size(m.dim));
    pack_region2(p, z);
    f.components.resize(product_size(m.dim));
    field_r2(m, z, f.components);
    return f;
}

void pack_region4(const Region4ChartPoint& p, std::span<double> out) {
    const int n = static_cast<int>(p.yp.size());
    layout::R4 c{n};
    out[c.u] = p.u;
    out[c.w] = p.w;
    out[c.wp] = p.wp;
    out[c.nu()] = p.nu;
    out[c.lt()] = p.lambda_tilde;
    out[c.ltp()] = p.lambda_tilde_p;
    for (int j = 0; j + 1 < n; ++j) {
        out[c.Z() + j] = p.Z[j];
        out[c.mu() + j] = p.mu[j];
    }
    for (int i = 0; i < n; ++i) {
        out[c.yp() + i] = p.yp[i];
        out[c.mup() + i] = p.mup[i];
    }
    out[c.s()] = p.s;
    out[c.sigma()] = p.sigma;
}

RescaledField field_region4(const MetricModel& m, Side side, const Region4ChartPoint& p) {
    RescaledField f;
    f.region = ChartId::Region4;
    f.side = side;
    Vec z(product_size(m.dim));
    pack_region4(p, z);
    f.components.resize(product_size(m.dim));
    field_r4(m, side, z, f.components);
    return f;
}

}  // namespace ahm
