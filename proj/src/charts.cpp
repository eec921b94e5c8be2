#include "ahm/charts.hpp"

#include <cmath>

namespace ahm {

std::string chart_name(ChartId c) {
    switch (c) {
        case ChartId::Interior: return "interior";
        case ChartId::Region1: return "region1";
        case ChartId::Region2L: return "region2L";
        case ChartId::Region2R: return "region2R";
        case ChartId::Region3: return "region3";
        case ChartId::Region4: return "region4";
    }
    return "?";
}

PolarBlowupPoint blowdown_polar(double x, std::span<const double> y, double xp,
                                std::span<const double> yp) {
    if (x < 0 || xp < 0)
        throw std::domain_error("blowdown_polar: x, x' must be nonnegative");
    const int n = static_cast<int>(y.size());
    double d2 = 0;
    for (int i = 0; i < n; ++i) {
        double d = y[i] - yp[i];
        d2 += d * d;
    }
    double R = std::sqrt(x * x + xp * xp + d2);
    if (R == 0)
        throw std::domain_error("blowdown_polar: degenerate input on the boundary diagonal");
    PolarBlowupPoint p;
    p.R = R;
    p.rho_l = x / R;
    p.rho_r = xp / R;
    p.Y.resize(n);
    for (int i = 0; i < n; ++i)
        p.Y[i] = (y[i] - yp[i]) / R;
    p.yp.assign(yp.begin(), yp.end());
    return p;
}

InteriorPair blowup_polar(const PolarBlowupPoint& p) {
    double c = p.rho_l * p.rho_l + p.rho_r * p.rho_r + norm_sq<double>(p.Y) - 1.0;
    if (std::abs(c) > 1e-10)
        throw std::domain_error("blowup_polar: sphere constraint violated by " +
                                std::to_string(std::abs(c)));
    InteriorPair z;
    z.x = p.R * p.rho_l;
    z.xp = p.R * p.rho_r;
    z.y.resize(p.Y.size());
    z.yp.assign(p.yp.begin(), p.yp.end());
    for (std::size_t i = 0; i < p.Y.size(); ++i)
        z.y[i] = p.yp[i] + p.R * p.Y[i];
    return z;
}

Region2ChartPoint lift_region2(const ProductPhasePoint& z, Side near_side) {
    const int n = static_cast<int>(z.left.y.size());
    const PhasePoint& near = near_side == Side::L ? z.left : z.right;
    const PhasePoint& far = near_side == Side::L ? z.right : z.left;
    if (far.x <= 0)
        throw std::domain_error("lift_region2: far factor must be interior");
    if (near.x <= 0)
        throw std::domain_error("lift_region2: near factor must be interior");
    Vec zi(product_size(n)), ch(product_size(n));
    pack_product_point(z, zi);
    r2_from_interior<double>(n, near_side, zi, ch);
    layout::R2 c{n};
    Region2ChartPoint out;
    out.near_side = near_side;
    out.X = ch[c.X];
    out.Y.assign(ch.begin() + c.Y(), ch.begin() + c.Y() + n);
    out.base_x = ch[c.b()];
    out.base_y.assign(ch.begin() + c.yb(), ch.begin() + c.yb() + n);
    out.lambda_tilde = ch[c.lt()];
    out.mu.assign(ch.begin() + c.mu(), ch.begin() + c.mu() + n);
    out.lambda_far = ch[c.lp()];
    out.mu_far.assign(ch.begin() + c.mup(), ch.begin() + c.mup() + n);
    out.s = ch[c.s()];
    out.sigma = ch[c.sigma()];
    return out;
}

Region4ChartPoint lift_region4(const ProductPhasePoint& z) {
    const int n = static_cast<int>(z.left.y.size());
    if (z.left.y[0] - z.right.y[0] <= 0)
        throw std::domain_error("lift_region4: requires y_1 - y_1' > 0");
    if (z.left.x <= 0 || z.right.x <= 0)
        throw std::domain_error("lift_region4: both factors must be interior");
    Vec zi(product_size(n)), ch(product_size(n));
    pack_product_point(z, zi);
    r4_from_interior<double>(n, zi, ch);
    layout::R4 c{n};
    Region4ChartPoint out;
    out.u = ch[c.u];
    out.w = ch[c.w];
    out.wp = ch[c.wp];
    out.Z.assign(ch.begin() + c.Z(), ch.begin() + c.Z() + (n - 1));
    out.yp.assign(ch.begin() + c.yp(), ch.begin() + c.yp() + n);
    out.nu = ch[c.nu()];
    out.lambda_tilde = ch[c.lt()];
    out.lambda_tilde_p = ch[c.ltp()];
    out.mu.assign(ch.begin() + c.mu(), ch.begin() + c.mu() + (n - 1));
    out.mup.assign(ch.begin() + c.mup(), ch.begin() + c.mup() + n);
    out.s = ch[c.s()];
    out.sigma = ch[c.sigma()];
    return out;
}

bool chart_valid(ChartId chart, Side side, double x, std::span<const double> y,
                 double xp, std::span<const double> yp, const ChartConfig& cfg) {
    double near_x = side == Side::L ? x : xp;
    double far_x = side == Side::L ? xp : x;
    double rho_ff = std::sqrt(x * x + xp * xp + dist(y, yp) * dist(y, yp));
    switch (chart) {
        case ChartId::Interior:
            return x > 0 && xp > 0;
        case ChartId::Region1:
            return near_x < cfg.x_switch && std::min(far_x, rho_ff) > cfg.x_switch;
        case ChartId::Region3:
            return near_x < cfg.x_switch && far_x < cfg.x_switch && rho_ff > cfg.u_switch;
        case ChartId::Region2L:
        case ChartId::Region2R: {
            Side near = chart == ChartId::Region2L ? Side::L : Side::R;
            if (near != side)
                return false;
            double b = near == Side::L ? xp : x;
            double nx = near == Side::L ? x : xp;
            return b > 0 && nx / b < 1.0 && b < cfg.u_switch && b / rho_ff > cfg.r_switch;
        }
        case ChartId::Region4: {
            // chart axis: the dominant boundary separation component; the
            // mirrored configuration is reached by swapping the factor roles
            double u = 0;
            for (std::size_t i = 0; i < y.size(); ++i)
                u = std::max(u, std::abs(y[i] - yp[i]));
            if (u <= 0)
                return false;
            return u < cfg.u_switch && x / u < cfg.w_switch && xp / u < cfg.w_switch;
        }
    }
    return false;
}

std::optional<ChartId> pick_chart(Side side, double x, std::span<const double> y,
                                  double xp, std::span<const double> yp,
                                  const ChartConfig& cfg) {
    const ChartId order[] = {ChartId::Region1, ChartId::Region3,
                             side == Side::L ? ChartId::Region2L : ChartId::Region2R,
                             ChartId::Region4};
    for (ChartId c : order)
        if (chart_valid(c, side, x, y, xp, yp, cfg))
            return c;
    return std::nullopt;
}

void chart_from_interior(int n, ChartId chart, Side side, std::span<const double> zi,
                         std::span<double> out) {
    switch (chart) {
        case ChartId::Interior:
            std::copy(zi.begin(), zi.end(), out.begin());
            return;
        case ChartId::Region1:
        case ChartId::Region3:
            r3_from_interior<double>(n, zi, out);
            return;
        case ChartId::Region2L:
            r2_from_interior<double>(n, Side::L, zi, out);
            return;
        case ChartId::Region2R:
            r2_from_interior<double>(n, Side::R, zi, out);
            return;
        case ChartId::Region4:
            r4_from_interior<double>(n, zi, out);
            return;
    }
    (void)side;
}

void chart_to_interior(int n, ChartId chart, Side side, std::span<const double> ch,
                       std::span<double> zi) {
    switch (chart) {
        case ChartId::Interior:
            std::copy(ch.begin(), ch.end(), zi.begin());
            return;
        case ChartId::Region1:
        case ChartId::Region3:
            r3_to_interior<double>(n, ch, zi);
            return;
        case ChartId::Region2L:
            r2_to_interior<double>(n, Side::L, ch, zi);
            return;
        case ChartId::Region2R:
            r2_to_interior<double>(n, Side::R, ch, zi);
            return;
        case ChartId::Region4:
            r4_to_interior<double>(n, ch, zi);
            return;
    }
    (void)side;
}

void chart_transfer(int n, ChartId from, Side from_side, std::span<const double> in,
                    ChartId to, Side to_side, std::span<double> out) {
    if (from == to && from_side == to_side) {
        std::copy(in.begin(), in.end(), out.begin());
        return;
    }
    Vec zi(product_size(n));
    chart_to_interior(n, from, from_side, in, zi);
    layout::Product p{n};
    double x = zi[p.x()], xp = zi[p.xp()];
    auto check = [&](const char* what, bool ok) {
        if (!ok)
            throw std::domain_error(std::string("chart_transfer: out of overlap, ") + what);
    };
    switch (to) {
        case ChartId::Interior:
            break;
        case ChartId::Region1:
        case ChartId::Region3:
            check("x > 0 required", x > 0);
            check("x' > 0 required", xp > 0);
            break;
        case ChartId::Region2L:
            check("x > 0 required", x > 0);
            check("x' > 0 required", xp > 0);
            break;
        case ChartId::Region2R:
            check("x > 0 required", x > 0);
            check("x' > 0 required", xp > 0);
            break;
        case ChartId::Region4:
            check("y_1 - y_1' > 0 required", zi[p.y()] - zi[p.yp()] > 0);
            check("x > 0 required", x > 0);
            check("x' > 0 required", xp > 0);
            break;
    }
    chart_from_interior(n, to, to_side, zi, out);
}

}  // namespace ahm
