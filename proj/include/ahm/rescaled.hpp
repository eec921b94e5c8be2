#ifndef AHM_RESCALED_HPP
#define AHM_RESCALED_HPP

#include <span>

#include "ahm/charts.hpp"
#include "ahm/metric.hpp"
#include "ahm/phase.hpp"

namespace ahm {

// Boundary-rescaled Hamiltonians q_L, q_R (minus the wave symbol divided by
// the matching face defining function after the singular time shift) and
// their Hamilton vector fields, smooth up to the faces.  All evaluators work
// on the packed chart layouts of charts.hpp; the field convention is
// qdot = dq/dp on positions, pdot = -dq/dz on momenta, sdot = dq/dsigma,
// sigmadot = 0.

struct RescaledField {
    ChartId region = ChartId::Region1;
    Side side = Side::L;
    Vec components;  // packed derivative in the chart layout
};

// ---- symbols, templated for two-route oracles ----

template <class T>
T q_region1_t(const MetricModel& m, std::span<const T> z) {
    layout::R1S c{m.dim};
    const T& x = z[c.x];
    auto y = z.subspan(c.y(), m.dim);
    const T& xit = z[c.xit()];
    auto eta = z.subspan(c.eta(), m.dim);
    const T& sigma = z[c.sigma()];
    return sigma * xit + 0.5 * x * (xit * xit + h_eval_t(m, x, y, eta));
}

template <class T>
T q_region3_t(const MetricModel& m, Side side, std::span<const T> z) {
    layout::R3 c{m.dim};
    int ox = side == Side::L ? c.x : c.xp();
    int oy = side == Side::L ? c.y() : c.yp();
    int oxit = side == Side::L ? c.xit() : c.xitp();
    int oeta = side == Side::L ? c.eta() : c.etap();
    const T& x = z[ox];
    auto y = z.subspan(oy, m.dim);
    const T& xit = z[oxit];
    auto eta = z.subspan(oeta, m.dim);
    const T& sigma = z[c.sigma()];
    return sigma * xit + 0.5 * x * (xit * xit + h_eval_t(m, x, y, eta));
}

// near-side symbol in the region 2 chart
template <class T>
T q_region2_t(const MetricModel& m, std::span<const T> z) {
    const int n = m.dim;
    layout::R2 c{n};
    const T& X = z[c.X];
    const T& b = z[c.b()];
    const T& lt = z[c.lt()];
    const T& sigma = z[c.sigma()];
    std::vector<T> yh(n);
    for (int i = 0; i < n; ++i)
        yh[i] = b * z[c.Y() + i] + z[c.yb() + i];
    T xh = b * X;
    auto mu = z.subspan(c.mu(), n);
    return sigma * lt + 0.5 * X * (lt * lt + h_eval_t<T>(m, xh, yh, mu));
}

// dual covector slot of h for the region 4 symbols:
//   eta_tilde_1 = u nu - lt w - ltp w' - 2 sigma - sum mu_j Z_j
template <class T>
void r4_eta_tilde(const MetricModel& m, std::span<const T> z, std::span<T> out) {
    const int n = m.dim;
    layout::R4 c{n};
    T e1 = z[c.u] * z[c.nu()] - z[c.lt()] * z[c.w] - z[c.ltp()] * z[c.wp] -
           2.0 * z[c.sigma()];
    for (int j = 0; j + 1 < n; ++j) {
        e1 -= z[c.mu() + j] * z[c.Z() + j];
        out[1 + j] = z[c.mu() + j];
    }
    out[0] = e1;
}

template <class T>
T q_region4_t(const MetricModel& m, Side side, std::span<const T> z) {
    const int n = m.dim;
    layout::R4 c{n};
    std::vector<T> et(n);
    r4_eta_tilde(m, z, std::span<T>(et));
    const T& sigma = z[c.sigma()];
    if (side == Side::L) {
        std::vector<T> yh(n);
        yh[0] = z[c.yp()] + z[c.u];
        for (int j = 0; j + 1 < n; ++j)
            yh[1 + j] = z[c.yp() + 1 + j] + z[c.u] * z[c.Z() + j];
        T xh = z[c.u] * z[c.w];
        const T& lt = z[c.lt()];
        return sigma * lt + 0.5 * z[c.w] * (lt * lt + h_eval_t<T>(m, xh, yh, et));
    }
    std::vector<T> eh(n);
    for (int i = 0; i < n; ++i)
        eh[i] = z[c.u] * z[c.mup() + i] - et[i];
    auto yp = z.subspan(c.yp(), n);
    T xh = z[c.u] * z[c.wp];
    const T& ltp = z[c.ltp()];
    return sigma * ltp + 0.5 * z[c.wp] * (ltp * ltp + h_eval_t<T>(m, xh, yp, eh));
}

// ---- double-precision symbol wrappers ----

double q_region1(const MetricModel& m, std::span<const double> z);
double q_region2(const MetricModel& m, std::span<const double> z);
double q_region3(const MetricModel& m, Side side, std::span<const double> z);
double q_region4(const MetricModel& m, Side side, std::span<const double> z);

// ---- Hamilton fields on packed states (allocation free) ----

void field_r1s(const MetricModel& m, std::span<const double> z, std::span<double> dz);
void field_r3(const MetricModel& m, Side side, std::span<const double> z,
              std::span<double> dz);
void field_r2(const MetricModel& m, std::span<const double> z, std::span<double> dz);
void field_r4(const MetricModel& m, Side side, std::span<const double> z,
              std::span<double> dz);

// struct-facing wrappers
RescaledField field_region1(const MetricModel& m, Side side, std::span<const double> z);
RescaledField field_region2(const MetricModel& m, const Region2ChartPoint& p);
RescaledField field_region3(const MetricModel& m, Side side, std::span<const double> z);
RescaledField field_region4(const MetricModel& m, Side side, const Region4ChartPoint& p);

void pack_region2(const Region2ChartPoint& p, std::span<double> out);
void pack_region4(const Region4ChartPoint& p, std::span<double> out);

}  // namespace ahm

#endif
