#include "ahm/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace ahm {

void IntegratorConfig::validate() const {
    if (rel_tol <= 0 || abs_tol <= 0 || max_step <= 0 || t_max <= 0 || event_tol <= 0)
        throw std::invalid_argument("integrator config values must be positive");
    if (event_tol > abs_tol * 100)
        throw std::invalid_argument("event tolerance must be <= 100 x absolute tolerance");
}

int field_state_size(const FieldSpec& f) {
    const int n = f.model->dim;
    if (f.chart == ChartId::Interior)
        return f.product ? product_size(n) : interior_single_size(n);
    if (f.chart == ChartId::Region1 && !f.product)
        return region1_single_size(n);
    return product_size(n);
}

void eval_field(const FieldSpec& f, std::span<const double> z, std::span<double> dz) {
    const MetricModel& m = *f.model;
    switch (f.chart) {
        case ChartId::Interior:
            if (f.product)
                field_HQ_packed(m, f.side, z, dz);
            else
                field_Hp_packed(m, z, dz);
            break;
        case ChartId::Region1:
            if (f.product)
                field_r3(m, f.side, z, dz);
            else
                field_r1s(m, z, dz);
            break;
        case ChartId::Region3:
            field_r3(m, f.side, z, dz);
            break;
        case ChartId::Region2L:
        case ChartId::Region2R:
            field_r2(m, z, dz);
            break;
        case ChartId::Region4:
            field_r4(m, f.side, z, dz);
            break;
    }
    if (f.orientation != 1.0)
        for (auto& v : dz)
            v *= f.orientation;
}

double invariant_q(const FieldSpec& f, std::span<const double> z) {
    const MetricModel& m = *f.model;
    const int n = m.dim;
    switch (f.chart) {
        case ChartId::Interior:
            if (f.product) {
                layout::Product p{n};
                int off = f.side == Side::L ? p.x() : p.xp();
                return symbol_Q_t<double>(m, z[p.tau], z.subspan(off, interior_single_size(n)));
            } else {
                double g = z[0] * z[0] *
                           (z[1 + n] * z[1 + n] +
                            h_eval_t<double>(m, z[0], z.subspan(1, n), z.subspan(2 + n, n)));
                return 0.5 * (g - 1.0);
            }
        case ChartId::Region1:
            if (!f.product)
                return q_region1_t<double>(m, z);
            return q_region3_t<double>(m, f.side, z);
        case ChartId::Region3:
            return q_region3_t<double>(m, f.side, z);
        case ChartId::Region2L:
        case ChartId::Region2R:
            return q_region2_t<double>(m, z);
        case ChartId::Region4:
            return q_region4_t<double>(m, f.side, z);
    }
    return 0;
}

int sigma_slot(const FieldSpec& f) {
    const int n = f.model->dim;
    if (f.chart == ChartId::Interior)
        return f.product ? 1 : -1;
    if (f.chart == ChartId::Region1 && !f.product)
        return layout::R1S{n}.sigma();
    return layout::R3{n}.sigma();  // all product charts put sigma last
}

namespace {

// Dormand-Prince 5(4) coefficients
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

struct DenseCubic {
    // Hermite interpolant over one accepted step
    double t0, h;
    const Vec *y0, *y1, *f0, *f1;
    void eval(double theta, Vec& out) const {
        const std::size_t n = y0->size();
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double d = (*y1)[i] - (*y0)[i];
            double c_2 = 3 * d - h * (2 * (*f0)[i] + (*f1)[i]);
            double c_3 = -2 * d + h * ((*f0)[i] + (*f1)[i]);
            out[i] = (*y0)[i] + theta * (h * (*f0)[i] + theta * (c_2 + theta * c_3));
        }
    }
};

}  // namespace

FlowResult integrate(const FieldSpec& field, std::span<const double> z0,
                     const std::vector<StopSpec>& stops, const IntegratorConfig& cfg,
                     bool record_samples) {
    cfg.validate();
    const std::size_t m = z0.size();
    FlowResult res;

    Vec y(z0.begin(), z0.end()), ynew(m), ytmp(m), yerr(m);
    Vec k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m);

    auto rhs = [&](std::span<const double> z, std::span<double> dz) { eval_field(field, z, dz); };

    double t = 0;
    rhs(y, k1);

    const double q0 = invariant_q(field, y);
    const int ss = sigma_slot(field);
    const double s0 = ss >= 0 ? y[ss] : 0;

    std::vector<char> armed(stops.size());
    std::vector<double> gprev(stops.size());
    for (std::size_t i = 0; i < stops.size(); ++i) {
        gprev[i] = stops[i].value(t, y);
        armed[i] = gprev[i] > 0;
    }

    auto record = [&](double tp, std::span<const double> zp) {
        if (!record_samples)
            return;
        Sample s;
        s.param = tp;
        s.chart = field.chart;
        s.state.assign(zp.begin(), zp.end());
        s.q_drift = std::abs(invariant_q(field, zp) - q0);
        res.samples.push_back(std::move(s));
    };
    record(t, y);

    // initial step from the scale of the first derivative
    double h = cfg.max_step;
    {
        double dn = 0, yn = 0;
        for (std::size_t i = 0; i < m; ++i) {
            double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
            dn += (k1[i] / sc) * (k1[i] / sc);
            yn += (y[i] / sc) * (y[i] / sc);
        }
        dn = std::sqrt(dn / m);
        yn = std::sqrt(yn / m);
        if (dn > 1e-12)
            h = std::min(h, 0.01 * std::max(yn, 1.0) / dn);
        h = std::max(h, 1e-10);
    }

    Vec dense_out(m);
    while (true) {
        if (t >= cfg.t_max) {
            res.termination = {Termination::Kind::CapReached, "", "parameter cap reached"};
            break;
        }
        h = std::min(h, cfg.t_max - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            res.termination = {Termination::Kind::StepFailure, "", "step size underflow"};
            break;
        }

        // stages
        for (std::size_t i = 0; i < m; ++i)
            ytmp[i] = y[i] + h * a21 * k1[i];
        rhs(ytmp, k2);
        for (std::size_t i = 0; i < m; ++i)
            ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(ytmp, k3);
        for (std::size_t i = 0; i < m; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(ytmp, k4);
        for (std::size_t i = 0; i < m; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(ytmp, k5);
        for (std::size_t i = 0; i < m; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        rhs(ytmp, k6);
        for (std::size_t i = 0; i < m; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(ynew, k7);

        double err = 0;
        for (std::size_t i = 0; i < m; ++i) {
            double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
            double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / m);

        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        ++res.steps;
        DenseCubic dense{t, h, &y, &ynew, &k1, &k7};

        // event search over this step: coarse bracket on the dense output
        int fired = -1;
        double theta_best = 2.0;
        for (std::size_t i = 0; i < stops.size(); ++i) {
            double g1 = stops[i].value(t + h, ynew);
            if (!armed[i]) {
                if (g1 > 0)
                    armed[i] = 1;
                gprev[i] = g1;
                continue;
            }
            if (gprev[i] > 0 && g1 <= 0) {
                double lo = 0, hi = 1;
                for (int it = 0; it < 60; ++it) {
                    double mid = 0.5 * (lo + hi);
                    dense.eval(mid, dense_out);
                    double gm = stops[i].value(t + mid * h, dense_out);
                    if (gm > 0)
                        lo = mid;
                    else
                        hi = mid;
                    if (std::abs(gm) <= cfg.event_tol && gm <= 0)
                        break;
                }
                if (hi < theta_best) {
                    theta_best = hi;
                    fired = static_cast<int>(i);
                }
            }
            gprev[i] = g1;
        }

        if (fired >= 0) {
            // refine on true sub-steps so the event state carries the full
            // order of the pair instead of the cubic interpolant
            auto substep = [&](double dt, Vec& out) {
                for (std::size_t i = 0; i < m; ++i)
                    ytmp[i] = y[i] + dt * a21 * k1[i];
                rhs(ytmp, k2);
                for (std::size_t i = 0; i < m; ++i)
                    ytmp[i] = y[i] + dt * (a31 * k1[i] + a32 * k2[i]);
                rhs(ytmp, k3);
                for (std::size_t i = 0; i < m; ++i)
                    ytmp[i] = y[i] + dt * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
                rhs(ytmp, k4);
                for (std::size_t i = 0; i < m; ++i)
                    ytmp[i] = y[i] + dt * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] +
                                           a54 * k4[i]);
                rhs(ytmp, k5);
                for (std::size_t i = 0; i < m; ++i)
                    ytmp[i] = y[i] + dt * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                           a64 * k4[i] + a65 * k5[i]);
                rhs(ytmp, k6);
                for (std::size_t i = 0; i < m; ++i)
                    out[i] = y[i] + dt * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                          b5 * k5[i] + b6 * k6[i]);
            };
            const auto& ev = stops[fired].value;
            double hi = theta_best;
            substep(hi * h, dense_out);
            double ghi = ev(t + hi * h, dense_out);
            for (int k = 1; ghi > 0 && k <= 8; ++k) {
                hi = theta_best + (1.0 - theta_best) * k / 8.0;
                substep(hi * h, dense_out);
                ghi = ev(t + hi * h, dense_out);
            }
            double lo = 0;
            for (int it = 0; it < 80 && std::abs(ghi) > cfg.event_tol; ++it) {
                double mid = 0.5 * (lo + hi);
                substep(mid * h, dense_out);
                double gm = ev(t + mid * h, dense_out);
                if (gm > 0) {
                    lo = mid;
                } else {
                    hi = mid;
                    ghi = gm;
                }
            }
            substep(hi * h, dense_out);
            t += hi * h;
            y = dense_out;
            record(t, y);
            res.fired = fired;
            Termination::Kind k = Termination::Kind::FaceHit;
            switch (stops[fired].kind) {
                case StopSpec::Kind::Face: k = Termination::Kind::FaceHit; break;
                case StopSpec::Kind::Switch: k = Termination::Kind::ChartSwitch; break;
                case StopSpec::Kind::Box: k = Termination::Kind::CapReached; break;
                case StopSpec::Kind::Cap: k = Termination::Kind::CapReached; break;
            }
            res.termination = {k, stops[fired].name, ""};
            break;
        }

        t += h;
        std::swap(y, ynew);
        std::swap(k1, k7);  // FSAL
        record(t, y);

        res.max_q_drift = std::max(res.max_q_drift, std::abs(invariant_q(field, y) - q0));
        if (ss >= 0)
            res.max_sigma_drift = std::max(res.max_sigma_drift, std::abs(y[ss] - s0));

        h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
        h = std::min(h, cfg.max_step);
    }

    res.end_param = t;
    res.end_state = y;
    res.max_q_drift = std::max(res.max_q_drift, std::abs(invariant_q(field, y) - q0));
    return res;
}

// ---------------------------------------------------------------------------
// single-factor geodesic trace
// ---------------------------------------------------------------------------

GeodesicTrace trace_geodesic(const MetricModel& m, const PhasePoint& z0,
                             TraceDirection dir, const IntegratorConfig& icfg,
                             const ChartConfig& ccfg, double defining_scale,
                             bool record_samples) {
    const int n = m.dim;
    PhasePoint z = z0;
    if (dir == TraceDirection::Backward) {
        z.xi = -z.xi;
        for (auto& e : z.eta)
            e = -e;
    }
    double p = energy_p(m, z);
    if (std::abs(p) > 1e-8)
        throw std::invalid_argument("trace_geodesic: start is not on the unit cosphere");

    GeodesicTrace out;
    const double sigma = 1.0;
    Vec zi(interior_single_size(n));
    pack_phase_point(z, zi);

    double t_elapsed = 0;
    bool need_interior = true;
    {
        Vec dz(zi.size());
        FieldSpec fs{&m, ChartId::Interior, Side::L, false, 1.0};
        eval_field(fs, zi, dz);
        if (zi[0] < ccfg.x_switch && dz[0] < 0)
            need_interior = false;  // already below the switch height and descending
    }

    if (need_interior) {
        FieldSpec fs{&m, ChartId::Interior, Side::L, false, 1.0};
        std::vector<StopSpec> stops;
        stops.push_back({"switch", StopSpec::Kind::Switch,
                         [&](double, std::span<const double> s) { return s[0] - ccfg.x_switch; }});
        stops.push_back({"box_x", StopSpec::Kind::Box,
                         [&](double, std::span<const double> s) { return m.x_max - s[0]; }});
        stops.push_back({"box_y", StopSpec::Kind::Box, [&](double, std::span<const double> s) {
                             return m.y_max - norm(s.subspan(1, n));
                         }});
        FlowResult leg = integrate(fs, zi, stops, icfg, record_samples);
        out.max_q_drift = std::max(out.max_q_drift, leg.max_q_drift);
        t_elapsed = leg.end_param;
        zi = leg.end_state;
        out.total_param += leg.end_param;
        out.chart_chain.push_back(ChartId::Interior);
        bool switched = leg.termination.kind == Termination::Kind::ChartSwitch;
        out.legs.push_back(std::move(leg));
        if (!switched) {
            out.termination = out.legs.back().termination;
            if (out.termination.kind == Termination::Kind::CapReached)
                out.termination.detail = out.legs.back().fired >= 0
                                             ? "left the working box"
                                             : "parameter cap reached, possibly trapped";
            out.drift_ok = out.max_q_drift <=
                           10 * icfg.rel_tol * std::max(out.total_param, 1.0) +
                           10 * icfg.abs_tol;
            return out;
        }
    }

    // boundary-normal handoff: reverse the covector so the outgoing geodesic
    // becomes an integral curve of the left-factor rescaled field
    Vec zc(region1_single_size(n));
    {
        layout::R1S c{n};
        zc[c.x] = zi[0];
        for (int i = 0; i < n; ++i) {
            zc[c.y() + i] = zi[1 + i];
            zc[c.eta() + i] = -zi[2 + n + i];
        }
        zc[c.xit()] = -zi[1 + n] - sigma / zi[0];
        zc[c.s()] = t_elapsed + std::log(defining_scale * zi[0]);
        zc[c.sigma()] = sigma;
    }
    // handoff continuity in interior coordinates
    {
        Vec back(interior_single_size(n));
        double tb, sb;
        r1s_to_interior<double>(n, zc, back, tb, sb);
        Vec flip(zi.begin(), zi.end());
        flip[1 + n] = -flip[1 + n];
        for (int i = 0; i < n; ++i)
            flip[2 + n + i] = -flip[2 + n + i];
        out.switch_mismatch = std::max(out.switch_mismatch, max_abs_diff(back, flip));
    }

    FieldSpec fq{&m, ChartId::Region1, Side::L, false, -1.0};
    std::vector<StopSpec> stops;
    stops.push_back({"face", StopSpec::Kind::Face,
                     [&](double, std::span<const double> s) { return s[0]; }});
    FlowResult leg = integrate(fq, zc, stops, icfg, record_samples);
    out.max_q_drift = std::max(out.max_q_drift, leg.max_q_drift);
    out.max_sigma_drift = std::max(out.max_sigma_drift, leg.max_sigma_drift);
    out.total_param += leg.end_param;
    out.chart_chain.push_back(ChartId::Region1);
    out.termination = leg.termination;

    layout::R1S c{n};
    out.drift_ok = out.max_q_drift <=
                   10 * icfg.rel_tol * std::max(out.total_param, 1.0) + 10 * icfg.abs_tol;
    if (leg.termination.kind == Termination::Kind::FaceHit) {
        out.face_hit = true;
        out.y_end.assign(leg.end_state.begin() + c.y(), leg.end_state.begin() + c.y() + n);
        out.s_limit = leg.end_state[c.s()];
        out.end_state = leg.end_state;
        Vec dz(zc.size());
        FieldSpec fwd = fq;
        fwd.orientation = 1.0;
        eval_field(fwd, leg.end_state, dz);
        out.face_normal = dz[c.x];
    } else if (leg.termination.kind == Termination::Kind::CapReached) {
        out.termination.detail = "parameter cap reached, possibly trapped";
    }
    out.legs.push_back(std::move(leg));
    return out;
}

// ---------------------------------------------------------------------------
// joint flow-out of a conormal start: drive each factor to its face
// ---------------------------------------------------------------------------

namespace pairchart {

namespace {
double xit_of(const FactorState& f, double sigma) {
    return f.done ? f.xit : f.xi - sigma / f.x;
}
}  // namespace

Vec build(const MetricModel& m, ChartId chart, Side driven, const FactorState& left,
          const FactorState& right, double sigma, double s_value, bool& flip,
          int& face_slot) {
    const int n = m.dim;
    flip = false;
    Vec z(product_size(n));
    switch (chart) {
        case ChartId::Region1:
        case ChartId::Region3: {
            layout::R3 c{n};
            auto put = [&](const FactorState& f, int ox, int oy, int oxit, int oeta) {
                z[ox] = f.x;
                z[oxit] = xit_of(f, sigma);
                for (int i = 0; i < n; ++i) {
                    z[oy + i] = f.y[i];
                    z[oeta + i] = f.eta[i];
                }
            };
            put(left, c.x, c.y(), c.xit(), c.eta());
            put(right, c.xp(), c.yp(), c.xitp(), c.etap());
            z[c.s()] = s_value;
            z[c.sigma()] = sigma;
            face_slot = driven == Side::L ? c.x : c.xp();
            return z;
        }
        case ChartId::Region2L:
        case ChartId::Region2R: {
            layout::R2 c{n};
            const FactorState& nf = chart == ChartId::Region2L ? left : right;
            const FactorState& ff = chart == ChartId::Region2L ? right : left;
            double b = ff.x;
            z[c.b()] = b;
            double X = nf.x / b;
            z[c.X] = X;
            double etaY = 0;
            for (int i = 0; i < n; ++i) {
                double Yi = (nf.y[i] - ff.y[i]) / b;
                z[c.Y() + i] = Yi;
                z[c.yb() + i] = ff.y[i];
                z[c.mu() + i] = b * nf.eta[i];
                z[c.mup() + i] = nf.eta[i] + ff.eta[i];
                etaY += nf.eta[i] * Yi;
            }
            z[c.lt()] = b * nf.xi - sigma / X;
            z[c.lp()] = ff.xi + nf.xi * X + etaY;
            z[c.s()] = s_value;
            z[c.sigma()] = sigma;
            face_slot = c.X;
            return z;
        }
        case ChartId::Region4: {
            layout::R4 c{n};
            flip = left.y[0] - right.y[0] < 0;
            const FactorState& A = flip ? right : left;  // occupies the (w, lt) slots
            const FactorState& B = flip ? left : right;
            double u = A.y[0] - B.y[0];
            z[c.u] = u;
            z[c.w] = A.x / u;
            z[c.wp] = B.x / u;
            double xitA = xit_of(A, sigma), xitB = xit_of(B, sigma);
            z[c.lt()] = u * xitA;
            z[c.ltp()] = u * xitB;
            // nu = xi w + xi' w' + eta_1 + sum eta_j Z_j with x xi -> sigma on a face
            double nu = (A.x * xitA + sigma) / u + (B.x * xitB + sigma) / u + A.eta[0];
            for (int j = 0; j + 1 < n; ++j) {
                double Zj = (A.y[1 + j] - B.y[1 + j]) / u;
                z[c.Z() + j] = Zj;
                z[c.mu() + j] = u * A.eta[1 + j];
                nu += A.eta[1 + j] * Zj;
            }
            z[c.nu()] = nu;
            for (int i = 0; i < n; ++i) {
                z[c.yp() + i] = B.y[i];
                z[c.mup() + i] = A.eta[i] + B.eta[i];
            }
            z[c.s()] = s_value;
            z[c.sigma()] = sigma;
            const bool in_A = (driven == Side::L) != flip;
            face_slot = in_A ? c.w : c.wp;
            return z;
        }
        default:
            throw std::invalid_argument("pairchart::build: not a rescaled product chart");
    }
}

void extract(const MetricModel& m, ChartId chart, Side driven, bool flip,
             std::span<const double> z, double sigma, bool at_face, FactorState& f) {
    const int n = m.dim;
    switch (chart) {
        case ChartId::Region1:
        case ChartId::Region3: {
            layout::R3 c{n};
            int ox = driven == Side::L ? c.x : c.xp();
            int oy = driven == Side::L ? c.y() : c.yp();
            int oxit = driven == Side::L ? c.xit() : c.xitp();
            int oeta = driven == Side::L ? c.eta() : c.etap();
            for (int i = 0; i < n; ++i) {
                f.y[i] = z[oy + i];
                f.eta[i] = z[oeta + i];
            }
            if (at_face) {
                f.done = true;
                f.x = 0;
                f.xit = z[oxit];
            } else {
                f.x = z[ox];
                f.xi = z[oxit] + sigma / f.x;
            }
            return;
        }
        case ChartId::Region2L:
        case ChartId::Region2R: {
            layout::R2 c{n};
            double b = z[c.b()];
            for (int i = 0; i < n; ++i) {
                f.y[i] = b * z[c.Y() + i] + z[c.yb() + i];
                f.eta[i] = z[c.mu() + i] / b;
            }
            if (at_face) {
                f.done = true;
                f.x = 0;
                f.xit = z[c.lt()] / b;
            } else {
                f.x = z[c.X] * b;
                f.xi = (z[c.lt()] + sigma / z[c.X]) / b;
            }
            return;
        }
        case ChartId::Region4: {
            layout::R4 c{n};
            const bool in_A = (driven == Side::L) != flip;
            double u = z[c.u];
            double w = in_A ? z[c.w] : z[c.wp];
            double lt = in_A ? z[c.lt()] : z[c.ltp()];
            // eta_1 through nu; x xi = w lt + sigma stays finite on the faces
            double xiw_A = (z[c.w] * z[c.lt()] + sigma) / u;
            double xiw_B = (z[c.wp] * z[c.ltp()] + sigma) / u;
            double eta1 = z[c.nu()] - xiw_A - xiw_B;
            for (int j = 0; j + 1 < n; ++j)
                eta1 -= (z[c.mu() + j] / u) * z[c.Z() + j];
            if (in_A) {
                f.y[0] = z[c.yp()] + u;
                f.eta[0] = eta1;
                for (int j = 0; j + 1 < n; ++j) {
                    f.y[1 + j] = z[c.yp() + 1 + j] + u * z[c.Z() + j];
                    f.eta[1 + j] = z[c.mu() + j] / u;
                }
            } else {
                f.y[0] = z[c.yp()];
                f.eta[0] = z[c.mup()] - eta1;
                for (int j = 0; j + 1 < n; ++j) {
                    f.y[1 + j] = z[c.yp() + 1 + j];
                    f.eta[1 + j] = z[c.mup() + 1 + j] - z[c.mu() + j] / u;
                }
            }
            if (at_face) {
                f.done = true;
                f.x = 0;
                f.xit = lt / u;
            } else {
                f.x = u * w;
                f.xi = (lt + sigma / w) / u;
            }
            return;
        }
        default:
            throw std::invalid_argument("pairchart::extract: not a rescaled product chart");
    }
}

}  // namespace pairchart

namespace {

struct PairEngine {
    const MetricModel& m;
    const IntegratorConfig& icfg;
    const ChartConfig& ccfg;
    double sigma;
    double lnscale;
    bool record;

    FactorState fac[2];  // [0] = left, [1] = right
    double soj = 0;      // running t + log(scale x) + log(scale x')
    PairTrace* out;

    FactorState& driven(Side s) { return fac[s == Side::L ? 0 : 1]; }

    std::optional<ChartId> choose(Side side) const {
        return pick_chart(side, fac[0].x, fac[0].y, fac[1].x, fac[1].y, ccfg);
    }

    void fail(Termination::Kind k, const std::string& detail) {
        out->termination.kind = k;
        out->termination.detail = detail;
    }

    void note_leg(FlowResult&& leg, ChartId chart) {
        out->max_q_drift = std::max(out->max_q_drift, leg.max_q_drift);
        out->max_sigma_drift = std::max(out->max_sigma_drift, leg.max_sigma_drift);
        out->total_param += leg.end_param;
        out->chart_chain.push_back(chart);
        out->legs.push_back(std::move(leg));
    }

    // interior leg for one side; returns true if a chart handoff is next
    bool interior_leg(Side side, double threshold) {
        const int n = m.dim;
        layout::Product p{n};
        Vec zi(product_size(n), 0.0);
        zi[p.t] = 0;
        zi[p.tau] = sigma;
        auto put = [&](const FactorState& f, int ox, int oy, int oxi, int oeta) {
            zi[ox] = f.x;
            zi[oxi] = f.done ? 0.0 : f.xi;
            for (int i = 0; i < n; ++i) {
                zi[oy + i] = f.y[i];
                zi[oeta + i] = f.eta[i];
            }
        };
        put(fac[0], p.x(), p.y(), p.xi(), p.eta());
        put(fac[1], p.xp(), p.yp(), p.xip(), p.etap());

        const int ox = side == Side::L ? p.x() : p.xp();
        const int oy = side == Side::L ? p.y() : p.yp();
        FieldSpec fs{&m, ChartId::Interior, side, true, 1.0};
        std::vector<StopSpec> stops;
        stops.push_back({"switch", StopSpec::Kind::Switch,
                         [&, ox](double, std::span<const double> s) { return s[ox] - threshold; }});
        stops.push_back({"box_x", StopSpec::Kind::Box,
                         [&, ox](double, std::span<const double> s) { return m.x_max - s[ox]; }});
        stops.push_back({"box_y", StopSpec::Kind::Box, [&, oy](double, std::span<const double> s) {
                             return m.y_max - norm(s.subspan(oy, n));
                         }});
        double x_start = zi[ox];
        FlowResult leg = integrate(fs, zi, stops, icfg, record);
        const Vec& e = leg.end_state;
        soj += e[p.t] + std::log(e[ox] / x_start);
        FactorState& f = driven(side);
        f.x = e[ox];
        f.xi = e[side == Side::L ? p.xi() : p.xip()];
        for (int i = 0; i < n; ++i) {
            f.y[i] = e[oy + i];
            f.eta[i] = e[(side == Side::L ? p.eta() : p.etap()) + i];
        }
        bool switched = leg.termination.kind == Termination::Kind::ChartSwitch;
        if (!switched) {
            Termination t = leg.termination;
            if (t.kind == Termination::Kind::CapReached)
                t.detail = leg.fired >= 0 ? "left the working box"
                                          : "parameter cap reached, possibly trapped";
            note_leg(std::move(leg), ChartId::Interior);
            out->termination = t;
            return false;
        }
        note_leg(std::move(leg), ChartId::Interior);
        return true;
    }

    // round-trip continuity of the driven factor through the chart entry
    void note_mismatch(const FactorState& before, const FactorState& rt) {
        double d = std::abs(rt.x - before.x);
        d = std::max(d, std::abs(rt.xi - before.xi));
        d = std::max(d, max_abs_diff(rt.y, before.y));
        d = std::max(d, max_abs_diff(rt.eta, before.eta));
        out->switch_mismatch = std::max(out->switch_mismatch, d);
    }

    int corner_axis() const {
        int axis = 0;
        for (std::size_t j = 1; j < fac[0].y.size(); ++j)
            if (std::abs(fac[0].y[j] - fac[1].y[j]) > std::abs(fac[0].y[axis] - fac[1].y[axis]))
                axis = static_cast<int>(j);
        return axis;
    }

    double chart_s_value(ChartId chart) const {
        double s = soj - 2 * std::log(lnscale);
        if (chart == ChartId::Region2L)
            s -= 2 * std::log(fac[1].x);
        else if (chart == ChartId::Region2R)
            s -= 2 * std::log(fac[0].x);
        else if (chart == ChartId::Region4)
            s -= 2 * std::log(std::abs(fac[0].y[corner_axis()] - fac[1].y[corner_axis()]));
        return s;
    }

    bool rescaled_leg(Side side, ChartId chart) {
        const int n = m.dim;
        bool flip = false;
        int face_slot = -1;
        // the corner chart is taken along the dominant separation axis; the
        // conformal family is covariant under the coordinate swap once the
        // bump center is swapped along
        MetricModel pm = m;
        FactorState pl = fac[0], pr = fac[1];
        int axis = 0;
        if (chart == ChartId::Region4) {
            axis = corner_axis();
            if (axis != 0) {
                std::swap(pl.y[0], pl.y[axis]);
                std::swap(pl.eta[0], pl.eta[axis]);
                std::swap(pr.y[0], pr.y[axis]);
                std::swap(pr.eta[0], pr.eta[axis]);
                if (static_cast<int>(pm.bump_center.size()) > axis)
                    std::swap(pm.bump_center[0], pm.bump_center[axis]);
                else if (!pm.bump_center.empty()) {
                    pm.bump_center.resize(n, 0.0);
                    std::swap(pm.bump_center[0], pm.bump_center[axis]);
                }
            }
        }
        auto unpermute = [&](FactorState& f) {
            if (axis != 0) {
                std::swap(f.y[0], f.y[axis]);
                std::swap(f.eta[0], f.eta[axis]);
            }
        };
        Vec z = pairchart::build(pm, chart, side, pl, pr, sigma, chart_s_value(chart),
                                 flip, face_slot);
        FieldSpec fs{&pm, chart, side, true, -1.0};
        if (chart == ChartId::Region4)
            fs.side = (side == Side::L) != flip ? Side::L : Side::R;

        {
            const FactorState& before = driven(side);
            FactorState rt = side == Side::L ? pl : pr;
            pairchart::extract(pm, chart, side, flip, z, sigma, false, rt);
            unpermute(rt);
            note_mismatch(before, rt);
        }

        std::vector<StopSpec> stops;
        stops.push_back({"face", StopSpec::Kind::Face,
                         [face_slot](double, std::span<const double> s) { return s[face_slot]; }});
        if (chart == ChartId::Region4) {
            layout::R4 c{n};
            stops.push_back({"ff_exit", StopSpec::Kind::Switch,
                             [&, c](double, std::span<const double> s) {
                                 return ccfg.u_switch - s[c.u];
                             }});
        }
        double s_start = z[layout::R3{n}.s()];  // same slot in every product chart
        double u_start = chart == ChartId::Region4 ? z[layout::R4{n}.u] : 0;

        FlowResult leg = integrate(fs, z, stops, icfg, record);
        const Vec& e = leg.end_state;

        soj += e[layout::R3{n}.s()] - s_start;
        if (chart == ChartId::Region4)
            soj += 2 * std::log(e[layout::R4{n}.u] / u_start);

        bool at_face = leg.termination.kind == Termination::Kind::FaceHit;
        {
            FactorState fd = side == Side::L ? pl : pr;
            pairchart::extract(pm, chart, side, flip, e, sigma, at_face, fd);
            unpermute(fd);
            driven(side) = fd;
        }

        if (at_face) {
            // inward face component of the rescaled field at the hit
            Vec dz(e.size());
            FieldSpec fwd = fs;
            fwd.orientation = 1.0;
            eval_field(fwd, e, dz);
            driven(side).face_normal = dz[face_slot];
            Termination t = leg.termination;
            t.face = side == Side::L ? "L" : "R";
            note_leg(std::move(leg), chart);
            out->termination = t;
            return true;
        }
        if (leg.termination.kind == Termination::Kind::ChartSwitch) {
            note_leg(std::move(leg), chart);
            return true;  // continue with a fresh chart pick
        }
        Termination t = leg.termination;
        if (t.kind == Termination::Kind::CapReached)
            t.detail = "parameter cap reached, possibly trapped";
        note_leg(std::move(leg), chart);
        out->termination = t;
        return false;
    }

    bool drive(Side side) {
        double threshold = ccfg.x_switch;
        for (int guard = 0; guard < 64; ++guard) {
            if (driven(side).done)
                return true;
            bool need_interior = driven(side).x >= threshold;
            std::optional<ChartId> chart;
            if (!need_interior) {
                chart = choose(side);
                if (!chart) {
                    threshold = std::min(threshold * 0.5, driven(side).x * 0.5);
                    if (threshold < 1e-4 * ccfg.x_switch) {
                        fail(Termination::Kind::StepFailure,
                             "no chart contains the handoff point");
                        return false;
                    }
                    need_interior = true;
                }
            }
            if (need_interior) {
                if (!interior_leg(side, threshold))
                    return false;
                continue;
            }
            if (!rescaled_leg(side, *chart))
                return false;
        }
        fail(Termination::Kind::StepFailure, "chart switch chain did not terminate");
        return false;
    }
};

}  // namespace

PairTrace trace_to_face(const MetricModel& m, const PhasePoint& z0, double tau,
                        const IntegratorConfig& icfg, const ChartConfig& ccfg,
                        DriveOrder order, double defining_scale, bool record_samples) {
    if (tau == 0)
        throw std::invalid_argument("sigma must be nonzero");
    if (tau < 0)
        throw std::invalid_argument("sigma must be positive; reverse the covector instead");
    double g = dual_norm_sq(m, z0.x, z0.y, z0.xi, z0.eta);
    if (std::abs(g - tau * tau) > 1e-8)
        throw std::invalid_argument("trace_to_face: initial data must satisfy tau^2 = |zeta|^2");

    PairTrace out;
    PairEngine eng{m, icfg, ccfg, tau, defining_scale, record_samples, {}, 0, &out};
    eng.fac[0] = FactorState{false, z0.x, z0.y, z0.xi, z0.eta, 0, 0};
    FactorState r{false, z0.x, z0.y, -z0.xi, z0.eta, 0, 0};
    for (auto& e : r.eta)
        e = -e;
    eng.fac[1] = r;
    eng.soj = 2 * std::log(defining_scale * z0.x);

    Side first = order == DriveOrder::RightThenLeft ? Side::R : Side::L;
    Side second = order == DriveOrder::RightThenLeft ? Side::L : Side::R;
    if (eng.drive(first))
        eng.drive(second);

    out.left = eng.fac[0];
    out.right = eng.fac[1];
    out.both_hit = out.left.done && out.right.done;
    out.soj_total = eng.soj;
    if (out.both_hit)
        out.termination = {Termination::Kind::FaceHit, "L+R", ""};
    out.drift_ok = out.max_q_drift <=
                   10 * icfg.rel_tol * std::max(out.total_param, 1.0) + 10 * icfg.abs_tol;
    return out;
}

}  // namespace ahm
