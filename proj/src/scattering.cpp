#include "ahm/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ahm {

SojournResult sojourn_forward(const MetricModel& m, const PhasePoint& zp, Side face,
                              const IntegratorConfig& icfg, const ChartConfig& ccfg,
                              double defining_scale, bool record_samples) {
    double p = energy_p(m, zp);
    if (std::abs(p) > 1e-8)
        throw std::invalid_argument("sojourn_forward: covector must lie on the unit cosphere");
    SojournResult out;
    out.trace = trace_geodesic(m, zp, TraceDirection::Forward, icfg, ccfg, defining_scale,
                               record_samples);
    out.termination = out.trace.termination;
    out.hit = out.trace.face_hit;
    if (out.hit) {
        out.y_end = out.trace.y_end;
        out.s_limit = out.trace.s_limit;
        out.face_normal = out.trace.face_normal;
    }
    (void)face;
    return out;
}

ScatteringDatum scattering_datum(const MetricModel& m, const PhasePoint& z0_in,
                                 const IntegratorConfig& icfg, const ChartConfig& ccfg,
                                 DriveOrder order, double defining_scale,
                                 bool record_samples) {
    ScatteringDatum d;
    PhasePoint z0 = z0_in;
    double g = dual_norm_sq(m, z0.x, z0.y, z0.xi, z0.eta);
    if (g <= 0)
        throw std::invalid_argument("scattering_datum: zero launch covector");
    if (std::abs(g - 1.0) > 1e-10) {
        double sc = 1.0 / std::sqrt(g);
        z0.xi *= sc;
        for (auto& e : z0.eta)
            e *= sc;
        d.normalized_input = true;
    }
    d.z0 = z0;
    d.tau = 1.0;

    d.pair = trace_to_face(m, z0, 1.0, icfg, ccfg, order, defining_scale, record_samples);
    d.termination = d.pair.termination;
    d.max_q_drift = d.pair.max_q_drift;
    d.max_sigma_drift = d.pair.max_sigma_drift;
    d.switch_mismatch = d.pair.switch_mismatch;
    if (!d.pair.both_hit)
        return d;

    const int n = m.dim;
    d.y = d.pair.left.y;
    d.yp = d.pair.right.y;
    d.face_normal_l = d.pair.left.face_normal;
    d.face_normal_r = d.pair.right.face_normal;
    auto face_state = [n](const FactorState& f) {
        Vec s(2 * n + 2);
        s[0] = 0;
        for (int i = 0; i < n; ++i) {
            s[1 + i] = f.y[i];
            s[2 + n + i] = f.eta[i];
        }
        s[1 + n] = f.xit;
        return s;
    };
    d.left_state = face_state(d.pair.left);
    d.right_state = face_state(d.pair.right);

    d.R_corner = dist(d.y, d.yp);
    d.S_soj = d.pair.soj_total;
    d.s = d.S_soj - 2 * std::log(d.R_corner);
    d.complete = true;
    return d;
}

// ---------------------------------------------------------------------------
// distance by shooting
// ---------------------------------------------------------------------------

namespace {

// covector at z' from frame components a (|a| = 1 gives a unit covector)
void covector_from_frame(const MetricModel& m, const PhasePoint& zp,
                         std::span<const double> a, double& xi, std::span<double> eta) {
    double phi = conformal_factor<double>(m, zp.x, zp.y);
    double sq = std::sqrt(phi);
    xi = a[0] / zp.x;
    for (int i = 0; i < m.dim; ++i)
        eta[i] = a[1 + i] / (zp.x * sq);
}

void frame_from_covector(const MetricModel& m, const PhasePoint& zp, double xi,
                         std::span<const double> eta, std::span<double> a) {
    double phi = conformal_factor<double>(m, zp.x, zp.y);
    double sq = std::sqrt(phi);
    a[0] = zp.x * xi;
    for (int i = 0; i < m.dim; ++i)
        a[1 + i] = zp.x * sq * eta[i];
}

// endpoint of the unit-speed geodesic from z' with frame direction a,
// integrated for arclength r; writes (x, y) into res
void shoot_endpoint(const MetricModel& m, const PhasePoint& zp, std::span<const double> P,
                    const IntegratorConfig& icfg, std::span<double> res) {
    const int n = m.dim;
    double r = norm(P);
    Vec a(P.begin(), P.end());
    for (auto& v : a)
        v /= r;
    Vec z(interior_single_size(n));
    z[0] = zp.x;
    for (int i = 0; i < n; ++i)
        z[1 + i] = zp.y[i];
    double xi;
    covector_from_frame(m, zp, a, xi, std::span(z).subspan(2 + n, n));
    z[1 + n] = xi;

    IntegratorConfig cfg = icfg;
    cfg.t_max = r;
    FieldSpec fs{&m, ChartId::Interior, Side::L, false, 1.0};
    FlowResult fr = integrate(fs, z, {}, cfg, false);
    if (fr.termination.kind != Termination::Kind::CapReached)
        throw std::runtime_error("shoot_endpoint: integration failed before reaching r");
    res[0] = fr.end_state[0];
    for (int i = 0; i < n; ++i)
        res[1 + i] = fr.end_state[1 + i];
}

// dense linear solve with partial pivoting, A is k x k row major
bool solve_linear(std::vector<double>& A, std::vector<double>& b, int k) {
    for (int col = 0; col < k; ++col) {
        int piv = col;
        for (int r = col + 1; r < k; ++r)
            if (std::abs(A[r * k + col]) > std::abs(A[piv * k + col]))
                piv = r;
        if (std::abs(A[piv * k + col]) < 1e-300)
            return false;
        if (piv != col) {
            for (int c = 0; c < k; ++c)
                std::swap(A[col * k + c], A[piv * k + c]);
            std::swap(b[col], b[piv]);
        }
        for (int r = col + 1; r < k; ++r) {
            double f = A[r * k + col] / A[col * k + col];
            for (int c = col; c < k; ++c)
                A[r * k + c] -= f * A[col * k + c];
            b[r] -= f * b[col];
        }
    }
    for (int r = k - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < k; ++c)
            s -= A[r * k + c] * b[c];
        b[r] = s / A[r * k + r];
    }
    return true;
}

}  // namespace

DistanceResult distance_shooting(const MetricModel& m, const PhasePoint& z,
                                 const PhasePoint& zp, const IntegratorConfig& icfg,
                                 const ShootingConfig& scfg, const LaunchData* guess) {
    const int n = m.dim;
    const int k = n + 1;
    DistanceResult out;
    out.eta.assign(n, 0.0);
    if (z.x <= 0 || zp.x <= 0)
        throw std::invalid_argument("distance_shooting: both points must be interior");
    double sep = std::abs(z.x - zp.x) + dist(z.y, zp.y);
    if (sep < 1e-12)
        throw std::invalid_argument("distance_shooting: points must be distinct");

    // seed from the exact model
    LaunchData ld = guess ? *guess : exact_launch(zp.x, zp.y, z.x, z.y);
    Vec P(k);
    {
        Vec a(k);
        // project the seed covector onto the model's unit cosphere
        double gn = std::sqrt(dual_norm_sq(m, zp.x, zp.y, ld.xi, ld.eta));
        double xi = ld.xi / gn;
        Vec eta = ld.eta;
        for (auto& e : eta)
            e /= gn;
        frame_from_covector(m, zp, xi, eta, a);
        for (int i = 0; i < k; ++i)
            P[i] = ld.r * a[i];
    }

    Vec target(k);
    target[0] = z.x;
    for (int i = 0; i < n; ++i)
        target[1 + i] = z.y[i];

    IntegratorConfig jac_cfg = icfg;
    jac_cfg.rel_tol = std::max(icfg.rel_tol, scfg.jacobian_rel_tol);
    jac_cfg.abs_tol = std::max(icfg.abs_tol, scfg.jacobian_rel_tol * 1e-2);

    Vec res(k), res_try(k), endpoint(k);
    auto residual = [&](const Vec& Pv, Vec& r_out, const IntegratorConfig& cfg) {
        shoot_endpoint(m, zp, Pv, cfg, endpoint);
        for (int i = 0; i < k; ++i)
            r_out[i] = endpoint[i] - target[i];
        return norm(r_out);
    };

    double rn = residual(P, res, icfg);
    int it = 0;
    for (; it < scfg.max_iterations && rn > scfg.residual_tol; ++it) {
        // central-difference Jacobian
        std::vector<double> J(k * k);
        Vec Pp = P, Pm = P, rp(k), rm(k);
        double step = scfg.fd_step * std::max(1.0, norm(P));
        for (int c = 0; c < k; ++c) {
            Pp[c] = P[c] + step;
            Pm[c] = P[c] - step;
            residual(Pp, rp, jac_cfg);
            residual(Pm, rm, jac_cfg);
            for (int r = 0; r < k; ++r)
                J[r * k + c] = (rp[r] - rm[r]) / (2 * step);
            Pp[c] = P[c];
            Pm[c] = P[c];
        }
        Vec dP(res);
        for (auto& v : dP)
            v = -v;
        if (!solve_linear(J, dP, k)) {
            out.message = "singular shooting Jacobian";
            break;
        }
        // damped update
        double alpha = 1.0;
        bool improved = false;
        for (int h = 0; h <= scfg.max_halvings; ++h) {
            Vec Pt(k);
            for (int i = 0; i < k; ++i)
                Pt[i] = P[i] + alpha * dP[i];
            if (norm(Pt) > 1e-12) {
                double rt = residual(Pt, res_try, icfg);
                if (rt < rn) {
                    P = Pt;
                    res = res_try;
                    rn = rt;
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!improved) {
            out.message = "line search stalled";
            break;
        }
    }

    out.r = norm(P);
    out.residual = rn;
    out.iterations = it;
    out.converged = rn <= scfg.residual_tol;
    if (!out.converged && out.message.empty())
        out.message = "no convergence (possible loss of geodesic convexity)";

    Vec a(P.begin(), P.end());
    for (auto& v : a)
        v /= out.r;
    covector_from_frame(m, zp, a, out.xi, out.eta);

    out.polar = blowdown_polar(z.x, z.y, zp.x, zp.y);
    out.F = out.r + std::log(out.polar.rho_l) + std::log(out.polar.rho_r);
    return out;
}

DistanceResult F_value(const MetricModel& m, const PhasePoint& z, const PhasePoint& zp,
                       const IntegratorConfig& icfg, const ShootingConfig& scfg) {
    return distance_shooting(m, z, zp, icfg, scfg);
}

// ---------------------------------------------------------------------------
// grid scan
// ---------------------------------------------------------------------------

double richardson_limit(std::span<const double> f) {
    const int mlev = static_cast<int>(f.size());
    std::vector<double> t(f.begin(), f.end());
    for (int j = 1; j < mlev; ++j) {
        double w = std::pow(2.0, j);
        for (int i = mlev - 1; i >= j; --i)
            t[i] = (w * t[i] - t[i - 1]) / (w - 1.0);
    }
    return t[mlev - 1];
}

ScanGrid ScanGrid::default_grid() {
    ScanGrid g;
    auto linspace = [](double a, double b, int k) {
        Vec v(k);
        for (int i = 0; i < k; ++i)
            v[i] = a + (b - a) * i / (k - 1);
        return v;
    };
    g.rho_l = linspace(0.05, 0.95, 12);
    g.rho_r = linspace(0.05, 0.95, 12);
    g.y_norm = linspace(0.05, 0.95, 8);
    g.R_values = {0.5, 0.25};
    return g;
}

namespace {

struct ScanNode {
    double rho_l, rho_r, y_norm, R;
    int il, ir, iy, iR;
};

ScanRecord scan_one(const MetricModel& m, const ScanNode& nd, const IntegratorConfig& icfg,
                    const ShootingConfig& scfg) {
    ScanRecord rec{nd.rho_l, nd.rho_r, nd.y_norm, nd.R, 0, 0, 0, 0, false};
    const int n = m.dim;
    PhasePoint z, zp;
    z.x = nd.R * nd.rho_l;
    zp.x = nd.R * nd.rho_r;
    z.y.assign(n, 0.0);
    zp.y.assign(n, 0.0);
    z.y[0] = nd.R * nd.y_norm;
    z.eta.assign(n, 0.0);
    zp.eta.assign(n, 0.0);
    try {
        DistanceResult dr = distance_shooting(m, z, zp, icfg, scfg);
        rec.r = dr.r;
        rec.F = dr.F;
        rec.residual = dr.residual;
        rec.iters = dr.iterations;
        rec.ok = dr.converged;
    } catch (const std::exception&) {
        rec.ok = false;
    }
    return rec;
}

}  // namespace

ScanResult scan_F(const MetricModel& m, const ScanGrid& grid, const IntegratorConfig& icfg,
                  const ShootingConfig& scfg, double diag_margin, int threads) {
    if (grid.rho_l.empty() || grid.rho_r.empty() || grid.y_norm.empty() ||
        grid.R_values.empty())
        throw std::invalid_argument("scan_F: empty grid");

    std::vector<ScanNode> nodes;
    for (int iR = 0; iR < static_cast<int>(grid.R_values.size()); ++iR)
        for (int il = 0; il < static_cast<int>(grid.rho_l.size()); ++il)
            for (int ir = 0; ir < static_cast<int>(grid.rho_r.size()); ++ir)
                for (int iy = 0; iy < static_cast<int>(grid.y_norm.size()); ++iy) {
                    double a = grid.rho_l[il], b = grid.rho_r[ir], c = grid.y_norm[iy];
                    double s = std::sqrt(a * a + b * b + c * c);
                    a /= s;
                    b /= s;
                    c /= s;
                    // stay clear of the lifted diagonal fiber
                    double dd = std::sqrt((a - b) * (a - b) + c * c);
                    if (dd < diag_margin)
                        continue;
                    nodes.push_back({a, b, c, grid.R_values[iR], il, ir, iy, iR});
                }

    ScanResult out;
    out.records.resize(nodes.size());
    auto worker = [&](int begin, int end) {
        for (int i = begin; i < end; ++i)
            out.records[i] = scan_one(m, nodes[i], icfg, scfg);
    };
    int nt = std::max(1, threads);
    if (nt == 1 || nodes.size() < 8) {
        worker(0, static_cast<int>(nodes.size()));
    } else {
        std::vector<std::thread> pool;
        int chunk = (static_cast<int>(nodes.size()) + nt - 1) / nt;
        for (int t = 0; t < nt; ++t) {
            int b = t * chunk;
            int e = std::min<int>(b + chunk, nodes.size());
            if (b < e)
                pool.emplace_back(worker, b, e);
        }
        for (auto& th : pool)
            th.join();
    }

    // summary
    ScanSummary& s = out.summary;
    s.nodes = static_cast<int>(out.records.size());
    for (const auto& r : out.records) {
        if (!r.ok) {
            ++s.failures;
            continue;
        }
        s.max_abs_F = std::max(s.max_abs_F, std::abs(r.F));
    }

    // R dependence: same direction indices, different R
    {
        std::vector<std::vector<const ScanRecord*>> byR(grid.R_values.size());
        std::vector<std::vector<long>> keys(grid.R_values.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const ScanNode& nd = nodes[i];
            long key = (static_cast<long>(nd.il) * 1000 + nd.ir) * 1000 + nd.iy;
            byR[nd.iR].push_back(&out.records[i]);
            keys[nd.iR].push_back(key);
        }
        for (std::size_t rA = 0; rA + 1 < byR.size(); ++rA) {
            for (std::size_t i = 0; i < byR[rA].size() && i < byR[rA + 1].size(); ++i) {
                if (keys[rA][i] != keys[rA + 1][i])
                    continue;
                if (byR[rA][i]->ok && byR[rA + 1][i]->ok)
                    s.max_R_dependence = std::max(
                        s.max_R_dependence, std::abs(byR[rA][i]->F - byR[rA + 1][i]->F));
            }
        }
    }

    // second differences along each axis within one R slice (smoothness proxy)
    {
        auto key_of = [&](int il, int ir, int iy, int iR) {
            return ((static_cast<long>(iR) * 1000 + il) * 1000 + ir) * 1000 + iy;
        };
        std::vector<std::pair<long, double>> table;
        table.reserve(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (out.records[i].ok)
                table.push_back({key_of(nodes[i].il, nodes[i].ir, nodes[i].iy, nodes[i].iR),
                                 out.records[i].F});
        std::sort(table.begin(), table.end());
        auto lookup = [&](long key, double& v) {
            auto it = std::lower_bound(table.begin(), table.end(), std::make_pair(key, -1e300));
            if (it == table.end() || it->first != key)
                return false;
            v = it->second;
            return true;
        };
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const ScanNode& nd = nodes[i];
            if (!out.records[i].ok)
                continue;
            double fm, fp;
            const int steps[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
            for (auto& st : steps) {
                if (lookup(key_of(nd.il - st[0], nd.ir - st[1], nd.iy - st[2], nd.iR), fm) &&
                    lookup(key_of(nd.il + st[0], nd.ir + st[1], nd.iy + st[2], nd.iR), fp)) {
                    double d2 = std::abs(fp - 2 * out.records[i].F + fm);
                    s.max_second_difference = std::max(s.max_second_difference, d2);
                }
            }
        }
    }

    // face and corner extrapolation along ratio-2 sequences
    {
        auto F_at = [&](double rl, double rr, double yv) {
            double sn = std::sqrt(rl * rl + rr * rr + yv * yv);
            ScanNode nd{rl / sn, rr / sn, yv / sn, grid.R_values[0], 0, 0, 0, 0};
            ScanRecord rec = scan_one(m, nd, icfg, scfg);
            return rec.ok ? rec.F : std::nan("");
        };
        Vec seq(4);
        for (int kk = 0; kk < 4; ++kk) {
            double rho = 0.2 / (1 << kk);
            seq[kk] = F_at(rho, rho, std::sqrt(std::max(0.0, 1 - 2 * rho * rho)));
        }
        s.corner_extrapolated = richardson_limit(seq);
        for (int kk = 0; kk < 4; ++kk)
            seq[kk] = F_at(0.2 / (1 << kk), 0.6, 0.6);
        s.face_l_extrapolated = richardson_limit(seq);
        for (int kk = 0; kk < 4; ++kk)
            seq[kk] = F_at(0.6, 0.2 / (1 << kk), 0.6);
        s.face_r_extrapolated = richardson_limit(seq);
    }

    return out;
}

std::string scan_csv(const ScanResult& res) {
    std::ostringstream os;
    os << "rho_L, rho_R, Ynorm, R, r, F, residual, iters\n";
    char buf[256];
    for (const auto& r : res.records) {
        std::snprintf(buf, sizeof buf, "%.12g, %.12g, %.12g, %.12g, %.15g, %.15g, %.3g, %d\n",
                      r.rho_l, r.rho_r, r.y_norm, r.R, r.r, r.F, r.residual, r.iters);
        os << buf;
    }
    return os.str();
}

std::string scan_summary_text(const ScanResult& res) {
    const ScanSummary& s = res.summary;
    std::ostringstream os;
    os << "nodes: " << s.nodes << "\n"
       << "failures: " << s.failures << "\n"
       << "max_abs_F: " << s.max_abs_F << "\n"
       << "max_second_difference: " << s.max_second_difference << "\n"
       << "max_R_dependence: " << s.max_R_dependence << "\n"
       << "corner_extrapolated: " << s.corner_extrapolated << "\n"
       << "face_L_extrapolated: " << s.face_l_extrapolated << "\n"
       << "face_R_extrapolated: " << s.face_r_extrapolated << "\n";
    return os.str();
}

}  // namespace ahm
