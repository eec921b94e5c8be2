// Command line front end: geodesic traces, two-point distances, sojourn
// times, the scattering relation, F-scans and the verification suite.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "ahm/config.hpp"
#include "ahm/hyperbolic.hpp"
#include "ahm/scattering.hpp"
#include "ahm/verify.hpp"

namespace {

using namespace ahm;

Vec parse_csv(const std::string& s) {
    Vec out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty())
            out.push_back(std::stod(tok));
    return out;
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Common {
    std::string config_path;
    std::string out_path;
    long long seed = -1;
    int threads = -1;
    double t_max = -1;

    RunConfig load() const {
        RunConfig cfg;
        std::string path = config_path;
        if (path.empty()) {
            const char* env = std::getenv("AHM_CONFIG");
            if (env)
                path = env;
        }
        if (!path.empty())
            cfg = load_config(path);
        if (seed >= 0)
            cfg.seed = static_cast<std::uint64_t>(seed);
        if (threads >= 0)
            cfg.threads = threads;
        if (t_max > 0)
            cfg.integrator.t_max = t_max;
        if (!out_path.empty())
            cfg.out_path = out_path;
        cfg.validate();
        return cfg;
    }

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "configuration file (JSON)");
        app->add_option("--seed", seed, "random seed override");
        app->add_option("--out", out_path, "output path (default stdout)");
        app->add_option("--threads", threads, "worker threads override");
        app->add_option("--t-max", t_max, "integration parameter cap override");
    }
};

std::ostream& open_out(const RunConfig& cfg, std::ofstream& file) {
    if (cfg.out_path.empty())
        return std::cout;
    file.open(cfg.out_path);
    if (!file)
        throw std::runtime_error("cannot open output path " + cfg.out_path);
    return file;
}

PhasePoint read_point(const MetricModel& m, double x, const std::string& ycsv,
                      double xi, const std::string& ecsv) {
    PhasePoint p;
    p.x = x;
    p.y = parse_csv(ycsv);
    p.xi = xi;
    p.eta = parse_csv(ecsv);
    if (static_cast<int>(p.y.size()) != m.dim || static_cast<int>(p.eta.size()) != m.dim)
        throw std::runtime_error("start spec dimension does not match the metric dimension");
    return p;
}

void normalize_covector(const MetricModel& m, PhasePoint& z, bool& warned) {
    double g = dual_norm_sq(m, z.x, z.y, z.xi, z.eta);
    if (g <= 0)
        throw std::runtime_error("zero covector");
    if (std::abs(g - 1.0) > 1e-12) {
        double s = 1.0 / std::sqrt(g);
        z.xi *= s;
        for (auto& e : z.eta)
            e *= s;
        warned = true;
    }
}

void print_samples(std::ostream& os, const std::vector<FlowResult>& legs) {
    // record: param chart state... q_drift; the parameter accumulates across
    // legs so the stream stays monotone
    double offset = 0;
    for (const auto& leg : legs) {
        for (const auto& s : leg.samples) {
            os << g17(offset + s.param) << ' ' << chart_name(s.chart);
            for (double v : s.state)
                os << ' ' << g17(v);
            os << ' ' << g17(s.q_drift) << '\n';
        }
        offset += leg.end_param;
    }
}

int cmd_trace(const Common& common, double x, const std::string& ycsv, double xi,
              const std::string& ecsv, const std::string& direction, double sigma) {
    RunConfig cfg = common.load();
    if (sigma == 0) {
        std::cerr << "error: sigma must be nonzero\n";
        return 1;
    }
    if (sigma < 0) {
        std::cerr << "error: sigma must be positive; reverse the covector instead\n";
        return 1;
    }
    PhasePoint z = read_point(cfg.metric, x, ycsv, xi, ecsv);
    bool warned = false;
    normalize_covector(cfg.metric, z, warned);
    if (warned)
        std::cerr << "warning: covector rescaled to the unit cosphere\n";
    TraceDirection dir = direction == "backward" ? TraceDirection::Backward
                                                 : TraceDirection::Forward;
    GeodesicTrace tr = trace_geodesic(cfg.metric, z, dir, cfg.integrator, cfg.charts,
                                      cfg.defining_scale);
    std::ofstream file;
    std::ostream& os = open_out(cfg, file);
    print_samples(os, tr.legs);
    os << "# termination: "
       << (tr.face_hit ? "face-hit" : tr.termination.detail.c_str()) << '\n';
    if (tr.face_hit) {
        os << "# y_end:";
        for (double v : tr.y_end)
            os << ' ' << g17(v);
        os << "\n# s_limit: " << g17(tr.s_limit) << '\n';
        return 0;
    }
    return tr.termination.kind == Termination::Kind::CapReached ? 2 : 1;
}

int cmd_distance(const Common& common, double zx, const std::string& zy, double zpx,
                 const std::string& zpy) {
    RunConfig cfg = common.load();
    PhasePoint a, b;
    a.x = zx;
    a.y = parse_csv(zy);
    b.x = zpx;
    b.y = parse_csv(zpy);
    a.eta.assign(cfg.metric.dim, 0.0);
    b.eta.assign(cfg.metric.dim, 0.0);
    if (std::abs(a.x - b.x) + dist(a.y, b.y) < 1e-12) {
        std::cerr << "error: points must be distinct\n";
        return 1;
    }
    DistanceResult dr = distance_shooting(cfg.metric, a, b, cfg.integrator, cfg.shooting);
    std::ofstream file;
    std::ostream& os = open_out(cfg, file);
    os << "r: " << g17(dr.r) << '\n'
       << "residual: " << g17(dr.residual) << '\n'
       << "iterations: " << dr.iterations << '\n'
       << "converged: " << (dr.converged ? "true" : "false") << '\n'
       << "F: " << g17(dr.F) << '\n'
       << "rho_L: " << g17(dr.polar.rho_l) << '\n'
       << "rho_R: " << g17(dr.polar.rho_r) << '\n'
       << "R: " << g17(dr.polar.R) << '\n';
    if (!dr.message.empty())
        os << "message: " << dr.message << '\n';
    return dr.converged ? 0 : 2;
}

int cmd_sojourn(const Common& common, double x, const std::string& ycsv, double xi,
                const std::string& ecsv, const std::string& face) {
    RunConfig cfg = common.load();
    PhasePoint z = read_point(cfg.metric, x, ycsv, xi, ecsv);
    bool warned = false;
    normalize_covector(cfg.metric, z, warned);
    if (warned)
        std::cerr << "warning: covector rescaled to the unit cosphere\n";
    SojournResult s = sojourn_forward(cfg.metric, z, face == "R" ? Side::R : Side::L,
                                      cfg.integrator, cfg.charts, cfg.defining_scale);
    std::ofstream file;
    std::ostream& os = open_out(cfg, file);
    if (!s.hit) {
        os << "termination: " << s.termination.detail << '\n';
        return 2;
    }
    os << "face: " << face << '\n' << "y_end:";
    for (double v : s.y_end)
        os << ' ' << g17(v);
    os << '\n' << "s_limit: " << g17(s.s_limit) << '\n';
    return 0;
}

void print_datum(std::ostream& os, const ScatteringDatum& d) {
    os << "complete: " << (d.complete ? "true" : "false") << '\n';
    if (!d.complete) {
        os << "termination: " << d.termination.detail << '\n';
        return;
    }
    os << "y:";
    for (double v : d.y)
        os << ' ' << g17(v);
    os << "\ny_prime:";
    for (double v : d.yp)
        os << ' ' << g17(v);
    os << "\ns: " << g17(d.s) << '\n'
       << "S_soj: " << g17(d.S_soj) << '\n'
       << "R_corner: " << g17(d.R_corner) << '\n'
       << "sigma_drift: " << g17(d.max_sigma_drift) << '\n'
       << "q_drift: " << g17(d.max_q_drift) << '\n';
}

int cmd_scatter(const Common& common, double x, const std::string& ycsv, double xi,
                const std::string& ecsv, int sweep, double alpha0, double alpha1) {
    RunConfig cfg = common.load();
    std::ofstream file;
    std::ostream& os = open_out(cfg, file);
    if (sweep > 0) {
        os << "alpha, y, y_prime, s, S_soj\n";
        for (int k = 0; k < sweep; ++k) {
            double alpha = alpha0 + (alpha1 - alpha0) * k / std::max(1, sweep - 1);
            PhasePoint z;
            z.x = x;
            z.y = parse_csv(ycsv);
            double phi = conformal_factor<double>(cfg.metric, z.x, z.y);
            z.xi = std::cos(alpha) / z.x;
            z.eta.assign(cfg.metric.dim, 0.0);
            z.eta[0] = std::sin(alpha) / (z.x * std::sqrt(phi));
            ScatteringDatum d = scattering_datum(cfg.metric, z, cfg.integrator, cfg.charts,
                                                 DriveOrder::RightThenLeft,
                                                 cfg.defining_scale);
            if (!d.complete) {
                os << g17(alpha) << ", nan, nan, nan, nan\n";
                continue;
            }
            os << g17(alpha) << ", " << g17(d.y[0]) << ", " << g17(d.yp[0]) << ", "
               << g17(d.s) << ", " << g17(d.S_soj) << '\n';
        }
        return 0;
    }
    PhasePoint z = read_point(cfg.metric, x, ycsv, xi, ecsv);
    bool warned = false;
    normalize_covector(cfg.metric, z, warned);
    if (warned)
        std::cerr << "warning: covector rescaled to the unit cosphere\n";
    ScatteringDatum d = scattering_datum(cfg.metric, z, cfg.integrator, cfg.charts,
                                         DriveOrder::RightThenLeft, cfg.defining_scale);
    print_datum(os, d);
    return d.complete ? 0 : 2;
}

int cmd_scan_f(const Common& common) {
    RunConfig cfg = common.load();
    ScanResult res = scan_F(cfg.metric, cfg.scan, cfg.integrator, cfg.shooting,
                            cfg.charts.diag_margin, cfg.threads > 0 ? cfg.threads : 1);
    std::ofstream file;
    std::ostream& os = open_out(cfg, file);
    os << scan_csv(res);
    std::ostream& sum = cfg.out_path.empty() ? std::cout : std::cerr;
    sum << scan_summary_text(res);
    return res.summary.failures == 0 ? 0 : 2;
}

int cmd_verify(const Common& common) {
    RunConfig cfg = common.load();
    auto results = run_acceptance(cfg, std::cout);
    return all_pass(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geodesic flow, sojourn times and distance asymptotics on "
                 "asymptotically hyperbolic half-space models"};
    app.require_subcommand(1);

    Common common;
    double x = 1, xi = 0, zx = 1, zpx = 1, sigma = 1;
    std::string ycsv = "0", ecsv = "0", zy = "0", zpy = "0";
    std::string direction = "forward", face = "L";
    int sweep = 0;
    double alpha0 = 0.3, alpha1 = 2.8;

    CLI::App* trace = app.add_subcommand("trace", "trace one geodesic to the boundary");
    common.attach(trace);
    trace->add_option("--x", x, "start height");
    trace->add_option("--y", ycsv, "start boundary coordinates (csv)");
    trace->add_option("--xi", xi, "dx-momentum");
    trace->add_option("--eta", ecsv, "dy-momenta (csv)");
    trace->add_option("--direction", direction, "forward|backward");
    trace->add_option("--sigma", sigma, "time-dual parameter (must be positive)");

    CLI::App* distance = app.add_subcommand("distance", "two-point distance by shooting");
    common.attach(distance);
    distance->add_option("--zx", zx, "first point height");
    distance->add_option("--zy", zy, "first point boundary coordinates (csv)");
    distance->add_option("--zpx", zpx, "second point height");
    distance->add_option("--zpy", zpy, "second point boundary coordinates (csv)");

    CLI::App* sojourn = app.add_subcommand("sojourn", "one-sided sojourn time");
    common.attach(sojourn);
    sojourn->add_option("--x", x, "start height");
    sojourn->add_option("--y", ycsv, "start boundary coordinates (csv)");
    sojourn->add_option("--xi", xi, "dx-momentum");
    sojourn->add_option("--eta", ecsv, "dy-momenta (csv)");
    sojourn->add_option("--face", face, "output face label L|R");

    CLI::App* scatter = app.add_subcommand("scatter", "two-sided scattering datum");
    common.attach(scatter);
    scatter->add_option("--x", x, "conormal start height");
    scatter->add_option("--y", ycsv, "conormal start boundary coordinates (csv)");
    scatter->add_option("--xi", xi, "dx-momentum");
    scatter->add_option("--eta", ecsv, "dy-momenta (csv)");
    scatter->add_option("--sweep", sweep, "emit a launch-angle sweep table of N rows");
    scatter->add_option("--alpha0", alpha0, "sweep start angle");
    scatter->add_option("--alpha1", alpha1, "sweep end angle");

    CLI::App* scanf_cmd = app.add_subcommand("scan-f", "tabulate F over a blow-up grid");
    common.attach(scanf_cmd);

    CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
    common.attach(verify);

    CLI11_PARSE(app, argc, argv);

    try {
        if (trace->parsed())
            return cmd_trace(common, x, ycsv, xi, ecsv, direction, sigma);
        if (distance->parsed())
            return cmd_distance(common, zx, zy, zpx, zpy);
        if (sojourn->parsed())
            return cmd_sojourn(common, x, ycsv, xi, ecsv, face);
        if (scatter->parsed())
            return cmd_scatter(common, x, ycsv, xi, ecsv, sweep, alpha0, alpha1);
        if (scanf_cmd->parsed())
            return cmd_scan_f(common);
        if (verify->parsed())
            return cmd_verify(common);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
