#include "ahm/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace ahm {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
}

template <class T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
    if (metric.dim < 1 || metric.dim > 8)
        throw std::runtime_error("config: metric.dimension must be in [1, 8]");
    if (metric.kind == MetricModel::Kind::Perturbed && metric.delta <= 0)
        throw std::runtime_error("config: metric.delta must be positive");
    if (metric.kind == MetricModel::Kind::Perturbed && metric.bump_radius <= 0)
        throw std::runtime_error("config: metric.bump_radius must be positive");
    integrator.validate();
    if (charts.x_switch <= 0 || charts.u_switch <= 0 || charts.r_switch <= 0 ||
        charts.w_switch <= 0)
        throw std::runtime_error("config: chart thresholds must be positive");
    if (shooting.residual_tol <= 0 || shooting.max_iterations < 1)
        throw std::runtime_error("config: invalid shooting block");
    if (defining_scale <= 0)
        throw std::runtime_error("config: defining_function_scale must be positive");
    if (threads < 0)
        throw std::runtime_error("config: threads must be nonnegative");
}

RunConfig config_from_json_text(const std::string& text) {
    json j = json::parse(text);
    RunConfig cfg;
    reject_unknown(j, {"metric", "integrator", "charts", "shooting", "sojourn", "scan",
                       "seed", "threads", "output"},
                   "top level");
    if (j.contains("metric")) {
        const json& m = j["metric"];
        reject_unknown(m, {"dimension", "kind", "epsilon", "delta", "bump_center",
                           "bump_radius", "x_max", "y_max"},
                       "metric");
        maybe(m, "dimension", cfg.metric.dim);
        if (m.contains("kind")) {
            std::string k = m["kind"].get<std::string>();
            if (k == "exact-hyperbolic")
                cfg.metric.kind = MetricModel::Kind::ExactHyperbolic;
            else if (k == "perturbed")
                cfg.metric.kind = MetricModel::Kind::Perturbed;
            else
                throw std::runtime_error("config: metric.kind must be exact-hyperbolic or perturbed");
        }
        maybe(m, "epsilon", cfg.metric.epsilon);
        maybe(m, "delta", cfg.metric.delta);
        maybe(m, "bump_radius", cfg.metric.bump_radius);
        maybe(m, "x_max", cfg.metric.x_max);
        maybe(m, "y_max", cfg.metric.y_max);
        if (m.contains("bump_center"))
            cfg.metric.bump_center = m["bump_center"].get<Vec>();
    }
    if (j.contains("integrator")) {
        const json& b = j["integrator"];
        reject_unknown(b, {"rel_tol", "abs_tol", "max_step", "t_max", "event_tol"},
                       "integrator");
        maybe(b, "rel_tol", cfg.integrator.rel_tol);
        maybe(b, "abs_tol", cfg.integrator.abs_tol);
        maybe(b, "max_step", cfg.integrator.max_step);
        maybe(b, "t_max", cfg.integrator.t_max);
        maybe(b, "event_tol", cfg.integrator.event_tol);
    }
    if (j.contains("charts")) {
        const json& b = j["charts"];
        reject_unknown(b, {"x_switch", "u_switch", "r_switch", "w_switch", "diag_margin"},
                       "charts");
        maybe(b, "x_switch", cfg.charts.x_switch);
        maybe(b, "u_switch", cfg.charts.u_switch);
        maybe(b, "r_switch", cfg.charts.r_switch);
        maybe(b, "w_switch", cfg.charts.w_switch);
        maybe(b, "diag_margin", cfg.charts.diag_margin);
    }
    if (j.contains("shooting")) {
        const json& b = j["shooting"];
        reject_unknown(b, {"residual_tol", "max_iterations", "fd_step", "max_halvings",
                           "jacobian_rel_tol"},
                       "shooting");
        maybe(b, "residual_tol", cfg.shooting.residual_tol);
        maybe(b, "max_iterations", cfg.shooting.max_iterations);
        maybe(b, "fd_step", cfg.shooting.fd_step);
        maybe(b, "max_halvings", cfg.shooting.max_halvings);
        maybe(b, "jacobian_rel_tol", cfg.shooting.jacobian_rel_tol);
    }
    if (j.contains("sojourn")) {
        const json& b = j["sojourn"];
        reject_unknown(b, {"defining_function_scale"}, "sojourn");
        maybe(b, "defining_function_scale", cfg.defining_scale);
    }
    if (j.contains("scan")) {
        const json& b = j["scan"];
        reject_unknown(b, {"rho_points", "y_points", "range_min", "range_max", "R_values"},
                       "scan");
        int np = 12, ny = 8;
        double lo = 0.05, hi = 0.95;
        maybe(b, "rho_points", np);
        maybe(b, "y_points", ny);
        maybe(b, "range_min", lo);
        maybe(b, "range_max", hi);
        if (np < 2 || ny < 2 || lo <= 0 || hi <= lo)
            throw std::runtime_error("config: invalid scan block");
        auto linspace = [](double a, double bb, int k) {
            Vec v(k);
            for (int i = 0; i < k; ++i)
                v[i] = a + (bb - a) * i / (k - 1);
            return v;
        };
        cfg.scan.rho_l = linspace(lo, hi, np);
        cfg.scan.rho_r = linspace(lo, hi, np);
        cfg.scan.y_norm = linspace(lo, hi, ny);
        if (b.contains("R_values"))
            cfg.scan.R_values = b["R_values"].get<Vec>();
    }
    maybe(j, "seed", cfg.seed);
    maybe(j, "threads", cfg.threads);
    if (j.contains("output")) {
        const json& b = j["output"];
        reject_unknown(b, {"path"}, "output");
        maybe(b, "path", cfg.out_path);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return config_from_json_text(text);
}

std::string config_to_json_text(const RunConfig& cfg) {
    json j;
    j["metric"]["dimension"] = cfg.metric.dim;
    j["metric"]["kind"] = cfg.metric.kind == MetricModel::Kind::ExactHyperbolic
                              ? "exact-hyperbolic"
                              : "perturbed";
    j["metric"]["epsilon"] = cfg.metric.epsilon;
    j["metric"]["delta"] = cfg.metric.delta;
    j["metric"]["bump_radius"] = cfg.metric.bump_radius;
    j["metric"]["bump_center"] = cfg.metric.bump_center;
    j["metric"]["x_max"] = cfg.metric.x_max;
    j["metric"]["y_max"] = cfg.metric.y_max;
    j["integrator"] = {{"rel_tol", cfg.integrator.rel_tol},
                       {"abs_tol", cfg.integrator.abs_tol},
                       {"max_step", cfg.integrator.max_step},
                       {"t_max", cfg.integrator.t_max},
                       {"event_tol", cfg.integrator.event_tol}};
    j["charts"] = {{"x_switch", cfg.charts.x_switch},
                   {"u_switch", cfg.charts.u_switch},
                   {"r_switch", cfg.charts.r_switch},
                   {"w_switch", cfg.charts.w_switch},
                   {"diag_margin", cfg.charts.diag_margin}};
    j["shooting"] = {{"residual_tol", cfg.shooting.residual_tol},
                     {"max_iterations", cfg.shooting.max_iterations},
                     {"fd_step", cfg.shooting.fd_step},
                     {"max_halvings", cfg.shooting.max_halvings},
                     {"jacobian_rel_tol", cfg.shooting.jacobian_rel_tol}};
    j["sojourn"] = {{"defining_function_scale", cfg.defining_scale}};
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["output"] = {{"path", cfg.out_path}};
    return j.dump(2);
}

}  // namespace ahm
