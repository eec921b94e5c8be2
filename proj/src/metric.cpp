#include "ahm/metric.hpp"

#include <sstream>

namespace ahm {

double h_eval(const MetricModel& m, double x, std::span<const double> y,
              std::span<const double> eta) {
    if (x < 0)
        throw std::domain_error("h_eval: x must be nonnegative");
    return h_eval_t<double>(m, x, y, eta);
}

void h_derivatives_into(const MetricModel& m, double x, std::span<const double> y,
                        std::span<const double> eta, double& value, double& dx,
                        std::span<double> dy, std::span<double> deta) {
    double e2 = norm_sq(eta);
    if (m.kind == MetricModel::Kind::ExactHyperbolic) {
        value = e2;
        dx = 0;
        for (int i = 0; i < m.dim; ++i) {
            dy[i] = 0;
            deta[i] = 2 * eta[i];
        }
        return;
    }
    double b = bump_profile<double>(m, x, y);
    double phi = 1 + m.epsilon * b;
    value = phi * e2;
    dx = m.epsilon * b * (-2 * x / (m.delta * m.delta)) * e2;
    for (int i = 0; i < m.dim; ++i) {
        double c = i < static_cast<int>(m.bump_center.size()) ? m.bump_center[i] : 0.0;
        dy[i] = m.epsilon * b * (-2 * (y[i] - c) / (m.bump_radius * m.bump_radius)) * e2;
        deta[i] = 2 * phi * eta[i];
    }
}

HDerivatives h_derivatives(const MetricModel& m, double x, std::span<const double> y,
                           std::span<const double> eta) {
    if (x < 0)
        throw std::domain_error("h_derivatives: x must be nonnegative");
    HDerivatives d;
    d.dy.resize(m.dim);
    d.deta.resize(m.dim);
    h_derivatives_into(m, x, y, eta, d.value, d.dx, d.dy, d.deta);
    return d;
}

double dual_norm_sq(const MetricModel& m, double x, std::span<const double> y, double xi,
                    std::span<const double> eta) {
    if (x < 0)
        throw std::domain_error("dual_norm_sq: x must be nonnegative");
    return x * x * (xi * xi + h_eval_t<double>(m, x, y, eta));
}

SampleGrid SampleGrid::default_grid(const MetricModel& m) {
    SampleGrid g;
    for (double x : {0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0})
        g.x_values.push_back(x);
    // axis-aligned sweep through the bump region plus a few diagonal points
    for (double t : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) {
        Vec y(m.dim, 0.0);
        y[0] = t;
        if (!m.bump_center.empty())
            for (int i = 0; i < m.dim; ++i)
                y[i] += m.bump_center[i];
        g.y_values.push_back(y);
        if (m.dim > 1) {
            Vec yd(m.dim, t);
            g.y_values.push_back(yd);
        }
    }
    return g;
}

MetricReport validate_metric(const MetricModel& m, const SampleGrid& grid) {
    MetricReport rep;
    rep.worst_y.assign(m.dim, 0.0);
    Vec eta(m.dim, 0.0);
    Vec dy(m.dim), deta(m.dim);
    for (double x : grid.x_values) {
        for (const Vec& y : grid.y_values) {
            // The quadratic form is phi(x,y) |eta|^2.  Admissibility requires a
            // positive margin robust in the sign of the amplitude:
            //   1 - |eps| * bump(x,y) > 0.
            double b = m.kind == MetricModel::Kind::Perturbed ? bump_profile<double>(m, x, y) : 0.0;
            double margin = 1.0 - std::abs(m.epsilon) * b;
            if (margin < rep.worst_margin) {
                rep.worst_margin = margin;
                rep.worst_x = x;
                rep.worst_y = y;
            }
            // Euler identity eta.d_eta h = 2 h at a generic covector.
            for (int i = 0; i < m.dim; ++i)
                eta[i] = 0.7 + 0.3 * i + 0.1 * y[0];
            double value, dx;
            h_derivatives_into(m, x, y, eta, value, dx, dy, deta);
            double euler = dot<double>(eta, deta) - 2 * value;
            double rel = std::abs(euler) / std::max(1.0, std::abs(2 * value));
            rep.worst_euler = std::max(rep.worst_euler, rel);
        }
    }
    if (rep.worst_margin <= 0) {
        rep.pass = false;
        std::ostringstream os;
        os << "quadratic form loses robust positivity at x=" << rep.worst_x << " y=(";
        for (int i = 0; i < m.dim; ++i)
            os << rep.worst_y[i] << (i + 1 < m.dim ? "," : "");
        os << "), margin=" << rep.worst_margin;
        rep.message = os.str();
    } else if (rep.worst_euler > 1e-12) {
        rep.pass = false;
        rep.message = "Euler identity defect above 1e-12";
    }
    return rep;
}

}  // namespace ahm
