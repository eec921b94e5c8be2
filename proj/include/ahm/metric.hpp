#ifndef AHM_METRIC_HPP
#define AHM_METRIC_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ahm/smallvec.hpp"

namespace ahm {

// Metric in the boundary normal form g = (dx^2 + h(x,y,dy)) / x^2 on the
// half-space collar {x >= 0, y in R^n}.  h is stored through its dual form
// on covariables: h(x,y,eta) is quadratic in eta and positive definite.
//
// The built-in family is conformal,
//     h(x,y,eta) = |eta|^2 * (1 + eps * exp(-x^2/delta^2) * exp(-|y-c|^2/rho_b^2)),
// which reduces to the exact hyperbolic half-space metric at eps = 0 and
// decays to it away from the collar bump.
struct MetricModel {
    enum class Kind { ExactHyperbolic, Perturbed };

    int dim = 1;  // boundary dimension n >= 1; the space itself has dimension n+1
    Kind kind = Kind::ExactHyperbolic;
    double epsilon = 0.0;      // signed bump amplitude
    double delta = 0.5;        // collar decay width in x
    double bump_radius = 1.0;  // bump radius in y
    Vec bump_center;           // c in R^n, empty means origin

    double x_max = 10.0;  // working box
    double y_max = 20.0;

    static MetricModel hyperbolic(int n) {
        MetricModel m;
        m.dim = n;
        return m;
    }
    static MetricModel perturbed(int n, double eps, double delta = 0.5,
                                 double rho_b = 1.0, Vec center = {}) {
        MetricModel m;
        m.dim = n;
        m.kind = Kind::Perturbed;
        m.epsilon = eps;
        m.delta = delta;
        m.bump_radius = rho_b;
        m.bump_center = std::move(center);
        return m;
    }
};

// Collar bump profile exp(-x^2/delta^2) * exp(-|y-c|^2/rho_b^2).
// Templated on the scalar type so complex-step differentiation can be
// driven through it from the tests.
template <class T>
T bump_profile(const MetricModel& m, const T& x, std::span<const T> y) {
    using std::exp;
    T q = -x * x / (m.delta * m.delta);
    for (int i = 0; i < m.dim; ++i) {
        double c = i < static_cast<int>(m.bump_center.size()) ? m.bump_center[i] : 0.0;
        T d = y[i] - c;
        q -= d * d / (m.bump_radius * m.bump_radius);
    }
    return exp(q);
}

template <class T>
T conformal_factor(const MetricModel& m, const T& x, std::span<const T> y) {
    if (m.kind == MetricModel::Kind::ExactHyperbolic)
        return T(1);
    return T(1) + m.epsilon * bump_profile(m, x, y);
}

// Dual boundary form h(x,y,eta).
template <class T>
T h_eval_t(const MetricModel& m, const T& x, std::span<const T> y, std::span<const T> eta) {
    return conformal_factor(m, x, y) * norm_sq(eta);
}

double h_eval(const MetricModel& m, double x, std::span<const double> y,
              std::span<const double> eta);

// Value and first derivatives of h at one point, all closed form.
struct HDerivatives {
    double value = 0;
    double dx = 0;
    Vec dy;    // n components
    Vec deta;  // n components
};

HDerivatives h_derivatives(const MetricModel& m, double x, std::span<const double> y,
                           std::span<const double> eta);

// Allocation-free variant used by field evaluators.
void h_derivatives_into(const MetricModel& m, double x, std::span<const double> y,
                        std::span<const double> eta, double& value, double& dx,
                        std::span<double> dy, std::span<double> deta);

// Dual metric norm squared g*(x,y,xi,eta) = x^2 (xi^2 + h(x,y,eta)).
double dual_norm_sq(const MetricModel& m, double x, std::span<const double> y, double xi,
                    std::span<const double> eta);

// Grid validation: positive definiteness of h(x,y,.) with a robust margin for
// signed amplitudes, plus the degree-two Euler identity eta.d_eta h = 2h.
struct MetricReport {
    bool pass = true;
    std::string message = "ok";
    double worst_margin = 1.0;     // min over grid of robust positivity margin
    double worst_euler = 0.0;      // max relative Euler identity defect
    double worst_x = 0;            // location of the worst positivity margin
    Vec worst_y;
};

struct SampleGrid {
    Vec x_values;
    std::vector<Vec> y_values;
    static SampleGrid default_grid(const MetricModel& m);
};

MetricReport validate_metric(const MetricModel& m, const SampleGrid& grid);

}  // namespace ahm

#endif
