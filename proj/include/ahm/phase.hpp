#ifndef AHM_PHASE_HPP
#define AHM_PHASE_HPP

#include <span>

#include "ahm/metric.hpp"
#include "ahm/smallvec.hpp"

namespace ahm {

enum class Side { L, R };

// Cotangent data of one interior factor.
struct PhasePoint {
    double x = 1;
    Vec y;
    double xi = 0;
    Vec eta;
};

// Point of T*(R_t x X x X): shared (t, tau) plus two factors.
struct ProductPhasePoint {
    double t = 0;
    double tau = 1;
    PhasePoint left;
    PhasePoint right;
};

// p(z,zeta) = (1/2)(|zeta|^2_{g*} - 1); integral curves in {p = 0} are
// unit-speed geodesics.
double energy_p(const MetricModel& m, const PhasePoint& z);

// Q_L = (1/2)(tau^2 - |zeta|^2_{g*(z)}), Q_R the same on the right factor.
double symbol_Q(const MetricModel& m, Side side, const ProductPhasePoint& z);

// Templated evaluation of the one-factor wave symbol (1/2)(tau^2 - g*),
// used by two-route chart oracles.  State spans are (x, y[n], xi, eta[n]).
template <class T>
T symbol_Q_t(const MetricModel& m, const T& tau, std::span<const T> z) {
    const int n = m.dim;
    const T& x = z[0];
    auto y = z.subspan(1, n);
    const T& xi = z[1 + n];
    auto eta = z.subspan(2 + n, n);
    T g = x * x * (xi * xi + h_eval_t(m, x, y, eta));
    return 0.5 * (tau * tau - g);
}

// Hamilton vector of p on one factor packed as (x, y, xi, eta); convention
// zdot = dH/dzeta, zetadot = -dH/dz.
void field_Hp_packed(const MetricModel& m, std::span<const double> z, std::span<double> dz);

struct TangentVector {
    double t = 0, tau = 0;
    PhasePoint left;   // holds the derivative slots of the left factor
    PhasePoint right;  // and of the right factor
};

TangentVector field_Hp(const MetricModel& m, const PhasePoint& z);
TangentVector field_HQ(const MetricModel& m, Side side, const ProductPhasePoint& z);

// Product state packed as (t, tau, x, y, xi, eta, x', y', xi', eta').
void field_HQ_packed(const MetricModel& m, Side side, std::span<const double> z,
                     std::span<double> dz);

inline int interior_single_size(int n) { return 2 * n + 2; }
inline int product_size(int n) { return 4 * n + 6; }

void pack_phase_point(const PhasePoint& z, std::span<double> out);
PhasePoint unpack_phase_point(int n, std::span<const double> z);
void pack_product_point(const ProductPhasePoint& z, std::span<double> out);
ProductPhasePoint unpack_product_point(int n, std::span<const double> z);

}  // namespace ahm

#endif
