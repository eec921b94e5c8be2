#ifndef AHM_SCATTERING_HPP
#define AHM_SCATTERING_HPP

#include <optional>
#include <string>
#include <vector>

#include "ahm/charts.hpp"
#include "ahm/flow.hpp"
#include "ahm/hyperbolic.hpp"
#include "ahm/metric.hpp"

namespace ahm {

struct ShootingConfig {
    double residual_tol = 1e-9;
    int max_iterations = 50;
    double fd_step = 1e-6;       // central-difference step for the Jacobian
    int max_halvings = 8;        // damping of the Newton step
    double jacobian_rel_tol = 1e-9;  // integrator tolerance for Jacobian traces
};

// ---- sojourn times and the scattering relation ----

struct SojournResult {
    bool hit = false;
    Vec y_end;
    double s_limit = 0;  // t + log(scale x) read at the face
    double face_normal = 0;
    Termination termination;
    GeodesicTrace trace;
};

// Trace the geodesic of a unit covector to the boundary and read the
// renormalized time at the face.  The face argument labels which factor of
// the pair this ray represents in output records.
SojournResult sojourn_forward(const MetricModel& m, const PhasePoint& zp, Side face,
                              const IntegratorConfig& icfg, const ChartConfig& ccfg,
                              double defining_scale = 1.0, bool record_samples = false);

struct ScatteringDatum {
    bool complete = false;
    Vec y;   // left endpoint
    Vec yp;  // right endpoint
    Vec left_state, right_state;  // terminal face data (x, y, xit, eta) per factor
    double s = 0;       // sojourn variable at the corner
    double S_soj = 0;   // s + 2 log R
    double R_corner = 0;
    PhasePoint z0;
    double tau = 1;
    bool normalized_input = false;  // the launch covector was rescaled to the cosphere
    double face_normal_l = 0, face_normal_r = 0;
    double max_q_drift = 0, max_sigma_drift = 0, switch_mismatch = 0;
    Termination termination;
    PairTrace pair;
};

ScatteringDatum scattering_datum(const MetricModel& m, const PhasePoint& z0,
                                 const IntegratorConfig& icfg, const ChartConfig& ccfg,
                                 DriveOrder order = DriveOrder::RightThenLeft,
                                 double defining_scale = 1.0, bool record_samples = false);

// ---- two-point distance by shooting on the exponential map ----

struct DistanceResult {
    bool converged = false;
    double r = 0;
    double residual = 0;
    int iterations = 0;
    double F = 0;  // r + log rho_L + log rho_R
    PolarBlowupPoint polar;
    double xi = 0;  // solved launch covector at z'
    Vec eta;
    std::string message;
};

DistanceResult distance_shooting(const MetricModel& m, const PhasePoint& z,
                                 const PhasePoint& zp, const IntegratorConfig& icfg,
                                 const ShootingConfig& scfg,
                                 const LaunchData* initial_guess = nullptr);

// F = r + log rho_L + log rho_R through the polar blow-down.
DistanceResult F_value(const MetricModel& m, const PhasePoint& z, const PhasePoint& zp,
                       const IntegratorConfig& icfg, const ShootingConfig& scfg);

// ---- grid scan of F with face extrapolation ----

struct ScanGrid {
    Vec rho_l;   // raw direction components, normalized per node
    Vec rho_r;
    Vec y_norm;
    Vec R_values;
    static ScanGrid default_grid();
};

struct ScanRecord {
    double rho_l, rho_r, y_norm, R;
    double r, F, residual;
    int iters;
    bool ok;
};

struct ScanSummary {
    int nodes = 0;
    int failures = 0;
    double max_abs_F = 0;
    double max_second_difference = 0;   // over the three grid axes, per R slice
    double corner_extrapolated = 0;     // Richardson limit of F along rho_L=rho_R->0
    double face_l_extrapolated = 0;     // Richardson limit along rho_L->0
    double face_r_extrapolated = 0;
    double max_R_dependence = 0;        // max |F(R) - F(R')| over node pairs
};

struct ScanResult {
    std::vector<ScanRecord> records;
    ScanSummary summary;
};

ScanResult scan_F(const MetricModel& m, const ScanGrid& grid, const IntegratorConfig& icfg,
                  const ShootingConfig& scfg, double diag_margin = 0.05, int threads = 1);

// Richardson extrapolation of f(h0/2^k), k = 0..m-1, eliminating integer
// orders 1..m-1; returns the h -> 0 limit estimate.
double richardson_limit(std::span<const double> f);

std::string scan_csv(const ScanResult& res);      // header + records
std::string scan_summary_text(const ScanResult& res);

}  // namespace ahm

#endif
