#ifndef AHM_FLOW_HPP
#define AHM_FLOW_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ahm/charts.hpp"
#include "ahm/metric.hpp"
#include "ahm/phase.hpp"
#include "ahm/rescaled.hpp"

namespace ahm {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 1.0;
    double t_max = 200.0;    // parameter cap per integration
    double event_tol = 1e-12;
    void validate() const;
};

// A field to integrate: one chart, one driven side, an orientation sign.
// Rescaled charts are integrated with orientation -1 to move toward the
// faces (the rescaled fields point inward for sigma > 0).
struct FieldSpec {
    const MetricModel* model = nullptr;
    ChartId chart = ChartId::Interior;
    Side side = Side::L;
    bool product = false;
    double orientation = 1.0;
};

int field_state_size(const FieldSpec& f);
void eval_field(const FieldSpec& f, std::span<const double> z, std::span<double> dz);

// Conserved quantities along the field: the chart's wave symbol (p, Q or q)
// and the sigma/tau slot when the chart has one (index -1 otherwise).
double invariant_q(const FieldSpec& f, std::span<const double> z);
int sigma_slot(const FieldSpec& f);

struct StopSpec {
    enum class Kind { Face, Switch, Box, Cap };
    std::string name;
    Kind kind = Kind::Face;
    // positive while running; the integration stops when the value first
    // crosses zero downward.  A stop that starts nonpositive arms itself
    // once the value turns positive.
    std::function<double(double, std::span<const double>)> value;
};

struct Termination {
    enum class Kind { FaceHit, ChartSwitch, CapReached, StepFailure };
    Kind kind = Kind::CapReached;
    std::string face;    // face or stop name
    std::string detail;
};

struct Sample {
    double param;
    ChartId chart;
    Vec state;
    double q_drift;
};

struct FlowResult {
    std::vector<Sample> samples;
    Termination termination;
    int fired = -1;  // index into the stop list, -1 if none
    double end_param = 0;
    Vec end_state;
    double max_q_drift = 0;
    double max_sigma_drift = 0;
    int steps = 0;
};

FlowResult integrate(const FieldSpec& field, std::span<const double> z0,
                     const std::vector<StopSpec>& stops, const IntegratorConfig& cfg,
                     bool record_samples = true);

// ---- stitched traces ----

// One factor of the pair: interior cotangent data, or terminal face data in
// boundary-normal coordinates (x = 0 with the shifted momentum xit).
struct FactorState {
    bool done = false;
    double x = 1;
    Vec y;
    double xi = 0;     // interior momentum while running
    Vec eta;
    double xit = 0;    // face momentum once done
    double face_normal = 0;  // inward face component of the rescaled field at the hit
};

struct GeodesicTrace {
    std::vector<FlowResult> legs;
    std::vector<ChartId> chart_chain;
    Termination termination;
    bool face_hit = false;
    Vec y_end;
    double s_limit = 0;      // t + log(scale x) read at the face
    Vec end_state;           // terminal rescaled single-factor state
    double face_normal = 0;
    double max_q_drift = 0;
    double max_sigma_drift = 0;
    double switch_mismatch = 0;  // interior-coordinate jump across handoffs
    double total_param = 0;
    bool drift_ok = true;  // conservation within 10x tolerance x elapsed parameter
};

enum class TraceDirection { Forward, Backward };

// Trace the geodesic generated by a unit covector out to the boundary:
// interior flow down to the switch height, then the boundary-rescaled flow
// to the face.  defining_scale rescales the boundary defining function,
// s = t + log(scale x).
GeodesicTrace trace_geodesic(const MetricModel& m, const PhasePoint& z,
                             TraceDirection dir, const IntegratorConfig& icfg,
                             const ChartConfig& ccfg, double defining_scale = 1.0,
                             bool record_samples = true);

struct PairTrace {
    std::vector<FlowResult> legs;
    std::vector<ChartId> chart_chain;
    Termination termination;
    bool both_hit = false;
    FactorState left, right;
    double soj_total = 0;    // t + log(scale x) + log(scale x') accumulated
    double max_q_drift = 0;
    double max_sigma_drift = 0;
    double switch_mismatch = 0;
    double total_param = 0;
    bool drift_ok = true;  // conservation within 10x tolerance x elapsed parameter
};

enum class DriveOrder { RightThenLeft, LeftThenRight };

// Joint flow-out of a conormal initial point (t=0, z=z', zeta=-zeta',
// tau = |zeta| = 1): each factor is driven to its face through the chart
// atlas, one factor at a time.
PairTrace trace_to_face(const MetricModel& m, const PhasePoint& z0, double tau,
                        const IntegratorConfig& icfg, const ChartConfig& ccfg,
                        DriveOrder order = DriveOrder::RightThenLeft,
                        double defining_scale = 1.0, bool record_samples = true);

// Packed-state construction and extraction for the product charts from a
// pair of factor states.  "flip" reports whether region 4 swapped the factor
// roles to keep its front-face coordinate positive; face_slot is the index
// of the driven factor's face defining function in the pack.
namespace pairchart {

Vec build(const MetricModel& m, ChartId chart, Side driven, const FactorState& left,
          const FactorState& right, double sigma, double s_value, bool& flip,
          int& face_slot);

void extract(const MetricModel& m, ChartId chart, Side driven, bool flip,
             std::span<const double> state, double sigma, bool at_face, FactorState& out);

}  // namespace pairchart

}  // namespace ahm

#endif
