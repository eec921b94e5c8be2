#ifndef AHM_CONFIG_HPP
#define AHM_CONFIG_HPP

#include <cstdint>
#include <string>

#include "ahm/charts.hpp"
#include "ahm/flow.hpp"
#include "ahm/metric.hpp"
#include "ahm/scattering.hpp"

namespace ahm {

// Run configuration for the command line tool.  Loaded from a JSON document
// with one block per subsystem; unknown keys are rejected.
struct RunConfig {
    MetricModel metric = MetricModel::hyperbolic(1);
    IntegratorConfig integrator;
    ChartConfig charts;
    ShootingConfig shooting;
    ScanGrid scan = ScanGrid::default_grid();
    double defining_scale = 1.0;
    std::uint64_t seed = 20250808;
    std::string out_path;
    int threads = 1;

    void validate() const;
};

RunConfig config_from_json_text(const std::string& text);
RunConfig load_config(const std::string& path);
std::string config_to_json_text(const RunConfig& cfg);

}  // namespace ahm

#endif
