#ifndef AHM_VERIFY_HPP
#define AHM_VERIFY_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "ahm/config.hpp"

namespace ahm {

struct CriterionResult {
    std::string id;
    bool pass = false;
    double value = 0;   // measured quantity
    double budget = 0;  // bound it must satisfy
    std::string detail;
    double seconds = 0;
};

// Full acceptance suite.  Prints one line per criterion to `log` as results
// come in; returns all results.  The configured metric is validated first,
// then the fixed model criteria run with the configured numerics.
std::vector<CriterionResult> run_acceptance(const RunConfig& cfg, std::ostream& log);

bool all_pass(const std::vector<CriterionResult>& rs);

}  // namespace ahm

#endif
