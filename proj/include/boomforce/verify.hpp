#pragma once

// End-to-end invariant checks behind `boomforce verify`.

#include <string>
#include <vector>

#include "boomforce/harness.hpp"

namespace boomforce {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  Fault fault = Fault::kNone;  // injected into every closed-loop scenario
};

std::vector<std::string> verify_check_names();

/// Scenario used by the closed-loop checks to realize a prescribed contact
/// stiffness: rigid contact, tip height fixed at 0.5 m so normal motion leaves
/// k_eq unchanged, no sweep, noise and stiction off.
ScenarioConfig stiffness_probe_scenario(double k_eq, double eta = 1.0);

std::vector<CheckResult> run_verification(const VerifyOptions& options = {});

}  // namespace boomforce
