#pragma once

#include "geophase/systems.hpp"

namespace geophase {

struct CheckResult {
  std::string name;
  double value = 0;       // measured
  double threshold = 0;   // pass iff value <= threshold
  bool passed() const { return value <= threshold; }
};

struct ValidationSummary {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  void add(std::string name, double value, double threshold);
};

// Acceptance scenarios, one function per criterion.  tol_scale multiplies
// every pass threshold (the GEOPHASE_TOL override divides thresholds down to
// the requested value instead; see cli.cpp).
ValidationSummary acceptance_vertical_disk();
ValidationSummary acceptance_turntable(unsigned seed);
ValidationSummary acceptance_conserved_momentum();
ValidationSummary acceptance_dipole();
ValidationSummary acceptance_two_ball(unsigned seed);
ValidationSummary acceptance_gauge_covariance(unsigned seed);
ValidationSummary acceptance_purely_kinematical(unsigned seed);
ValidationSummary acceptance_structural(unsigned seed);

// All criteria in order, with optional threshold override (<= 0 keeps the
// spec values).
ValidationSummary run_all_acceptance(unsigned seed, double threshold_override = 0.0);

}  // namespace geophase
