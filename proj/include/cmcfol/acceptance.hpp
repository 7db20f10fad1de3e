#pragma once

#include <string>
#include <vector>

namespace cmcfol {

struct CheckRecord {
  std::string name;
  double value = 0.0;      // measured quantity (worst case)
  double tolerance = 0.0;  // pinned threshold
  bool pass = false;
  std::string detail;
};

struct AcceptanceReport {
  std::vector<CheckRecord> checks;
  bool all_pass() const;
  std::string to_csv() const;   // deterministic; no timings
  std::string to_text() const;  // one pass/fail line per criterion
};

/// Runs every acceptance criterion at its pinned tolerance on the standard
/// desk-scale setup (torus tau = i, one cone point theta = pi/2 at (1/2, 1/2),
/// base resolution 32, four grading levels). The determinism criterion reruns
/// the entire suite and byte-compares the reports.
AcceptanceReport run_acceptance(bool with_determinism = true);

} // namespace cmcfol
