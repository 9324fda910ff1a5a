#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spdcbell/fock_oracle.hpp"

namespace spdcbell {

/// Test fixture for the verification harness itself: deliberately corrupts
/// one closed-form family so the sweep must flag it.
enum class InjectedFault {
  None,
  /// Negates cos(phi_alpha - phi_beta) on the closed-form side, which hits
  /// exactly the cross-pair family.
  CrossPairPhaseSignFlip,
};

struct VerifyOptions {
  double g_max = 0.3;
  int fock_n_max = 30;
  int samples = 24;  // random (g, g_bar, settings) draws
  std::vector<double> etas = {0.0, 0.25, 0.75, 1.0};
  std::vector<double> pdcs = {0.0, 0.01};
  std::vector<int> mode_counts = {1, 2, 5, 25};
  double tolerance = 1e-8;
  std::uint64_t seed = 7;
  int threads = 0;  // 0 = hardware concurrency
  InjectedFault fault = InjectedFault::None;
};

struct FamilyDeviation {
  std::string family;
  double max_abs_deviation = 0.0;
  std::string worst_point;
};

struct VerifyReport {
  std::vector<FamilyDeviation> families;
  double tolerance = 1e-8;
  bool passed = false;
};

/// Sweeps random configurations over the option grids and compares every
/// closed-form probability (all 16 no-click subsets, grouped into their
/// five families, plus the 16-outcome distribution) against the truncated
/// Fock oracle.
VerifyReport verify_oracle_equivalence(const VerifyOptions& options);

}  // namespace spdcbell
