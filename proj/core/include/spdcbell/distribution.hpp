#pragma once

#include <array>
#include <utility>

#include "spdcbell/probabilities.hpp"

namespace spdcbell {

/// One of the 16 joint click patterns; bit per Detector, set = clicked.
struct ClickPattern {
  unsigned bits = 0;

  static constexpr unsigned kCount = 16;

  constexpr bool clicked(Detector d) const {
    return (bits >> static_cast<unsigned>(d)) & 1u;
  }
  /// The set of detectors that stayed silent.
  constexpr DetectorSubset silent() const {
    return DetectorSubset{~bits & 0xFu};
  }
  /// Alice's local outcome, 0..3: bit 0 = A clicked, bit 1 = A_perp clicked.
  constexpr unsigned alice_outcome() const { return bits & 3u; }
  constexpr unsigned bob_outcome() const { return (bits >> 2) & 3u; }

  friend constexpr bool operator==(ClickPattern, ClickPattern) = default;
};

/// Probabilities of the 16 click patterns for one setting pair (x, y).
/// Entries are clamped to >= 0 after a -1e-9 tolerance check; the sum is 1
/// within 1e-9 by construction.
struct JointDistribution {
  std::array<double, ClickPattern::kCount> p{};

  double operator[](ClickPattern pat) const { return p[pat.bits]; }
  double& operator[](ClickPattern pat) { return p[pat.bits]; }

  /// Four-outcome local marginals (index = local outcome).
  std::array<double, 4> alice_marginal() const;
  std::array<double, 4> bob_marginal() const;
  double sum() const;
};

/// Deterministic map from each party's four local click outcomes to the
/// binary results +/-1 required by CHSH.  256 joint strategies in total.
struct BinningStrategy {
  std::array<int, 4> alice{+1, +1, +1, +1};
  std::array<int, 4> bob{+1, +1, +1, +1};

  /// -1 exactly when the first detector clicks alone (A and not A_perp;
  /// same on Bob's side), +1 for every other event.
  static BinningStrategy reference();
  /// Ignores the second detector on each side: -1 whenever the first
  /// detector clicks.
  static BinningStrategy single_detector();
  /// index 0..255; low nibble = Alice map (bit o set => outcome o -> -1),
  /// high nibble = Bob map.
  static BinningStrategy from_index(unsigned index);
  unsigned index() const;

  friend bool operator==(const BinningStrategy&,
                         const BinningStrategy&) = default;
};

inline constexpr unsigned kBinningStrategyCount = 256;

struct ChshResult {
  double s = 0.0;
  std::array<std::array<double, 2>, 2> correlators{};  // E(x, y)
  BinningStrategy binning;
};

/// Full 16-outcome distribution by Moebius inversion over the no-click
/// table:  p(pattern) = sum over supersets T of the pattern's silent set of
/// (-1)^{|T| - |silent|} table[T].
JointDistribution joint_distribution(const ValidatedConfig& cfg, int x,
                                     int y);

/// E = sum_pattern p * alice_sign * bob_sign.
double correlator(const JointDistribution& dist,
                  const BinningStrategy& binning);

/// S = E(0,0) + E(0,1) + E(1,0) - E(1,1) for one fixed binning.
ChshResult chsh(const ValidatedConfig& cfg, const BinningStrategy& binning);

/// Exhaustive maximum of |S| over all 256 strategies.  Ties prefer the
/// reference strategy, then the lowest strategy index.
std::pair<BinningStrategy, ChshResult> best_binning(const ValidatedConfig& cfg);

/// Maximum |S| over the strategies whose maps are non-constant on both
/// sides.  Any constant map yields |S| <= 2 with equality on a huge flat
/// set, so the unrestricted maximum equals max(2, this value); dropping the
/// constant maps removes that plateau, which matters for optimization.
double best_nonconstant_abs_chsh(const ValidatedConfig& cfg);

/// CH = (S - 2) / 4.
double ch_value(double s);

/// S under the strategy that ignores the second detector on each side.
ChshResult single_detector_binning(const ValidatedConfig& cfg);

}  // namespace spdcbell
