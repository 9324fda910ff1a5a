#pragma once

#include <vector>

#include "spdcbell/distribution.hpp"
#include "spdcbell/model.hpp"

namespace spdcbell {

/// Brute-force verification path: the state of one mode quadruple
/// (a, a_perp, b, b_perp) in a truncated Fock basis.  Everything here is a
/// test oracle for the closed-form probabilities, not a production path;
/// it is only accurate for small squeezing where the geometric amplitude
/// tail makes the truncation provably tight.
class FockState {
 public:
  explicit FockState(int n_max);

  int n_max() const { return n_max_; }
  int dim() const { return n_max_ + 1; }

  Complex& at(int na, int nap, int nb, int nbp) {
    return amp_[index(na, nap, nb, nbp)];
  }
  const Complex& at(int na, int nap, int nb, int nbp) const {
    return amp_[index(na, nap, nb, nbp)];
  }

  double norm_sq() const;
  /// Weight lost to truncation (build tail plus rotation spill).  Every
  /// probability reported from this state is exact within this bound.
  double truncation_bound() const { return lost_; }
  void add_lost(double w) { lost_ += w; }

  const std::vector<Complex>& amplitudes() const { return amp_; }
  std::vector<Complex>& amplitudes() { return amp_; }

 private:
  std::size_t index(int na, int nap, int nb, int nbp) const {
    const std::size_t d = static_cast<std::size_t>(dim());
    return ((static_cast<std::size_t>(na) * d + nap) * d + nb) * d + nbp;
  }

  int n_max_;
  std::vector<Complex> amp_;
  double lost_ = 0.0;
};

struct OracleConfig {
  int n_max = 30;
  int modes = 1;
  double max_deficit = 1e-9;
};

/// Unrotated source state for one mode quadruple:
/// amplitude(n, m, m, n) = sqrt((1-T_g^2)(1-T_gbar^2)) T_g^n (-T_gbar)^m.
/// Throws ConsistencyError when the truncation deficit exceeds max_deficit.
FockState build_state(double g, double g_bar, int n_max,
                      double max_deficit = 1e-9);

/// Re-expresses the amplitudes in the rotated (detected) mode basis via the
/// two-mode passive transformations on (a, a_perp) and (b, b_perp).
/// Norm-preserving up to truncation spill, which is added to the
/// truncation bound.
FockState rotate(const FockState& state, const MeasurementSetting& alice,
                 const MeasurementSetting& bob);

/// Direct pattern probability for a single mode quadruple: every detector
/// contributes the no-click weight (1-pdc)(1-eta)^n or its complement.
double pattern_probability(const FockState& rotated,
                           const DetectorParams& detectors,
                           ClickPattern pattern);

/// p(no click in every detector of the subset), single mode quadruple.
double subset_no_click_probability(const FockState& rotated,
                                   const DetectorParams& detectors,
                                   DetectorSubset subset);

/// Per-mode no-click trace (no dark counts); the multimode probability is
/// this to the power N.
double mode_no_click_trace(const FockState& rotated, double eta,
                           DetectorSubset subset);

/// (1-pdc)^{|subset|} * mode_trace^N: dark counts act once per detector,
/// not per mode.
double multimode_no_click(double mode_trace, int modes, double pdc,
                          int subset_size);

/// All 16 subset no-click probabilities for N independent mode quadruples.
NoClickTable oracle_no_click_table(const FockState& rotated,
                                   const DetectorParams& detectors,
                                   int modes);

/// All 16 pattern probabilities.  For one mode quadruple these come from
/// the direct click/no-click weights; for N > 1 from the no-click table by
/// inclusion-exclusion.
JointDistribution oracle_joint_distribution(const FockState& rotated,
                                            const DetectorParams& detectors,
                                            int modes);

/// All 16 per-mode no-click traces in one tensor sweep (index = subset
/// bits).  Same values as mode_no_click_trace, much cheaper in bulk.
std::array<double, 16> all_mode_traces(const FockState& rotated, double eta);

/// All 16 single-quadruple pattern probabilities in one tensor sweep
/// (index = pattern bits).
std::array<double, 16> all_pattern_probabilities(
    const FockState& rotated, const DetectorParams& detectors);

}  // namespace spdcbell
