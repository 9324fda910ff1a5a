#pragma once

#include <array>
#include <bit>

#include "spdcbell/model.hpp"

namespace spdcbell {

enum class Detector : unsigned { A = 0, APerp = 1, B = 2, BPerp = 3 };
enum class Side { Alice, Bob };

constexpr const char* to_string(Detector d) {
  switch (d) {
    case Detector::A:
      return "A";
    case Detector::APerp:
      return "A_perp";
    case Detector::B:
      return "B";
    case Detector::BPerp:
      return "B_perp";
  }
  return "?";
}

/// Subset of the four detectors {A, A_perp, B, B_perp} as a 4-bit mask
/// (bit index = Detector value).
struct DetectorSubset {
  unsigned bits = 0;

  static constexpr unsigned kCount = 16;
  static constexpr DetectorSubset empty() { return {0u}; }
  static constexpr DetectorSubset all() { return {0xFu}; }
  static constexpr DetectorSubset of(Detector d) {
    return {1u << static_cast<unsigned>(d)};
  }

  constexpr bool contains(Detector d) const {
    return (bits >> static_cast<unsigned>(d)) & 1u;
  }
  constexpr DetectorSubset with(Detector d) const {
    return {bits | of(d).bits};
  }
  constexpr bool is_subset_of(DetectorSubset other) const {
    return (bits & ~other.bits) == 0;
  }
  constexpr int size() const { return std::popcount(bits & 0xFu); }

  friend constexpr bool operator==(DetectorSubset, DetectorSubset) = default;
};

/// The 16 no-click probabilities p(no click in every detector of S) for one
/// validated config and one setting pair (x, y).
struct NoClickTable {
  std::array<double, DetectorSubset::kCount> p{};

  double operator[](DetectorSubset s) const { return p[s.bits]; }
  double& operator[](DetectorSubset s) { return p[s.bits]; }
};

/// p(no click in `which`).  Depends only on the named party's own setting
/// (x for A / A_perp, y for B / B_perp) and carries one (1-pdc) factor.
double p_nc_single(const ValidatedConfig& cfg, Detector which, int x, int y);

/// Same probability through the SVD route: singular values of the
/// coupling matrix instead of the closed form.  Finite emission only; used
/// for cross-validation.
double p_nc_single_via_svd(const ValidatedConfig& cfg, Detector which, int x,
                           int y);

/// p(no click in both of one party's detectors).  Setting-independent and
/// identical for the two sides.
double p_nc_local_pair(const ValidatedConfig& cfg, Side side);

/// p(no click in one Alice-side and one Bob-side detector).  The only phase
/// dependence of the whole model enters here, through
/// cos(phi_alpha_x - phi_beta_y).
double p_nc_cross_pair(const ValidatedConfig& cfg, Detector which_a,
                       Detector which_b, int x, int y);

/// p(no click in the three detectors other than `excluded`).  Depends only
/// on the setting of the party owning the excluded detector.
double p_nc_triple(const ValidatedConfig& cfg, Detector excluded, int x,
                   int y);

/// p(no click anywhere).  Setting-independent.
double p_nc_all(const ValidatedConfig& cfg);

/// Assembles all 16 subset probabilities.  Entries are checked to lie in
/// [-1e-9, 1+1e-9] before clamping to [0, 1]; a larger excursion throws
/// ConsistencyError.
NoClickTable no_click_table(const ValidatedConfig& cfg, int x, int y);

/// The N -> infinity table at fixed per-mode-rescaled intensities.  Requires
/// a Poisson-limit source.
NoClickTable poisson_limit_table(const ValidatedConfig& cfg, int x, int y);

}  // namespace spdcbell
