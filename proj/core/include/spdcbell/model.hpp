#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <variant>

namespace spdcbell {

inline constexpr double kPi = 3.14159265358979323846;

/// Thrown by validate() when a parameter is outside its allowed range.
/// The message names the offending field.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an internal numerical consistency check fails.  Indicates a
/// formula or implementation bug, never bad user input.
struct ConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Finite number of independent mode quadruples, each pumped by two coherent
/// pair processes with squeezing parameters g (coupling a--b_perp) and
/// g_bar (coupling a_perp--b).
struct FiniteEmission {
  double g = 0.0;
  double g_bar = 0.0;
  int modes = 1;
};

/// Infinite-mode (Poissonian) limit at fixed per-mode-rescaled intensities
/// gamma = N tanh^2(g) and gamma_bar = N tanh^2(g_bar) as N -> infinity.
struct PoissonEmission {
  double gamma = 0.0;
  double gamma_bar = 0.0;
};

struct SourceParams {
  std::variant<FiniteEmission, PoissonEmission> emission = FiniteEmission{};

  static SourceParams finite(double g, double g_bar, int modes = 1) {
    return SourceParams{FiniteEmission{g, g_bar, modes}};
  }
  static SourceParams poisson_limit(double gamma, double gamma_bar) {
    return SourceParams{PoissonEmission{gamma, gamma_bar}};
  }
  bool is_poisson() const {
    return std::holds_alternative<PoissonEmission>(emission);
  }
};

/// Non-photon-number-resolving detector: efficiency eta, dark-count
/// probability pdc per detector per run.  One model is shared by all four
/// detectors.
struct DetectorParams {
  double eta = 1.0;
  double pdc = 0.0;
};

/// Polarization rotation applied by one party for one input choice:
/// polar angle and phase, both in radians.
struct MeasurementSetting {
  double angle = 0.0;
  double phase = 0.0;
};

struct ExperimentConfig {
  SourceParams source;
  DetectorParams detectors;
  std::array<MeasurementSetting, 2> alice{};  // x = 0, 1
  std::array<MeasurementSetting, 2> bob{};    // y = 0, 1
};

/// Trigonometric scalars of one measurement setting, cached at validation.
/// c/s are cos/sin of the angle, cc/ss their squares, c2/s2 cos/sin of the
/// doubled angle.
struct SettingScalars {
  double angle = 0.0;
  double phase = 0.0;
  double c = 1.0, s = 0.0;
  double cc = 1.0, ss = 0.0;
  double c2 = 1.0, s2 = 0.0;

  /// Same setting with the angle advanced by pi/2 (phase untouched).
  /// Exact in the cached scalars, no re-evaluation of trig functions.
  SettingScalars shifted_quarter() const;
};

/// Squeezing scalars shared by every closed-form probability.
/// For finite emission: t2 = tanh^2(g), c2g = cosh(2g), cg2 = cosh^2(g),
/// and the _bar variants for g_bar.  For the Poisson limit only gamma and
/// gamma_bar are meaningful.
struct SourceScalars {
  bool poisson = false;
  int modes = 1;
  double tg = 0.0, tg_bar = 0.0;
  double t2 = 0.0, t2_bar = 0.0;
  double c2g = 1.0, c2g_bar = 1.0;
  double cg2 = 1.0, cg2_bar = 1.0;
  double gamma = 0.0, gamma_bar = 0.0;

  /// g <-> g_bar (gamma <-> gamma_bar) swap used by the substitution rules.
  SourceScalars swapped() const;
};

/// A range-checked ExperimentConfig with all derived scalars cached.
/// Immutable; safe to share across threads.
class ValidatedConfig {
 public:
  const ExperimentConfig& raw() const { return raw_; }
  const SourceScalars& source() const { return source_; }
  double eta() const { return eta_; }
  double pdc() const { return pdc_; }
  /// R = 1 - eta.
  double loss() const { return loss_; }
  const SettingScalars& alice(int x) const { return alice_[x]; }
  const SettingScalars& bob(int y) const { return bob_[y]; }
  /// cos(phi_alpha_x - phi_beta_y), the only phase dependence of any
  /// probability.
  double cos_phase_diff(int x, int y) const { return cos_dphi_[x][y]; }

 private:
  friend ValidatedConfig validate(const ExperimentConfig&);
  ExperimentConfig raw_;
  SourceScalars source_;
  double eta_ = 1.0, pdc_ = 0.0, loss_ = 0.0;
  std::array<SettingScalars, 2> alice_{}, bob_{};
  double cos_dphi_[2][2] = {{1.0, 1.0}, {1.0, 1.0}};
};

/// Checks every range invariant and caches the derived scalars.
/// Angles are reduced to [0, 2*pi).  Throws ValidationError naming the
/// offending field.
ValidatedConfig validate(const ExperimentConfig& config);

using Complex = std::complex<double>;
using Mat2 = std::array<std::array<Complex, 2>, 2>;

/// Per-mode pair-amplitude coupling matrix M after the settings rotation,
/// with the loss factor sqrt(1-eta) absorbed into the top (detected-mode)
/// row.  Entries use the phase-bearing convention S_alpha = e^{i phi_alpha}
/// sin(alpha); the closed-form probabilities use the bare sine instead, so
/// never mix the two (see SettingScalars).
struct CouplingMatrix {
  Mat2 m{};
};

struct Svd2 {
  double s1 = 0.0, s2 = 0.0;  // singular values, s1 >= s2 >= 0
  Mat2 u{}, v{};              // m = u * diag(s1, s2) * v^dagger
};

/// Builds M for a finite-emission source.  Throws ValidationError for a
/// Poisson-limit source (M is a per-mode object; the limit has no single
/// mode).
CouplingMatrix coupling_matrix(const SourceScalars& source,
                               const SettingScalars& alice,
                               const SettingScalars& bob, double eta);

/// Closed-form SVD of a 2x2 complex matrix.  Always succeeds; the
/// reconstruction u * diag * v^dagger matches m to ~1e-14 elementwise.
Svd2 singular_values(const CouplingMatrix& m);

namespace mat2 {

Mat2 multiply(const Mat2& a, const Mat2& b);
Mat2 adjoint(const Mat2& a);
Mat2 conjugate(const Mat2& a);
Complex det(const Mat2& a);
double max_abs_diff(const Mat2& a, const Mat2& b);

}  // namespace mat2

}  // namespace spdcbell
