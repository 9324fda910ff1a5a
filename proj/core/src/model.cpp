#include "spdcbell/model.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace spdcbell {

namespace {

double reduce_angle(double a) {
  double r = std::fmod(a, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  if (r >= 2.0 * kPi) r = 0.0;  // fmod rounding at the seam
  return r;
}

[[noreturn]] void fail(const char* field, double value, const char* req) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s out of range: %.9g (%s)", field, value,
                req);
  throw ValidationError(buf);
}

void require(bool ok, const char* field, double value, const char* req) {
  if (!ok) fail(field, value, req);
}

SettingScalars make_setting(const MeasurementSetting& m, const char* angle_name,
                            const char* phase_name) {
  require(std::isfinite(m.angle), angle_name, m.angle, "must be finite");
  require(std::isfinite(m.phase), phase_name, m.phase, "must be finite");
  SettingScalars t;
  t.angle = reduce_angle(m.angle);
  t.phase = reduce_angle(m.phase);
  t.c = std::cos(t.angle);
  t.s = std::sin(t.angle);
  t.cc = t.c * t.c;
  t.ss = t.s * t.s;
  t.c2 = t.cc - t.ss;
  t.s2 = 2.0 * t.c * t.s;
  return t;
}

}  // namespace

SettingScalars SettingScalars::shifted_quarter() const {
  SettingScalars t = *this;
  t.angle = reduce_angle(angle + 0.5 * kPi);
  t.c = -s;
  t.s = c;
  t.cc = ss;
  t.ss = cc;
  t.c2 = -c2;
  t.s2 = -s2;
  return t;
}

SourceScalars SourceScalars::swapped() const {
  SourceScalars w = *this;
  std::swap(w.tg, w.tg_bar);
  std::swap(w.t2, w.t2_bar);
  std::swap(w.c2g, w.c2g_bar);
  std::swap(w.cg2, w.cg2_bar);
  std::swap(w.gamma, w.gamma_bar);
  return w;
}

ValidatedConfig validate(const ExperimentConfig& config) {
  ValidatedConfig v;
  v.raw_ = config;

  const DetectorParams& det = config.detectors;
  require(std::isfinite(det.eta) && det.eta >= 0.0 && det.eta <= 1.0, "eta",
          det.eta, "must be in [0, 1]");
  require(std::isfinite(det.pdc) && det.pdc >= 0.0 && det.pdc < 1.0, "pdc",
          det.pdc, "must be in [0, 1)");
  v.eta_ = det.eta;
  v.pdc_ = det.pdc;
  v.loss_ = 1.0 - det.eta;

  SourceScalars& s = v.source_;
  if (const auto* fin = std::get_if<FiniteEmission>(&config.source.emission)) {
    require(std::isfinite(fin->g) && fin->g >= 0.0, "g", fin->g,
            "must be finite and >= 0");
    require(std::isfinite(fin->g_bar) && fin->g_bar >= 0.0, "g_bar",
            fin->g_bar, "must be finite and >= 0");
    require(fin->modes >= 1, "modes", fin->modes, "must be >= 1");
    s.poisson = false;
    s.modes = fin->modes;
    s.tg = std::tanh(fin->g);
    s.tg_bar = std::tanh(fin->g_bar);
    s.t2 = s.tg * s.tg;
    s.t2_bar = s.tg_bar * s.tg_bar;
    s.c2g = std::cosh(2.0 * fin->g);
    s.c2g_bar = std::cosh(2.0 * fin->g_bar);
    const double cg = std::cosh(fin->g), cg_bar = std::cosh(fin->g_bar);
    s.cg2 = cg * cg;
    s.cg2_bar = cg_bar * cg_bar;
  } else {
    const auto& poi = std::get<PoissonEmission>(config.source.emission);
    require(std::isfinite(poi.gamma) && poi.gamma >= 0.0, "gamma", poi.gamma,
            "must be finite and >= 0");
    require(std::isfinite(poi.gamma_bar) && poi.gamma_bar >= 0.0, "gamma_bar",
            poi.gamma_bar, "must be finite and >= 0");
    s.poisson = true;
    s.gamma = poi.gamma;
    s.gamma_bar = poi.gamma_bar;
  }

  static const char* angle_names[2][2] = {{"alpha0", "phi_alpha0"},
                                          {"alpha1", "phi_alpha1"}};
  static const char* bob_names[2][2] = {{"beta0", "phi_beta0"},
                                        {"beta1", "phi_beta1"}};
  for (int i = 0; i < 2; ++i) {
    v.alice_[i] =
        make_setting(config.alice[i], angle_names[i][0], angle_names[i][1]);
    v.bob_[i] = make_setting(config.bob[i], bob_names[i][0], bob_names[i][1]);
    v.raw_.alice[i] = {v.alice_[i].angle, v.alice_[i].phase};
    v.raw_.bob[i] = {v.bob_[i].angle, v.bob_[i].phase};
  }
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      v.cos_dphi_[x][y] = std::cos(v.alice_[x].phase - v.bob_[y].phase);
  return v;
}

CouplingMatrix coupling_matrix(const SourceScalars& src,
                               const SettingScalars& a,
                               const SettingScalars& b, double eta) {
  if (src.poisson)
    throw ValidationError("coupling_matrix requires a finite-mode source");
  const double sr = std::sqrt(1.0 - eta);
  // Phase-bearing convention: S_alpha = e^{i phi_alpha} sin(alpha).
  const Complex sa = std::polar(a.s, a.phase);
  const Complex sb = std::polar(b.s, b.phase);
  const Complex sa_c = std::conj(sa);
  const Complex sb_c = std::conj(sb);
  CouplingMatrix mat;
  mat.m[0][0] = sr * (src.tg * a.c * sb_c - src.tg_bar * sa_c * b.c);
  mat.m[0][1] = sr * (-src.tg * a.c * b.c - src.tg_bar * sa_c * sb);
  mat.m[1][0] = src.tg * sa * sb_c + src.tg_bar * a.c * b.c;
  mat.m[1][1] = -src.tg * sa * b.c + src.tg_bar * a.c * sb;
  return mat;
}

namespace {

std::array<Complex, 2> orth_complement(const std::array<Complex, 2>& u) {
  return {-std::conj(u[1]), std::conj(u[0])};
}

}  // namespace

Svd2 singular_values(const CouplingMatrix& mat) {
  const Mat2& m = mat.m;
  // Hermitian H = M^dag M; eigenvalues are the squared singular values.
  const double h00 = std::norm(m[0][0]) + std::norm(m[1][0]);
  const double h11 = std::norm(m[0][1]) + std::norm(m[1][1]);
  const Complex h01 =
      std::conj(m[0][0]) * m[0][1] + std::conj(m[1][0]) * m[1][1];
  const double off = std::abs(h01);

  const double tr = h00 + h11;
  const double gap = std::hypot(h00 - h11, 2.0 * off);
  const double lam1 = 0.5 * (tr + gap);

  Svd2 out;
  out.s1 = std::sqrt(std::max(0.0, lam1));
  // s2 from |det M| / s1 avoids the cancellation in (tr - gap) / 2.
  const double absdet = std::abs(mat2::det(m));
  out.s2 = out.s1 > 0.0 ? absdet / out.s1 : 0.0;

  const double scale = std::max(h00, h11);
  std::array<Complex, 2> v1;
  if (off <= 1e-300 || gap <= 1e-15 * scale) {
    // (Near-)diagonal or (near-)degenerate H: coordinate eigenvectors,
    // ordered so the first column carries the larger eigenvalue.
    v1 = h00 >= h11 ? std::array<Complex, 2>{1.0, 0.0}
                    : std::array<Complex, 2>{0.0, 1.0};
  } else {
    // Rows of (H - lam1 I) give two candidate eigenvectors; take the
    // better-conditioned one.
    std::array<Complex, 2> cand_a = {h01, Complex(lam1 - h00)};
    std::array<Complex, 2> cand_b = {Complex(lam1 - h11), std::conj(h01)};
    const double na = std::sqrt(std::norm(cand_a[0]) + std::norm(cand_a[1]));
    const double nb = std::sqrt(std::norm(cand_b[0]) + std::norm(cand_b[1]));
    v1 = na >= nb ? cand_a : cand_b;
    const double n = na >= nb ? na : nb;
    v1[0] /= n;
    v1[1] /= n;
  }
  const std::array<Complex, 2> v2 = orth_complement(v1);

  std::array<Complex, 2> u1, u2;
  if (out.s1 <= 1e-300) {
    u1 = {1.0, 0.0};
    u2 = {0.0, 1.0};
  } else {
    u1 = {(m[0][0] * v1[0] + m[0][1] * v1[1]) / out.s1,
          (m[1][0] * v1[0] + m[1][1] * v1[1]) / out.s1};
    if (out.s2 > 1e-14 * out.s1) {
      u2 = {(m[0][0] * v2[0] + m[0][1] * v2[1]) / out.s2,
            (m[1][0] * v2[0] + m[1][1] * v2[1]) / out.s2};
    } else {
      u2 = orth_complement(u1);
    }
  }

  out.u = {{{u1[0], u2[0]}, {u1[1], u2[1]}}};
  out.v = {{{v1[0], v2[0]}, {v1[1], v2[1]}}};
  return out;
}

namespace mat2 {

Mat2 multiply(const Mat2& a, const Mat2& b) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return c;
}

Mat2 adjoint(const Mat2& a) {
  return {{{std::conj(a[0][0]), std::conj(a[1][0])},
           {std::conj(a[0][1]), std::conj(a[1][1])}}};
}

Mat2 conjugate(const Mat2& a) {
  return {{{std::conj(a[0][0]), std::conj(a[0][1])},
           {std::conj(a[1][0]), std::conj(a[1][1])}}};
}

Complex det(const Mat2& a) { return a[0][0] * a[1][1] - a[0][1] * a[1][0]; }

double max_abs_diff(const Mat2& a, const Mat2& b) {
  double m = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

}  // namespace mat2

}  // namespace spdcbell
