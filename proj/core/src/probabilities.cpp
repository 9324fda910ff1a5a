#include "spdcbell/probabilities.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>

namespace spdcbell {

namespace {

// base^modes, in log space for large mode counts so that deep suppression
// underflows gracefully instead of losing precision in repeated products.
double pow_modes(double base, int modes) {
  if (modes > 100) return std::exp(static_cast<double>(modes) * std::log(base));
  double r = 1.0, b = base;
  for (int e = modes; e > 0; e >>= 1) {
    if (e & 1) r *= b;
    b *= b;
  }
  return r;
}

// p(nc_A) without the dark-count factor; the five family evaluators below
// are the single source of truth, all 16 subsets are derived from them by
// the substitution table in no_click_table().
double family_single(const SourceScalars& q, double eta,
                     const SettingScalars& th) {
  if (q.poisson)
    return std::exp(-eta * (q.gamma * th.cc + q.gamma_bar * th.ss));
  const double denom = 2.0 - eta + eta * (th.cc * q.c2g + q.c2g_bar * th.ss);
  return pow_modes(2.0 / denom, q.modes);
}

// p(nc_A & nc_A_perp) = p(nc_B & nc_B_perp), no angular dependence.
double family_local_pair(const SourceScalars& q, double eta) {
  if (q.poisson) return std::exp(-eta * (q.gamma + q.gamma_bar));
  const double d1 = 2.0 - eta + eta * q.c2g;
  const double d2 = 2.0 - eta + eta * q.c2g_bar;
  return pow_modes(4.0 / (d1 * d2), q.modes);
}

// p(nc_A & nc_B); the A_perp / B_perp variants shift the angles by pi/2.
double family_cross_pair(const SourceScalars& q, double eta,
                         const SettingScalars& ta, const SettingScalars& tb,
                         double cos_dphi) {
  if (q.poisson) {
    const double exponent =
        eta * q.gamma * (ta.cc + tb.ss - eta * ta.cc * tb.ss) +
        eta * q.gamma_bar * (ta.ss + tb.cc - eta * ta.ss * tb.cc) +
        0.5 * eta * eta * std::sqrt(q.gamma * q.gamma_bar) * ta.s2 * tb.s2 *
            cos_dphi;
    return std::exp(-exponent);
  }
  const double r = 1.0 - eta;
  const double inner =
      4.0 + 2.0 * eta * eta * q.tg * q.tg_bar * cos_dphi * ta.s2 * tb.s2 -
      q.t2_bar * (2.0 - eta + eta * ta.c2) * (2.0 - eta - eta * tb.c2) +
      q.t2 * ((2.0 - eta - eta * ta.c2) * (eta - 2.0 - eta * tb.c2) +
              4.0 * r * r * q.t2_bar);
  return pow_modes(4.0 / (q.cg2 * q.cg2_bar * inner), q.modes);
}

// p(nc_A & nc_A_perp & nc_B), a function of the non-excluded party's angle
// only (beta here); the other three triples follow by substitution.
double family_triple(const SourceScalars& q, double eta,
                     const SettingScalars& tb) {
  const double r = 1.0 - eta;
  if (q.poisson)
    return std::exp(-eta * (q.gamma * (1.0 + r * tb.ss) +
                            q.gamma_bar * (1.0 + r * tb.cc)));
  const double inner =
      q.cg2 * q.cg2_bar *
      (1.0 - 0.5 * r * q.t2_bar * (2.0 - eta - eta * tb.c2) -
       r * q.t2 * (1.0 - eta * tb.ss - r * r * q.t2_bar));
  return pow_modes(1.0 / inner, q.modes);
}

// p(no click anywhere), no angular dependence.
double family_all(const SourceScalars& q, double eta) {
  if (q.poisson)
    return std::exp(-eta * (2.0 - eta) * (q.gamma + q.gamma_bar));
  const double rr = (1.0 - eta) * (1.0 - eta);
  const double d1 = 1.0 + rr + (1.0 - rr) * q.c2g;
  const double d2 = 1.0 + rr + (1.0 - rr) * q.c2g_bar;
  return pow_modes(4.0 / (d1 * d2), q.modes);
}

double dark_factor(double pdc, int subset_size) {
  double f = 1.0;
  for (int i = 0; i < subset_size; ++i) f *= 1.0 - pdc;
  return f;
}

}  // namespace

double p_nc_single(const ValidatedConfig& cfg, Detector which, int x, int y) {
  const SourceScalars& src = cfg.source();
  double bare = 0.0;
  switch (which) {
    case Detector::A:
      bare = family_single(src, cfg.eta(), cfg.alice(x));
      break;
    case Detector::APerp:
      bare = family_single(src.swapped(), cfg.eta(), cfg.alice(x));
      break;
    case Detector::BPerp:
      bare = family_single(src, cfg.eta(), cfg.bob(y));
      break;
    case Detector::B:
      bare = family_single(src.swapped(), cfg.eta(), cfg.bob(y));
      break;
  }
#ifndef NDEBUG
  if (!src.poisson) {
    const double via_svd = p_nc_single_via_svd(cfg, which, x, y);
    assert(std::abs(via_svd - (1.0 - cfg.pdc()) * bare) < 1e-12);
  }
#endif
  return (1.0 - cfg.pdc()) * bare;
}

double p_nc_single_via_svd(const ValidatedConfig& cfg, Detector which, int x,
                           int y) {
  const SourceScalars& src = cfg.source();
  if (src.poisson)
    throw ValidationError(
        "p_nc_single_via_svd requires a finite-mode source");
  // The substitution rules map every single onto the nc_A form: swap the
  // squeezers for the perp-coupled detectors, feed the own party's setting
  // into the detected-mode slot.
  SourceScalars q = src;
  SettingScalars own = cfg.alice(x), other = cfg.bob(y);
  switch (which) {
    case Detector::A:
      break;
    case Detector::APerp:
      q = src.swapped();
      break;
    case Detector::BPerp:
      own = cfg.bob(y);
      other = cfg.alice(x);
      break;
    case Detector::B:
      q = src.swapped();
      own = cfg.bob(y);
      other = cfg.alice(x);
      break;
  }
  const Svd2 svd = singular_values(coupling_matrix(q, own, other, cfg.eta()));
  const double num = (1.0 - q.t2) * (1.0 - q.t2_bar);
  const double den = (1.0 - svd.s1 * svd.s1) * (1.0 - svd.s2 * svd.s2);
  return (1.0 - cfg.pdc()) * pow_modes(num / den, q.modes);
}

double p_nc_local_pair(const ValidatedConfig& cfg, Side side) {
  (void)side;  // identical for both parties
  return dark_factor(cfg.pdc(), 2) * family_local_pair(cfg.source(), cfg.eta());
}

double p_nc_cross_pair(const ValidatedConfig& cfg, Detector which_a,
                       Detector which_b, int x, int y) {
  if (which_a != Detector::A && which_a != Detector::APerp)
    throw ValidationError("p_nc_cross_pair: which_a must be A or A_perp");
  if (which_b != Detector::B && which_b != Detector::BPerp)
    throw ValidationError("p_nc_cross_pair: which_b must be B or B_perp");
  SettingScalars ta = cfg.alice(x);
  SettingScalars tb = cfg.bob(y);
  if (which_a == Detector::APerp) ta = ta.shifted_quarter();
  if (which_b == Detector::BPerp) tb = tb.shifted_quarter();
  return dark_factor(cfg.pdc(), 2) *
         family_cross_pair(cfg.source(), cfg.eta(), ta, tb,
                           cfg.cos_phase_diff(x, y));
}

double p_nc_triple(const ValidatedConfig& cfg, Detector excluded, int x,
                   int y) {
  const SourceScalars& src = cfg.source();
  double bare = 0.0;
  switch (excluded) {
    case Detector::BPerp:  // {A, A_perp, B}
      bare = family_triple(src, cfg.eta(), cfg.bob(y));
      break;
    case Detector::B:  // {A, A_perp, B_perp}
      bare = family_triple(src.swapped(), cfg.eta(), cfg.bob(y));
      break;
    case Detector::A:  // {A_perp, B, B_perp}
      bare = family_triple(src, cfg.eta(), cfg.alice(x));
      break;
    case Detector::APerp:  // {A, B, B_perp}
      bare = family_triple(src.swapped(), cfg.eta(), cfg.alice(x));
      break;
  }
  return dark_factor(cfg.pdc(), 3) * bare;
}

double p_nc_all(const ValidatedConfig& cfg) {
  return dark_factor(cfg.pdc(), 4) * family_all(cfg.source(), cfg.eta());
}

NoClickTable no_click_table(const ValidatedConfig& cfg, int x, int y) {
  constexpr auto A = Detector::A;
  constexpr auto Ap = Detector::APerp;
  constexpr auto B = Detector::B;
  constexpr auto Bp = Detector::BPerp;

  NoClickTable t;
  t[DetectorSubset::empty()] = 1.0;
  for (Detector d : {A, Ap, B, Bp})
    t[DetectorSubset::of(d)] = p_nc_single(cfg, d, x, y);
  t[DetectorSubset::of(A).with(Ap)] = p_nc_local_pair(cfg, Side::Alice);
  t[DetectorSubset::of(B).with(Bp)] = p_nc_local_pair(cfg, Side::Bob);
  for (Detector da : {A, Ap})
    for (Detector db : {B, Bp})
      t[DetectorSubset::of(da).with(db)] = p_nc_cross_pair(cfg, da, db, x, y);
  for (Detector excl : {A, Ap, B, Bp}) {
    DetectorSubset s = DetectorSubset::all();
    s.bits &= ~DetectorSubset::of(excl).bits;
    t[s] = p_nc_triple(cfg, excl, x, y);
  }
  t[DetectorSubset::all()] = p_nc_all(cfg);

  for (unsigned bits = 0; bits < DetectorSubset::kCount; ++bits) {
    double& p = t.p[bits];
    if (p < -1e-9 || p > 1.0 + 1e-9) {
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "no-click probability out of [0,1]: subset %u -> %.17g",
                    bits, p);
      throw ConsistencyError(buf);
    }
    p = std::min(1.0, std::max(0.0, p));
  }
  return t;
}

NoClickTable poisson_limit_table(const ValidatedConfig& cfg, int x, int y) {
  if (!cfg.source().poisson)
    throw ValidationError("poisson_limit_table requires a Poisson-limit source");
  return no_click_table(cfg, x, y);
}

}  // namespace spdcbell
