#include "spdcbell/probabilities.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace spdcbell;

namespace {

constexpr Detector kAll[] = {Detector::A, Detector::APerp, Detector::B,
                             Detector::BPerp};

ExperimentConfig base_config(double g, double g_bar, int modes, double eta,
                             double pdc) {
  ExperimentConfig cfg;
  cfg.source = SourceParams::finite(g, g_bar, modes);
  cfg.detectors = {eta, pdc};
  return cfg;
}

}  // namespace

TEST_CASE("vacuum never clicks") {
  ExperimentConfig cfg = base_config(0.0, 0.0, 1, 0.8, 0.0);
  cfg.alice[0].angle = 0.3;
  cfg.bob[1].angle = 1.1;
  const ValidatedConfig v = validate(cfg);
  for (Detector d : kAll) CHECK(p_nc_single(v, d, 0, 1) == 1.0);
  CHECK(p_nc_local_pair(v, Side::Alice) == 1.0);
  CHECK(p_nc_cross_pair(v, Detector::A, Detector::B, 0, 1) == 1.0);
  CHECK(p_nc_triple(v, Detector::BPerp, 0, 1) == 1.0);
  CHECK(p_nc_all(v) == 1.0);
  const NoClickTable t = no_click_table(v, 0, 1);
  for (unsigned bits = 0; bits < 16; ++bits) CHECK(t.p[bits] == 1.0);
}

TEST_CASE("blind detectors leave only dark counts") {
  const ValidatedConfig v = validate(base_config(1.3, 0.6, 3, 0.0, 0.01));
  CHECK(p_nc_single(v, Detector::A, 0, 0) == doctest::Approx(0.99).epsilon(1e-14));
  CHECK(p_nc_all(v) ==
        doctest::Approx(0.99 * 0.99 * 0.99 * 0.99).epsilon(1e-14));
}

TEST_CASE("frozen oracle values for each family") {
  // Expected values computed with the truncated-Fock oracle at n_max = 30.
  {
    ExperimentConfig cfg = base_config(0.2, 0.25, 1, 0.8, 0.0);
    cfg.alice[0].angle = kPi / 8;
    CHECK(p_nc_single(validate(cfg), Detector::A, 0, 0) ==
          doctest::Approx(0.96603797373181854).epsilon(1e-10));
  }
  {
    const ValidatedConfig v = validate(base_config(0.3, 0.1, 2, 0.9, 0.0));
    CHECK(p_nc_local_pair(v, Side::Alice) ==
          doctest::Approx(0.8366938293597509).epsilon(1e-10));
  }
  {
    ExperimentConfig cfg = base_config(0.25, 0.2, 1, 0.75, 0.0);
    cfg.alice[0] = {kPi / 6, 0.4};
    cfg.bob[0] = {kPi / 5, 0.0};
    CHECK(p_nc_cross_pair(validate(cfg), Detector::A, Detector::B, 0, 0) ==
          doctest::Approx(0.92665183437927023).epsilon(1e-10));
  }
  {
    ExperimentConfig cfg = base_config(0.2, 0.3, 3, 0.85, 0.0);
    cfg.alice[0].angle = 1.234;  // must not matter for this triple
    cfg.bob[0].angle = kPi / 7;
    CHECK(p_nc_triple(validate(cfg), Detector::BPerp, 0, 0) ==
          doctest::Approx(0.69865094992189625).epsilon(1e-10));
  }
  {
    ExperimentConfig cfg = base_config(0.3, 0.25, 2, 0.7, 0.001);
    cfg.alice[0] = {0.9, 0.2};
    cfg.bob[0] = {1.7, 0.5};
    CHECK(p_nc_all(validate(cfg)) ==
          doctest::Approx(0.75659760085216909).epsilon(1e-10));
  }
}

TEST_CASE("local pair is side- and setting-independent") {
  auto rng = test::make_rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const ValidatedConfig v = validate(test::random_config(rng));
    const double alice = p_nc_local_pair(v, Side::Alice);
    CHECK(alice == p_nc_local_pair(v, Side::Bob));
    CHECK(alice >= 0.0);
    CHECK(alice <= 1.0);
  }
}

TEST_CASE("triple ignores the non-excluded party's setting") {
  ExperimentConfig cfg = base_config(0.4, 0.7, 2, 0.8, 0.01);
  cfg.bob[0].angle = 0.77;
  cfg.alice[0].angle = 0.0;
  const double at_zero = p_nc_triple(validate(cfg), Detector::BPerp, 0, 0);
  cfg.alice[0].angle = 1.1;
  const double at_other = p_nc_triple(validate(cfg), Detector::BPerp, 0, 0);
  CHECK(at_zero == at_other);
}

TEST_CASE("single depends only on the owner's setting") {
  ExperimentConfig cfg = base_config(0.5, 0.2, 4, 0.9, 0.0);
  cfg.alice[0].angle = 0.37;
  cfg.bob[0].angle = 0.1;
  const double base = p_nc_single(validate(cfg), Detector::A, 0, 0);
  cfg.bob[0] = {2.2, 0.8};
  CHECK(p_nc_single(validate(cfg), Detector::A, 0, 0) == base);
}

TEST_CASE("no-click at unit efficiency and equal squeezing is sech^4N") {
  for (double g : {0.2, 0.7, 1.4}) {
    for (int modes : {1, 3, 10}) {
      ExperimentConfig cfg = base_config(g, g, modes, 1.0, 0.02);
      const double expected = std::pow(0.98, 4) *
                              std::pow(1.0 / std::cosh(g), 4.0 * modes);
      CHECK(p_nc_all(validate(cfg)) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("cross pair reduces to (1-pdc)^2 at eta = 0") {
  auto rng = test::make_rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    ExperimentConfig cfg = test::random_config(rng);
    cfg.detectors.eta = 0.0;
    const double pdc = cfg.detectors.pdc;
    const double p = p_nc_cross_pair(validate(cfg), Detector::A, Detector::B,
                                     0, 1);
    CHECK(p == doctest::Approx((1 - pdc) * (1 - pdc)).epsilon(1e-13));
  }
}

TEST_CASE("cross pair reduces to the single-squeezer expression at g = 0") {
  auto rng = test::make_rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    ExperimentConfig cfg = test::random_config(rng);
    auto& fin = std::get<FiniteEmission>(cfg.source.emission);
    fin.g = 0.0;
    const ValidatedConfig v = validate(cfg);
    const double eta = v.eta(), r = v.loss();
    const double t_bar = std::pow(std::tanh(fin.g_bar), 2);
    const SettingScalars& a = v.alice(1);
    const SettingScalars& b = v.bob(0);
    // With one squeezer only, the joint no-click statistics follow the
    // single thermal pair coupling a_perp--b.
    const double ubar = (r * a.ss + a.cc) * (r * b.cc + b.ss);
    const double expected =
        std::pow(1.0 - v.pdc(), 2) *
        std::pow((1.0 - t_bar) / (1.0 - ubar * t_bar), fin.modes);
    const double got = p_nc_cross_pair(v, Detector::A, Detector::B, 1, 0);
    CHECK(got == doctest::Approx(expected).epsilon(1e-11));
    (void)eta;
  }
}

TEST_CASE("substitution identities close under relabeling") {
  auto rng = test::make_rng(24);
  for (int trial = 0; trial < 500; ++trial) {
    ExperimentConfig cfg = test::random_config(rng);
    ExperimentConfig swapped = cfg;
    auto& fin = std::get<FiniteEmission>(swapped.source.emission);
    std::swap(fin.g, fin.g_bar);
    ExperimentConfig shifted = swapped;
    for (auto& s : shifted.alice) s.angle += kPi / 2;

    const ValidatedConfig v = validate(cfg);
    const ValidatedConfig vs = validate(shifted);
    // p(nc_A) at (g_bar, g, alpha + pi/2) equals p(nc_A) at (g, g_bar, alpha)
    CHECK(p_nc_single(vs, Detector::A, 0, 0) ==
          doctest::Approx(p_nc_single(v, Detector::A, 0, 0)).epsilon(5e-13));
    // and equals p(nc_A_perp) at the swapped source with unshifted angles.
    CHECK(p_nc_single(validate(swapped), Detector::APerp, 0, 0) ==
          doctest::Approx(p_nc_single(vs, Detector::A, 0, 0)).epsilon(5e-13));
  }
}

TEST_CASE("every table entry is invariant under a global phase shift") {
  auto rng = test::make_rng(25);
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  for (int trial = 0; trial < 300; ++trial) {
    ExperimentConfig cfg = test::random_config(rng);
    ExperimentConfig shifted = cfg;
    const double delta = u(rng);
    for (auto& s : shifted.alice) s.phase += delta;
    for (auto& s : shifted.bob) s.phase += delta;
    const NoClickTable a = no_click_table(validate(cfg), 1, 1);
    const NoClickTable b = no_click_table(validate(shifted), 1, 1);
    for (unsigned bits = 0; bits < 16; ++bits)
      CHECK(a.p[bits] == doctest::Approx(b.p[bits]).epsilon(1e-12));
  }
}

TEST_CASE("svd route agrees with the closed form to 1e-12") {
  auto rng = test::make_rng(26);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const ValidatedConfig v = validate(test::random_config(rng));
    for (Detector d : kAll) {
      const double closed = p_nc_single(v, d, 0, 1);
      const double via_svd = p_nc_single_via_svd(v, d, 0, 1);
      worst = std::max(worst, std::abs(closed - via_svd));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("table entries stay in [0,1] and are monotone under inclusion") {
  auto rng = test::make_rng(27);
  for (int trial = 0; trial < 10000; ++trial) {
    const ValidatedConfig v = validate(test::random_config(rng));
    const NoClickTable t = no_click_table(v, trial & 1, (trial >> 1) & 1);
    CHECK(t.p[0] == 1.0);
    for (unsigned bits = 0; bits < 16; ++bits) {
      REQUIRE(t.p[bits] >= 0.0);
      REQUIRE(t.p[bits] <= 1.0);
      for (unsigned sub = bits; sub != 0; sub = (sub - 1) & bits)
        REQUIRE(t.p[bits] <= t.p[sub]);
    }
  }
}

TEST_CASE("dark counts factor out of every entry") {
  auto rng = test::make_rng(28);
  for (int trial = 0; trial < 1000; ++trial) {
    ExperimentConfig cfg = test::random_config(rng);
    const double pdc = cfg.detectors.pdc;
    ExperimentConfig clean = cfg;
    clean.detectors.pdc = 0.0;
    const NoClickTable with = no_click_table(validate(cfg), 0, 0);
    const NoClickTable without = no_click_table(validate(clean), 0, 0);
    for (unsigned bits = 0; bits < 16; ++bits) {
      const double factor = std::pow(1.0 - pdc, DetectorSubset{bits}.size());
      CHECK(with.p[bits] ==
            doctest::Approx(factor * without.p[bits]).epsilon(1e-12));
    }
  }
}

TEST_CASE("poisson limit: zero intensity table is all ones") {
  ExperimentConfig cfg;
  cfg.source = SourceParams::poisson_limit(0.0, 0.0);
  cfg.detectors = {0.9, 0.0};
  const NoClickTable t = poisson_limit_table(validate(cfg), 0, 0);
  for (unsigned bits = 0; bits < 16; ++bits) CHECK(t.p[bits] == 1.0);
}

TEST_CASE("poisson limit rejected for finite sources") {
  const ValidatedConfig v = validate(base_config(0.1, 0.1, 5, 1.0, 0.0));
  CHECK_THROWS_AS(poisson_limit_table(v, 0, 0), ValidationError);
  CHECK_THROWS_AS(
      p_nc_single_via_svd(
          validate(ExperimentConfig{SourceParams::poisson_limit(0.1, 0.1),
                                    DetectorParams{}, {}, {}}),
          Detector::A, 0, 0),
      ValidationError);
}

TEST_CASE("poisson limit is the large-N limit of the finite table") {
  auto rng = test::make_rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double gamma = 0.1 + u(rng), gamma_bar = 0.1 + u(rng);
    ExperimentConfig poi;
    poi.source = SourceParams::poisson_limit(gamma, gamma_bar);
    poi.detectors = {0.8, 0.003};
    ExperimentConfig fin = poi;
    const int n = 1000000;
    fin.source = SourceParams::finite(std::atanh(std::sqrt(gamma / n)),
                                      std::atanh(std::sqrt(gamma_bar / n)), n);
    for (auto* cfgp : {&poi, &fin})
      for (auto* side : {&cfgp->alice, &cfgp->bob})
        for (int i = 0; i < 2; ++i) {
          (*side)[i].angle = u(rng) * 2.0 * kPi;
          (*side)[i].phase = u(rng) * 2.0 * kPi;
        }
    fin.alice = poi.alice;
    fin.bob = poi.bob;
    const NoClickTable limit = no_click_table(validate(poi), 0, 1);
    const NoClickTable large = no_click_table(validate(fin), 0, 1);
    for (unsigned bits = 0; bits < 16; ++bits)
      CHECK(limit.p[bits] == doctest::Approx(large.p[bits]).epsilon(1e-5));
  }
}

TEST_CASE("poisson single no-click closed form") {
  // exp(-eta (Gamma cos^2 + Gamma_bar sin^2)) times the dark-count factor,
  // from the first-order expansion of the finite-N base.
  ExperimentConfig cfg;
  cfg.source = SourceParams::poisson_limit(0.5, 0.4);
  cfg.detectors = {0.8, 0.01};
  cfg.alice[0].angle = 0.62;
  const double expected =
      0.99 * std::exp(-0.8 * (0.5 * std::pow(std::cos(0.62), 2) +
                              0.4 * std::pow(std::sin(0.62), 2)));
  CHECK(p_nc_single(validate(cfg), Detector::A, 0, 0) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("misuse of the cross-pair selector is rejected") {
  const ValidatedConfig v = validate(base_config(0.1, 0.1, 1, 1.0, 0.0));
  CHECK_THROWS_AS(p_nc_cross_pair(v, Detector::B, Detector::B, 0, 0),
                  ValidationError);
  CHECK_THROWS_AS(p_nc_cross_pair(v, Detector::A, Detector::APerp, 0, 0),
                  ValidationError);
}
