#include "spdcbell/distribution.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"

using namespace spdcbell;

namespace {

// Independent second pass: exhaustive strategy maximum straight from the
// four joint distributions, no shared code with best_binning's scan.
double brute_force_max_abs(const ValidatedConfig& cfg) {
  JointDistribution dist[2][2];
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) dist[x][y] = joint_distribution(cfg, x, y);
  double best = 0.0;
  for (unsigned index = 0; index < kBinningStrategyCount; ++index) {
    const BinningStrategy b = BinningStrategy::from_index(index);
    double s = 0.0;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        double e = 0.0;
        for (unsigned bits = 0; bits < 16; ++bits) {
          const ClickPattern pat{bits};
          e += dist[x][y].p[bits] * b.alice[pat.alice_outcome()] *
               b.bob[pat.bob_outcome()];
        }
        s += (x == 1 && y == 1) ? -e : e;
      }
    best = std::max(best, std::abs(s));
  }
  return best;
}

}  // namespace

TEST_CASE("binning strategy indexing round-trips") {
  for (unsigned index = 0; index < kBinningStrategyCount; ++index)
    CHECK(BinningStrategy::from_index(index).index() == index);
  CHECK(BinningStrategy::reference().index() == 34);
  CHECK(BinningStrategy::single_detector().index() == 170);
  CHECK(BinningStrategy::reference().alice[1] == -1);
  CHECK(BinningStrategy::reference().alice[3] == +1);
}

TEST_CASE("vacuum distribution concentrates on the all-silent pattern") {
  ExperimentConfig cfg;
  cfg.detectors = {0.9, 0.0};
  const JointDistribution d = joint_distribution(validate(cfg), 0, 0);
  CHECK(d.p[0] == 1.0);
  for (unsigned bits = 1; bits < 16; ++bits) CHECK(d.p[bits] == 0.0);
}

TEST_CASE("worked inclusion-exclusion case for the (-1,-1) outcome") {
  auto rng = test::make_rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const ValidatedConfig v = validate(test::random_config(rng));
    const NoClickTable t = no_click_table(v, 1, 0);
    const JointDistribution d = joint_distribution(v, 1, 0);
    // (-1,-1) under the reference binning: A clicks, A_perp silent,
    // B clicks, B_perp silent -> pattern bits A|B = 0b0101.
    const double expected = t.p[0b1010] - t.p[0b1011] - t.p[0b1110] +
                            t.p[0b1111];
    CHECK(d.p[0b0101] == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("distribution is normalized, nonnegative and no-signaling") {
  auto rng = test::make_rng(32);
  for (int trial = 0; trial < 2000; ++trial) {
    const ValidatedConfig v = validate(test::random_config(rng));
    JointDistribution d[2][2];
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        d[x][y] = joint_distribution(v, x, y);
        REQUIRE(std::abs(d[x][y].sum() - 1.0) < 1e-10);
        for (double p : d[x][y].p) REQUIRE(p >= 0.0);
      }
    for (int x = 0; x < 2; ++x) {
      const auto m0 = d[x][0].alice_marginal();
      const auto m1 = d[x][1].alice_marginal();
      for (int o = 0; o < 4; ++o) REQUIRE(std::abs(m0[o] - m1[o]) < 1e-12);
    }
    for (int y = 0; y < 2; ++y) {
      const auto m0 = d[0][y].bob_marginal();
      const auto m1 = d[1][y].bob_marginal();
      for (int o = 0; o < 4; ++o) REQUIRE(std::abs(m0[o] - m1[o]) < 1e-12);
    }
  }
}

TEST_CASE("correlator basics") {
  JointDistribution all_silent;
  all_silent.p[0] = 1.0;
  CHECK(correlator(all_silent, BinningStrategy::reference()) == 1.0);

  JointDistribution uniform;
  for (double& p : uniform.p) p = 1.0 / 16.0;
  BinningStrategy balanced;
  balanced.alice = {+1, +1, -1, -1};
  balanced.bob = {+1, -1, +1, -1};
  CHECK(correlator(uniform, balanced) == doctest::Approx(0.0).scale(1.0));
  // Unbalanced maps factorize over the uniform distribution instead:
  // E = (sum alice)(sum bob) / 16.
  CHECK(correlator(uniform, BinningStrategy::reference()) ==
        doctest::Approx(2.0 * 2.0 / 16.0));
}

TEST_CASE("correlator matches a direct re-summation") {
  auto rng = test::make_rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    JointDistribution d;
    double sum = 0.0;
    for (double& p : d.p) sum += (p = u(rng));
    for (double& p : d.p) p /= sum;
    const BinningStrategy b = BinningStrategy::from_index(
        static_cast<unsigned>(rng() % kBinningStrategyCount));
    double expected = 0.0;
    for (unsigned a_out = 0; a_out < 4; ++a_out)
      for (unsigned b_out = 0; b_out < 4; ++b_out) {
        // Reassemble the pattern index from the two local outcomes.
        const unsigned bits = a_out | (b_out << 2);
        expected += d.p[bits] * b.alice[a_out] * b.bob[b_out];
      }
    CHECK(correlator(d, b) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("chsh at deterministic corners equals 2") {
  ExperimentConfig vacuum;
  CHECK(chsh(validate(vacuum), BinningStrategy::reference()).s == 2.0);

  ExperimentConfig blind;
  blind.source = SourceParams::finite(0.8, 0.5, 3);
  blind.detectors = {0.0, 0.0};
  CHECK(chsh(validate(blind), BinningStrategy::reference()).s == 2.0);

  // Saturated regime: every detector clicks almost surely.
  ExperimentConfig hot;
  hot.source = SourceParams::finite(2.0, 2.0, 5);
  hot.detectors = {1.0, 0.0};
  hot.alice = {MeasurementSetting{0.3, 0.0}, MeasurementSetting{1.0, 0.0}};
  hot.bob = {MeasurementSetting{0.7, 0.0}, MeasurementSetting{1.9, 0.0}};
  const double s = chsh(validate(hot), BinningStrategy::reference()).s;
  CHECK(s == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("best_binning equals an independent exhaustive pass") {
  auto rng = test::make_rng(34);
  for (int trial = 0; trial < 300; ++trial) {
    const ValidatedConfig v = validate(test::random_config(rng));
    const auto [binning, result] = best_binning(v);
    CHECK(std::abs(result.s) ==
          doctest::Approx(brute_force_max_abs(v)).epsilon(1e-13));
    // The winner's value must be reproduced by a plain chsh evaluation.
    CHECK(chsh(v, binning).s == result.s);
  }
}

TEST_CASE("vacuum maximum is 2, attained by the reference strategy") {
  ExperimentConfig vacuum;
  const auto [binning, result] = best_binning(validate(vacuum));
  CHECK(result.s == 2.0);
  CHECK(binning == BinningStrategy::reference());
}

TEST_CASE("binning closure: flipping one party's signs negates correlators") {
  auto rng = test::make_rng(35);
  for (int trial = 0; trial < 200; ++trial) {
    const ValidatedConfig v = validate(test::random_config(rng));
    const BinningStrategy b = BinningStrategy::from_index(
        static_cast<unsigned>(rng() % kBinningStrategyCount));
    BinningStrategy flipped = b;
    for (int& sign : flipped.alice) sign = -sign;
    const ChshResult rb = chsh(v, b);
    const ChshResult rf = chsh(v, flipped);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        CHECK(rf.correlators[x][y] == -rb.correlators[x][y]);
    CHECK(std::abs(rf.s) == std::abs(rb.s));
  }
}

TEST_CASE("quantum bound holds over all strategies") {
  auto rng = test::make_rng(36);
  const double bound = 2.0 * std::sqrt(2.0) + 1e-9;
  for (int trial = 0; trial < 2000; ++trial) {
    const ValidatedConfig v = validate(test::random_config(rng));
    REQUIRE(brute_force_max_abs(v) <= bound);
  }
}

TEST_CASE("nonconstant maximum matches the full scan whenever it wins") {
  auto rng = test::make_rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    const ValidatedConfig v = validate(test::random_config(rng));
    const double full = std::abs(best_binning(v).second.s);
    const double nonconstant = best_nonconstant_abs_chsh(v);
    CHECK(full == doctest::Approx(std::max(2.0, nonconstant)).epsilon(1e-13));
  }
}

TEST_CASE("ch value") {
  CHECK(ch_value(2.0) == 0.0);
  CHECK(ch_value(2.35) == doctest::Approx(0.0875).epsilon(1e-15));
  CHECK(ch_value(2.0 * std::sqrt(2.0)) ==
        doctest::Approx((2.0 * std::sqrt(2.0) - 2.0) / 4.0).epsilon(1e-15));
}

TEST_CASE("single-detector strategy is member 170 of the family") {
  ExperimentConfig vacuum;
  CHECK(single_detector_binning(validate(vacuum)).s == 2.0);

  auto rng = test::make_rng(38);
  for (int trial = 0; trial < 200; ++trial) {
    const ValidatedConfig v = validate(test::random_config(rng));
    const ChshResult direct = single_detector_binning(v);
    const ChshResult via_index = chsh(v, BinningStrategy::from_index(170));
    CHECK(direct.s == via_index.s);
  }
}

TEST_CASE("consistency error on pathological squeezing") {
  // Far outside the optimizer bounds (g = 8.6, tanh g within 6e-8 of 1) the
  // printed cross-pair formula loses enough precision that the Moebius
  // inversion is flagged instead of silently clamped.
  ExperimentConfig cfg;
  cfg.source = SourceParams::finite(8.5564473277460422, 2.5766065997259419e-05, 1);
  cfg.detectors = {1.0, 0.0};
  cfg.alice = {MeasurementSetting{-5.9074159162201463, 0.0},
               MeasurementSetting{6.2831852833359934, 0.0}};
  cfg.bob = {MeasurementSetting{6.9523371235326987, 0.0},
             MeasurementSetting{4.7123889516498174, 0.0}};
  CHECK_THROWS_AS(joint_distribution(validate(cfg), 1, 1), ConsistencyError);
}
