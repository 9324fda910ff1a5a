#include "spdcbell/distribution.hpp"

#include <cmath>
#include <cstdio>

namespace spdcbell {

std::array<double, 4> JointDistribution::alice_marginal() const {
  std::array<double, 4> m{};
  for (unsigned bits = 0; bits < ClickPattern::kCount; ++bits)
    m[ClickPattern{bits}.alice_outcome()] += p[bits];
  return m;
}

std::array<double, 4> JointDistribution::bob_marginal() const {
  std::array<double, 4> m{};
  for (unsigned bits = 0; bits < ClickPattern::kCount; ++bits)
    m[ClickPattern{bits}.bob_outcome()] += p[bits];
  return m;
}

double JointDistribution::sum() const {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

BinningStrategy BinningStrategy::reference() {
  BinningStrategy b;
  b.alice = {+1, -1, +1, +1};
  b.bob = {+1, -1, +1, +1};
  return b;
}

BinningStrategy BinningStrategy::single_detector() {
  BinningStrategy b;
  b.alice = {+1, -1, +1, -1};
  b.bob = {+1, -1, +1, -1};
  return b;
}

BinningStrategy BinningStrategy::from_index(unsigned index) {
  BinningStrategy b;
  for (unsigned o = 0; o < 4; ++o) {
    b.alice[o] = (index >> o) & 1u ? -1 : +1;
    b.bob[o] = (index >> (4 + o)) & 1u ? -1 : +1;
  }
  return b;
}

unsigned BinningStrategy::index() const {
  unsigned idx = 0;
  for (unsigned o = 0; o < 4; ++o) {
    if (alice[o] < 0) idx |= 1u << o;
    if (bob[o] < 0) idx |= 1u << (4 + o);
  }
  return idx;
}

JointDistribution joint_distribution(const ValidatedConfig& cfg, int x,
                                     int y) {
  const NoClickTable table = no_click_table(cfg, x, y);
  JointDistribution dist;
  for (unsigned bits = 0; bits < ClickPattern::kCount; ++bits) {
    const ClickPattern pat{bits};
    const unsigned silent = pat.silent().bits;
    const unsigned clicked = bits;
    // Moebius inversion over the 4-bit subset lattice: sum over the
    // clicked detectors' subsets u, adding them to the silent core.
    double prob = 0.0;
    unsigned u = clicked;
    while (true) {
      const int extra = std::popcount(u);
      const double term = table.p[silent | u];
      prob += (extra & 1) ? -term : term;
      if (u == 0) break;
      u = (u - 1) & clicked;
    }
    dist.p[bits] = prob;
  }

  double sum = 0.0;
  for (unsigned bits = 0; bits < ClickPattern::kCount; ++bits) {
    double& prob = dist.p[bits];
    if (prob < -1e-9) {
      char buf[96];
      std::snprintf(buf, sizeof buf,
                    "negative pattern probability: %u -> %.17g", bits, prob);
      throw ConsistencyError(buf);
    }
    if (prob < 0.0) prob = 0.0;
    sum += prob;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "pattern probabilities sum to %.17g", sum);
    throw ConsistencyError(buf);
  }
  return dist;
}

double correlator(const JointDistribution& dist,
                  const BinningStrategy& binning) {
  double e = 0.0;
  for (unsigned bits = 0; bits < ClickPattern::kCount; ++bits) {
    const ClickPattern pat{bits};
    e += dist.p[bits] * binning.alice[pat.alice_outcome()] *
         binning.bob[pat.bob_outcome()];
  }
  return e;
}

namespace {

// 4x4 matrix of local-outcome probabilities for one setting pair; the
// correlator of any binning is a signed sum over its entries.
using OutcomeMatrix = std::array<std::array<double, 4>, 4>;

OutcomeMatrix outcome_matrix(const JointDistribution& dist) {
  OutcomeMatrix q{};
  for (unsigned bits = 0; bits < ClickPattern::kCount; ++bits) {
    const ClickPattern pat{bits};
    q[pat.alice_outcome()][pat.bob_outcome()] += dist.p[bits];
  }
  return q;
}

double correlator(const OutcomeMatrix& q, const BinningStrategy& b) {
  double e = 0.0;
  for (int ao = 0; ao < 4; ++ao)
    for (int bo = 0; bo < 4; ++bo) e += b.alice[ao] * b.bob[bo] * q[ao][bo];
  return e;
}

double chsh_value(const std::array<std::array<OutcomeMatrix, 2>, 2>& q,
                  const BinningStrategy& b,
                  std::array<std::array<double, 2>, 2>* correlators) {
  double s = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const double e = correlator(q[x][y], b);
      if (correlators) (*correlators)[x][y] = e;
      s += (x == 1 && y == 1) ? -e : e;
    }
  return s;
}

}  // namespace

ChshResult chsh(const ValidatedConfig& cfg, const BinningStrategy& binning) {
  std::array<std::array<OutcomeMatrix, 2>, 2> q;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      q[x][y] = outcome_matrix(joint_distribution(cfg, x, y));
  ChshResult res;
  res.binning = binning;
  res.s = chsh_value(q, binning, &res.correlators);
  return res;
}

std::pair<BinningStrategy, ChshResult> best_binning(
    const ValidatedConfig& cfg) {
  std::array<std::array<OutcomeMatrix, 2>, 2> q;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      q[x][y] = outcome_matrix(joint_distribution(cfg, x, y));

  const unsigned ref_index = BinningStrategy::reference().index();
  BinningStrategy best = BinningStrategy::reference();
  double best_abs = std::abs(chsh_value(q, best, nullptr));
  for (unsigned index = 0; index < kBinningStrategyCount; ++index) {
    if (index == ref_index) continue;
    const BinningStrategy b = BinningStrategy::from_index(index);
    const double abs_s = std::abs(chsh_value(q, b, nullptr));
    if (abs_s > best_abs) {
      best_abs = abs_s;
      best = b;
    }
  }

  ChshResult res;
  res.binning = best;
  res.s = chsh_value(q, best, &res.correlators);
  return {best, res};
}

double best_nonconstant_abs_chsh(const ValidatedConfig& cfg) {
  std::array<std::array<OutcomeMatrix, 2>, 2> q;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      q[x][y] = outcome_matrix(joint_distribution(cfg, x, y));

  auto constant_map = [](unsigned nibble) {
    return nibble == 0x0u || nibble == 0xFu;
  };
  double best = 0.0;
  for (unsigned index = 0; index < kBinningStrategyCount; ++index) {
    if (constant_map(index & 0xFu) || constant_map(index >> 4)) continue;
    const BinningStrategy b = BinningStrategy::from_index(index);
    best = std::max(best, std::abs(chsh_value(q, b, nullptr)));
  }
  return best;
}

double ch_value(double s) { return (s - 2.0) / 4.0; }

ChshResult single_detector_binning(const ValidatedConfig& cfg) {
  return chsh(cfg, BinningStrategy::single_detector());
}

}  // namespace spdcbell
