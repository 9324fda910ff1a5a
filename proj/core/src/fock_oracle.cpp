#include "spdcbell/fock_oracle.hpp"

#include <cmath>
#include <cstdio>

namespace spdcbell {

namespace {

std::vector<double> factorials(int up_to) {
  std::vector<double> f(up_to + 1, 1.0);
  for (int n = 1; n <= up_to; ++n) f[n] = f[n - 1] * n;
  return f;
}

std::vector<Complex> powers(Complex base, int up_to) {
  std::vector<Complex> p(up_to + 1, Complex(1.0));
  for (int n = 1; n <= up_to; ++n) p[n] = p[n - 1] * base;
  return p;
}

// Matrix elements of the two-mode passive transformation within each
// total-photon-number block T, windowed to occupations <= n_max.
// mat[T][(j - lo) * width + (n1 - lo)] is the amplitude of |j, T-j> in the
// image of |n1, T-n1>.
struct PairRotationPlan {
  int n_max = 0;
  std::vector<int> lo, width;
  std::vector<std::vector<Complex>> mat;
};

PairRotationPlan make_plan(int n_max, const MeasurementSetting& setting) {
  // Creation-operator images of the rotation:
  //   a1^dag -> u A1^dag + v A2^dag,  a2^dag -> w A1^dag + z A2^dag.
  const double c = std::cos(setting.angle);
  const double sn = std::sin(setting.angle);
  const Complex u(c, 0.0);
  const Complex v = std::polar(sn, -setting.phase);
  const Complex w = std::polar(sn, setting.phase);
  const Complex z(-c, 0.0);

  const int t_max = 2 * n_max;
  const auto fact = factorials(t_max);
  const auto up = powers(u, t_max), vp = powers(v, t_max);
  const auto wp = powers(w, t_max), zp = powers(z, t_max);

  auto binom = [&](int n, int k) { return fact[n] / (fact[k] * fact[n - k]); };

  PairRotationPlan plan;
  plan.n_max = n_max;
  plan.lo.resize(t_max + 1);
  plan.width.resize(t_max + 1);
  plan.mat.resize(t_max + 1);
  for (int t = 0; t <= t_max; ++t) {
    const int lo = std::max(0, t - n_max);
    const int hi = std::min(t, n_max);
    const int width = hi - lo + 1;
    plan.lo[t] = lo;
    plan.width[t] = width;
    auto& m = plan.mat[t];
    m.assign(static_cast<std::size_t>(width) * width, Complex(0.0));
    for (int j = lo; j <= hi; ++j) {
      for (int n1 = lo; n1 <= hi; ++n1) {
        const int n2 = t - n1;
        Complex sum(0.0);
        const int p_lo = std::max(0, j - n2);
        const int p_hi = std::min(j, n1);
        for (int p = p_lo; p <= p_hi; ++p) {
          sum += binom(n1, p) * binom(n2, j - p) * up[p] * vp[n1 - p] *
                 wp[j - p] * zp[n2 - (j - p)];
        }
        const double scale =
            std::sqrt(fact[j] * fact[t - j] / (fact[n1] * fact[n2]));
        m[static_cast<std::size_t>(j - lo) * width + (n1 - lo)] = scale * sum;
      }
    }
  }
  return plan;
}

// Applies the plan to one pair of tensor axes with the given strides; the
// bases iterate over the remaining two axes.  Returns the weight dropped
// outside the occupation window.
double apply_pair_rotation(std::vector<Complex>& amp, int dim,
                           std::size_t stride1, std::size_t stride2,
                           const std::vector<std::size_t>& bases,
                           const PairRotationPlan& plan) {
  const int n_max = dim - 1;
  double dropped = 0.0;
  std::vector<Complex> oldv(dim), newv(dim);
  for (std::size_t base : bases) {
    for (int t = 0; t <= 2 * n_max; ++t) {
      const int lo = plan.lo[t], width = plan.width[t];
      double old_norm = 0.0;
      bool any = false;
      for (int n1 = lo; n1 < lo + width; ++n1) {
        const Complex a =
            amp[base + stride1 * static_cast<std::size_t>(n1) +
                stride2 * static_cast<std::size_t>(t - n1)];
        oldv[n1 - lo] = a;
        old_norm += std::norm(a);
        any = any || (a != Complex(0.0));
      }
      if (!any) continue;
      const auto& m = plan.mat[t];
      double new_norm = 0.0;
      for (int j = 0; j < width; ++j) {
        Complex s(0.0);
        const Complex* row = m.data() + static_cast<std::size_t>(j) * width;
        for (int k = 0; k < width; ++k) s += row[k] * oldv[k];
        newv[j] = s;
        new_norm += std::norm(s);
      }
      for (int j = 0; j < width; ++j) {
        amp[base + stride1 * static_cast<std::size_t>(j + lo) +
            stride2 * static_cast<std::size_t>(t - (j + lo))] = newv[j];
      }
      // The full block transformation is unitary; anything missing from
      // the stored window was spilled past the truncation.
      dropped += std::max(0.0, old_norm - new_norm);
    }
  }
  return dropped;
}

std::vector<double> no_click_weights(int dim, double eta, double pdc) {
  std::vector<double> w(dim);
  const double r = 1.0 - eta;
  double p = 1.0 - pdc;
  for (int n = 0; n < dim; ++n, p *= r) w[n] = p;
  return w;
}

}  // namespace

FockState::FockState(int n_max) : n_max_(n_max) {
  const std::size_t d = static_cast<std::size_t>(n_max + 1);
  amp_.assign(d * d * d * d, Complex(0.0));
}

double FockState::norm_sq() const {
  double n = 0.0;
  for (const Complex& a : amp_) n += std::norm(a);
  return n;
}

FockState build_state(double g, double g_bar, int n_max, double max_deficit) {
  if (n_max < 1) throw ValidationError("n_max must be >= 1");
  const double tg = std::tanh(g), tg_bar = std::tanh(g_bar);
  const double t2 = tg * tg, t2_bar = tg_bar * tg_bar;

  // Exact geometric tail of the truncated amplitudes.
  const double kept = (1.0 - std::pow(t2, n_max + 1)) *
                      (1.0 - std::pow(t2_bar, n_max + 1));
  const double deficit = 1.0 - kept;
  if (deficit > max_deficit) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "fock truncation deficit %.3e exceeds bound %.3e", deficit,
                  max_deficit);
    throw ConsistencyError(buf);
  }

  FockState st(n_max);
  st.add_lost(deficit);
  const double prefactor = std::sqrt((1.0 - t2) * (1.0 - t2_bar));
  double gn = 1.0;  // T_g^n
  for (int n = 0; n <= n_max; ++n, gn *= tg) {
    double gm = 1.0;  // (-T_gbar)^m
    for (int m = 0; m <= n_max; ++m, gm *= -tg_bar) {
      st.at(n, m, m, n) = prefactor * gn * gm;
    }
  }
  return st;
}

FockState rotate(const FockState& state, const MeasurementSetting& alice,
                 const MeasurementSetting& bob) {
  FockState out = state;
  const int dim = out.dim();
  const std::size_t d = static_cast<std::size_t>(dim);

  std::vector<std::size_t> bases;
  bases.reserve(d * d);

  // Alice pair: axes (n_a, n_aperp), strides (d^3, d^2); slabs over Bob.
  bases.clear();
  for (std::size_t nb = 0; nb < d; ++nb)
    for (std::size_t nbp = 0; nbp < d; ++nbp) bases.push_back(nb * d + nbp);
  const PairRotationPlan alice_plan = make_plan(state.n_max(), alice);
  double dropped = apply_pair_rotation(out.amplitudes(), dim, d * d * d, d * d,
                                       bases, alice_plan);

  // Bob pair: axes (n_b, n_bperp), strides (d, 1); slabs over Alice.
  bases.clear();
  for (std::size_t na = 0; na < d; ++na)
    for (std::size_t nap = 0; nap < d; ++nap)
      bases.push_back((na * d + nap) * d * d);
  const PairRotationPlan bob_plan = make_plan(state.n_max(), bob);
  dropped += apply_pair_rotation(out.amplitudes(), dim, d, 1, bases, bob_plan);

  out.add_lost(dropped);
  return out;
}

double pattern_probability(const FockState& rotated,
                           const DetectorParams& detectors,
                           ClickPattern pattern) {
  const int dim = rotated.dim();
  const auto wnc = no_click_weights(dim, detectors.eta, detectors.pdc);
  auto weight = [&](Detector det, int n) {
    return pattern.clicked(det) ? 1.0 - wnc[n] : wnc[n];
  };

  double prob = 0.0;
  const auto& amp = rotated.amplitudes();
  std::size_t idx = 0;
  for (int na = 0; na < dim; ++na) {
    const double wa = weight(Detector::A, na);
    for (int nap = 0; nap < dim; ++nap) {
      const double wap = weight(Detector::APerp, nap);
      for (int nb = 0; nb < dim; ++nb) {
        const double wb = weight(Detector::B, nb);
        for (int nbp = 0; nbp < dim; ++nbp, ++idx) {
          prob += std::norm(amp[idx]) * wa * wap * wb *
                  weight(Detector::BPerp, nbp);
        }
      }
    }
  }
  return prob;
}

double subset_no_click_probability(const FockState& rotated,
                                   const DetectorParams& detectors,
                                   DetectorSubset subset) {
  return multimode_no_click(mode_no_click_trace(rotated, detectors.eta, subset),
                            1, detectors.pdc, subset.size());
}

double mode_no_click_trace(const FockState& rotated, double eta,
                           DetectorSubset subset) {
  const int dim = rotated.dim();
  const auto w = no_click_weights(dim, eta, 0.0);
  auto weight = [&](Detector det, int n) {
    return subset.contains(det) ? w[n] : 1.0;
  };

  double trace = 0.0;
  const auto& amp = rotated.amplitudes();
  std::size_t idx = 0;
  for (int na = 0; na < dim; ++na) {
    const double wa = weight(Detector::A, na);
    for (int nap = 0; nap < dim; ++nap) {
      const double wap = weight(Detector::APerp, nap);
      for (int nb = 0; nb < dim; ++nb) {
        const double wb = weight(Detector::B, nb);
        for (int nbp = 0; nbp < dim; ++nbp, ++idx) {
          trace += std::norm(amp[idx]) * wa * wap * wb *
                   weight(Detector::BPerp, nbp);
        }
      }
    }
  }
  return trace;
}

double multimode_no_click(double mode_trace, int modes, double pdc,
                          int subset_size) {
  double dark = 1.0;
  for (int i = 0; i < subset_size; ++i) dark *= 1.0 - pdc;
  return dark * std::pow(mode_trace, modes);
}

NoClickTable oracle_no_click_table(const FockState& rotated,
                                   const DetectorParams& detectors,
                                   int modes) {
  NoClickTable t;
  for (unsigned bits = 0; bits < DetectorSubset::kCount; ++bits) {
    const DetectorSubset s{bits};
    t.p[bits] = multimode_no_click(mode_no_click_trace(rotated, detectors.eta, s),
                                   modes, detectors.pdc, s.size());
  }
  return t;
}

JointDistribution oracle_joint_distribution(const FockState& rotated,
                                            const DetectorParams& detectors,
                                            int modes) {
  JointDistribution dist;
  if (modes == 1) {
    // Direct route, no inclusion-exclusion involved.
    const auto probs = all_pattern_probabilities(rotated, detectors);
    for (unsigned bits = 0; bits < ClickPattern::kCount; ++bits)
      dist.p[bits] = probs[bits];
    return dist;
  }
  const NoClickTable table = oracle_no_click_table(rotated, detectors, modes);
  for (unsigned bits = 0; bits < ClickPattern::kCount; ++bits) {
    const unsigned silent = ClickPattern{bits}.silent().bits;
    double prob = 0.0;
    for (unsigned t = 0; t < DetectorSubset::kCount; ++t) {
      if ((t & silent) != silent) continue;
      const int extra = std::popcount(t & ~silent);
      prob += (extra & 1) ? -table.p[t] : table.p[t];
    }
    dist.p[bits] = std::max(0.0, prob);
  }
  return dist;
}

namespace {

// Contracts the innermost axis of a packed tensor against two weight
// vectors at once.
void contract_last(const std::vector<double>& src, int dim,
                   const std::vector<double>& w0, const std::vector<double>& w1,
                   std::vector<double>& out0, std::vector<double>& out1) {
  const std::size_t outer = src.size() / dim;
  out0.resize(outer);
  out1.resize(outer);
  for (std::size_t i = 0; i < outer; ++i) {
    const double* row = src.data() + i * dim;
    double s0 = 0.0, s1 = 0.0;
    for (int n = 0; n < dim; ++n) {
      s0 += row[n] * w0[n];
      s1 += row[n] * w1[n];
    }
    out0[i] = s0;
    out1[i] = s1;
  }
}

// Folds the four tensor axes one by one, giving all 2^4 combinations of the
// per-detector weight choices.  choice bit set for detector d selects w1[d].
// Axis order (innermost first): BPerp, B, APerp, A.
std::array<double, 16> fold_all(const FockState& st,
                                const std::array<std::vector<double>, 4>& w0,
                                const std::array<std::vector<double>, 4>& w1) {
  const int dim = st.dim();
  const auto& amp = st.amplitudes();
  std::vector<double> prob(amp.size());
  for (std::size_t i = 0; i < amp.size(); ++i) prob[i] = std::norm(amp[i]);

  static constexpr Detector kAxisOrder[4] = {Detector::BPerp, Detector::B,
                                             Detector::APerp, Detector::A};
  std::vector<std::pair<unsigned, std::vector<double>>> level;
  level.emplace_back(0u, std::move(prob));
  for (Detector det : kAxisOrder) {
    const unsigned bit = 1u << static_cast<unsigned>(det);
    std::vector<std::pair<unsigned, std::vector<double>>> next;
    next.reserve(level.size() * 2);
    for (auto& [mask, tensor] : level) {
      std::vector<double> plain, weighted;
      contract_last(tensor, dim, w0[static_cast<unsigned>(det)],
                    w1[static_cast<unsigned>(det)], plain, weighted);
      next.emplace_back(mask, std::move(plain));
      next.emplace_back(mask | bit, std::move(weighted));
    }
    level = std::move(next);
  }

  std::array<double, 16> out{};
  for (const auto& [mask, tensor] : level) out[mask] = tensor[0];
  return out;
}

}  // namespace

std::array<double, 16> all_mode_traces(const FockState& rotated, double eta) {
  const int dim = rotated.dim();
  const auto wnc = no_click_weights(dim, eta, 0.0);
  const std::vector<double> ones(dim, 1.0);
  std::array<std::vector<double>, 4> w0, w1;
  for (int d = 0; d < 4; ++d) {
    w0[d] = ones;
    w1[d] = wnc;
  }
  return fold_all(rotated, w0, w1);
}

std::array<double, 16> all_pattern_probabilities(
    const FockState& rotated, const DetectorParams& detectors) {
  const int dim = rotated.dim();
  const auto wnc = no_click_weights(dim, detectors.eta, detectors.pdc);
  std::vector<double> wc(dim);
  for (int n = 0; n < dim; ++n) wc[n] = 1.0 - wnc[n];
  std::array<std::vector<double>, 4> w0, w1;
  for (int d = 0; d < 4; ++d) {
    w0[d] = wnc;  // choice bit clear = silent
    w1[d] = wc;   // choice bit set = clicked
  }
  return fold_all(rotated, w0, w1);
}

}  // namespace spdcbell
