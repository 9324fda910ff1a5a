#include "spdcbell/verify.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <random>

#include "parallel_for.hpp"
#include "spdcbell/distribution.hpp"

namespace spdcbell {

namespace {

constexpr int kFamilies = 6;
constexpr const char* kFamilyNames[kFamilies] = {
    "p_nc_single", "p_nc_local_pair", "p_nc_cross_pair",
    "p_nc_triple", "p_nc_all",        "joint_distribution"};

int family_of_subset(unsigned bits) {
  switch (std::popcount(bits)) {
    case 1:
      return 0;
    case 2:
      return (bits == 0x3u || bits == 0xCu) ? 1 : 2;  // {A,A_perp}, {B,B_perp}
    case 3:
      return 3;
    case 4:
      return 4;
    default:
      return -1;  // empty subset is 1 by definition on both sides
  }
}

struct FamilyAcc {
  double dev = 0.0;
  std::string worst;

  void update(double d, const char* what, unsigned entry, double g,
              double g_bar, double eta, double pdc, int modes, int x, int y) {
    if (d <= dev) return;
    dev = d;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%s %u at g=%.6g g_bar=%.6g eta=%.3g pdc=%.3g N=%d x=%d y=%d",
                  what, entry, g, g_bar, eta, pdc, modes, x, y);
    worst = buf;
  }
};

struct SamplePoint {
  double g = 0.0, g_bar = 0.0;
  std::array<MeasurementSetting, 2> alice{}, bob{};
};

}  // namespace

VerifyReport verify_oracle_equivalence(const VerifyOptions& opt) {
  std::vector<SamplePoint> points(opt.samples);
  {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u_g(0.0, opt.g_max);
    std::uniform_real_distribution<double> u_angle(0.0, 2.0 * kPi);
    for (SamplePoint& pt : points) {
      pt.g = u_g(rng);
      pt.g_bar = u_g(rng);
      for (auto* side : {&pt.alice, &pt.bob})
        for (MeasurementSetting& s : *side) {
          s.angle = u_angle(rng);
          s.phase = u_angle(rng);
        }
    }
  }

  std::vector<std::array<FamilyAcc, kFamilies>> per_sample(points.size());
  detail::parallel_for(
      static_cast<int>(points.size()), opt.threads, [&](int i) {
        const SamplePoint& pt = points[i];
        auto& acc = per_sample[i];
        const FockState base =
            build_state(pt.g, pt.g_bar, opt.fock_n_max, 1e-9);

        for (int x = 0; x < 2; ++x) {
          for (int y = 0; y < 2; ++y) {
            const FockState rot = rotate(base, pt.alice[x], pt.bob[y]);
            for (double eta : opt.etas) {
              const auto traces = all_mode_traces(rot, eta);
              for (double pdc : opt.pdcs) {
                const DetectorParams det{eta, pdc};
                const auto patterns_n1 = all_pattern_probabilities(rot, det);
                for (int modes : opt.mode_counts) {
                  ExperimentConfig cfg;
                  cfg.source = SourceParams::finite(pt.g, pt.g_bar, modes);
                  cfg.detectors = det;
                  cfg.alice = pt.alice;
                  cfg.bob = pt.bob;
                  if (opt.fault == InjectedFault::CrossPairPhaseSignFlip) {
                    // Harness self-test: corrupt the closed-form side only.
                    for (MeasurementSetting& s : cfg.bob) s.phase += kPi;
                  }
                  const ValidatedConfig vcfg = validate(cfg);

                  NoClickTable oracle_table;
                  oracle_table.p[0] = 1.0;
                  for (unsigned bits = 1; bits < 16; ++bits)
                    oracle_table.p[bits] = multimode_no_click(
                        traces[bits], modes, pdc,
                        DetectorSubset{bits}.size());

                  const NoClickTable closed = no_click_table(vcfg, x, y);
                  for (unsigned bits = 1; bits < 16; ++bits) {
                    const int fam = family_of_subset(bits);
                    acc[fam].update(
                        std::abs(closed.p[bits] - oracle_table.p[bits]),
                        "subset", bits, pt.g, pt.g_bar, eta, pdc, modes, x, y);
                  }

                  const JointDistribution closed_dist =
                      joint_distribution(vcfg, x, y);
                  for (unsigned bits = 0; bits < 16; ++bits) {
                    double oracle_p;
                    if (modes == 1) {
                      oracle_p = patterns_n1[bits];
                    } else {
                      // Inclusion-exclusion over the oracle's own table.
                      const unsigned silent = ~bits & 0xFu;
                      double p = 0.0;
                      for (unsigned t = 0; t < 16; ++t) {
                        if ((t & silent) != silent) continue;
                        const int extra = std::popcount(t & ~silent);
                        p += (extra & 1) ? -oracle_table.p[t]
                                         : oracle_table.p[t];
                      }
                      oracle_p = p;
                    }
                    acc[5].update(std::abs(closed_dist.p[bits] - oracle_p),
                                  "pattern", bits, pt.g, pt.g_bar, eta, pdc,
                                  modes, x, y);
                  }
                }
              }
            }
          }
        }
      });

  VerifyReport report;
  report.tolerance = opt.tolerance;
  report.families.resize(kFamilies);
  for (int f = 0; f < kFamilies; ++f)
    report.families[f].family = kFamilyNames[f];
  for (const auto& acc : per_sample) {
    for (int f = 0; f < kFamilies; ++f) {
      if (acc[f].dev > report.families[f].max_abs_deviation) {
        report.families[f].max_abs_deviation = acc[f].dev;
        report.families[f].worst_point = acc[f].worst;
      }
    }
  }
  report.passed = true;
  for (const auto& fam : report.families)
    if (!(fam.max_abs_deviation < opt.tolerance)) report.passed = false;
  return report;
}

}  // namespace spdcbell
