#include "spdcbell/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "parallel_for.hpp"
#include "spdcbell/nelder_mead.hpp"

namespace spdcbell {

using detail::parallel_for;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Triangle-wave fold of an unconstrained coordinate into [lo, hi]; keeps the
// objective continuous so the simplex can wander freely.
double fold(double u, double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0.0) return lo;
  double t = std::fmod(u - lo, 2.0 * span);
  if (t < 0.0) t += 2.0 * span;
  return lo + (t <= span ? t : 2.0 * span - t);
}

double score(const ValidatedConfig& cfg, OptimizeObjective objective) {
  switch (objective) {
    case OptimizeObjective::ReferenceBinning:
      return std::abs(chsh(cfg, BinningStrategy::reference()).s);
    case OptimizeObjective::SingleDetectorBinning:
      return std::abs(chsh(cfg, BinningStrategy::single_detector()).s);
    case OptimizeObjective::BestNonConstantBinning:
      break;
  }
  return best_nonconstant_abs_chsh(cfg);
}

// Maps optimizer coordinates onto ExperimentConfig and back for one mode
// instantiation (a fixed finite N or the Poisson limit).
class ParamSpace {
 public:
  ParamSpace(const OptimizationProblem& p, bool poisson, int modes)
      : poisson_(poisson),
        modes_(modes),
        equal_(p.force_equal_squeezing),
        fix_phases_(p.fix_phases),
        fix_first_phase_(p.fix_first_phase),
        pump_max_(poisson ? p.intensity_max : p.squeezing_max) {}

  int dim() const {
    const int pump = equal_ ? 1 : 2;
    const int phases = fix_phases_ ? 0 : (fix_first_phase_ ? 3 : 4);
    return pump + 4 + phases;
  }

  bool poisson() const { return poisson_; }
  int modes() const { return modes_; }
  double pump_max() const { return pump_max_; }

  double pump_scale(const std::vector<double>& v) const {
    const double p = fold(v[0], 0.0, pump_max_);
    const double pb = equal_ ? p : fold(v[1], 0.0, pump_max_);
    return std::min(p, pb);
  }

  ExperimentConfig to_config(const std::vector<double>& v,
                             const DetectorParams& det) const {
    ExperimentConfig cfg;
    cfg.detectors = det;
    int i = 0;
    const double pump = fold(v[i++], 0.0, pump_max_);
    const double pump_bar = equal_ ? pump : fold(v[i++], 0.0, pump_max_);
    cfg.source = poisson_ ? SourceParams::poisson_limit(pump, pump_bar)
                          : SourceParams::finite(pump, pump_bar, modes_);
    double angles[4];
    for (double& a : angles) a = v[i++];
    double phases[4] = {0.0, 0.0, 0.0, 0.0};
    if (!fix_phases_) {
      int k = fix_first_phase_ ? 1 : 0;
      for (; k < 4; ++k) phases[k] = v[i++];
    }
    cfg.alice = {MeasurementSetting{angles[0], phases[0]},
                 MeasurementSetting{angles[1], phases[1]}};
    cfg.bob = {MeasurementSetting{angles[2], phases[2]},
               MeasurementSetting{angles[3], phases[3]}};
    return cfg;
  }

  // Inverse of to_config as far as this layout can represent the config;
  // used to seed searches from previously found optima.
  std::vector<double> from_config(const ExperimentConfig& cfg) const {
    std::vector<double> v;
    v.reserve(dim());
    double pump = 0.0, pump_bar = 0.0;
    if (const auto* fin = std::get_if<FiniteEmission>(&cfg.source.emission)) {
      pump = fin->g;
      pump_bar = fin->g_bar;
    } else {
      const auto& poi = std::get<PoissonEmission>(cfg.source.emission);
      pump = poi.gamma;
      pump_bar = poi.gamma_bar;
    }
    v.push_back(std::min(pump, pump_max_));
    if (!equal_) v.push_back(std::min(pump_bar, pump_max_));
    for (const auto& s : cfg.alice) v.push_back(s.angle);
    for (const auto& s : cfg.bob) v.push_back(s.angle);
    if (!fix_phases_) {
      const double ph[4] = {cfg.alice[0].phase, cfg.alice[1].phase,
                            cfg.bob[0].phase, cfg.bob[1].phase};
      for (int k = fix_first_phase_ ? 1 : 0; k < 4; ++k) v.push_back(ph[k]);
    }
    return v;
  }

  std::vector<double> steps(double pump_step, double angle_step) const {
    std::vector<double> st;
    st.reserve(dim());
    st.push_back(pump_step);
    if (!equal_) st.push_back(pump_step);
    for (int k = 0; k < 4; ++k) st.push_back(angle_step);
    const int phases = dim() - (equal_ ? 1 : 2) - 4;
    for (int k = 0; k < phases; ++k) st.push_back(angle_step * 1.5);
    return st;
  }

  std::vector<double> random_point(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<double> v;
    v.reserve(dim());
    v.push_back(u01(rng) * pump_max_);
    if (!equal_) v.push_back(u01(rng) * pump_max_);
    const int rest = dim() - (equal_ ? 1 : 2);
    for (int k = 0; k < rest; ++k) v.push_back(u01(rng) * 2.0 * kPi);
    return v;
  }

  // Known good geometry (CHSH-type settings) over a spread of pump levels
  // and pump asymmetries; the strongly asymmetric entries matter close to
  // the detection threshold.
  std::vector<std::vector<double>> structured_starts() const {
    static constexpr double kAngles[2][4] = {
        {0.0, kPi / 4.0, kPi / 8.0, -kPi / 8.0},
        {0.0, kPi / 4.0, -kPi / 8.0, kPi / 8.0}};
    static constexpr double kRatios[3][2] = {{1.0, 1.15}, {1.0, 0.3},
                                             {0.3, 1.0}};
    const double scale = poisson_ ? 1.8 : 1.0;
    std::vector<std::vector<double>> starts;
    for (double level : {0.05, 0.15, 0.35, 0.7}) {
      for (const auto& ratio : kRatios) {
        for (const auto& angles : kAngles) {
          std::vector<double> v;
          v.reserve(dim());
          v.push_back(std::min(level * ratio[0] * scale, pump_max_));
          if (!equal_)
            v.push_back(std::min(level * ratio[1] * scale, pump_max_));
          for (int k = 0; k < 4; ++k) v.push_back(angles[k]);
          const int phases = dim() - (equal_ ? 1 : 2) - 4;
          for (int k = 0; k < phases; ++k) v.push_back(0.0);
          starts.push_back(std::move(v));
        }
        if (equal_) break;  // pump ratios collapse to one start
      }
    }
    return starts;
  }

 private:
  bool poisson_;
  int modes_;
  bool equal_;
  bool fix_phases_;
  bool fix_first_phase_;
  double pump_max_;
};

// Exact symmetry of the model: swapping the two squeezers while advancing
// every angle by pi/2 leaves all probabilities unchanged.  Used to report
// the canonical representative with g <= g_bar.
ExperimentConfig pump_canonical(ExperimentConfig cfg) {
  bool swap_needed = false;
  if (auto* fin = std::get_if<FiniteEmission>(&cfg.source.emission)) {
    if (fin->g > fin->g_bar) {
      std::swap(fin->g, fin->g_bar);
      swap_needed = true;
    }
  } else {
    auto& poi = std::get<PoissonEmission>(cfg.source.emission);
    if (poi.gamma > poi.gamma_bar) {
      std::swap(poi.gamma, poi.gamma_bar);
      swap_needed = true;
    }
  }
  if (swap_needed) {
    for (auto& s : cfg.alice) s.angle += 0.5 * kPi;
    for (auto& s : cfg.bob) s.angle += 0.5 * kPi;
  }
  return validate(cfg).raw();  // reduces angles to [0, 2 pi)
}

// Advancing one party's angles by pi/2 relabels that party's detectors
// (A <-> A_perp), which permutes the binning strategies without changing
// any achievable value.  Pick the orientation whose exhaustive scan is won
// by the reference strategy, so reported optima use consistent labels.
ExperimentConfig orientation_canonical(const ExperimentConfig& cfg) {
  const unsigned ref_index = BinningStrategy::reference().index();
  ExperimentConfig best = cfg;
  bool best_is_ref = false;
  double best_abs = -1.0;
  for (int alice_shift = 0; alice_shift < 2; ++alice_shift) {
    for (int bob_shift = 0; bob_shift < 2; ++bob_shift) {
      ExperimentConfig variant = cfg;
      if (alice_shift)
        for (auto& s : variant.alice) s.angle += 0.5 * kPi;
      if (bob_shift)
        for (auto& s : variant.bob) s.angle += 0.5 * kPi;
      const auto [binning, res] = best_binning(validate(variant));
      const bool is_ref = binning.index() == ref_index;
      const double abs_s = std::abs(res.s);
      if ((is_ref && !best_is_ref) ||
          (is_ref == best_is_ref && abs_s > best_abs + 1e-15)) {
        best = variant;
        best_is_ref = is_ref;
        best_abs = abs_s;
      }
    }
  }
  return validate(best).raw();
}

// Canonical comparison vector for deterministic tie-breaking.
std::vector<double> canonical_vector(const ExperimentConfig& cfg) {
  std::vector<double> v;
  if (const auto* fin = std::get_if<FiniteEmission>(&cfg.source.emission)) {
    v = {0.0, static_cast<double>(fin->modes), fin->g, fin->g_bar};
  } else {
    const auto& poi = std::get<PoissonEmission>(cfg.source.emission);
    v = {1.0, 0.0, poi.gamma, poi.gamma_bar};
  }
  for (const auto& s : cfg.alice) {
    v.push_back(s.angle);
    v.push_back(s.phase);
  }
  for (const auto& s : cfg.bob) {
    v.push_back(s.angle);
    v.push_back(s.phase);
  }
  return v;
}

struct CellCandidate {
  double abs_s = -1.0;
  ExperimentConfig config;
  std::vector<double> tie_break;
  long evaluations = 0;
  double simplex_diameter = 0.0;
  bool converged = false;
};

bool better(const CellCandidate& a, const CellCandidate& b) {
  if (a.abs_s != b.abs_s) return a.abs_s > b.abs_s;
  return a.tie_break < b.tie_break;  // deterministic under reordering
}

// Deterministic continuation: anchor the search at eta = 1 where the
// violation basin is wide, then walk eta down to the target re-polishing
// at every step.  Step sizes shrink approaching the 2/3 threshold, where
// the basin narrows and the optimal pump collapses towards vacuum.
std::vector<double> continuation_ladder(double eta_target) {
  std::vector<double> etas;
  double eta = 1.0;
  while (eta > eta_target + 1e-12) {
    double step = 0.02;
    if (eta <= 0.70) step = 0.005;
    if (eta <= 0.68) step = 0.00125;
    eta = std::max(eta_target, eta - step);
    etas.push_back(eta);
  }
  return etas;
}

struct CellSearch {
  const OptimizationProblem& problem;
  ParamSpace space;
  NelderMeadOptions nm;
  long evaluations = 0;

  CellSearch(const OptimizationProblem& p, bool poisson, int modes)
      : problem(p), space(p, poisson, modes) {
    nm.max_iterations = p.max_iterations;
  }

  std::function<double(const std::vector<double>&)> objective(
      double eta) const {
    const DetectorParams det{eta, problem.detectors.pdc};
    const OptimizeObjective obj = problem.objective;
    const ParamSpace& sp = space;
    return [sp, det, obj](const std::vector<double>& v) {
      return -score(validate(sp.to_config(v, det)), obj);
    };
  }

  NelderMeadResult run_from(const std::vector<double>& start, double eta,
                            const std::vector<double>& steps) {
    NelderMeadResult r = nelder_mead(objective(eta), start, steps, nm);
    evaluations += r.evaluations;
    return r;
  }

  // Warm walk from eta = 1 down to the target; returns the final point.
  NelderMeadResult continuation(double eta_target) {
    std::vector<double> starts_steps = space.steps(0.08, 0.15);
    NelderMeadResult cur;
    cur.fx = 1.0;  // worse than any |S| >= 0
    for (const auto& start : space.structured_starts()) {
      NelderMeadResult r = run_from(start, 1.0, starts_steps);
      if (r.fx < cur.fx) cur = r;
    }
    std::mt19937_64 jitter_rng(splitmix64(problem.seed ^ 0xC0117195ull));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double eta : continuation_ladder(eta_target)) {
      const double pump_step =
          std::max(1e-4, 0.3 * space.pump_scale(cur.x));
      const std::vector<double> steps = space.steps(pump_step, 0.02);
      NelderMeadResult best_here = run_from(cur.x, eta, steps);
      for (int j = 0; j < 2; ++j) {
        std::vector<double> start = cur.x;
        for (std::size_t k = 0; k < start.size(); ++k)
          start[k] += steps[k] * gauss(jitter_rng);
        NelderMeadResult r = run_from(start, eta, steps);
        if (r.fx < best_here.fx) best_here = r;
      }
      cur = best_here;
    }
    return cur;
  }
};

CellCandidate optimize_cell(const OptimizationProblem& p, bool poisson,
                            int modes,
                            const std::vector<std::vector<double>>& warm,
                            ConvergenceDiagnostics* diag,
                            bool include_structured = true) {
  CellSearch search(p, poisson, modes);
  const ParamSpace& space = search.space;
  const double eta = p.detectors.eta;

  std::vector<std::vector<double>> starts = warm;
  if (include_structured)
    for (auto& s : space.structured_starts()) starts.push_back(std::move(s));
  if (p.use_continuation && eta < 0.999) {
    starts.push_back(search.continuation(eta).x);
  }
  // `restarts` random multistarts on top of the warm and structured points.
  for (int i = 0; i < p.restarts; ++i) {
    std::mt19937_64 rng(splitmix64(p.seed) ^ splitmix64(0x5bd1e995u + i));
    starts.push_back(space.random_point(rng));
  }

  const std::vector<double> steps = space.steps(poisson ? 0.12 : 0.08, 0.15);
  const auto objective = search.objective(eta);

  std::vector<NelderMeadResult> runs(starts.size());
  parallel_for(static_cast<int>(starts.size()), p.threads, [&](int i) {
    runs[i] = nelder_mead(objective, starts[i], steps, search.nm);
  });

  int best_idx = 0;
  for (int i = 1; i < static_cast<int>(runs.size()); ++i) {
    if (runs[i].fx < runs[best_idx].fx) best_idx = i;
  }

  // Polish the winner with a pump-scaled tight simplex.
  const double polish_pump =
      std::max(1e-5, 0.05 * space.pump_scale(runs[best_idx].x));
  NelderMeadResult polished = search.run_from(
      runs[best_idx].x, eta, space.steps(polish_pump, 2e-3));
  const NelderMeadResult& winner =
      polished.fx < runs[best_idx].fx ? polished : runs[best_idx];

  CellCandidate cand;
  cand.config = pump_canonical(space.to_config(winner.x, p.detectors));
  cand.abs_s = -winner.fx;
  cand.tie_break = canonical_vector(cand.config);
  cand.simplex_diameter = winner.simplex_diameter;
  cand.converged = winner.converged;
  for (const auto& r : runs) cand.evaluations += r.evaluations;
  cand.evaluations = search.evaluations + cand.evaluations;

  if (diag) {
    diag->evaluations += cand.evaluations;
    diag->restarts_run += static_cast<int>(runs.size());
    diag->simplex_diameter = cand.simplex_diameter;
    diag->converged = cand.converged;
  }
  return cand;
}

std::vector<std::vector<double>> encode_hints(
    const OptimizationProblem& p, bool poisson, int modes,
    const std::vector<ExperimentConfig>& extra = {}) {
  const ParamSpace space(p, poisson, modes);
  std::vector<std::vector<double>> out;
  for (const auto* list : {&p.warm_hints, &extra}) {
    for (const ExperimentConfig& hint : *list) {
      if (hint.source.is_poisson() != poisson) continue;
      out.push_back(space.from_config(hint));
    }
  }
  return out;
}

// A finite-N optimum tracks the Poisson-limit optimum closely for large N
// (per-mode squeezing tanh^2 g = gamma / N); feed the mapped limit point in
// as a warm start.
ExperimentConfig poisson_hint_for_modes(const ExperimentConfig& poisson_opt,
                                        int modes) {
  const auto& poi = std::get<PoissonEmission>(poisson_opt.source.emission);
  ExperimentConfig cfg = poisson_opt;
  const double t = std::sqrt(poi.gamma / modes);
  const double t_bar = std::sqrt(poi.gamma_bar / modes);
  cfg.source = SourceParams::finite(std::atanh(std::min(t, 0.999999)),
                                    std::atanh(std::min(t_bar, 0.999999)),
                                    modes);
  return cfg;
}

OptimizationResult finish(const CellCandidate& best,
                          const ConvergenceDiagnostics& diag) {
  OptimizationResult out;
  out.config = orientation_canonical(best.config);
  out.diagnostics = diag;
  const auto [binning, res] = best_binning(validate(out.config));
  out.binning = binning;
  out.s = res.s;
  return out;
}

CellCandidate poisson_cell(const OptimizationProblem& p,
                           ConvergenceDiagnostics* diag) {
  return optimize_cell(p, true, 1, encode_hints(p, true, 1), diag);
}

CellCandidate run_sweep(const OptimizationProblem& p, int max_modes,
                        const CellCandidate* poisson_opt,
                        ConvergenceDiagnostics* diag) {
  OptimizationProblem cell = p;
  CellCandidate best;
  std::vector<ExperimentConfig> chain;
  for (int n = 1; n <= max_modes; ++n) {
    std::vector<ExperimentConfig> extra = chain;
    if (poisson_opt && n > 1)
      extra.push_back(poisson_hint_for_modes(poisson_opt->config, n));
    // The first cell runs the full multistart; subsequent mode counts are
    // warm-chained continuations of it.
    cell.restarts = (n == 1) ? p.restarts : std::max(6, p.restarts / 4);
    cell.use_continuation = p.use_continuation && n == 1;
    CellCandidate cand = optimize_cell(
        cell, false, n, encode_hints(p, false, n, extra), diag, n == 1);
    if (best.abs_s < 0.0 || better(cand, best)) best = cand;
    chain.clear();
    ExperimentConfig next = cand.config;
    if (auto* fin = std::get_if<FiniteEmission>(&next.source.emission))
      fin->modes = n + 1;
    chain.push_back(next);
  }
  return best;
}

}  // namespace

OptimizationResult optimize(const OptimizationProblem& problem) {
  ConvergenceDiagnostics diag;
  CellCandidate best;

  if (const auto* fixed = std::get_if<FixedModesPolicy>(&problem.mode_policy)) {
    std::vector<ExperimentConfig> extra;
    if (fixed->modes > 1) {
      // Cheap Poisson pre-solve, mapped down to the requested mode count.
      OptimizationProblem pre = problem;
      pre.restarts = std::max(8, problem.restarts / 4);
      ConvergenceDiagnostics pre_diag;
      CellCandidate limit = poisson_cell(pre, &pre_diag);
      diag.evaluations += pre_diag.evaluations;
      diag.restarts_run += pre_diag.restarts_run;
      extra.push_back(poisson_hint_for_modes(limit.config, fixed->modes));
    }
    best = optimize_cell(problem, false, fixed->modes,
                         encode_hints(problem, false, fixed->modes, extra),
                         &diag);
  } else if (std::holds_alternative<PoissonLimitPolicy>(problem.mode_policy)) {
    best = poisson_cell(problem, &diag);
  } else if (const auto* sweep =
                 std::get_if<SweepFinitePolicy>(&problem.mode_policy)) {
    OptimizationProblem pre = problem;
    pre.restarts = std::max(8, problem.restarts / 4);
    ConvergenceDiagnostics pre_diag;
    CellCandidate limit = poisson_cell(pre, &pre_diag);
    diag.evaluations += pre_diag.evaluations;
    diag.restarts_run += pre_diag.restarts_run;
    best = run_sweep(problem, sweep->max_modes, &limit, &diag);
  } else {
    const auto& free = std::get<FreePolicy>(problem.mode_policy);
    CellCandidate poisson = poisson_cell(problem, &diag);
    CellCandidate finite = run_sweep(problem, free.max_modes, &poisson, &diag);
    best = better(poisson, finite) ? poisson : finite;
  }
  return finish(best, diag);
}

ChshResult evaluate_fixed(const ExperimentConfig& config) {
  return best_binning(validate(config)).second;
}

std::vector<CurvePoint> efficiency_curve(double pdc,
                                         std::span<const double> eta_grid,
                                         OptimizationProblem problem) {
  std::vector<CurvePoint> out;
  out.reserve(eta_grid.size());
  problem.detectors.pdc = pdc;
  for (double eta : eta_grid) {
    problem.detectors.eta = eta;
    OptimizationResult res = optimize(problem);
    CurvePoint pt;
    pt.eta = eta;
    pt.result = res;
    if (!out.empty() &&
        std::abs(res.s) < std::abs(out.back().result.s) - 1e-6) {
      // The optimizer fell short of the neighboring point; retry harder.
      OptimizationProblem retry = problem;
      retry.restarts = problem.restarts * 2;
      retry.seed = splitmix64(problem.seed + out.size());
      OptimizationResult second = optimize(retry);
      if (std::abs(second.s) > std::abs(res.s)) pt.result = second;
      pt.monotonicity_flag =
          std::abs(pt.result.s) < std::abs(out.back().result.s) - 1e-6;
    }
    problem.warm_hints = {pt.result.config};
    out.push_back(std::move(pt));
  }
  return out;
}

double critical_efficiency(double pdc, const ModePolicy& mode_policy,
                           double tolerance, std::uint64_t seed,
                           double epsilon) {
  if (!(tolerance > 0.0)) throw ValidationError("tolerance must be > 0");
  const double level = 2.0 + epsilon;

  OptimizationProblem problem;
  problem.detectors.pdc = pdc;
  problem.mode_policy = mode_policy;
  problem.restarts = 24;
  problem.seed = seed;

  // Warm every probe from the nearest already-solved efficiencies.
  std::vector<std::pair<double, ExperimentConfig>> solved;
  auto s_max = [&](double eta) {
    problem.detectors.eta = eta;
    problem.warm_hints.clear();
    std::sort(solved.begin(), solved.end(),
              [eta](const auto& a, const auto& b) {
                return std::abs(a.first - eta) < std::abs(b.first - eta);
              });
    for (std::size_t i = 0; i < solved.size() && i < 3; ++i)
      problem.warm_hints.push_back(solved[i].second);
    OptimizationResult res = optimize(problem);
    solved.emplace_back(eta, res.config);
    return std::abs(res.s);
  };

  double lo = 0.5, hi = 1.0;
  if (s_max(hi) <= level)
    throw BracketError("critical_efficiency: no violation at eta = 1");
  while (s_max(lo) > level) {
    lo *= 0.75;
    if (lo < 0.02)
      throw BracketError("critical_efficiency: violation persists at eta -> 0");
  }

  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (s_max(mid) > level ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace spdcbell
