// spdc-bell: CHSH statistics of a multimode down-conversion photon-pair
// source measured with lossy, dark-count-prone threshold detectors.
//
// Subcommands:
//   eval      evaluate S at explicit parameters (flags and/or --config file)
//   optimize  maximize S over source, settings, mode count and binning
//   curve     S_max versus detection efficiency, CSV output
//   verify    closed forms vs truncated-Fock oracle sweep
//
// Exit codes: 0 success, 1 verification/runtime failure, 2 usage error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdcbell/optimizer.hpp"
#include "spdcbell/param_file.hpp"
#include "spdcbell/verify.hpp"

namespace {

using namespace spdcbell;

std::string num9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%#.9g", v);  // keep all 9 significant digits
  return buf;
}

std::string binning_label(unsigned index) {
  std::string s = std::to_string(index);
  if (index == BinningStrategy::reference().index()) s += " (reference)";
  if (index == BinningStrategy::single_detector().index())
    s += " (single-detector)";
  return s;
}

void print_distribution(std::ostream& out, const ValidatedConfig& cfg) {
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const JointDistribution dist = joint_distribution(cfg, x, y);
      out << "distribution x=" << x << " y=" << y
          << " (A A_perp B B_perp -> p):\n";
      for (unsigned bits = 0; bits < ClickPattern::kCount; ++bits) {
        const ClickPattern pat{bits};
        out << " ";
        for (Detector d : {Detector::A, Detector::APerp, Detector::B,
                           Detector::BPerp})
          out << ' ' << (pat.clicked(d) ? 'C' : '.');
        out << "  " << num9(dist.p[bits]) << "\n";
      }
    }
  }
}

void print_source(std::ostream& out, const SourceParams& source) {
  if (const auto* fin = std::get_if<FiniteEmission>(&source.emission)) {
    out << "modes = " << fin->modes << "\n";
    out << "g = " << num9(fin->g) << "\n";
    out << "g_bar = " << num9(fin->g_bar) << "\n";
  } else {
    const auto& poi = std::get<PoissonEmission>(source.emission);
    out << "modes = poisson\n";
    out << "gamma = " << num9(poi.gamma) << "\n";
    out << "gamma_bar = " << num9(poi.gamma_bar) << "\n";
  }
}

void print_settings(std::ostream& out, const ExperimentConfig& cfg) {
  const char* names[4] = {"alpha0", "alpha1", "beta0", "beta1"};
  const char* phase_names[4] = {"phi_alpha0", "phi_alpha1", "phi_beta0",
                                "phi_beta1"};
  const MeasurementSetting settings[4] = {cfg.alice[0], cfg.alice[1],
                                          cfg.bob[0], cfg.bob[1]};
  for (int i = 0; i < 4; ++i)
    out << names[i] << " = " << num9(settings[i].angle) << "\n";
  for (int i = 0; i < 4; ++i)
    out << phase_names[i] << " = " << num9(settings[i].phase) << "\n";
}

struct EvalFlags {
  std::string config_path;
  double eta = 1.0, pdc = 0.0, g = 0.0, gbar = 0.0;
  std::string modes;
  bool has_eta = false, has_pdc = false, has_g = false, has_gbar = false;
};

SourceParams apply_modes_flag(const SourceParams& base,
                              const std::string& modes, bool has_g,
                              double g, bool has_gbar, double gbar) {
  SourceParams src = base;
  if (!modes.empty()) {
    if (modes == "poisson") {
      PoissonEmission poi;
      if (const auto* p = std::get_if<PoissonEmission>(&base.emission))
        poi = *p;
      src.emission = poi;
    } else {
      FiniteEmission fin;
      if (const auto* f = std::get_if<FiniteEmission>(&base.emission))
        fin = *f;
      try {
        std::size_t used = 0;
        fin.modes = std::stoi(modes, &used);
        if (used != modes.size()) throw std::invalid_argument(modes);
      } catch (const std::exception&) {
        throw ValidationError("modes: must be 'poisson' or a positive integer");
      }
      src.emission = fin;
    }
  }
  if (has_g || has_gbar) {
    if (auto* fin = std::get_if<FiniteEmission>(&src.emission)) {
      if (has_g) fin->g = g;
      if (has_gbar) fin->g_bar = gbar;
    } else {
      auto& poi = std::get<PoissonEmission>(src.emission);
      if (has_g) poi.gamma = g;
      if (has_gbar) poi.gamma_bar = gbar;
    }
  }
  return src;
}

int cmd_eval(const EvalFlags& flags) {
  EvalSpec spec;
  if (!flags.config_path.empty()) spec = read_param_file(flags.config_path);
  if (flags.has_eta) spec.config.detectors.eta = flags.eta;
  if (flags.has_pdc) spec.config.detectors.pdc = flags.pdc;
  spec.config.source =
      apply_modes_flag(spec.config.source, flags.modes, flags.has_g, flags.g,
                       flags.has_gbar, flags.gbar);

  const ValidatedConfig cfg = validate(spec.config);
  ChshResult result;
  if (spec.binning) {
    result = chsh(cfg, BinningStrategy::from_index(*spec.binning));
  } else {
    result = best_binning(cfg).second;
  }

  std::cout << "S = " << num9(result.s) << "\n";
  std::cout << "CH = " << num9(ch_value(result.s)) << "\n";
  std::cout << "binning = " << binning_label(result.binning.index()) << "\n";
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      std::cout << "E(" << x << "," << y
                << ") = " << num9(result.correlators[x][y]) << "\n";
  print_distribution(std::cout, cfg);
  return 0;
}

struct OptimizeFlags {
  double eta = 1.0, pdc = 0.0;
  std::string modes = "free";
  bool single_mode = false;
  bool equal_squeezing = false;
  std::uint64_t seed = 1;
  std::string out_path;
};

ModePolicy parse_mode_policy(const std::string& modes, bool single_mode) {
  if (single_mode) return FixedModesPolicy{1};
  if (modes == "free" || modes.empty()) return FreePolicy{};
  if (modes == "poisson") return PoissonLimitPolicy{};
  if (modes == "sweep") return SweepFinitePolicy{};
  try {
    std::size_t used = 0;
    const int n = std::stoi(modes, &used);
    if (used != modes.size() || n < 1) throw std::invalid_argument(modes);
    return FixedModesPolicy{n};
  } catch (const std::exception&) {
    throw ValidationError(
        "modes: must be 'free', 'poisson', 'sweep' or a positive integer");
  }
}

int cmd_optimize(const OptimizeFlags& flags) {
  OptimizationProblem problem;
  problem.detectors = {flags.eta, flags.pdc};
  problem.mode_policy = parse_mode_policy(flags.modes, flags.single_mode);
  problem.force_equal_squeezing = flags.equal_squeezing;
  problem.seed = flags.seed;

  const OptimizationResult result = optimize(problem);

  std::cout << "S = " << num9(result.s) << "\n";
  std::cout << "CH = " << num9(ch_value(result.s)) << "\n";
  print_source(std::cout, result.config.source);
  print_settings(std::cout, result.config);
  std::cout << "binning = " << binning_label(result.binning.index()) << "\n";
  std::cout << "restarts = " << result.diagnostics.restarts_run << "\n";
  std::cout << "evaluations = " << result.diagnostics.evaluations << "\n";
  std::cout << "converged = " << (result.diagnostics.converged ? "yes" : "no")
            << "\n";
  if (!result.diagnostics.converged)
    std::cout << "warning: restart budget exhausted before convergence; "
                 "best-so-far reported\n";

  if (!flags.out_path.empty()) {
    EvalSpec spec{result.config, result.binning.index()};
    write_param_file(flags.out_path, spec);
    std::cout << "parameters written to " << flags.out_path << "\n";
  }
  return 0;
}

struct CurveFlags {
  double pdc = 0.0;
  std::string grid = "0.65:1.0:200";
  std::string out_path;
  std::uint64_t seed = 1;
};

std::vector<double> parse_grid(const std::string& grid) {
  double lo = 0.0, hi = 0.0;
  int n = 0;
  if (std::sscanf(grid.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1 ||
      hi < lo)
    throw ValidationError("grid: expected a:b:n with b >= a and n >= 1");
  std::vector<double> pts(n);
  for (int i = 0; i < n; ++i)
    pts[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return pts;
}

int cmd_curve(const CurveFlags& flags) {
  const std::vector<double> grid = parse_grid(flags.grid);

  OptimizationProblem base;
  base.seed = flags.seed;

  OptimizationProblem free_problem = base;
  free_problem.mode_policy = FreePolicy{};
  OptimizationProblem single_problem = base;
  single_problem.mode_policy = FixedModesPolicy{1};
  OptimizationProblem equal_problem = single_problem;
  equal_problem.force_equal_squeezing = true;

  const auto free_curve = efficiency_curve(flags.pdc, grid, free_problem);
  const auto single_curve = efficiency_curve(flags.pdc, grid, single_problem);
  const auto equal_curve = efficiency_curve(flags.pdc, grid, equal_problem);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!flags.out_path.empty()) {
    file.open(flags.out_path);
    if (!file) {
      std::cerr << "error: cannot write " << flags.out_path << "\n";
      return 1;
    }
    out = &file;
  }

  *out << "eta,S_free,S_single_mode,S_single_mode_equal_sq,g,g_bar,"
          "N_or_limit,alpha0,alpha1,beta0,beta1,phi_alpha0,phi_alpha1,"
          "phi_beta0,phi_beta1,binning\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const OptimizationResult& free_res = free_curve[i].result;
    *out << num9(grid[i]) << ',' << num9(free_res.s) << ','
         << num9(single_curve[i].result.s) << ','
         << num9(equal_curve[i].result.s) << ',';
    if (const auto* fin =
            std::get_if<FiniteEmission>(&free_res.config.source.emission)) {
      *out << num9(fin->g) << ',' << num9(fin->g_bar) << ',' << fin->modes;
    } else {
      const auto& poi =
          std::get<PoissonEmission>(free_res.config.source.emission);
      *out << num9(poi.gamma) << ',' << num9(poi.gamma_bar) << ",poisson";
    }
    const MeasurementSetting settings[4] = {
        free_res.config.alice[0], free_res.config.alice[1],
        free_res.config.bob[0], free_res.config.bob[1]};
    for (const auto& s : settings) *out << ',' << num9(s.angle);
    for (const auto& s : settings) *out << ',' << num9(s.phase);
    *out << ',' << free_res.binning.index() << "\n";
  }
  if (out == &file) {
    file.close();
    if (!file) {
      std::cerr << "error: write failed: " << flags.out_path << "\n";
      return 1;
    }
  }
  return 0;
}

struct VerifyFlags {
  double gmax = 0.3;
  int nmax = 30;
  int samples = 24;
  std::uint64_t seed = 7;
  bool inject_sign_flip = false;
};

int cmd_verify(const VerifyFlags& flags) {
  VerifyOptions options;
  options.g_max = flags.gmax;
  options.fock_n_max = flags.nmax;
  options.samples = flags.samples;
  options.seed = flags.seed;
  if (flags.inject_sign_flip)
    options.fault = InjectedFault::CrossPairPhaseSignFlip;

  const VerifyReport report = verify_oracle_equivalence(options);
  for (const auto& fam : report.families) {
    std::printf("%-20s max |dev| = %.3e", fam.family.c_str(),
                fam.max_abs_deviation);
    if (!(fam.max_abs_deviation < report.tolerance))
      std::printf("  FAIL (%s)", fam.worst_point.c_str());
    std::printf("\n");
  }
  if (report.passed) {
    std::printf("verify: PASS (all families < %.1e)\n", report.tolerance);
    return 0;
  }
  std::printf("verify: FAIL (tolerance %.1e)\n", report.tolerance);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "CHSH statistics of a multimode SPDC pair source with "
      "non-photon-number-resolving detectors"};
  app.require_subcommand(1);

  EvalFlags ef;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate S at fixed parameters");
  eval->add_option("--config", ef.config_path, "Parameter file (key = value)");
  auto* eval_eta = eval->add_option("--eta", ef.eta, "Detection efficiency");
  auto* eval_pdc = eval->add_option("--pdc", ef.pdc, "Dark-count probability");
  auto* eval_g = eval->add_option("--g", ef.g, "Squeezing g (or gamma)");
  auto* eval_gbar =
      eval->add_option("--gbar", ef.gbar, "Squeezing g_bar (or gamma_bar)");
  eval->add_option("--modes", ef.modes, "poisson or a positive integer");

  OptimizeFlags of;
  CLI::App* opt = app.add_subcommand("optimize", "Maximize the CHSH value");
  opt->add_option("--eta", of.eta, "Detection efficiency")->required();
  opt->add_option("--pdc", of.pdc, "Dark-count probability");
  opt->add_option("--modes", of.modes,
                  "free (default), poisson, sweep, or a positive integer");
  opt->add_flag("--single-mode", of.single_mode, "Restrict to one mode pair");
  opt->add_flag("--equal-squeezing", of.equal_squeezing,
                "Force g = g_bar (maximally entangled pairs)");
  opt->add_option("--seed", of.seed, "Random seed");
  opt->add_option("--out", of.out_path, "Write the optimum as a parameter file");

  CurveFlags cf;
  CLI::App* curve =
      app.add_subcommand("curve", "S_max vs efficiency, CSV output");
  curve->add_option("--pdc", cf.pdc, "Dark-count probability");
  curve->add_option("--grid", cf.grid, "Efficiency grid a:b:n");
  curve->add_option("--out", cf.out_path, "CSV output path (default stdout)");
  curve->add_option("--seed", cf.seed, "Random seed");

  VerifyFlags vf;
  CLI::App* verify =
      app.add_subcommand("verify", "Closed forms vs truncated-Fock oracle");
  verify->add_option("--gmax", vf.gmax, "Upper bound for sampled g, g_bar");
  verify->add_option("--nmax", vf.nmax, "Fock truncation per mode");
  verify->add_option("--samples", vf.samples, "Random parameter draws");
  verify->add_option("--seed", vf.seed, "Random seed");
  verify->add_flag("--inject-sign-flip", vf.inject_sign_flip)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (eval->parsed()) {
      ef.has_eta = eval_eta->count() > 0;
      ef.has_pdc = eval_pdc->count() > 0;
      ef.has_g = eval_g->count() > 0;
      ef.has_gbar = eval_gbar->count() > 0;
      return cmd_eval(ef);
    }
    if (opt->parsed()) return cmd_optimize(of);
    if (curve->parsed()) return cmd_curve(cf);
    if (verify->parsed()) return cmd_verify(vf);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
