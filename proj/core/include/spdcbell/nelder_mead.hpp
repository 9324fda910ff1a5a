#pragma once

#include <functional>
#include <span>
#include <vector>

namespace spdcbell {

struct NelderMeadOptions {
  double diameter_tol = 1e-10;  // stop when the simplex diameter shrinks below
  int max_iterations = 4000;
  // Standard reflection / expansion / contraction / shrink coefficients.
  double reflect = 1.0;
  double expand = 2.0;
  double contract = 0.5;
  double shrink = 0.5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double fx = 0.0;
  int iterations = 0;
  long evaluations = 0;
  double simplex_diameter = 0.0;
  bool converged = false;
};

/// Downhill-simplex minimization of f.  `steps` gives the per-coordinate
/// offsets used to build the initial simplex around `start`.
NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> start, std::span<const double> steps,
    const NelderMeadOptions& options = {});

}  // namespace spdcbell
