#include "spdcbell/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spdcbell {

namespace {

double diameter(const std::vector<std::vector<double>>& verts) {
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < verts.size(); ++i)
    for (std::size_t j = i + 1; j < verts.size(); ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < verts[i].size(); ++k) {
        const double d = verts[i][k] - verts[j][k];
        d2 += d * d;
      }
      best = std::max(best, d2);
    }
  return std::sqrt(best);
}

}  // namespace

NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> start, std::span<const double> steps,
    const NelderMeadOptions& opt) {
  const std::size_t n = start.size();
  NelderMeadResult out;
  if (n == 0) {
    out.x = std::move(start);
    out.fx = f(out.x);
    out.evaluations = 1;
    out.converged = true;
    return out;
  }

  std::vector<std::vector<double>> verts(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) verts[i + 1][i] += steps[i];
  std::vector<double> fv(n + 1);
  long evals = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    fv[i] = f(verts[i]);
    ++evals;
  }
  std::vector<std::size_t> order(n + 1);

  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
  };

  std::vector<double> centroid(n), trial(n), trial2(n);
  int iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    sort_simplex();
    if (diameter(verts) < opt.diameter_tol) break;

    const std::size_t worst = order[n];
    const std::size_t best = order[0];
    const std::size_t second_worst = order[n - 1];

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += verts[i][k];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    for (std::size_t k = 0; k < n; ++k)
      trial[k] = centroid[k] + opt.reflect * (centroid[k] - verts[worst][k]);
    const double fr = f(trial);
    ++evals;

    if (fr < fv[best]) {
      for (std::size_t k = 0; k < n; ++k)
        trial2[k] = centroid[k] + opt.expand * (trial[k] - centroid[k]);
      const double fe = f(trial2);
      ++evals;
      if (fe < fr) {
        verts[worst] = trial2;
        fv[worst] = fe;
      } else {
        verts[worst] = trial;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second_worst]) {
      verts[worst] = trial;
      fv[worst] = fr;
      continue;
    }

    // Contraction, outside or inside depending on the reflected value.
    const bool outside = fr < fv[worst];
    if (outside) {
      for (std::size_t k = 0; k < n; ++k)
        trial2[k] = centroid[k] + opt.contract * (trial[k] - centroid[k]);
    } else {
      for (std::size_t k = 0; k < n; ++k)
        trial2[k] = centroid[k] - opt.contract * (centroid[k] - verts[worst][k]);
    }
    const double fc = f(trial2);
    ++evals;
    if (fc < std::min(fr, fv[worst])) {
      verts[worst] = trial2;
      fv[worst] = fc;
      continue;
    }

    // Shrink towards the best vertex.
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k)
        verts[i][k] = verts[best][k] + opt.shrink * (verts[i][k] - verts[best][k]);
      fv[i] = f(verts[i]);
      ++evals;
    }
  }

  sort_simplex();
  out.x = verts[order[0]];
  out.fx = fv[order[0]];
  out.iterations = iter;
  out.evaluations = evals;
  out.simplex_diameter = diameter(verts);
  out.converged = out.simplex_diameter < opt.diameter_tol;
  return out;
}

}  // namespace spdcbell
