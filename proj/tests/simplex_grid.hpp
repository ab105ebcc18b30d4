#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace testutil {

struct GridResult {
  Eigen::Vector3d coarse;         // argmin on the 0.001 lattice
  double coarse_objective = 0.0;
  Eigen::Vector3d refined;        // argmin after zooming in on finer lattices
  double refined_objective = 0.0;
};

/// Brute-force min w'Sw s.t. mu'w >= r_min on the 3-asset simplex. The first
/// pass scans the full simplex at step 0.001; later passes scan a box around
/// the current best at steps 1e-4 and 1e-6 so flat or constraint-bound optima
/// are located below the coarse lattice spacing.
inline GridResult simplex_grid_search(const Eigen::Vector3d& mu, const Eigen::Matrix3d& sigma, double r_min) {
  GridResult out;
  auto scan = [&](double c0, double c1, double half, double step, Eigen::Vector3d& best_w, double& best_v) {
    best_v = std::numeric_limits<double>::infinity();
    const long m = std::lround(half / step);
    for (long i = -m; i <= m; ++i) {
      const double w0 = c0 + i * step;
      if (w0 < -1e-15 || w0 > 1.0 + 1e-15) continue;
      for (long j = -m; j <= m; ++j) {
        const double w1 = c1 + j * step;
        const double w2 = 1.0 - w0 - w1;
        if (w1 < -1e-15 || w2 < -1e-12) continue;
        Eigen::Vector3d w(std::max(w0, 0.0), std::max(w1, 0.0), std::max(w2, 0.0));
        if (mu.dot(w) < r_min) continue;
        const double v = w.dot(sigma * w);
        if (v < best_v) {
          best_v = v;
          best_w = w;
        }
      }
    }
  };
  scan(0.5, 0.5, 0.5, 1e-3, out.coarse, out.coarse_objective);
  out.refined = out.coarse;
  double v = out.coarse_objective;
  scan(out.coarse(0), out.coarse(1), 0.03, 1e-4, out.refined, v);
  const Eigen::Vector3d mid = out.refined;
  scan(mid(0), mid(1), 3e-4, 1e-6, out.refined, v);
  out.refined_objective = v;
  return out;
}

}  // namespace testutil
