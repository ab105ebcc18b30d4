#pragma once

#include <functional>
#include <vector>

namespace vtlab {

struct NelderMeadOptions {
  int max_evals = 4000;
  double f_tol = 1e-10;
  double x_tol = 1e-8;
  double initial_step = 0.5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  bool converged = false;
};

/// Unconstrained minimization with the standard reflection/expansion/contraction/shrink moves.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const NelderMeadOptions& opts = {});

}  // namespace vtlab
