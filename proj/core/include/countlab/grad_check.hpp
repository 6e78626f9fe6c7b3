#pragma once

#include <functional>
#include <string>
#include <vector>

#include "countlab/matrix.hpp"

namespace countlab {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central finite differences against the analytic gradients already stored in
// each parameter's grad buffer. loss() must evaluate the objective at the
// current parameter values without touching the grads. Relative error is
// |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::vector<Parameter*>& params, double h);

}  // namespace countlab
