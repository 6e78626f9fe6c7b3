#include "countlab/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace countlab {

GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::vector<Parameter*>& params, double h) {
  GradCheckReport report;
  for (Parameter* p : params) {
    for (size_t j = 0; j < p->value.size(); ++j) {
      const double saved = p->value.data[j];
      p->value.data[j] = saved + h;
      const double f_plus = loss();
      p->value.data[j] = saved - h;
      const double f_minus = loss();
      p->value.data[j] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double analytic = p->grad.data[j];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p->name;
        report.worst_index = j;
        report.analytic = analytic;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace countlab
