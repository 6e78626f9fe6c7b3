#include "countlab/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace countlab {

void AdamState::init(const std::vector<Parameter*>& params, const AdamConfig& cfg) {
  config = cfg;
  step = 0;
  m.clear();
  v.clear();
  for (const Parameter* p : params) {
    m.emplace_back(p->value.rows, p->value.cols);
    v.emplace_back(p->value.rows, p->value.cols);
  }
}

void adam_step(const std::vector<Parameter*>& params, AdamState& state) {
  if (params.size() != state.m.size())
    throw std::invalid_argument("adam_step: state does not match parameter list");
  for (const Parameter* p : params) {
    for (double g : p->grad.data)
      if (!std::isfinite(g))
        throw std::runtime_error("adam_step: non-finite gradient in " + p->name);
  }
  state.step += 1;
  const AdamConfig& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    Matrix& m = state.m[i];
    Matrix& v = state.v[i];
    if (!m.same_shape(p.value))
      throw std::invalid_argument("adam_step: moment shape mismatch for " + p.name);
    for (size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad.data[j];
      m.data[j] = c.beta1 * m.data[j] + (1.0 - c.beta1) * g;
      v.data[j] = c.beta2 * v.data[j] + (1.0 - c.beta2) * g * g;
      const double m_hat = m.data[j] / bc1;
      const double v_hat = v.data[j] / bc2;
      double upd = c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
      if (c.weight_decay != 0.0) upd += c.lr * c.weight_decay * p.value.data[j];
      p.value.data[j] -= upd;
    }
  }
}

}  // namespace countlab
