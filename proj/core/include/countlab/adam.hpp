#pragma once

#include <cstdint>
#include <vector>

#include "countlab/matrix.hpp"

namespace countlab {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled (AdamW-style) when nonzero
};

struct AdamState {
  AdamConfig config;
  int64_t step = 0;
  std::vector<Matrix> m;  // first moments, one per parameter
  std::vector<Matrix> v;  // second moments

  void init(const std::vector<Parameter*>& params, const AdamConfig& cfg);
};

// Standard bias-corrected Adam update over all parameters; increments the
// step counter. Throws on non-finite gradients, leaving parameters intact.
void adam_step(const std::vector<Parameter*>& params, AdamState& state);

}  // namespace countlab
