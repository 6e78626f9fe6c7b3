#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace countlab {

constexpr double kLayerNormEps = 1e-5;

// Stable softmax with optional masking: masked entries come out exactly 0,
// unmasked entries are positive and sum to 1. Throws if every entry is
// masked. mask may be empty (nothing masked).
std::vector<double> softmax_row(std::span<const double> logits,
                                std::span<const uint8_t> mask = {});

// In-place variant writing into out (same size as logits).
void softmax_row_into(std::span<const double> logits, std::span<const uint8_t> mask,
                      std::span<double> out);

// y = (e - mean(e)) / sqrt(var(e) + eps) * gamma + beta, variance with 1/d
// normalization. Caches what the backward pass needs.
struct LayerNormCache {
  double mean = 0;
  double rstd = 0;             // 1 / sqrt(var + eps)
  std::vector<double> normed;  // (e - mean) * rstd
};

void layernorm(std::span<const double> e, std::span<const double> gamma,
               std::span<const double> beta, std::span<double> out,
               LayerNormCache* cache = nullptr);

// Accumulates into d_e / d_gamma / d_beta.
void layernorm_backward(std::span<const double> d_out, const LayerNormCache& cache,
                        std::span<const double> gamma, std::span<double> d_e,
                        std::span<double> d_gamma, std::span<double> d_beta);

// log(sum_i exp(x_i)) with max subtraction.
double log_sum_exp(std::span<const double> x);

}  // namespace countlab
