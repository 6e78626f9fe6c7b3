#include "countlab/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace countlab {

void softmax_row_into(std::span<const double> logits, std::span<const uint8_t> mask,
                      std::span<double> out) {
  if (!mask.empty() && mask.size() != logits.size())
    throw std::invalid_argument("softmax_row: mask size mismatch");
  if (out.size() != logits.size())
    throw std::invalid_argument("softmax_row: output size mismatch");
  double max_val = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < logits.size(); ++i) {
    if (!mask.empty() && mask[i]) continue;
    if (logits[i] > max_val) max_val = logits[i];
  }
  if (max_val == -std::numeric_limits<double>::infinity())
    throw std::domain_error("softmax_row: all entries masked");
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    if (!mask.empty() && mask[i]) {
      out[i] = 0.0;
    } else {
      out[i] = std::exp(logits[i] - max_val);
      sum += out[i];
    }
  }
  for (size_t i = 0; i < logits.size(); ++i) out[i] /= sum;
}

std::vector<double> softmax_row(std::span<const double> logits,
                                std::span<const uint8_t> mask) {
  std::vector<double> out(logits.size());
  softmax_row_into(logits, mask, out);
  return out;
}

void layernorm(std::span<const double> e, std::span<const double> gamma,
               std::span<const double> beta, std::span<double> out,
               LayerNormCache* cache) {
  const size_t d = e.size();
  if (gamma.size() != d || beta.size() != d || out.size() != d)
    throw std::invalid_argument("layernorm: size mismatch");
  double mean = 0.0;
  for (double x : e) mean += x;
  mean /= static_cast<double>(d);
  double var = 0.0;
  for (double x : e) var += (x - mean) * (x - mean);
  var /= static_cast<double>(d);
  const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
  if (cache) {
    cache->mean = mean;
    cache->rstd = rstd;
    cache->normed.resize(d);
  }
  for (size_t i = 0; i < d; ++i) {
    const double normed = (e[i] - mean) * rstd;
    if (cache) cache->normed[i] = normed;
    out[i] = normed * gamma[i] + beta[i];
  }
}

void layernorm_backward(std::span<const double> d_out, const LayerNormCache& cache,
                        std::span<const double> gamma, std::span<double> d_e,
                        std::span<double> d_gamma, std::span<double> d_beta) {
  const size_t d = d_out.size();
  const double inv_d = 1.0 / static_cast<double>(d);
  // d_normed = d_out * gamma; d_e = rstd * (d_normed - mean(d_normed)
  //            - normed * mean(d_normed * normed))
  double sum_dn = 0.0, sum_dn_n = 0.0;
  for (size_t i = 0; i < d; ++i) {
    const double dn = d_out[i] * gamma[i];
    sum_dn += dn;
    sum_dn_n += dn * cache.normed[i];
  }
  for (size_t i = 0; i < d; ++i) {
    const double dn = d_out[i] * gamma[i];
    d_e[i] += cache.rstd * (dn - inv_d * sum_dn - cache.normed[i] * inv_d * sum_dn_n);
    d_gamma[i] += d_out[i] * cache.normed[i];
    d_beta[i] += d_out[i];
  }
}

double log_sum_exp(std::span<const double> x) {
  double max_val = -std::numeric_limits<double>::infinity();
  for (double v : x)
    if (v > max_val) max_val = v;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - max_val);
  return max_val + std::log(sum);
}

}  // namespace countlab
