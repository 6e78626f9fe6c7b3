#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "countlab/data.hpp"
#include "countlab/kernels.hpp"
#include "countlab/matrix.hpp"

namespace countlab {

// Single-layer attention-only generative transformer over the 8-token
// vocabulary. No positional embedding; causal masking always on. The output
// projection is fused into per-head output weights: the logit for token t is
// z_t = sum_h O_h . w_{h,t} + b_t (plus an optional skip-to-output term).
struct ModelConfig {
  size_t d = 32;        // embedding dimension
  size_t heads = 16;    // attention heads
  size_t head_dim = 0;  // 0 means d / heads; settable independently (e.g. d0=1 grids)
  bool layer_norm = true;
  bool scale_logits = false;  // multiply attention logits by 1/sqrt(d0)
  double dropout = 0.0;       // applied to head outputs in full-path training only
  bool skip_to_output = false;

  size_t d0() const { return head_dim ? head_dim : d / heads; }
  double attn_scale() const;
  void validate() const;  // throws std::invalid_argument on bad combinations
};

struct ModelParams {
  ModelConfig config;
  Parameter w_e;       // 8 x d token embeddings
  Parameter ln_gamma;  // 1 x d (present iff layer_norm)
  Parameter ln_beta;   // 1 x d
  std::vector<Parameter> key;    // per head, d x d0
  std::vector<Parameter> query;  // per head, d x d0
  std::vector<Parameter> value;  // per head, d x d0
  std::vector<Parameter> w_out;  // per head, 8 x d0; row t is w_{h,t}
  Parameter b_out;               // 1 x 8
  Parameter w_skip;              // d x 8 unembedding (present iff skip_to_output)

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void zero_grads();
};

// Gaussian init with std 0.02 for embeddings, K/Q/V and output weights;
// zero biases; layer norm at gamma=1, beta=0.
ModelParams init_params(const ModelConfig& config, Rng& rng);
ModelParams make_params(const ModelConfig& config);  // all zeros

// Everything the model computes per token *type*: normed embeddings, per-head
// key/query/value features and the 8x8 attention-logit tables. Input
// sequences only enter later through type multiplicities, so one context
// serves a whole batch.
struct TypeContext {
  size_t d = 0, a = 0, d0 = 0;
  bool layer_norm = false;
  double scale = 1.0;
  std::vector<double> x;                  // 8 x d
  std::vector<LayerNormCache> ln_cache;   // 8
  std::vector<double> q, k, v;            // each a x 8 x d0
  std::vector<double> attn_logit;         // a x 8 x 8, [h][query type][key type]

  const double* x_of(int t) const { return x.data() + static_cast<size_t>(t) * d; }
  const double* q_of(size_t h, int t) const { return q.data() + (h * 8 + static_cast<size_t>(t)) * d0; }
  const double* k_of(size_t h, int t) const { return k.data() + (h * 8 + static_cast<size_t>(t)) * d0; }
  const double* v_of(size_t h, int t) const { return v.data() + (h * 8 + static_cast<size_t>(t)) * d0; }
  double logit_of(size_t h, int qt, int kt) const {
    return attn_logit[(h * 8 + static_cast<size_t>(qt)) * 8 + static_cast<size_t>(kt)];
  }
};

TypeContext build_type_context(const ModelParams& params);

// Gradient accumulators matching a TypeContext. Per-sample backward writes
// type-level gradients here; one finish call per batch pushes them into the
// parameter grads.
struct TypeContextGrads {
  std::vector<double> d_attn_logit;  // a x 8 x 8
  std::vector<double> d_v;           // a x 8 x d0
  std::vector<double> d_x;           // 8 x d

  void init(const TypeContext& ctx);
};

void finish_type_backward(ModelParams& params, const TypeContext& ctx,
                          TypeContextGrads& grads);

// A query over a bag of visible token types. For '=' the visible set is
// {[BOS]:1, '0':n0, '1':n1, '2':n2, '=':1}; a '4'/'5' query adds itself.
struct VisibleSet {
  std::array<int, 6> types{};
  std::array<double, 6> mult{};
  size_t n = 0;
};

VisibleSet visible_set(const CountTriple& counts, int query_token);

// Result of the count-collapsed forward at one query position.
struct CountsForwardResult {
  std::vector<double> head_outputs;     // a x d0
  std::vector<double> attn_by_type;     // a x 6, aligned with the VisibleSet
  VisibleSet visible;
  std::array<double, 8> logits{};
  std::vector<double> contrib;          // a x 8, z_{t,h} = O_h . w_{h,t}
};

// Exact closed-form forward using only counts; equals forward_full at the
// matching position on any sentence with these counts. Throws if the config
// has dropout enabled or the query token is not '=', '4' or '5'.
CountsForwardResult forward_counts(const ModelParams& params, const TypeContext& ctx,
                                   const CountTriple& counts, int query_token);
CountsForwardResult forward_counts(const ModelParams& params, const CountTriple& counts,
                                   int query_token);

// Backward through one forward_counts evaluation given d(loss)/d(logits).
// Accumulates output-layer grads directly into params and type-level grads
// into tg.
void backward_counts(ModelParams& params, const TypeContext& ctx,
                     const CountsForwardResult& fwd, int query_token,
                     const std::array<double, 8>& d_logits, TypeContextGrads& tg);

// Optional trace of the reference path.
struct ForwardTrace {
  // attn[h][i] is the attention row of query position i (length i+1)
  std::vector<std::vector<std::vector<double>>> attn;
  std::vector<double> head_outputs;  // L x a x d0
};

// Reference path: materializes the sequence and attends position by
// position. Returns an L x 8 logit matrix.
Matrix forward_full(const ModelParams& params, const std::vector<int>& tokens,
                    ForwardTrace* trace = nullptr);

// Logits with every head outside `subset` zero-ablated: bit h of subset keeps
// head h. Biases are always included; the full set reproduces model logits
// (skip-to-output models are not supported here).
std::array<double, 8> logits_from_heads(const ModelParams& params,
                                        const std::vector<double>& head_outputs,
                                        uint64_t subset);

struct CheckpointMeta {
  int64_t epoch = -1;
  uint64_t seed = 0;
  std::string note;
};

// Self-describing versioned document: config, meta and every parameter as
// (name, shape, row-major array). 64-bit storage round-trips bitwise;
// store_f32 trades that for size.
void save_checkpoint(const ModelParams& params, const CheckpointMeta& meta,
                     const std::string& path, bool store_f32 = false);

struct Checkpoint {
  ModelParams params;
  CheckpointMeta meta;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace countlab
