#include "countlab/model.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace countlab {

double ModelConfig::attn_scale() const {
  return scale_logits ? 1.0 / std::sqrt(static_cast<double>(d0())) : 1.0;
}

void ModelConfig::validate() const {
  if (d < 1) throw std::invalid_argument("model config: d must be >= 1");
  if (heads < 1) throw std::invalid_argument("model config: heads must be >= 1");
  if (head_dim == 0 && d % heads != 0)
    throw std::invalid_argument("model config: heads must divide d when head_dim is derived");
  if (d0() < 1) throw std::invalid_argument("model config: head dimension must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0)
    throw std::invalid_argument("model config: dropout must lie in [0, 1)");
  if (layer_norm && d < 2)
    throw std::invalid_argument("model config: layer norm is degenerate at d < 2");
}

std::vector<Parameter*> ModelParams::parameters() {
  std::vector<Parameter*> out;
  out.push_back(&w_e);
  if (config.layer_norm) {
    out.push_back(&ln_gamma);
    out.push_back(&ln_beta);
  }
  for (size_t h = 0; h < config.heads; ++h) {
    out.push_back(&key[h]);
    out.push_back(&query[h]);
    out.push_back(&value[h]);
  }
  for (size_t h = 0; h < config.heads; ++h) out.push_back(&w_out[h]);
  out.push_back(&b_out);
  if (config.skip_to_output) out.push_back(&w_skip);
  return out;
}

std::vector<const Parameter*> ModelParams::parameters() const {
  auto mut = const_cast<ModelParams*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

void ModelParams::zero_grads() {
  for (Parameter* p : parameters()) p->zero_grad();
}

ModelParams make_params(const ModelConfig& config) {
  config.validate();
  ModelParams p;
  p.config = config;
  const size_t d = config.d, a = config.heads, d0 = config.d0();
  p.w_e = Parameter("W_E", 8, d);
  if (config.layer_norm) {
    p.ln_gamma = Parameter("ln_gamma", 1, d);
    p.ln_beta = Parameter("ln_beta", 1, d);
  }
  for (size_t h = 0; h < a; ++h) {
    const std::string idx = std::to_string(h);
    p.key.emplace_back("K_" + idx, d, d0);
    p.query.emplace_back("Q_" + idx, d, d0);
    p.value.emplace_back("V_" + idx, d, d0);
    p.w_out.emplace_back("W_out_" + idx, 8, d0);
  }
  p.b_out = Parameter("b_out", 1, 8);
  if (config.skip_to_output) p.w_skip = Parameter("W_skip", d, 8);
  return p;
}

ModelParams init_params(const ModelConfig& config, Rng& rng) {
  ModelParams p = make_params(config);
  constexpr double kInitStd = 0.02;
  p.w_e.value.fill_gaussian(rng, kInitStd);
  for (size_t h = 0; h < config.heads; ++h) {
    p.key[h].value.fill_gaussian(rng, kInitStd);
    p.query[h].value.fill_gaussian(rng, kInitStd);
    p.value[h].value.fill_gaussian(rng, kInitStd);
  }
  for (size_t h = 0; h < config.heads; ++h) p.w_out[h].value.fill_gaussian(rng, kInitStd);
  if (config.layer_norm) p.ln_gamma.value.fill(1.0);
  if (config.skip_to_output) p.w_skip.value.fill_gaussian(rng, kInitStd);
  return p;
}

TypeContext build_type_context(const ModelParams& params) {
  const ModelConfig& cfg = params.config;
  TypeContext ctx;
  ctx.d = cfg.d;
  ctx.a = cfg.heads;
  ctx.d0 = cfg.d0();
  ctx.layer_norm = cfg.layer_norm;
  ctx.scale = cfg.attn_scale();
  ctx.x.resize(8 * ctx.d);
  ctx.ln_cache.resize(8);
  ctx.q.assign(ctx.a * 8 * ctx.d0, 0.0);
  ctx.k.assign(ctx.a * 8 * ctx.d0, 0.0);
  ctx.v.assign(ctx.a * 8 * ctx.d0, 0.0);
  ctx.attn_logit.assign(ctx.a * 8 * 8, 0.0);

  for (int t = 0; t < 8; ++t) {
    std::span<const double> e(params.w_e.value.row(static_cast<size_t>(t)), ctx.d);
    std::span<double> x(ctx.x.data() + static_cast<size_t>(t) * ctx.d, ctx.d);
    if (cfg.layer_norm) {
      layernorm(e, {params.ln_gamma.value.data.data(), ctx.d},
                {params.ln_beta.value.data.data(), ctx.d}, x,
                &ctx.ln_cache[static_cast<size_t>(t)]);
    } else {
      std::copy(e.begin(), e.end(), x.begin());
    }
  }
  for (size_t h = 0; h < ctx.a; ++h) {
    const Matrix& K = params.key[h].value;
    const Matrix& Q = params.query[h].value;
    const Matrix& V = params.value[h].value;
    for (int t = 0; t < 8; ++t) {
      const double* x = ctx.x_of(t);
      double* qo = ctx.q.data() + (h * 8 + static_cast<size_t>(t)) * ctx.d0;
      double* ko = ctx.k.data() + (h * 8 + static_cast<size_t>(t)) * ctx.d0;
      double* vo = ctx.v.data() + (h * 8 + static_cast<size_t>(t)) * ctx.d0;
      for (size_t i = 0; i < ctx.d; ++i) {
        const double xi = x[i];
        const double* krow = K.row(i);
        const double* qrow = Q.row(i);
        const double* vrow = V.row(i);
        for (size_t j = 0; j < ctx.d0; ++j) {
          ko[j] += xi * krow[j];
          qo[j] += xi * qrow[j];
          vo[j] += xi * vrow[j];
        }
      }
    }
    for (int qt = 0; qt < 8; ++qt) {
      for (int kt = 0; kt < 8; ++kt) {
        const double* qv = ctx.q_of(h, qt);
        const double* kv = ctx.k_of(h, kt);
        double dot = 0.0;
        for (size_t j = 0; j < ctx.d0; ++j) dot += qv[j] * kv[j];
        ctx.attn_logit[(h * 8 + static_cast<size_t>(qt)) * 8 + static_cast<size_t>(kt)] =
            ctx.scale * dot;
      }
    }
  }
  return ctx;
}

void TypeContextGrads::init(const TypeContext& ctx) {
  d_attn_logit.assign(ctx.a * 8 * 8, 0.0);
  d_v.assign(ctx.a * 8 * ctx.d0, 0.0);
  d_x.assign(8 * ctx.d, 0.0);
}

VisibleSet visible_set(const CountTriple& counts, int query_token) {
  if (query_token != tok::kEq && query_token != tok::kFour && query_token != tok::kFive)
    throw std::invalid_argument("visible_set: query must be '=', '4' or '5'");
  if (counts.n0 < 0 || counts.n1 < 0 || counts.n2 < 0)
    throw std::invalid_argument("visible_set: negative count");
  VisibleSet vs;
  auto add = [&vs](int t, double m) {
    vs.types[vs.n] = t;
    vs.mult[vs.n] = m;
    ++vs.n;
  };
  add(tok::kBos, 1.0);
  if (counts.n0 > 0) add(tok::kZero, static_cast<double>(counts.n0));
  if (counts.n1 > 0) add(tok::kOne, static_cast<double>(counts.n1));
  if (counts.n2 > 0) add(tok::kTwo, static_cast<double>(counts.n2));
  add(tok::kEq, 1.0);
  if (query_token != tok::kEq) add(query_token, 1.0);
  return vs;
}

CountsForwardResult forward_counts(const ModelParams& params, const TypeContext& ctx,
                                   const CountTriple& counts, int query_token) {
  if (params.config.dropout != 0.0)
    throw std::invalid_argument("forward_counts: requires dropout = 0");
  CountsForwardResult r;
  r.visible = visible_set(counts, query_token);
  const size_t a = ctx.a, d0 = ctx.d0;
  r.head_outputs.assign(a * d0, 0.0);
  r.attn_by_type.assign(a * r.visible.n, 0.0);
  r.contrib.assign(a * 8, 0.0);

  for (size_t h = 0; h < a; ++h) {
    // softmax over token types, weighted by multiplicities
    double max_logit = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < r.visible.n; ++i)
      max_logit = std::max(max_logit, ctx.logit_of(h, query_token, r.visible.types[i]));
    double z = 0.0;
    double* attn = r.attn_by_type.data() + h * r.visible.n;
    for (size_t i = 0; i < r.visible.n; ++i) {
      attn[i] = r.visible.mult[i] *
                std::exp(ctx.logit_of(h, query_token, r.visible.types[i]) - max_logit);
      z += attn[i];
    }
    double* o = r.head_outputs.data() + h * d0;
    for (size_t i = 0; i < r.visible.n; ++i) {
      attn[i] /= z;
      const double* v = ctx.v_of(h, r.visible.types[i]);
      for (size_t j = 0; j < d0; ++j) o[j] += attn[i] * v[j];
    }
  }

  for (int t = 0; t < 8; ++t) r.logits[static_cast<size_t>(t)] = params.b_out.value.data[static_cast<size_t>(t)];
  for (size_t h = 0; h < a; ++h) {
    const double* o = r.head_outputs.data() + h * d0;
    const Matrix& wo = params.w_out[h].value;
    for (int t = 0; t < 8; ++t) {
      const double* w = wo.row(static_cast<size_t>(t));
      double dot = 0.0;
      for (size_t j = 0; j < d0; ++j) dot += o[j] * w[j];
      r.contrib[h * 8 + static_cast<size_t>(t)] = dot;
      r.logits[static_cast<size_t>(t)] += dot;
    }
  }
  if (params.config.skip_to_output) {
    const double* xq = ctx.x_of(query_token);
    for (int t = 0; t < 8; ++t) {
      double dot = 0.0;
      for (size_t i = 0; i < ctx.d; ++i)
        dot += xq[i] * params.w_skip.value.at(i, static_cast<size_t>(t));
      r.logits[static_cast<size_t>(t)] += dot;
    }
  }
  return r;
}

CountsForwardResult forward_counts(const ModelParams& params, const CountTriple& counts,
                                   int query_token) {
  TypeContext ctx = build_type_context(params);
  return forward_counts(params, ctx, counts, query_token);
}

void backward_counts(ModelParams& params, const TypeContext& ctx,
                     const CountsForwardResult& fwd, int query_token,
                     const std::array<double, 8>& d_logits, TypeContextGrads& tg) {
  const size_t a = ctx.a, d0 = ctx.d0;
  for (int t = 0; t < 8; ++t) params.b_out.grad.data[static_cast<size_t>(t)] += d_logits[static_cast<size_t>(t)];

  if (params.config.skip_to_output) {
    const double* xq = ctx.x_of(query_token);
    double* dxq = tg.d_x.data() + static_cast<size_t>(query_token) * ctx.d;
    for (size_t i = 0; i < ctx.d; ++i) {
      for (int t = 0; t < 8; ++t) {
        params.w_skip.grad.at(i, static_cast<size_t>(t)) += d_logits[static_cast<size_t>(t)] * xq[i];
        dxq[i] += params.w_skip.value.at(i, static_cast<size_t>(t)) * d_logits[static_cast<size_t>(t)];
      }
    }
  }

  std::vector<double> d_o(d0);
  for (size_t h = 0; h < a; ++h) {
    const double* o = fwd.head_outputs.data() + h * d0;
    Matrix& dwo = params.w_out[h].grad;
    const Matrix& wo = params.w_out[h].value;
    std::fill(d_o.begin(), d_o.end(), 0.0);
    for (int t = 0; t < 8; ++t) {
      const double dz = d_logits[static_cast<size_t>(t)];
      if (dz == 0.0) continue;
      double* dw = dwo.row(static_cast<size_t>(t));
      const double* w = wo.row(static_cast<size_t>(t));
      for (size_t j = 0; j < d0; ++j) {
        dw[j] += dz * o[j];
        d_o[j] += dz * w[j];
      }
    }
    // softmax backward over visible types
    const double* attn = fwd.attn_by_type.data() + h * fwd.visible.n;
    double weighted = 0.0;
    std::array<double, 6> g{};
    for (size_t i = 0; i < fwd.visible.n; ++i) {
      const double* v = ctx.v_of(h, fwd.visible.types[i]);
      double dot = 0.0;
      for (size_t j = 0; j < d0; ++j) dot += d_o[j] * v[j];
      g[i] = dot;
      weighted += attn[i] * dot;
    }
    for (size_t i = 0; i < fwd.visible.n; ++i) {
      const int t = fwd.visible.types[i];
      tg.d_attn_logit[(h * 8 + static_cast<size_t>(query_token)) * 8 + static_cast<size_t>(t)] +=
          attn[i] * (g[i] - weighted);
      double* dv = tg.d_v.data() + (h * 8 + static_cast<size_t>(t)) * d0;
      for (size_t j = 0; j < d0; ++j) dv[j] += attn[i] * d_o[j];
    }
  }
}

void finish_type_backward(ModelParams& params, const TypeContext& ctx,
                          TypeContextGrads& tg) {
  const size_t a = ctx.a, d = ctx.d, d0 = ctx.d0;
  std::vector<double> dq(8 * d0), dk(8 * d0);
  for (size_t h = 0; h < a; ++h) {
    std::fill(dq.begin(), dq.end(), 0.0);
    std::fill(dk.begin(), dk.end(), 0.0);
    for (int qt = 0; qt < 8; ++qt) {
      for (int kt = 0; kt < 8; ++kt) {
        const double g =
            tg.d_attn_logit[(h * 8 + static_cast<size_t>(qt)) * 8 + static_cast<size_t>(kt)];
        if (g == 0.0) continue;
        const double gs = g * ctx.scale;
        const double* qv = ctx.q_of(h, qt);
        const double* kv = ctx.k_of(h, kt);
        double* dqv = dq.data() + static_cast<size_t>(qt) * d0;
        double* dkv = dk.data() + static_cast<size_t>(kt) * d0;
        for (size_t j = 0; j < d0; ++j) {
          dqv[j] += gs * kv[j];
          dkv[j] += gs * qv[j];
        }
      }
    }
    Matrix& dK = params.key[h].grad;
    Matrix& dQ = params.query[h].grad;
    Matrix& dV = params.value[h].grad;
    const Matrix& K = params.key[h].value;
    const Matrix& Q = params.query[h].value;
    const Matrix& V = params.value[h].value;
    for (int t = 0; t < 8; ++t) {
      const double* x = ctx.x_of(t);
      const double* dkv = dk.data() + static_cast<size_t>(t) * d0;
      const double* dqv = dq.data() + static_cast<size_t>(t) * d0;
      const double* dvv = tg.d_v.data() + (h * 8 + static_cast<size_t>(t)) * d0;
      double* dx = tg.d_x.data() + static_cast<size_t>(t) * d;
      for (size_t i = 0; i < d; ++i) {
        const double xi = x[i];
        double acc = 0.0;
        double* dKrow = dK.row(i);
        double* dQrow = dQ.row(i);
        double* dVrow = dV.row(i);
        const double* Krow = K.row(i);
        const double* Qrow = Q.row(i);
        const double* Vrow = V.row(i);
        for (size_t j = 0; j < d0; ++j) {
          dKrow[j] += xi * dkv[j];
          dQrow[j] += xi * dqv[j];
          dVrow[j] += xi * dvv[j];
          acc += Krow[j] * dkv[j] + Qrow[j] * dqv[j] + Vrow[j] * dvv[j];
        }
        dx[i] += acc;
      }
    }
  }
  // through layer norm (or straight into the embeddings)
  std::vector<double> de(d);
  for (int t = 0; t < 8; ++t) {
    const double* dx = tg.d_x.data() + static_cast<size_t>(t) * d;
    double* dwe = params.w_e.grad.row(static_cast<size_t>(t));
    if (ctx.layer_norm) {
      std::fill(de.begin(), de.end(), 0.0);
      layernorm_backward({dx, d}, ctx.ln_cache[static_cast<size_t>(t)],
                         {params.ln_gamma.value.data.data(), d}, de,
                         {params.ln_gamma.grad.data.data(), d},
                         {params.ln_beta.grad.data.data(), d});
      for (size_t i = 0; i < d; ++i) dwe[i] += de[i];
    } else {
      for (size_t i = 0; i < d; ++i) dwe[i] += dx[i];
    }
  }
}

Matrix forward_full(const ModelParams& params, const std::vector<int>& tokens,
                    ForwardTrace* trace) {
  const ModelConfig& cfg = params.config;
  const size_t L = tokens.size(), d = cfg.d, a = cfg.heads, d0 = cfg.d0();
  const double scale = cfg.attn_scale();
  for (int t : tokens)
    if (t < 0 || t >= tok::kVocabSize)
      throw std::invalid_argument("forward_full: token id out of range");

  // position-wise embeddings and per-head features
  std::vector<double> x(L * d);
  for (size_t i = 0; i < L; ++i) {
    std::span<const double> e(params.w_e.value.row(static_cast<size_t>(tokens[i])), d);
    std::span<double> xi(x.data() + i * d, d);
    if (cfg.layer_norm) {
      LayerNormCache cache;
      layernorm(e, {params.ln_gamma.value.data.data(), d},
                {params.ln_beta.value.data.data(), d}, xi, &cache);
    } else {
      std::copy(e.begin(), e.end(), xi.begin());
    }
  }
  std::vector<double> q(L * a * d0, 0.0), k(L * a * d0, 0.0), v(L * a * d0, 0.0);
  for (size_t i = 0; i < L; ++i) {
    const double* xi = x.data() + i * d;
    for (size_t h = 0; h < a; ++h) {
      double* qo = q.data() + (i * a + h) * d0;
      double* ko = k.data() + (i * a + h) * d0;
      double* vo = v.data() + (i * a + h) * d0;
      const Matrix& K = params.key[h].value;
      const Matrix& Q = params.query[h].value;
      const Matrix& V = params.value[h].value;
      for (size_t r = 0; r < d; ++r) {
        const double xr = xi[r];
        const double* Krow = K.row(r);
        const double* Qrow = Q.row(r);
        const double* Vrow = V.row(r);
        for (size_t j = 0; j < d0; ++j) {
          ko[j] += xr * Krow[j];
          qo[j] += xr * Qrow[j];
          vo[j] += xr * Vrow[j];
        }
      }
    }
  }

  if (trace) {
    trace->attn.assign(a, {});
    for (size_t h = 0; h < a; ++h) trace->attn[h].resize(L);
    trace->head_outputs.assign(L * a * d0, 0.0);
  }

  Matrix logits(L, 8);
  std::vector<double> attn_logits, attn, o(d0);
  for (size_t i = 0; i < L; ++i) {
    double* zrow = logits.row(i);
    for (int t = 0; t < 8; ++t) zrow[static_cast<size_t>(t)] = params.b_out.value.data[static_cast<size_t>(t)];
    for (size_t h = 0; h < a; ++h) {
      attn_logits.resize(i + 1);
      const double* qi = q.data() + (i * a + h) * d0;
      for (size_t j = 0; j <= i; ++j) {
        const double* kj = k.data() + (j * a + h) * d0;
        double dot = 0.0;
        for (size_t m = 0; m < d0; ++m) dot += qi[m] * kj[m];
        attn_logits[j] = scale * dot;
      }
      attn.resize(i + 1);
      softmax_row_into(attn_logits, {}, attn);
      std::fill(o.begin(), o.end(), 0.0);
      for (size_t j = 0; j <= i; ++j) {
        const double* vj = v.data() + (j * a + h) * d0;
        for (size_t m = 0; m < d0; ++m) o[m] += attn[j] * vj[m];
      }
      const Matrix& wo = params.w_out[h].value;
      for (int t = 0; t < 8; ++t) {
        const double* w = wo.row(static_cast<size_t>(t));
        double dot = 0.0;
        for (size_t m = 0; m < d0; ++m) dot += o[m] * w[m];
        zrow[static_cast<size_t>(t)] += dot;
      }
      if (trace) {
        trace->attn[h][i] = attn;
        std::copy(o.begin(), o.end(),
                  trace->head_outputs.begin() + static_cast<long>((i * a + h) * d0));
      }
    }
    if (cfg.skip_to_output) {
      const double* xi = x.data() + i * d;
      for (int t = 0; t < 8; ++t) {
        double dot = 0.0;
        for (size_t r = 0; r < d; ++r) dot += xi[r] * params.w_skip.value.at(r, static_cast<size_t>(t));
        zrow[static_cast<size_t>(t)] += dot;
      }
    }
  }
  return logits;
}

std::array<double, 8> logits_from_heads(const ModelParams& params,
                                        const std::vector<double>& head_outputs,
                                        uint64_t subset) {
  if (params.config.skip_to_output)
    throw std::logic_error("logits_from_heads: skip-to-output models are not supported");
  const size_t a = params.config.heads, d0 = params.config.d0();
  if (head_outputs.size() != a * d0)
    throw std::invalid_argument("logits_from_heads: head output size mismatch");
  std::array<double, 8> z{};
  for (int t = 0; t < 8; ++t) z[static_cast<size_t>(t)] = params.b_out.value.data[static_cast<size_t>(t)];
  for (size_t h = 0; h < a; ++h) {
    if (!((subset >> h) & 1ULL)) continue;
    const double* o = head_outputs.data() + h * d0;
    const Matrix& wo = params.w_out[h].value;
    for (int t = 0; t < 8; ++t) {
      const double* w = wo.row(static_cast<size_t>(t));
      double dot = 0.0;
      for (size_t j = 0; j < d0; ++j) dot += o[j] * w[j];
      z[static_cast<size_t>(t)] += dot;
    }
  }
  return z;
}

}  // namespace countlab
