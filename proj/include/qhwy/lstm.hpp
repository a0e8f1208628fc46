#pragma once

// LSTM cell with two quantization placements.
//
//   i = sigmoid(W_ii x + W_hi h + b_i)
//   f = sigmoid(W_if x + W_hf h + b_f)
//   g = tanh   (W_ig x + W_hg h + b_g)
//   o = sigmoid(W_io x + W_ho h + b_o)
//   c' = f * c + i * g
//   h' = o * tanh(c')
//
// highway       quantizers sit only at the matrix-multiplication inputs
//               (x and h, fixed(-1,1) at activation_bits; weights on the
//               fitted Laplace grid). Gates, c and h, and the elementwise
//               update stay at full precision, so the recurrent c/h path is
//               an uninterrupted high-precision carrier.
// conventional  additionally, every named signal is quantized once at
//               production: i, f, o with fixed(0,1); g and h with
//               fixed(-1,1); c is clamped to [-cell_clip, cell_clip] and
//               quantized on that range. The state a conventional cell
//               carries forward is itself on the grid.
//
// Gate biases are single per-gate vectors (the two bias terms of the affine
// maps fold into one) and are never quantized. A caller-supplied initial
// state is consumed raw: the mid-rise cell grid has no zero level, and
// snapping a fresh zero state would manufacture error from nothing.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qhwy/quant.hpp"
#include "qhwy/rng.hpp"
#include "qhwy/tensor.hpp"

namespace qhwy {

enum class LstmPlacement { Conventional, Highway };

inline const char* to_string(LstmPlacement p) {
  return p == LstmPlacement::Conventional ? "conventional" : "highway";
}

struct LstmConfig {
  std::int64_t input_size = 32;
  std::int64_t hidden_size = 32;
  int num_layers = 1;
  int activation_bits = 4;
  Precision weight_bits = Precision::full();
  LstmPlacement placement = LstmPlacement::Highway;
  double cell_clip = 2.0;  // conventional placement: quantization range for c
  std::uint64_t seed = 1;
};

inline void validate(const LstmConfig& cfg) {
  if (cfg.input_size < 1) throw std::invalid_argument("lstm config: input_size must be >= 1");
  if (cfg.hidden_size < 1) throw std::invalid_argument("lstm config: hidden_size must be >= 1");
  if (cfg.num_layers < 1) throw std::invalid_argument("lstm config: num_layers must be >= 1");
  if (cfg.activation_bits < 1) throw std::invalid_argument("lstm config: activation_bits must be >= 1");
  if (!cfg.weight_bits.is_full() && cfg.weight_bits.bits < 1) {
    throw std::invalid_argument("lstm config: weight_bits must be full or >= 1");
  }
  if (!(cfg.cell_clip > 0.0)) throw std::invalid_argument("lstm config: cell_clip must be positive");
}

struct LstmLayerWeights {
  Tensor w_ii, w_if, w_ig, w_io;  // hidden x input
  Tensor w_hi, w_hf, w_hg, w_ho;  // hidden x hidden
  Tensor b_i, b_f, b_g, b_o;      // hidden
};

struct LstmWeights {
  std::vector<LstmLayerWeights> layers;
};

struct LstmState {
  Tensor h;  // hidden
  Tensor c;  // hidden
};

inline LstmState zero_state(std::int64_t hidden_size) {
  return {Tensor({hidden_size}), Tensor({hidden_size})};
}

inline std::vector<LstmState> zero_states(const LstmConfig& cfg) {
  std::vector<LstmState> s;
  for (int l = 0; l < cfg.num_layers; ++l) s.push_back(zero_state(cfg.hidden_size));
  return s;
}

namespace detail {

inline Tensor as_column(const Tensor& v) {
  return Tensor({v.numel(), 1}, v.data());
}

inline Tensor as_vector(const Tensor& m) {
  return Tensor({m.numel()}, m.data());
}

// W (h x n) * v (n) + b (h), accumulation at full precision.
inline Tensor affine(const Tensor& w, const Tensor& v, const Tensor& b) {
  return elementwise_add(as_vector(matmul(w, as_column(v))), b);
}

inline bool all_zero(const Tensor& t) {
  for (double v : t.data()) {
    if (v != 0.0) return false;
  }
  return true;
}

// Fake-quantized view of a weight matrix. Beyond the Laplace table the grid
// is effectively lossless; an all-zero matrix has no scale to fit and passes
// through unquantized.
inline Tensor effective_weight(const Tensor& w, Precision kw) {
  if (kw.is_full() || kw.bits > 8) return w;
  if (all_zero(w)) return w;
  return quantize(w, fit_weight_quantizer(w, kw.bits));
}

inline void check_layer_shapes(const LstmConfig& cfg, const LstmLayerWeights& lw, int layer) {
  const std::int64_t in = layer == 0 ? cfg.input_size : cfg.hidden_size;
  const std::int64_t hid = cfg.hidden_size;
  auto expect = [layer](const Tensor& t, std::int64_t r, std::int64_t c, const char* name) {
    if (t.ndim() != 2 || t.extent(0) != r || t.extent(1) != c) {
      throw std::invalid_argument(std::string("lstm: weight ") + name + " of layer " +
                                  std::to_string(layer) + " has shape " + t.shape_str());
    }
  };
  expect(lw.w_ii, hid, in, "w_ii");
  expect(lw.w_if, hid, in, "w_if");
  expect(lw.w_ig, hid, in, "w_ig");
  expect(lw.w_io, hid, in, "w_io");
  expect(lw.w_hi, hid, hid, "w_hi");
  expect(lw.w_hf, hid, hid, "w_hf");
  expect(lw.w_hg, hid, hid, "w_hg");
  expect(lw.w_ho, hid, hid, "w_ho");
  for (const Tensor* b : {&lw.b_i, &lw.b_f, &lw.b_g, &lw.b_o}) {
    if (b->ndim() != 1 || b->extent(0) != hid) {
      throw std::invalid_argument("lstm: bias of layer " + std::to_string(layer) + " has shape " +
                                  b->shape_str());
    }
  }
}

inline LstmState step_layer(const LstmConfig& cfg, const LstmLayerWeights& lw,
                            const LstmState& prev, const Tensor& x) {
  const bool conv = cfg.placement == LstmPlacement::Conventional;
  const QuantSpec q_sym = QuantSpec::fixed(cfg.activation_bits, -1.0, 1.0);
  const QuantSpec q_unit = QuantSpec::fixed(cfg.activation_bits, 0.0, 1.0);

  // Matmul inputs quantize under both placements. h off the previous step is
  // already on the grid in a conventional run; the operator is idempotent.
  const Tensor xq = quantize(x, q_sym);
  const Tensor hq = quantize(prev.h, q_sym);

  const Precision kw = cfg.weight_bits;
  Tensor zi = elementwise_add(affine(detail::effective_weight(lw.w_ii, kw), xq, lw.b_i),
                              as_vector(matmul(detail::effective_weight(lw.w_hi, kw), as_column(hq))));
  Tensor zf = elementwise_add(affine(detail::effective_weight(lw.w_if, kw), xq, lw.b_f),
                              as_vector(matmul(detail::effective_weight(lw.w_hf, kw), as_column(hq))));
  Tensor zg = elementwise_add(affine(detail::effective_weight(lw.w_ig, kw), xq, lw.b_g),
                              as_vector(matmul(detail::effective_weight(lw.w_hg, kw), as_column(hq))));
  Tensor zo = elementwise_add(affine(detail::effective_weight(lw.w_io, kw), xq, lw.b_o),
                              as_vector(matmul(detail::effective_weight(lw.w_ho, kw), as_column(hq))));

  Tensor i = sigmoid(zi), f = sigmoid(zf), g = tanh(zg), o = sigmoid(zo);
  if (conv) {
    i = quantize(i, q_unit);
    f = quantize(f, q_unit);
    o = quantize(o, q_unit);
    g = quantize(g, q_sym);
  }

  Tensor c = elementwise_add(elementwise_mul(f, prev.c), elementwise_mul(i, g));
  if (conv) {
    c = quantize(clamp(c, -cfg.cell_clip, cfg.cell_clip),
                 QuantSpec::fixed(cfg.activation_bits, -cfg.cell_clip, cfg.cell_clip));
  }
  Tensor h = elementwise_mul(o, tanh(c));
  if (conv) h = quantize(h, q_sym);
  return {std::move(h), std::move(c)};
}

}  // namespace detail

// One time step through the full layer stack. states holds one (h, c) per
// layer; layer l > 0 consumes the (possibly quantized) h emitted by the layer
// below within this same step.
inline std::vector<LstmState> step(const LstmConfig& cfg, const LstmWeights& weights,
                                   const std::vector<LstmState>& states, const Tensor& x) {
  validate(cfg);
  if (static_cast<int>(weights.layers.size()) != cfg.num_layers) {
    throw std::invalid_argument("lstm step: weights hold " + std::to_string(weights.layers.size()) +
                                " layers, config says " + std::to_string(cfg.num_layers));
  }
  if (static_cast<int>(states.size()) != cfg.num_layers) {
    throw std::invalid_argument("lstm step: state count does not match num_layers");
  }
  if (x.ndim() != 1 || x.extent(0) != cfg.input_size) {
    throw std::invalid_argument("lstm step: input shape " + x.shape_str() + " does not match config");
  }
  for (double v : x.data()) {
    if (!(v >= -1.0 && v <= 1.0)) {
      throw std::invalid_argument("lstm step: input values must lie in [-1, 1]");
    }
  }
  for (int l = 0; l < cfg.num_layers; ++l) {
    detail::check_layer_shapes(cfg, weights.layers[static_cast<std::size_t>(l)], l);
    if (states[static_cast<std::size_t>(l)].h.numel() != cfg.hidden_size ||
        states[static_cast<std::size_t>(l)].c.numel() != cfg.hidden_size) {
      throw std::invalid_argument("lstm step: state size does not match hidden_size");
    }
  }
  std::vector<LstmState> out;
  out.reserve(states.size());
  const Tensor* input = &x;
  for (int l = 0; l < cfg.num_layers; ++l) {
    out.push_back(detail::step_layer(cfg, weights.layers[static_cast<std::size_t>(l)],
                                     states[static_cast<std::size_t>(l)], *input));
    input = &out.back().h;
  }
  return out;
}

// Single-layer convenience form.
inline LstmState step(const LstmConfig& cfg, const LstmWeights& weights, const LstmState& state,
                      const Tensor& x) {
  if (cfg.num_layers != 1) {
    throw std::invalid_argument("lstm step: single-state form requires num_layers == 1");
  }
  return step(cfg, weights, std::vector<LstmState>{state}, x).front();
}

struct SequenceResult {
  std::vector<Tensor> outputs;                   // top-layer h per step
  std::vector<std::vector<LstmState>> trace;     // full state stack per step
};

inline SequenceResult run_sequence(const LstmConfig& cfg, const LstmWeights& weights,
                                   const std::vector<Tensor>& xs,
                                   const std::vector<LstmState>& initial) {
  if (xs.empty()) throw std::invalid_argument("run_sequence: empty input sequence");
  SequenceResult res;
  res.outputs.reserve(xs.size());
  res.trace.reserve(xs.size());
  std::vector<LstmState> cur = initial;
  for (const Tensor& x : xs) {
    cur = step(cfg, weights, cur, x);
    res.outputs.push_back(cur.back().h);
    res.trace.push_back(cur);
  }
  return res;
}

// Saturating-gate initialization: weight gain 2/sqrt(fan_in) and forget bias
// 2.0. Random mid-range gates would let a coarse conventional run saturate
// its error within a few steps; saturated gates start out accurate on the
// grid and drift gradually, which is also the regime trained LSTMs live in.
inline LstmWeights build_random_lstm(const LstmConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed, "lstm.weights");
  LstmWeights w;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const std::int64_t in = l == 0 ? cfg.input_size : cfg.hidden_size;
    const std::int64_t hid = cfg.hidden_size;
    const double si = 2.0 / std::sqrt(static_cast<double>(in));
    const double sh = 2.0 / std::sqrt(static_cast<double>(hid));
    LstmLayerWeights lw;
    lw.w_ii = random_gaussian(rng, {hid, in}, si);
    lw.w_if = random_gaussian(rng, {hid, in}, si);
    lw.w_ig = random_gaussian(rng, {hid, in}, si);
    lw.w_io = random_gaussian(rng, {hid, in}, si);
    lw.w_hi = random_gaussian(rng, {hid, hid}, sh);
    lw.w_hf = random_gaussian(rng, {hid, hid}, sh);
    lw.w_hg = random_gaussian(rng, {hid, hid}, sh);
    lw.w_ho = random_gaussian(rng, {hid, hid}, sh);
    lw.b_i = Tensor({hid});
    lw.b_f = Tensor::full({hid}, 2.0);
    lw.b_g = Tensor({hid});
    lw.b_o = Tensor({hid});
    w.layers.push_back(std::move(lw));
  }
  return w;
}

// Default stimulus: a bounded random walk in [-1,1] (innovation 0.35),
// i.e. temporally correlated inputs like real embeddings rather than
// white noise.
inline std::vector<Tensor> default_lstm_inputs(const LstmConfig& cfg, int steps) {
  if (steps < 1) throw std::invalid_argument("default_lstm_inputs: steps must be >= 1");
  Rng rng(cfg.seed, "lstm.input");
  std::vector<Tensor> xs;
  xs.reserve(static_cast<std::size_t>(steps));
  Tensor cur = random_uniform(rng, {cfg.input_size}, -1.0, 1.0);
  for (int t = 0; t < steps; ++t) {
    for (double& v : cur.data()) {
      v += 0.35 * rng.gaussian();
      v = v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v);
    }
    xs.push_back(cur);
  }
  return xs;
}

}  // namespace qhwy
