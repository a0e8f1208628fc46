#pragma once

// Toy residual networks with per-edge precision annotations.
//
// Every block keeps the input spatial/channel shape: convs_per_block 3x3
// convolutions (stride 1, pad 1) on the residual path, an identity skip, and
// a post-addition tap. The block entry applies ReLU then a clamp to [0,1]
// (one fused clamp); mid-path conv outputs do the same; the final conv of the
// path emits raw so the path output is zero-mean rather than saturating.
//
// Quantized execution inserts operators by block style:
//   conventional_postact  the block input is quantized *before* the branch
//                         point, so the skip carries quantization error.
//   highway_postact       the quantizer sits *after* the branch, on the
//                         residual path only; the skip stays at full precision
//                         (or is reduced to highway_bits via dynamic-range
//                         quantization when configured).
//   highway_preact        same placement rule as highway_postact; kept as a
//                         distinct tag for pre-activation style networks.
//
// Activations quantize with fixed(0,1) at activation_bits; weights fake-
// quantize with a fitted Laplace grid at weight_bits (skipped entirely when
// weight_bits is full or beyond the solver table, where the grids are
// effectively lossless for these nets).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qhwy/quant.hpp"
#include "qhwy/rng.hpp"
#include "qhwy/tensor.hpp"

namespace qhwy {

enum class BlockStyle { ConventionalPostAct, HighwayPostAct, HighwayPreAct };

inline bool is_highway(BlockStyle s) { return s != BlockStyle::ConventionalPostAct; }

inline const char* to_string(BlockStyle s) {
  switch (s) {
    case BlockStyle::ConventionalPostAct: return "conventional_postact";
    case BlockStyle::HighwayPostAct: return "highway_postact";
    case BlockStyle::HighwayPreAct: return "highway_preact";
  }
  return "?";
}

struct ResidualNetConfig {
  std::int64_t num_blocks = 4;
  std::int64_t channels = 16;
  std::int64_t spatial = 8;  // H == W
  int convs_per_block = 2;
  int activation_bits = 4;
  Precision weight_bits = Precision::full();
  BlockStyle style = BlockStyle::HighwayPostAct;
  Precision highway_bits = Precision::full();
  bool quantize_first_last = false;
  std::uint64_t seed = 1;
};

inline void validate(const ResidualNetConfig& cfg) {
  if (cfg.num_blocks < 1) throw std::invalid_argument("resnet config: num_blocks must be >= 1");
  if (cfg.channels < 1) throw std::invalid_argument("resnet config: channels must be >= 1");
  if (cfg.spatial < 1) throw std::invalid_argument("resnet config: spatial must be >= 1");
  if (cfg.convs_per_block < 1 || cfg.convs_per_block > 3) {
    throw std::invalid_argument("resnet config: convs_per_block must be 1, 2, or 3");
  }
  if (cfg.activation_bits < 1) throw std::invalid_argument("resnet config: activation_bits must be >= 1");
  if (!cfg.weight_bits.is_full() && cfg.weight_bits.bits < 1) {
    throw std::invalid_argument("resnet config: weight_bits must be full or >= 1");
  }
  if (!cfg.highway_bits.is_full() && cfg.highway_bits.bits < 1) {
    throw std::invalid_argument("resnet config: highway_bits must be full or >= 1");
  }
}

struct ResidualNet {
  ResidualNetConfig config;
  // weights[block][conv]: CxCx3x3
  std::vector<std::vector<Tensor>> weights;
  // weight_specs[block][conv]: fitted Laplace spec, or bits == 0 when this
  // conv's weights stay unquantized (full precision config, lossless widths,
  // or the first/last exemption).
  std::vector<std::vector<QuantSpec>> weight_specs;
};

namespace detail {

inline bool weight_quant_enabled(const ResidualNetConfig& cfg, std::int64_t block, int conv) {
  if (cfg.weight_bits.is_full()) return false;
  if (cfg.weight_bits.bits > 8) return false;  // beyond the Laplace table: effectively lossless
  if (!cfg.quantize_first_last) {
    if (block == 0 && conv == 0) return false;
    if (block == cfg.num_blocks - 1 && conv == cfg.convs_per_block - 1) return false;
  }
  return true;
}

}  // namespace detail

inline ResidualNet build_random_net(const ResidualNetConfig& cfg) {
  validate(cfg);
  ResidualNet net;
  net.config = cfg;
  Rng rng(cfg.seed, "resnet.weights");
  const double stddev = 1.0 / std::sqrt(static_cast<double>(cfg.channels) * 9.0);
  net.weights.resize(static_cast<std::size_t>(cfg.num_blocks));
  net.weight_specs.resize(static_cast<std::size_t>(cfg.num_blocks));
  for (std::int64_t b = 0; b < cfg.num_blocks; ++b) {
    auto& blk = net.weights[static_cast<std::size_t>(b)];
    auto& specs = net.weight_specs[static_cast<std::size_t>(b)];
    for (int j = 0; j < cfg.convs_per_block; ++j) {
      Tensor w = random_gaussian(rng, {cfg.channels, cfg.channels, 3, 3}, stddev);
      if (detail::weight_quant_enabled(cfg, b, j)) {
        specs.push_back(fit_weight_quantizer(w, cfg.weight_bits.bits));
      } else {
        specs.push_back(QuantSpec{});  // bits == 0: marker for "no weight quantization"
      }
      blk.push_back(std::move(w));
    }
  }
  return net;
}

struct ForwardResult {
  Tensor y;
  std::vector<Tensor> taps;  // post-addition output of every block, in order
};

inline ForwardResult forward(const ResidualNet& net, const Tensor& x, bool quantized) {
  const ResidualNetConfig& cfg = net.config;
  if (x.ndim() != 3 || x.extent(0) != cfg.channels || x.extent(1) != cfg.spatial ||
      x.extent(2) != cfg.spatial) {
    throw std::invalid_argument("forward: input shape " + x.shape_str() + " does not match config");
  }
  for (double v : x.data()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("forward: input values must lie in [0, 1]");
    }
  }

  const QuantSpec act_spec = QuantSpec::fixed(cfg.activation_bits, 0.0, 1.0);
  const ConvSpec conv_spec{cfg.channels, cfg.channels, 3, 1, 1};
  const bool highway = is_highway(cfg.style);

  ForwardResult res;
  res.taps.reserve(static_cast<std::size_t>(cfg.num_blocks));
  Tensor cur = x;
  for (std::int64_t b = 0; b < cfg.num_blocks; ++b) {
    // Block entry activation (ReLU + clamp to [0,1], fused) applies in both
    // full-precision and quantized runs: it is part of the architecture, not
    // of the quantization scheme.
    const Tensor entry = clamp(cur, 0.0, 1.0);

    Tensor path_in, skip;
    if (!quantized) {
      path_in = entry;
      skip = entry;
    } else if (highway) {
      path_in = quantize(entry, act_spec);
      skip = cfg.highway_bits.is_full() ? entry : quantize_dynamic(entry, cfg.highway_bits.bits);
    } else {
      path_in = quantize(entry, act_spec);  // before the branch point: the skip shares the error
      skip = path_in;
    }

    Tensor t = path_in;
    const auto& blk = net.weights[static_cast<std::size_t>(b)];
    const auto& specs = net.weight_specs[static_cast<std::size_t>(b)];
    for (int j = 0; j < cfg.convs_per_block; ++j) {
      const Tensor& w = blk[static_cast<std::size_t>(j)];
      if (quantized && specs[static_cast<std::size_t>(j)].bits > 0) {
        t = conv2d(t, quantize(w, specs[static_cast<std::size_t>(j)]), conv_spec);
      } else {
        t = conv2d(t, w, conv_spec);
      }
      if (j + 1 < cfg.convs_per_block) {
        t = clamp(t, 0.0, 1.0);  // mid-path ReLU + clamp
        if (quantized) t = quantize(t, act_spec);
      }
      // last conv emits raw: zero-mean path output
    }

    cur = elementwise_add(t, skip);
    res.taps.push_back(cur);
  }
  res.y = cur;
  return res;
}

struct TapPair {
  std::vector<Tensor> full_precision;
  std::vector<Tensor> quantized;
};

// Builds the seeded net once and executes it in both modes on the same input.
inline TapPair run_pair(const ResidualNetConfig& cfg, const Tensor& x) {
  const ResidualNet net = build_random_net(cfg);
  ForwardResult fp = forward(net, x, false);
  ForwardResult q = forward(net, x, true);
  return {std::move(fp.taps), std::move(q.taps)};
}

// Default stimulus: seeded uniform noise in [0,1], shaped for the config.
inline Tensor default_resnet_input(const ResidualNetConfig& cfg) {
  Rng rng(cfg.seed, "resnet.input");
  return random_uniform(rng, {cfg.channels, cfg.spatial, cfg.spatial}, 0.0, 1.0);
}

}  // namespace qhwy
