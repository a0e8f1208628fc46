#pragma once

// Operation counting by precision class and a parametric energy/area model of
// a fixed-point accelerator. Counts are exact architecture arithmetic; the
// energy side is an explicit-constant model (no published per-op constants
// exist for the reference design), with defaults calibrated so that dropping
// a MAC array from 16 to 3 bits cuts compute energy by roughly 73%.
//
// Cost widths: "full" precision maps to 32-bit hardware. MAC energy scales as
// ((bits_a * bits_w) / 256)^exponent relative to a 16x16 reference MAC; the
// high-precision side ops (skip adds, gate nonlinearities, elementwise muls)
// are costed at the highway width. Each activation tensor moves through
// on-chip memory once in each direction; a tensor spills off-chip when its
// element count exceeds the on-chip capacity, which is provisioned
// proportionally to precision (capacity_bytes = onchip_bytes_per_bit * width),
// so the spill decision is width-independent and energy stays monotone in
// every bit-width.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qhwy/lstm.hpp"
#include "qhwy/resnet.hpp"

namespace qhwy {

struct OpCounts {
  std::int64_t low_precision_mac = 0;
  std::int64_t high_precision_add = 0;
  std::int64_t nonlinear_op = 0;
  std::int64_t elementwise_mul = 0;
};

inline OpCounts operator+(OpCounts a, const OpCounts& b) {
  a.low_precision_mac += b.low_precision_mac;
  a.high_precision_add += b.high_precision_add;
  a.nonlinear_op += b.nonlinear_op;
  a.elementwise_mul += b.elementwise_mul;
  return a;
}

inline OpCounts operator*(OpCounts a, std::int64_t n) {
  a.low_precision_mac *= n;
  a.high_precision_add *= n;
  a.nonlinear_op *= n;
  a.elementwise_mul *= n;
  return a;
}

// Per layer, per time step.
inline OpCounts count_lstm_ops(std::int64_t input_size, std::int64_t hidden_size,
                               LstmPlacement placement) {
  if (input_size < 1 || hidden_size < 1) {
    throw std::invalid_argument("count_lstm_ops: sizes must be >= 1");
  }
  OpCounts c;
  c.low_precision_mac = 4 * (input_size + hidden_size) * hidden_size;
  c.nonlinear_op = 5 * hidden_size;    // four gate activations + tanh(c)
  c.elementwise_mul = 3 * hidden_size; // f*c, i*g, o*tanh(c)
  // Only the highway placement performs the state addition at high precision;
  // a conventional pipeline runs it inside the quantized datapath.
  c.high_precision_add = placement == LstmPlacement::Highway ? hidden_size : 0;
  return c;
}

inline OpCounts count_resnet_ops(const ResidualNetConfig& cfg) {
  // A zero-block net is a meaningful degenerate case for counting (the empty
  // sum), even though it cannot be built or run.
  if (cfg.num_blocks == 0) {
    ResidualNetConfig probe = cfg;
    probe.num_blocks = 1;
    validate(probe);
    return OpCounts{};
  }
  validate(cfg);
  const std::int64_t elems = cfg.channels * cfg.spatial * cfg.spatial;
  OpCounts c;
  c.low_precision_mac =
      cfg.num_blocks * cfg.convs_per_block * cfg.channels * cfg.channels * 9 * cfg.spatial * cfg.spatial;
  c.high_precision_add = cfg.num_blocks * elems;                       // skip additions
  c.nonlinear_op = cfg.num_blocks * cfg.convs_per_block * elems;       // entry + mid-path ReLUs
  c.elementwise_mul = 0;
  return c;
}

struct CostParams {
  double mac16_energy = 1.0;          // energy of one 16x16-bit MAC (reference unit)
  double mac_exponent = 0.39;         // scaling exponent over (bits_a*bits_w)/256
  double sram_bit_energy = 0.05;      // on-chip access energy per bit
  double dram_bit_energy = 1.0;       // off-chip access energy per bit
  double area_per_pe = 1.0;           // PE area at the 16-bit reference
  double onchip_bytes_per_bit = 65536.0;  // capacity per bit of tensor width
};

inline void validate(const CostParams& p) {
  if (!(p.mac16_energy > 0.0) || !(p.mac_exponent > 0.0) || !(p.sram_bit_energy > 0.0) ||
      !(p.dram_bit_energy > 0.0) || !(p.area_per_pe > 0.0) || !(p.onchip_bytes_per_bit > 0.0)) {
    throw std::invalid_argument("cost params: all fields must be positive");
  }
}

enum class TrafficClass { LowPrecision, Highway, Weights };

struct TensorAccess {
  std::int64_t elements = 0;
  std::int64_t accesses = 0;  // reads + writes of the whole tensor
  TrafficClass cls = TrafficClass::LowPrecision;
};

using TensorTraffic = std::vector<TensorAccess>;

// Accounting: the input loads once; per block, the quantized path entry and
// every mid-path conv output live in the low-precision class (write + read),
// while the raw final conv output, the skip tensor, and the block output ride
// the highway class; weights stream in once per inference.
inline TensorTraffic resnet_traffic(const ResidualNetConfig& cfg) {
  validate(cfg);
  const std::int64_t elems = cfg.channels * cfg.spatial * cfg.spatial;
  const std::int64_t welems = cfg.channels * cfg.channels * 9;
  TensorTraffic t;
  t.push_back({elems, 1, TrafficClass::LowPrecision});  // network input
  for (std::int64_t b = 0; b < cfg.num_blocks; ++b) {
    t.push_back({elems, 2, TrafficClass::LowPrecision});  // quantized path entry
    for (int j = 0; j + 1 < cfg.convs_per_block; ++j) {
      t.push_back({elems, 2, TrafficClass::LowPrecision});  // mid-path conv output
    }
    t.push_back({elems, 2, TrafficClass::Highway});  // raw final conv output
    t.push_back({elems, 2, TrafficClass::Highway});  // skip tensor
    t.push_back({elems, 2, TrafficClass::Highway});  // block output
    for (int j = 0; j < cfg.convs_per_block; ++j) {
      t.push_back({welems, 1, TrafficClass::Weights});
    }
  }
  return t;
}

// Per-step state and gate tensors; weights load once per sequence. Under the
// highway placement the c/h carriers and gate outputs stay at high precision;
// a conventional pipeline keeps them in the low-precision class.
inline TensorTraffic lstm_traffic(const LstmConfig& cfg, int steps) {
  validate(cfg);
  if (steps < 1) throw std::invalid_argument("lstm_traffic: steps must be >= 1");
  const TrafficClass state_cls = cfg.placement == LstmPlacement::Highway
                                     ? TrafficClass::Highway
                                     : TrafficClass::LowPrecision;
  TensorTraffic t;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const std::int64_t in = l == 0 ? cfg.input_size : cfg.hidden_size;
    const std::int64_t hid = cfg.hidden_size;
    for (int s = 0; s < steps; ++s) {
      t.push_back({in, 2, TrafficClass::LowPrecision});   // quantized step input
      t.push_back({hid, 2, TrafficClass::LowPrecision});  // quantized h at the matmul input
      t.push_back({4 * hid, 2, state_cls});               // gate outputs
      t.push_back({hid, 2, state_cls});                   // c
      t.push_back({hid, 2, state_cls});                   // h
    }
    t.push_back({4 * (in + hid) * hid, 1, TrafficClass::Weights});
  }
  return t;
}

struct CostReport {
  OpCounts counts;
  int bits_activation = 0, bits_weight = 0, bits_highway = 0;
  double energy_compute = 0.0;
  double energy_onchip = 0.0;
  double energy_offchip = 0.0;
  double energy_total = 0.0;
  double area = 0.0;
  double highway_overhead_fraction = 0.0;
};

namespace detail {

inline int cost_bits(int k) { return k >= kLosslessBits ? 32 : (k > 32 ? 32 : k); }
inline int cost_bits(Precision p) { return p.is_full() ? 32 : cost_bits(p.bits); }

inline double mac_energy(const CostParams& p, int ba, int bw) {
  return p.mac16_energy *
         std::pow(static_cast<double>(ba) * static_cast<double>(bw) / 256.0, p.mac_exponent);
}

inline double total_energy(const OpCounts& counts, int ba, int bw, int bh, const CostParams& p,
                           const TensorTraffic& traffic, double* compute_out, double* onchip_out,
                           double* offchip_out) {
  const double e_mac = mac_energy(p, ba, bw);
  // Side ops (skip adds, nonlinearities, elementwise muls) run on a fixed
  // 32-bit unit regardless of the highway width; the width matters for
  // traffic, not compute.
  const double e_hp = mac_energy(p, 32, 32);
  const double compute =
      static_cast<double>(counts.low_precision_mac) * e_mac +
      static_cast<double>(counts.high_precision_add + counts.nonlinear_op + counts.elementwise_mul) *
          e_hp;
  double onchip = 0.0, offchip = 0.0;
  const double capacity_elems = 8.0 * p.onchip_bytes_per_bit;  // width-independent by construction
  for (const TensorAccess& a : traffic) {
    int bits = 0;
    switch (a.cls) {
      case TrafficClass::LowPrecision: bits = ba; break;
      case TrafficClass::Highway: bits = bh; break;
      case TrafficClass::Weights: bits = bw; break;
    }
    const double moved_bits =
        static_cast<double>(a.elements) * static_cast<double>(a.accesses) * static_cast<double>(bits);
    if (static_cast<double>(a.elements) <= capacity_elems) {
      onchip += moved_bits * p.sram_bit_energy;
    } else {
      offchip += moved_bits * p.dram_bit_energy;
    }
  }
  if (compute_out) *compute_out = compute;
  if (onchip_out) *onchip_out = onchip;
  if (offchip_out) *offchip_out = offchip;
  return compute + onchip + offchip;
}

}  // namespace detail

inline CostReport estimate_cost(const OpCounts& counts, int activation_bits, Precision weight_bits,
                                Precision highway_bits, const CostParams& params,
                                const TensorTraffic& traffic) {
  validate(params);
  if (activation_bits < 1) throw std::invalid_argument("estimate_cost: activation_bits must be >= 1");
  CostReport r;
  r.counts = counts;
  r.bits_activation = detail::cost_bits(activation_bits);
  r.bits_weight = detail::cost_bits(weight_bits);
  r.bits_highway = detail::cost_bits(highway_bits);
  r.energy_total = detail::total_energy(counts, r.bits_activation, r.bits_weight, r.bits_highway,
                                        params, traffic, &r.energy_compute, &r.energy_onchip,
                                        &r.energy_offchip);
  // Baseline: the same pipeline with the highway tensors narrowed to the low
  // activation precision. The overhead fraction is the extra energy the
  // high-precision path costs relative to that baseline.
  const double baseline = detail::total_energy(counts, r.bits_activation, r.bits_weight,
                                               r.bits_activation, params, traffic, nullptr, nullptr,
                                               nullptr);
  r.highway_overhead_fraction = (r.energy_total - baseline) / baseline;
  // PE array at the low precision plus a high-precision function unit.
  r.area = params.area_per_pe * (static_cast<double>(r.bits_activation) *
                                 static_cast<double>(r.bits_weight) / 256.0) +
           0.25 * params.area_per_pe *
               (static_cast<double>(r.bits_highway) * static_cast<double>(r.bits_highway) / 1024.0);
  return r;
}

}  // namespace qhwy
