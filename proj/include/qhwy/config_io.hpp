#pragma once

// JSON bindings for configs and cost parameters. Parsing is strict: unknown
// keys are rejected so a typo in a config file fails loudly instead of
// silently running defaults.

#include <set>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "qhwy/cost_model.hpp"
#include "qhwy/lstm.hpp"
#include "qhwy/resnet.hpp"

namespace qhwy {

using json = nlohmann::json;

inline json precision_to_json(Precision p) {
  if (p.is_full()) return json("full");
  return json(p.bits);
}

inline Precision precision_from_json(const json& j, const std::string& key) {
  if (j.is_string()) {
    if (j.get<std::string>() == "full") return Precision::full();
    throw std::invalid_argument("config: " + key + " must be \"full\" or a positive integer");
  }
  if (j.is_number_integer()) {
    const int k = j.get<int>();
    if (k < 1) throw std::invalid_argument("config: " + key + " must be >= 1");
    return Precision::of(k);
  }
  throw std::invalid_argument("config: " + key + " must be \"full\" or a positive integer");
}

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                                const std::string& what) {
  if (!j.is_object()) throw std::invalid_argument("config: " + what + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      throw std::invalid_argument("config: unknown " + what + " key '" + item.key() + "'");
    }
  }
}

template <typename T>
inline T require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw std::invalid_argument("config: missing required key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config: key '" + key + "' has the wrong type");
  }
}

template <typename T>
inline T optional(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config: key '" + key + "' has the wrong type");
  }
}

}  // namespace detail

inline BlockStyle block_style_from_string(const std::string& s) {
  if (s == "conventional_postact") return BlockStyle::ConventionalPostAct;
  if (s == "highway_postact") return BlockStyle::HighwayPostAct;
  if (s == "highway_preact") return BlockStyle::HighwayPreAct;
  throw std::invalid_argument("config: unknown style '" + s +
                              "' (expected conventional_postact, highway_postact, or highway_preact)");
}

inline LstmPlacement lstm_placement_from_string(const std::string& s) {
  if (s == "conventional") return LstmPlacement::Conventional;
  if (s == "highway") return LstmPlacement::Highway;
  throw std::invalid_argument("config: unknown placement '" + s +
                              "' (expected conventional or highway)");
}

inline ResidualNetConfig resnet_config_from_json(const json& j) {
  detail::reject_unknown_keys(j,
                              {"kind", "num_blocks", "channels", "spatial", "convs_per_block",
                               "activation_bits", "weight_bits", "style", "highway_bits",
                               "quantize_first_last", "seed"},
                              "resnet config");
  ResidualNetConfig cfg;
  cfg.num_blocks = detail::require<std::int64_t>(j, "num_blocks");
  cfg.channels = detail::require<std::int64_t>(j, "channels");
  cfg.spatial = detail::require<std::int64_t>(j, "spatial");
  cfg.convs_per_block = detail::optional<int>(j, "convs_per_block", 2);
  cfg.activation_bits = detail::require<int>(j, "activation_bits");
  cfg.weight_bits =
      j.contains("weight_bits") ? precision_from_json(j.at("weight_bits"), "weight_bits") : Precision::full();
  cfg.style = block_style_from_string(detail::optional<std::string>(j, "style", "highway_postact"));
  cfg.highway_bits = j.contains("highway_bits") ? precision_from_json(j.at("highway_bits"), "highway_bits")
                                                : Precision::full();
  cfg.quantize_first_last = detail::optional<bool>(j, "quantize_first_last", false);
  cfg.seed = detail::optional<std::uint64_t>(j, "seed", 1);
  validate(cfg);
  return cfg;
}

inline json resnet_config_to_json(const ResidualNetConfig& cfg) {
  json j;
  j["kind"] = "resnet";
  j["num_blocks"] = cfg.num_blocks;
  j["channels"] = cfg.channels;
  j["spatial"] = cfg.spatial;
  j["convs_per_block"] = cfg.convs_per_block;
  j["activation_bits"] = cfg.activation_bits;
  j["weight_bits"] = precision_to_json(cfg.weight_bits);
  j["style"] = to_string(cfg.style);
  j["highway_bits"] = precision_to_json(cfg.highway_bits);
  j["quantize_first_last"] = cfg.quantize_first_last;
  j["seed"] = cfg.seed;
  return j;
}

inline LstmConfig lstm_config_from_json(const json& j) {
  detail::reject_unknown_keys(j,
                              {"kind", "input_size", "hidden_size", "num_layers", "activation_bits",
                               "weight_bits", "placement", "cell_clip", "seed"},
                              "lstm config");
  LstmConfig cfg;
  cfg.input_size = detail::require<std::int64_t>(j, "input_size");
  cfg.hidden_size = detail::require<std::int64_t>(j, "hidden_size");
  cfg.num_layers = detail::optional<int>(j, "num_layers", 1);
  cfg.activation_bits = detail::require<int>(j, "activation_bits");
  cfg.weight_bits =
      j.contains("weight_bits") ? precision_from_json(j.at("weight_bits"), "weight_bits") : Precision::full();
  cfg.placement = lstm_placement_from_string(detail::optional<std::string>(j, "placement", "highway"));
  cfg.cell_clip = detail::optional<double>(j, "cell_clip", 2.0);
  cfg.seed = detail::optional<std::uint64_t>(j, "seed", 1);
  validate(cfg);
  return cfg;
}

inline json lstm_config_to_json(const LstmConfig& cfg) {
  json j;
  j["kind"] = "lstm";
  j["input_size"] = cfg.input_size;
  j["hidden_size"] = cfg.hidden_size;
  j["num_layers"] = cfg.num_layers;
  j["activation_bits"] = cfg.activation_bits;
  j["weight_bits"] = precision_to_json(cfg.weight_bits);
  j["placement"] = to_string(cfg.placement);
  j["cell_clip"] = cfg.cell_clip;
  j["seed"] = cfg.seed;
  return j;
}

inline CostParams cost_params_from_json(const json& j) {
  detail::reject_unknown_keys(j,
                              {"mac16_energy", "mac_exponent", "sram_bit_energy", "dram_bit_energy",
                               "area_per_pe", "onchip_bytes_per_bit"},
                              "cost params");
  CostParams p;
  p.mac16_energy = detail::optional<double>(j, "mac16_energy", p.mac16_energy);
  p.mac_exponent = detail::optional<double>(j, "mac_exponent", p.mac_exponent);
  p.sram_bit_energy = detail::optional<double>(j, "sram_bit_energy", p.sram_bit_energy);
  p.dram_bit_energy = detail::optional<double>(j, "dram_bit_energy", p.dram_bit_energy);
  p.area_per_pe = detail::optional<double>(j, "area_per_pe", p.area_per_pe);
  p.onchip_bytes_per_bit = detail::optional<double>(j, "onchip_bytes_per_bit", p.onchip_bytes_per_bit);
  validate(p);
  return p;
}

inline json cost_params_to_json(const CostParams& p) {
  json j;
  j["mac16_energy"] = p.mac16_energy;
  j["mac_exponent"] = p.mac_exponent;
  j["sram_bit_energy"] = p.sram_bit_energy;
  j["dram_bit_energy"] = p.dram_bit_energy;
  j["area_per_pe"] = p.area_per_pe;
  j["onchip_bytes_per_bit"] = p.onchip_bytes_per_bit;
  return j;
}

inline json op_counts_to_json(const OpCounts& c) {
  json j;
  j["low_precision_mac"] = c.low_precision_mac;
  j["high_precision_add"] = c.high_precision_add;
  j["nonlinear_op"] = c.nonlinear_op;
  j["elementwise_mul"] = c.elementwise_mul;
  return j;
}

inline json cost_report_to_json(const CostReport& r) {
  json j;
  j["counts"] = op_counts_to_json(r.counts);
  j["bits_activation"] = r.bits_activation;
  j["bits_weight"] = r.bits_weight;
  j["bits_highway"] = r.bits_highway;
  j["energy_compute"] = r.energy_compute;
  j["energy_onchip"] = r.energy_onchip;
  j["energy_offchip"] = r.energy_offchip;
  j["energy_total"] = r.energy_total;
  j["area"] = r.area;
  j["highway_overhead_fraction"] = r.highway_overhead_fraction;
  return j;
}

}  // namespace qhwy
