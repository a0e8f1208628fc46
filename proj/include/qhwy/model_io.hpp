#pragma once

// Binary model container.
//
// Layout:
//   bytes [0, 9)    magic "QHWYMDL1\n"
//   bytes [9, 17)   manifest length M, unsigned 64-bit little-endian
//   bytes [17, 17+M) manifest, UTF-8 JSON:
//       {"config": {...}, "format_version": 1, "kind": "...",
//        "tensors": [{"length": ..., "name": ..., "offset": ..., "shape": [...]}, ...]}
//   bytes [17+M, end) payload: tensor data as float32 little-endian, row-major,
//                     packed back to back in manifest order (offset is relative
//                     to the payload start)
//
// Loading is strict: wrong magic, unknown manifest keys, a format_version this
// code does not understand, non-contiguous offsets, or a payload that does not
// match the manifest byte-for-byte all raise errors that name the byte offset
// involved.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qhwy/config_io.hpp"
#include "qhwy/lstm.hpp"
#include "qhwy/resnet.hpp"
#include "qhwy/tensor.hpp"

namespace qhwy {

static_assert(std::endian::native == std::endian::little,
              "model container code assumes a little-endian host");

inline constexpr char kModelMagic[] = "QHWYMDL1\n";  // 9 bytes, excluding the NUL
inline constexpr std::size_t kModelMagicSize = 9;
inline constexpr std::size_t kModelHeaderSize = kModelMagicSize + 8;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct ModelContainer {
  std::string kind;
  json config;
  std::vector<NamedTensor> tensors;
};

namespace detail {

inline void append_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t read_u64le(const std::string& buf, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[offset + i])) << (8 * i);
  }
  return v;
}

inline void append_f32le(std::string& out, double value) {
  const float f = static_cast<float>(value);
  char raw[4];
  std::memcpy(raw, &f, 4);
  out.append(raw, 4);
}

inline double read_f32le(const char* p) {
  float f;
  std::memcpy(&f, p, 4);
  return static_cast<double>(f);
}

}  // namespace detail

inline std::string serialize_container(const ModelContainer& container) {
  json manifest;
  manifest["format_version"] = 1;
  manifest["kind"] = container.kind;
  manifest["config"] = container.config;
  manifest["tensors"] = json::array();
  std::uint64_t offset = 0;
  for (const NamedTensor& nt : container.tensors) {
    json entry;
    entry["name"] = nt.name;
    entry["shape"] = nt.tensor.shape();
    entry["offset"] = offset;
    const std::uint64_t length = static_cast<std::uint64_t>(nt.tensor.numel()) * 4;
    entry["length"] = length;
    manifest["tensors"].push_back(std::move(entry));
    offset += length;
  }
  const std::string manifest_str = manifest.dump();

  std::string out;
  out.reserve(kModelHeaderSize + manifest_str.size() + offset);
  out.append(kModelMagic, kModelMagicSize);
  detail::append_u64le(out, manifest_str.size());
  out += manifest_str;
  for (const NamedTensor& nt : container.tensors) {
    for (double v : nt.tensor.data()) detail::append_f32le(out, v);
  }
  return out;
}

inline ModelContainer parse_container(const std::string& buf, const std::string& origin) {
  auto fail = [&origin](const std::string& msg) -> void {
    throw std::runtime_error("model container " + origin + ": " + msg);
  };

  if (buf.size() < kModelMagicSize) {
    fail("file truncated: " + std::to_string(buf.size()) + " bytes, need at least " +
         std::to_string(kModelMagicSize) + " for the magic at offset 0");
  }
  if (std::memcmp(buf.data(), kModelMagic, kModelMagicSize) != 0) {
    fail("bad magic at offset 0 (expected \"QHWYMDL1\\n\")");
  }
  if (buf.size() < kModelHeaderSize) {
    fail("file truncated: manifest length field at offset " + std::to_string(kModelMagicSize) +
         " needs 8 bytes, file has " + std::to_string(buf.size()));
  }
  const std::uint64_t manifest_len = detail::read_u64le(buf, kModelMagicSize);
  const std::uint64_t payload_start = kModelHeaderSize + manifest_len;
  if (buf.size() < payload_start) {
    fail("file truncated: manifest spans bytes [" + std::to_string(kModelHeaderSize) + ", " +
         std::to_string(payload_start) + "), file has " + std::to_string(buf.size()) + " bytes");
  }

  json manifest;
  try {
    manifest = json::parse(buf.substr(kModelHeaderSize, manifest_len));
  } catch (const json::exception& e) {
    fail("manifest at offset " + std::to_string(kModelHeaderSize) +
         " is not valid JSON: " + e.what());
  }
  detail::reject_unknown_keys(manifest, {"format_version", "kind", "config", "tensors"},
                              "model manifest");
  const int format_version = detail::require<int>(manifest, "format_version");
  if (format_version != 1) {
    fail("unsupported format_version " + std::to_string(format_version) + " (this build reads 1)");
  }

  ModelContainer container;
  container.kind = detail::require<std::string>(manifest, "kind");
  if (!manifest.contains("config") || !manifest.at("config").is_object()) {
    fail("manifest key 'config' must be a JSON object");
  }
  container.config = manifest.at("config");
  if (!manifest.contains("tensors") || !manifest.at("tensors").is_array()) {
    fail("manifest key 'tensors' must be a JSON array");
  }

  const std::uint64_t payload_size = buf.size() - payload_start;
  std::uint64_t expected_offset = 0;
  std::set<std::string> seen_names;
  for (const json& entry : manifest.at("tensors")) {
    detail::reject_unknown_keys(entry, {"name", "shape", "offset", "length"},
                                "model manifest tensor entry");
    const std::string name = detail::require<std::string>(entry, "name");
    if (name.empty()) fail("tensor entry has an empty name");
    if (!seen_names.insert(name).second) fail("duplicate tensor name '" + name + "'");
    std::vector<std::int64_t> shape;
    try {
      shape = entry.at("shape").get<std::vector<std::int64_t>>();
    } catch (const json::exception&) {
      fail("tensor '" + name + "': shape must be an array of integers");
    }
    std::uint64_t numel = 1;
    for (std::int64_t d : shape) {
      if (d < 0) fail("tensor '" + name + "': negative shape extent");
      numel *= static_cast<std::uint64_t>(d);
    }
    const std::uint64_t offset = detail::require<std::uint64_t>(entry, "offset");
    const std::uint64_t length = detail::require<std::uint64_t>(entry, "length");
    if (length != numel * 4) {
      fail("tensor '" + name + "': length " + std::to_string(length) + " does not match shape (" +
           std::to_string(numel) + " float32 values need " + std::to_string(numel * 4) + " bytes)");
    }
    if (offset != expected_offset) {
      fail("tensor '" + name + "': offset " + std::to_string(offset) +
           " is not contiguous (expected " + std::to_string(expected_offset) + ")");
    }
    if (offset + length > payload_size) {
      fail("truncated payload: tensor '" + name + "' needs bytes [" +
           std::to_string(payload_start + offset) + ", " + std::to_string(payload_start + offset + length) +
           "), file has " + std::to_string(buf.size()) + " bytes");
    }
    std::vector<double> data(numel);
    const char* base = buf.data() + payload_start + offset;
    for (std::uint64_t i = 0; i < numel; ++i) data[i] = detail::read_f32le(base + 4 * i);
    container.tensors.push_back(NamedTensor{name, Tensor(shape, std::move(data))});
    expected_offset = offset + length;
  }
  if (expected_offset != payload_size) {
    fail("trailing bytes: payload holds " + std::to_string(payload_size) +
         " bytes but the manifest accounts for " + std::to_string(expected_offset));
  }
  return container;
}

inline void save_container(const std::string& path, const ModelContainer& container) {
  const std::string bytes = serialize_container(container);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("model container " + path + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw std::runtime_error("model container " + path + ": write failed");
}

inline ModelContainer load_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("model container " + path + ": cannot open for reading");
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("model container " + path + ": read failed");
  return parse_container(buf, path);
}

// --- residual net ---------------------------------------------------------

inline ModelContainer to_container(const ResidualNet& net) {
  ModelContainer container;
  container.kind = "resnet";
  container.config = resnet_config_to_json(net.config);
  for (std::size_t b = 0; b < net.weights.size(); ++b) {
    for (std::size_t j = 0; j < net.weights[b].size(); ++j) {
      container.tensors.push_back(NamedTensor{
          "block" + std::to_string(b) + ".conv" + std::to_string(j) + ".weight", net.weights[b][j]});
    }
  }
  return container;
}

inline ResidualNet resnet_from_container(const ModelContainer& container, const std::string& origin) {
  if (container.kind != "resnet") {
    throw std::runtime_error("model container " + origin + ": kind '" + container.kind +
                             "' is not a resnet");
  }
  ResidualNet net;
  net.config = resnet_config_from_json(container.config);
  const std::size_t expected =
      static_cast<std::size_t>(net.config.num_blocks) * static_cast<std::size_t>(net.config.convs_per_block);
  if (container.tensors.size() != expected) {
    throw std::runtime_error("model container " + origin + ": expected " + std::to_string(expected) +
                             " weight tensors, found " + std::to_string(container.tensors.size()));
  }
  std::size_t idx = 0;
  const std::int64_t c = net.config.channels;
  for (std::int64_t b = 0; b < net.config.num_blocks; ++b) {
    std::vector<Tensor> blk;
    std::vector<QuantSpec> specs;
    for (int j = 0; j < net.config.convs_per_block; ++j, ++idx) {
      const NamedTensor& nt = container.tensors[idx];
      const std::string want = "block" + std::to_string(b) + ".conv" + std::to_string(j) + ".weight";
      if (nt.name != want) {
        throw std::runtime_error("model container " + origin + ": tensor " + std::to_string(idx) +
                                 " is named '" + nt.name + "', expected '" + want + "'");
      }
      if (nt.tensor.ndim() != 4 || nt.tensor.extent(0) != c || nt.tensor.extent(1) != c ||
          nt.tensor.extent(2) != 3 || nt.tensor.extent(3) != 3) {
        throw std::runtime_error("model container " + origin + ": tensor '" + nt.name +
                                 "' has shape " + nt.tensor.shape_str() + ", expected [" +
                                 std::to_string(c) + ", " + std::to_string(c) + ", 3, 3]");
      }
      if (detail::weight_quant_enabled(net.config, b, j)) {
        specs.push_back(fit_weight_quantizer(nt.tensor, net.config.weight_bits.bits));
      } else {
        specs.push_back(QuantSpec{});
      }
      blk.push_back(nt.tensor);
    }
    net.weights.push_back(std::move(blk));
    net.weight_specs.push_back(std::move(specs));
  }
  return net;
}

inline void save_resnet(const std::string& path, const ResidualNet& net) {
  save_container(path, to_container(net));
}

inline ResidualNet load_resnet(const std::string& path) {
  return resnet_from_container(load_container(path), path);
}

// --- lstm ------------------------------------------------------------------

namespace detail {

inline const char* const kLstmTensorNames[12] = {"w_ii", "w_if", "w_ig", "w_io", "w_hi", "w_hf",
                                                 "w_hg", "w_ho", "b_i",  "b_f",  "b_g",  "b_o"};

inline std::vector<const Tensor*> lstm_tensor_ptrs(const LstmLayerWeights& lw) {
  return {&lw.w_ii, &lw.w_if, &lw.w_ig, &lw.w_io, &lw.w_hi, &lw.w_hf,
          &lw.w_hg, &lw.w_ho, &lw.b_i,  &lw.b_f,  &lw.b_g,  &lw.b_o};
}

inline std::vector<Tensor*> lstm_tensor_ptrs(LstmLayerWeights& lw) {
  return {&lw.w_ii, &lw.w_if, &lw.w_ig, &lw.w_io, &lw.w_hi, &lw.w_hf,
          &lw.w_hg, &lw.w_ho, &lw.b_i,  &lw.b_f,  &lw.b_g,  &lw.b_o};
}

}  // namespace detail

inline ModelContainer to_container(const LstmConfig& cfg, const LstmWeights& weights) {
  ModelContainer container;
  container.kind = "lstm";
  container.config = lstm_config_to_json(cfg);
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    const auto ptrs = detail::lstm_tensor_ptrs(weights.layers[l]);
    for (int t = 0; t < 12; ++t) {
      container.tensors.push_back(
          NamedTensor{"layer" + std::to_string(l) + "." + detail::kLstmTensorNames[t], *ptrs[t]});
    }
  }
  return container;
}

inline std::pair<LstmConfig, LstmWeights> lstm_from_container(const ModelContainer& container,
                                                              const std::string& origin) {
  if (container.kind != "lstm") {
    throw std::runtime_error("model container " + origin + ": kind '" + container.kind +
                             "' is not an lstm");
  }
  LstmConfig cfg = lstm_config_from_json(container.config);
  const std::size_t expected = static_cast<std::size_t>(cfg.num_layers) * 12;
  if (container.tensors.size() != expected) {
    throw std::runtime_error("model container " + origin + ": expected " + std::to_string(expected) +
                             " weight tensors, found " + std::to_string(container.tensors.size()));
  }
  LstmWeights weights;
  std::size_t idx = 0;
  for (int l = 0; l < cfg.num_layers; ++l) {
    LstmLayerWeights lw;
    const auto ptrs = detail::lstm_tensor_ptrs(lw);
    for (int t = 0; t < 12; ++t, ++idx) {
      const NamedTensor& nt = container.tensors[idx];
      const std::string want = "layer" + std::to_string(l) + "." + detail::kLstmTensorNames[t];
      if (nt.name != want) {
        throw std::runtime_error("model container " + origin + ": tensor " + std::to_string(idx) +
                                 " is named '" + nt.name + "', expected '" + want + "'");
      }
      *ptrs[t] = nt.tensor;
    }
    detail::check_layer_shapes(cfg, lw, l);
    weights.layers.push_back(std::move(lw));
  }
  return {cfg, weights};
}

inline void save_lstm(const std::string& path, const LstmConfig& cfg, const LstmWeights& weights) {
  save_container(path, to_container(cfg, weights));
}

inline std::pair<LstmConfig, LstmWeights> load_lstm(const std::string& path) {
  return lstm_from_container(load_container(path), path);
}

// --- loose tensor sets ------------------------------------------------------

inline void save_tensors(const std::string& path, const std::vector<NamedTensor>& tensors) {
  ModelContainer container;
  container.kind = "tensors";
  container.config = json::object();
  container.tensors = tensors;
  save_container(path, container);
}

inline std::vector<NamedTensor> load_tensors(const std::string& path) {
  ModelContainer container = load_container(path);
  if (container.kind != "tensors") {
    throw std::runtime_error("model container " + path + ": kind '" + container.kind +
                             "' is not a loose tensor set");
  }
  return std::move(container.tensors);
}

}  // namespace qhwy
