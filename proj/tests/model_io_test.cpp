#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "testutil.hpp"

using namespace qhwy;

namespace {

// Assembles a container image from a raw manifest string and payload bytes.
std::string make_raw(const std::string& manifest, const std::string& payload) {
  std::string out(kModelMagic, kModelMagicSize);
  detail::append_u64le(out, manifest.size());
  out += manifest;
  out += payload;
  return out;
}

std::string f32_payload(const std::vector<double>& values) {
  std::string out;
  for (double v : values) detail::append_f32le(out, v);
  return out;
}

template <typename Fn>
std::string error_message(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

void expect_parse_error(const std::string& buf, const std::string& needle) {
  const std::string msg = error_message([&] { parse_container(buf, "test"); });
  EXPECT_FALSE(msg.empty()) << "parse accepted a corrupt container (wanted '" << needle << "')";
  EXPECT_NE(msg.find(needle), std::string::npos) << "error was: " << msg;
}

void expect_f32_close(const Tensor& before, const Tensor& after) {
  ASSERT_TRUE(before.same_shape(after));
  for (std::int64_t i = 0; i < before.numel(); ++i) {
    EXPECT_LE(std::abs(before[i] - after[i]), std::abs(before[i]) * 1.2e-7 + 1e-30)
        << "element " << i;
  }
}

}  // namespace

TEST(ModelContainer, ResnetRoundTrip) {
  ResidualNetConfig cfg;
  cfg.num_blocks = 2;
  cfg.channels = 4;
  cfg.spatial = 5;
  cfg.convs_per_block = 2;
  cfg.activation_bits = 4;
  cfg.weight_bits = Precision::of(3);
  cfg.style = BlockStyle::ConventionalPostAct;
  cfg.highway_bits = Precision::of(6);
  cfg.quantize_first_last = false;
  cfg.seed = 42;
  const ResidualNet net = build_random_net(cfg);

  const std::string dir = testutil::make_temp_dir("resnet_io");
  const std::string path = dir + "/net.qhwy";
  save_resnet(path, net);
  const ResidualNet loaded = load_resnet(path);

  EXPECT_EQ(loaded.config.num_blocks, cfg.num_blocks);
  EXPECT_EQ(loaded.config.channels, cfg.channels);
  EXPECT_EQ(loaded.config.spatial, cfg.spatial);
  EXPECT_EQ(loaded.config.convs_per_block, cfg.convs_per_block);
  EXPECT_EQ(loaded.config.activation_bits, cfg.activation_bits);
  EXPECT_EQ(loaded.config.weight_bits.bits, 3);
  EXPECT_EQ(loaded.config.style, cfg.style);
  EXPECT_EQ(loaded.config.highway_bits.bits, 6);
  EXPECT_EQ(loaded.config.quantize_first_last, cfg.quantize_first_last);
  EXPECT_EQ(loaded.config.seed, cfg.seed);

  for (std::size_t b = 0; b < net.weights.size(); ++b) {
    for (std::size_t j = 0; j < net.weights[b].size(); ++j) {
      expect_f32_close(net.weights[b][j], loaded.weights[b][j]);
    }
  }
  // Quantizer markers refit on load: same enablement, near-identical scale.
  EXPECT_EQ(loaded.weight_specs[0][0].bits, 0);  // first conv exemption survives
  EXPECT_EQ(loaded.weight_specs[0][1].bits, 3);
  EXPECT_EQ(loaded.weight_specs[1][1].bits, 0);
  EXPECT_NEAR(loaded.weight_specs[0][1].mu, net.weight_specs[0][1].mu,
              net.weight_specs[0][1].mu * 1e-6);
}

TEST(ModelContainer, LstmRoundTrip) {
  LstmConfig cfg;
  cfg.input_size = 4;
  cfg.hidden_size = 5;
  cfg.num_layers = 2;
  cfg.activation_bits = 3;
  cfg.weight_bits = Precision::of(2);
  cfg.placement = LstmPlacement::Conventional;
  cfg.cell_clip = 3.5;
  cfg.seed = 9;
  const LstmWeights w = build_random_lstm(cfg);

  const std::string dir = testutil::make_temp_dir("lstm_io");
  const std::string path = dir + "/model.qhwy";
  save_lstm(path, cfg, w);
  const auto [lcfg, lw] = load_lstm(path);

  EXPECT_EQ(lcfg.input_size, cfg.input_size);
  EXPECT_EQ(lcfg.hidden_size, cfg.hidden_size);
  EXPECT_EQ(lcfg.num_layers, cfg.num_layers);
  EXPECT_EQ(lcfg.activation_bits, cfg.activation_bits);
  EXPECT_EQ(lcfg.weight_bits.bits, 2);
  EXPECT_EQ(lcfg.placement, cfg.placement);
  EXPECT_DOUBLE_EQ(lcfg.cell_clip, cfg.cell_clip);

  ASSERT_EQ(lw.layers.size(), 2u);
  expect_f32_close(w.layers[0].w_ig, lw.layers[0].w_ig);
  expect_f32_close(w.layers[1].w_ho, lw.layers[1].w_ho);
  expect_f32_close(w.layers[1].b_f, lw.layers[1].b_f);
}

TEST(ModelContainer, LooseTensorsRoundTripWithFloat32Rounding) {
  const std::string dir = testutil::make_temp_dir("tensors_io");
  const std::string path = dir + "/t.qhwy";
  save_tensors(path, {{"a", testutil::make_tensor({3}, {0.1, -2.5, 1e6})},
                      {"b", testutil::make_tensor({2, 2}, {1.0, 2.0, 3.0, 4.0})}});
  const std::vector<NamedTensor> loaded = load_tensors(path);
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[0].name, "a");
  EXPECT_EQ(loaded[1].name, "b");
  EXPECT_EQ(loaded[1].tensor.shape(), (std::vector<std::int64_t>{2, 2}));
  // Values pass through a float32 payload: exactly the rounded value, not the
  // original double.
  EXPECT_EQ(loaded[0].tensor[0], static_cast<double>(static_cast<float>(0.1)));
  EXPECT_EQ(loaded[0].tensor[1], -2.5);
  EXPECT_EQ(loaded[0].tensor[2], 1e6);
}

TEST(ModelContainer, EmptyTensorListIsValid) {
  const std::string dir = testutil::make_temp_dir("empty_io");
  const std::string path = dir + "/empty.qhwy";
  save_tensors(path, {});
  EXPECT_TRUE(load_tensors(path).empty());
}

TEST(ModelContainer, SerializationIsDeterministic) {
  ResidualNetConfig cfg;
  cfg.num_blocks = 1;
  cfg.channels = 3;
  cfg.spatial = 4;
  cfg.seed = 5;
  const std::string a = serialize_container(to_container(build_random_net(cfg)));
  const std::string b = serialize_container(to_container(build_random_net(cfg)));
  EXPECT_EQ(a, b);
  // And the round trip through parse reproduces the same bytes.
  EXPECT_EQ(serialize_container(parse_container(a, "mem")), a);
}

TEST(ModelContainer, RejectsCorruptImages) {
  const std::string good_manifest =
      R"({"config":{},"format_version":1,"kind":"tensors",)"
      R"("tensors":[{"length":8,"name":"t","offset":0,"shape":[2]}]})";
  const std::string good = make_raw(good_manifest, f32_payload({1.0, 2.0}));
  EXPECT_NO_THROW(parse_container(good, "test"));

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  expect_parse_error(bad_magic, "bad magic at offset 0");

  expect_parse_error(good.substr(0, 5), "truncated");
  expect_parse_error(good.substr(0, kModelMagicSize + 3), "truncated");

  std::string short_manifest(kModelMagic, kModelMagicSize);
  detail::append_u64le(short_manifest, 1000);
  expect_parse_error(short_manifest, "truncated");

  expect_parse_error(make_raw("{oops", ""), "not valid JSON");

  expect_parse_error(
      make_raw(R"({"config":{},"format_version":2,"kind":"tensors","tensors":[]})", ""),
      "unsupported format_version 2");

  expect_parse_error(
      make_raw(R"({"config":{},"format_version":1,"kind":"t","tensors":[],"extra":1})", ""),
      "unknown");

  expect_parse_error(
      make_raw(R"({"config":{},"format_version":1,"kind":"tensors",)"
               R"("tensors":[{"length":8,"name":"t","offset":0,"shape":[2]},)"
               R"({"length":8,"name":"t","offset":8,"shape":[2]}]})",
               f32_payload({1, 2, 3, 4})),
      "duplicate tensor name");

  expect_parse_error(make_raw(R"({"config":{},"format_version":1,"kind":"tensors",)"
                              R"("tensors":[{"length":8,"name":"","offset":0,"shape":[2]}]})",
                              f32_payload({1, 2})),
                     "empty name");

  expect_parse_error(make_raw(R"({"config":{},"format_version":1,"kind":"tensors",)"
                              R"("tensors":[{"length":8,"name":"t","offset":0,"shape":[-2]}]})",
                              f32_payload({1, 2})),
                     "negative shape extent");

  expect_parse_error(make_raw(R"({"config":{},"format_version":1,"kind":"tensors",)"
                              R"("tensors":[{"length":7,"name":"t","offset":0,"shape":[2]}]})",
                              f32_payload({1, 2})),
                     "does not match shape");

  expect_parse_error(make_raw(R"({"config":{},"format_version":1,"kind":"tensors",)"
                              R"("tensors":[{"length":8,"name":"t","offset":4,"shape":[2]}]})",
                              f32_payload({1, 2, 3})),
                     "not contiguous");

  expect_parse_error(make_raw(good_manifest, f32_payload({1.0})), "truncated payload");

  expect_parse_error(make_raw(good_manifest, f32_payload({1.0, 2.0, 3.0})), "trailing bytes");
}

TEST(ModelContainer, RejectsKindAndLayoutMismatches) {
  LstmConfig lcfg;
  lcfg.input_size = 3;
  lcfg.hidden_size = 3;
  const std::string dir = testutil::make_temp_dir("kind_io");
  const std::string lstm_path = dir + "/model.qhwy";
  save_lstm(lstm_path, lcfg, build_random_lstm(lcfg));
  EXPECT_NE(error_message([&] { load_resnet(lstm_path); }).find("is not a resnet"),
            std::string::npos);

  ResidualNetConfig rcfg;
  rcfg.num_blocks = 1;
  rcfg.channels = 3;
  rcfg.spatial = 4;
  const ResidualNet net = build_random_net(rcfg);

  ModelContainer renamed = to_container(net);
  renamed.tensors[0].name = "block0.conv0.kernel";
  const std::string msg1 = error_message(
      [&] { resnet_from_container(parse_container(serialize_container(renamed), "mem"), "mem"); });
  EXPECT_NE(msg1.find("expected 'block0.conv0.weight'"), std::string::npos) << msg1;

  ModelContainer short_set = to_container(net);
  short_set.tensors.pop_back();
  const std::string msg2 = error_message(
      [&] { resnet_from_container(parse_container(serialize_container(short_set), "mem"), "mem"); });
  EXPECT_NE(msg2.find("weight tensors"), std::string::npos) << msg2;

  ModelContainer misshapen = to_container(net);
  misshapen.tensors[0].tensor = Tensor({3, 3, 3, 4});
  const std::string msg3 = error_message(
      [&] { resnet_from_container(parse_container(serialize_container(misshapen), "mem"), "mem"); });
  EXPECT_NE(msg3.find("has shape"), std::string::npos) << msg3;
}
