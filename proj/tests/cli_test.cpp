#include <gtest/gtest.h>

#include <chrono>
#include <string>

#include "testutil.hpp"

using namespace qhwy;
using testutil::run_cli;

namespace {

// Extracts the numeric field following "name: " in the text output.
double parse_field(const std::string& text, const std::string& name) {
  const std::string key = name + ": ";
  const std::size_t pos = text.find(key);
  if (pos == std::string::npos) throw std::runtime_error("no field '" + name + "' in: " + text);
  return std::stod(text.substr(pos + key.size()));
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += (c == '\n');
  return n;
}

std::string write_config(const std::string& hint, const std::string& body) {
  const std::string path = testutil::make_temp_dir(hint) + "/config.json";
  testutil::write_file(path, body);
  return path;
}

}  // namespace

TEST(CliLevels, TwoBitTextOutput) {
  const testutil::CmdResult res = run_cli("levels --bits 2");
  ASSERT_EQ(res.exit_code, 0) << res.err;
  EXPECT_NE(res.out.find("spacing: 1.53"), std::string::npos) << res.out;
  const double spacing = parse_field(res.out, "spacing");
  EXPECT_GT(spacing, 1.52);
  EXPECT_LT(spacing, 1.54);
  // 2 bits: two levels per sign.
  const std::size_t levels_pos = res.out.find("levels:");
  ASSERT_NE(levels_pos, std::string::npos);
  std::istringstream lv(res.out.substr(levels_pos + 7));
  double v = 0.0;
  int n = 0;
  while (lv >> v) ++n;
  EXPECT_EQ(n, 4);

  const testutil::CmdResult again = run_cli("levels --bits 2");
  EXPECT_EQ(again.out, res.out);
}

TEST(CliLevels, JsonOutputMatchesSolver) {
  const testutil::CmdResult res = run_cli("levels --bits 3 --mu 2.0 --json");
  ASSERT_EQ(res.exit_code, 0) << res.err;
  const json j = json::parse(res.out);
  const LaplaceLevels lv = solve_laplace_levels(3);
  EXPECT_EQ(j.at("bits").get<int>(), 3);
  EXPECT_DOUBLE_EQ(j.at("mu").get<double>(), 2.0);
  EXPECT_DOUBLE_EQ(j.at("spacing").get<double>(), lv.delta);
  EXPECT_DOUBLE_EQ(j.at("step").get<double>(), lv.delta * 2.0);
  EXPECT_DOUBLE_EQ(j.at("l2_error").get<double>(), lv.l2_error);
  const std::vector<double> levels = j.at("levels").get<std::vector<double>>();
  ASSERT_EQ(levels.size(), 8u);
  EXPECT_EQ(levels, lv.levels(2.0));
}

TEST(CliLevels, RejectsWidthOutsideSolverTable) {
  const testutil::CmdResult res = run_cli("levels --bits 9");
  EXPECT_EQ(res.exit_code, 2);
  EXPECT_NE(res.err.find("error:"), std::string::npos) << res.err;
}

TEST(CliCount, LstmReferenceCell) {
  const std::string cfg = write_config(
      "count_lstm",
      R"({"kind":"lstm","input_size":300,"hidden_size":300,"activation_bits":4})");
  const testutil::CmdResult res = run_cli("count --config " + cfg);
  ASSERT_EQ(res.exit_code, 0) << res.err;
  const json j = json::parse(res.out);
  EXPECT_EQ(j.at("granularity").get<std::string>(), "per_layer_per_step");
  const json& c = j.at("counts");
  EXPECT_EQ(c.at("low_precision_mac").get<std::int64_t>(), 720000);
  EXPECT_EQ(c.at("high_precision_add").get<std::int64_t>(), 300);
  EXPECT_EQ(c.at("nonlinear_op").get<std::int64_t>(), 1500);
  EXPECT_EQ(c.at("elementwise_mul").get<std::int64_t>(), 900);
}

TEST(CliCount, ResnetMatchesLibraryAndWritesFiles) {
  const std::string out = testutil::make_temp_dir("count_out");
  const std::string cfg = write_config(
      "count_resnet",
      R"({"kind":"resnet","num_blocks":3,"channels":8,"spatial":6,"activation_bits":4})");
  const testutil::CmdResult res = run_cli("count --config " + cfg + " --out " + out);
  ASSERT_EQ(res.exit_code, 0) << res.err;
  const json j = json::parse(res.out);
  ResidualNetConfig rc;
  rc.num_blocks = 3;
  rc.channels = 8;
  rc.spatial = 6;
  const OpCounts want = count_resnet_ops(rc);
  EXPECT_EQ(j.at("granularity").get<std::string>(), "per_forward");
  EXPECT_EQ(j.at("counts").at("low_precision_mac").get<std::int64_t>(), want.low_precision_mac);
  EXPECT_EQ(j.at("counts").at("high_precision_add").get<std::int64_t>(), want.high_precision_add);
  // --out mirrors stdout into counts.json next to a metadata file.
  EXPECT_EQ(testutil::read_file(out + "/counts.json"), res.out);
  const json meta = json::parse(testutil::read_file(out + "/metadata.json"));
  EXPECT_EQ(meta.at("command").get<std::string>(), "count");
}

TEST(CliProfileResnet, SmokeRunWritesAllArtifacts) {
  const std::string out = testutil::make_temp_dir("profile_out");
  const std::string cfg = write_config(
      "profile_resnet",
      R"({"kind":"resnet","num_blocks":4,"channels":16,"spatial":8,"activation_bits":4})");

  const auto t0 = std::chrono::steady_clock::now();
  const testutil::CmdResult res =
      run_cli("profile-resnet --config " + cfg + " --seeds 1 --out " + out);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_EQ(res.exit_code, 0) << res.err;
  EXPECT_LT(secs, 60.0);

  const std::string csv = testutil::read_file(out + "/profile_resnet.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "variant,seed,position,error");
  EXPECT_EQ(count_lines(csv), 1u + 2u * 4u);  // header + 2 variants x 4 blocks

  const json summary = json::parse(testutil::read_file(out + "/profile_resnet_summary.json"));
  EXPECT_EQ(summary.at("metric").get<std::string>(), "cosine_error");
  EXPECT_EQ(summary.at("labels").get<std::vector<std::int64_t>>(),
            (std::vector<std::int64_t>{1, 2, 3, 4}));
  EXPECT_EQ(summary.at("seeds_per_variant").get<std::size_t>(), 1u);

  const std::string svg = testutil::read_file(out + "/profile_resnet.svg");
  EXPECT_EQ(svg.substr(0, 4), "<svg");

  const json meta = json::parse(testutil::read_file(out + "/metadata.json"));
  EXPECT_EQ(meta.at("command").get<std::string>(), "profile-resnet");
  EXPECT_EQ(meta.at("seeds").get<std::vector<std::uint64_t>>(), (std::vector<std::uint64_t>{1}));
  EXPECT_EQ(meta.at("stimulus").get<std::string>(), "seeded uniform [0,1]");
  EXPECT_TRUE(meta.contains("version"));
  EXPECT_TRUE(meta.contains("config"));
}

TEST(CliProfileLstm, StepsAndMetadata) {
  const std::string out = testutil::make_temp_dir("profile_lstm_out");
  const std::string cfg = write_config(
      "profile_lstm",
      R"({"kind":"lstm","input_size":8,"hidden_size":8,"activation_bits":2,"cell_clip":6.0})");
  const testutil::CmdResult res =
      run_cli("profile-lstm --config " + cfg + " --seeds 1 --steps 5 --out " + out);
  ASSERT_EQ(res.exit_code, 0) << res.err;
  const std::string csv = testutil::read_file(out + "/profile_lstm.csv");
  EXPECT_EQ(count_lines(csv), 1u + 2u * 5u);
  const json meta = json::parse(testutil::read_file(out + "/metadata.json"));
  EXPECT_EQ(meta.at("steps").get<int>(), 5);
  EXPECT_EQ(meta.at("stimulus").get<std::string>(), "seeded random walk, innovation 0.35");
}

TEST(CliProfileResnet, StimulusContainerOverridesDefault) {
  const std::string dir = testutil::make_temp_dir("stimulus");
  const std::string out = dir + "/out";
  const std::string input_path = dir + "/input.qhwy";
  Rng rng(123, "cli.test.stimulus");
  save_tensors(input_path, {{"x", random_uniform(rng, {4, 4, 4}, 0.0, 1.0)}});
  const std::string cfg = write_config(
      "profile_input",
      R"({"kind":"resnet","num_blocks":2,"channels":4,"spatial":4,"activation_bits":2})");
  const testutil::CmdResult res = run_cli("profile-resnet --config " + cfg +
                                          " --seeds 1,2 --out " + out + " --input " + input_path);
  ASSERT_EQ(res.exit_code, 0) << res.err;
  const json meta = json::parse(testutil::read_file(out + "/metadata.json"));
  EXPECT_EQ(meta.at("stimulus").get<std::string>(), "container:" + input_path);
}

TEST(CliSweep, WidthColumnsAndSummary) {
  const std::string out = testutil::make_temp_dir("sweep_out");
  const std::string cfg = write_config(
      "sweep",
      R"({"kind":"resnet","num_blocks":1,"channels":8,"spatial":4,"activation_bits":2})");
  const testutil::CmdResult res =
      run_cli("sweep-highway --config " + cfg + " --seeds 1,2 --bits full,8,6 --out " + out);
  ASSERT_EQ(res.exit_code, 0) << res.err;

  const std::string csv = testutil::read_file(out + "/sweep_highway.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "setting,seed,error_vs_full_precision,error_vs_full_highway");
  EXPECT_EQ(count_lines(csv), 1u + 3u * 2u);  // header + 3 settings x 2 seeds

  const json summary = json::parse(testutil::read_file(out + "/sweep_highway_summary.json"));
  EXPECT_EQ(summary.at("settings").get<std::vector<std::string>>(),
            (std::vector<std::string>{"full", "8", "6"}));
  const std::vector<double> vs_hwy =
      summary.at("median_error_vs_full_highway").get<std::vector<double>>();
  ASSERT_EQ(vs_hwy.size(), 3u);
  EXPECT_LE(vs_hwy[0], 1e-12);  // the full setting is its own reference
  const json meta = json::parse(testutil::read_file(out + "/metadata.json"));
  EXPECT_EQ(meta.at("bits").get<std::vector<std::string>>(),
            (std::vector<std::string>{"full", "8", "6"}));
}

TEST(CliCost, EnergyReportsForBothArchitectures) {
  const std::string lstm_cfg = write_config(
      "cost_lstm",
      R"({"kind":"lstm","input_size":32,"hidden_size":32,"activation_bits":2})");
  const testutil::CmdResult lstm_res = run_cli("cost --config " + lstm_cfg);
  ASSERT_EQ(lstm_res.exit_code, 0) << lstm_res.err;
  const json lj = json::parse(lstm_res.out);
  EXPECT_EQ(lj.at("granularity").get<std::string>(), "per_sequence");
  EXPECT_EQ(lj.at("steps").get<int>(), 50);
  EXPECT_GT(lj.at("report").at("energy_total").get<double>(), 0.0);
  EXPECT_GT(lj.at("report").at("highway_overhead_fraction").get<double>(), 0.0);
  EXPECT_EQ(lj.at("report").at("bits_highway").get<int>(), 32);  // highway placement: full

  const std::string resnet_cfg = write_config(
      "cost_resnet",
      R"({"kind":"resnet","num_blocks":4,"channels":16,"spatial":8,"activation_bits":2})");
  const testutil::CmdResult res = run_cli("cost --config " + resnet_cfg);
  ASSERT_EQ(res.exit_code, 0) << res.err;
  const json rj = json::parse(res.out);
  EXPECT_EQ(rj.at("granularity").get<std::string>(), "per_forward");
  EXPECT_EQ(rj.at("report").at("bits_weight").get<int>(), 32);  // full precision costs as 32-bit
  EXPECT_GT(rj.at("report").at("energy_total").get<double>(), 0.0);
}

TEST(CliErrors, FailLoudlyOnBadInvocations) {
  EXPECT_NE(run_cli("").exit_code, 0);                       // a subcommand is required
  EXPECT_NE(run_cli("levels --bogus 1").exit_code, 0);       // unknown flag
  EXPECT_NE(run_cli("profile-resnet --seeds 1").exit_code, 0);  // missing required options

  const testutil::CmdResult missing =
      run_cli("count --config /nonexistent/config.json");
  EXPECT_EQ(missing.exit_code, 2);
  EXPECT_FALSE(missing.err.empty());

  const std::string cfg = write_config(
      "bad_key", R"({"kind":"resnet","blocks":4,"channels":8,"spatial":4,"activation_bits":2})");
  const testutil::CmdResult bad_key =
      run_cli("count --config " + cfg);
  EXPECT_EQ(bad_key.exit_code, 2);
  EXPECT_NE(bad_key.err.find("blocks"), std::string::npos) << bad_key.err;

  const std::string bad_seeds_cfg = write_config(
      "bad_seeds",
      R"({"kind":"resnet","num_blocks":1,"channels":4,"spatial":4,"activation_bits":2})");
  const testutil::CmdResult bad_seeds = run_cli("profile-resnet --config " + bad_seeds_cfg +
                                                " --seeds 1,x --out /tmp/qhwy_unused_out");
  EXPECT_EQ(bad_seeds.exit_code, 2);
  EXPECT_NE(bad_seeds.err.find("not an unsigned integer"), std::string::npos) << bad_seeds.err;
}
