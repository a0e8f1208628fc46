// qhwy — quantization highway analysis CLI.
//
// Every command is deterministic: identical config and seeds reproduce
// byte-identical CSV/JSON/SVG outputs, including under --jobs parallelism
// (results are canonically ordered before anything is written).

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "qhwy/qhwy.hpp"

namespace fs = std::filesystem;
using qhwy::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("read failed: " + path);
  return buf;
}

json load_config_json(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config " + path + ": top level must be a JSON object");
  return j;
}

// For profile/sweep commands the config's kind is optional but, when present,
// must name the architecture the command works on.
void check_kind(const json& j, const std::string& path, const std::string& want) {
  if (!j.contains("kind")) return;
  const json& k = j.at("kind");
  if (!k.is_string() || k.get<std::string>() != want) {
    throw std::runtime_error("config " + path + ": kind must be \"" + want + "\" for this command");
  }
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) throw std::runtime_error("--seeds: empty entry in '" + text + "'");
    std::size_t pos = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(tok, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("--seeds: '" + tok + "' is not an unsigned integer");
    }
    if (pos != tok.size()) throw std::runtime_error("--seeds: '" + tok + "' is not an unsigned integer");
    seeds.push_back(v);
  }
  if (seeds.empty()) throw std::runtime_error("--seeds: list is empty");
  return seeds;
}

struct EmitFlags {
  bool csv = false, json_out = false, svg = false;
};

EmitFlags parse_emit(const std::string& text) {
  EmitFlags e;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "csv") {
      e.csv = true;
    } else if (tok == "json") {
      e.json_out = true;
    } else if (tok == "svg") {
      e.svg = true;
    } else {
      throw std::runtime_error("--emit: unknown format '" + tok + "' (expected csv, json, svg)");
    }
  }
  if (!e.csv && !e.json_out && !e.svg) throw std::runtime_error("--emit: list is empty");
  return e;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_output(const fs::path& dir, const std::string& name, const std::string& content) {
  qhwy::write_text_file((dir / name).string(), content);
}

// Runs fn(0..n-1), with up to `jobs` worker threads when jobs > 1. The caller
// stores results into preallocated slots, so ordering never depends on the
// schedule; the first exception wins and is rethrown after all workers stop.
template <typename Fn>
void run_indexed(int jobs, std::size_t n, Fn fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

qhwy::Tensor load_single_tensor(const std::string& path) {
  const std::vector<qhwy::NamedTensor> tensors = qhwy::load_tensors(path);
  if (tensors.size() != 1) {
    throw std::runtime_error("--input " + path + ": expected exactly one tensor, found " +
                             std::to_string(tensors.size()));
  }
  return tensors.front().tensor;
}

json comparison_to_json(const qhwy::ComparisonReport& rep, const std::string& metric) {
  json j;
  j["schema_version"] = qhwy::schema_version;
  j["metric"] = metric;
  j["config_summary"] = rep.config_summary;
  j["labels"] = rep.labels;
  j["conventional_median"] = rep.conventional_median;
  j["conventional_iqr"] = rep.conventional_iqr;
  j["highway_median"] = rep.highway_median;
  j["highway_iqr"] = rep.highway_iqr;
  j["gap"] = rep.gap;
  j["widening"] = rep.widening;
  j["seeds_per_variant"] = rep.seeds_per_variant;
  return j;
}

json base_metadata(const std::string& command, const json& config,
                   const std::vector<std::uint64_t>& seeds, const EmitFlags& emit,
                   const std::string& metric, const std::string& stimulus) {
  json meta;
  meta["command"] = command;
  meta["config"] = config;
  meta["seeds"] = seeds;
  json formats = json::array();
  if (emit.csv) formats.push_back("csv");
  if (emit.json_out) formats.push_back("json");
  if (emit.svg) formats.push_back("svg");
  meta["emit"] = formats;
  meta["metric"] = metric;
  meta["stimulus"] = stimulus;
  meta["version"] = qhwy::version;
  meta["schema_version"] = qhwy::schema_version;
  return meta;
}

// --- subcommand bodies ------------------------------------------------------

void cmd_levels(int bits, double mu, bool as_json) {
  if (!(mu > 0.0)) throw std::runtime_error("--mu must be positive");
  const qhwy::LaplaceLevels lv = qhwy::solve_laplace_levels(bits);
  const std::vector<double> levels = lv.levels(mu);
  if (as_json) {
    json j;
    j["schema_version"] = qhwy::schema_version;
    j["bits"] = bits;
    j["mu"] = mu;
    j["spacing"] = lv.delta;       // in units of mu
    j["step"] = lv.delta * mu;     // absolute
    j["l2_error"] = lv.l2_error;   // expected squared error at mu = 1
    j["levels"] = levels;
    std::cout << dump_json(j);
    return;
  }
  std::cout << "bits: " << bits << "\n";
  std::cout << "mu: " << qhwy::fmt_g17(mu) << "\n";
  std::cout << "spacing: " << qhwy::fmt_g17(lv.delta) << " (x mu)\n";
  std::cout << "step: " << qhwy::fmt_g17(lv.delta * mu) << "\n";
  std::cout << "l2_error: " << qhwy::fmt_g17(lv.l2_error) << " (unit-mu Laplace)\n";
  std::cout << "levels:";
  for (double v : levels) std::cout << ' ' << qhwy::fmt_g17(v);
  std::cout << "\n";
}

void cmd_profile_resnet(const std::string& config_path, const std::string& seeds_text,
                        const std::string& out_dir, const std::string& emit_text, int jobs,
                        const std::string& input_path) {
  const json cfg_json = load_config_json(config_path);
  check_kind(cfg_json, config_path, "resnet");
  const qhwy::ResidualNetConfig base = qhwy::resnet_config_from_json(cfg_json);
  const std::vector<std::uint64_t> seeds = parse_seeds(seeds_text);
  const EmitFlags emit = parse_emit(emit_text);

  std::optional<qhwy::Tensor> stimulus;
  if (!input_path.empty()) stimulus = load_single_tensor(input_path);

  std::vector<qhwy::ErrorProfile> profiles(2 * seeds.size());
  run_indexed(jobs, seeds.size(), [&](std::size_t i) {
    qhwy::ResidualNetConfig cfg = base;
    cfg.seed = seeds[i];
    const qhwy::Tensor x = stimulus ? *stimulus : qhwy::default_resnet_input(cfg);
    profiles[2 * i] = qhwy::profile_residual(cfg, x, qhwy::Variant::Conventional);
    profiles[2 * i + 1] = qhwy::profile_residual(cfg, x, qhwy::Variant::Highway);
  });
  const qhwy::ComparisonReport rep = qhwy::compare(profiles);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  if (emit.csv) write_output(dir, "profile_resnet.csv", qhwy::profiles_csv(profiles));
  if (emit.json_out) {
    write_output(dir, "profile_resnet_summary.json", dump_json(comparison_to_json(rep, "cosine_error")));
  }
  if (emit.svg) {
    write_output(dir, "profile_resnet.svg",
                 qhwy::comparison_chart_svg(rep, "residual block error by depth", "block"));
  }
  const std::string stim = stimulus ? "container:" + input_path : "seeded uniform [0,1]";
  write_output(dir, "metadata.json",
               dump_json(base_metadata("profile-resnet", qhwy::resnet_config_to_json(base), seeds,
                                       emit, "cosine_error", stim)));
}

void cmd_profile_lstm(const std::string& config_path, const std::string& seeds_text,
                      const std::string& out_dir, const std::string& emit_text, int jobs, int steps,
                      const std::string& input_path) {
  const json cfg_json = load_config_json(config_path);
  check_kind(cfg_json, config_path, "lstm");
  const qhwy::LstmConfig base = qhwy::lstm_config_from_json(cfg_json);
  const std::vector<std::uint64_t> seeds = parse_seeds(seeds_text);
  const EmitFlags emit = parse_emit(emit_text);
  if (steps < 1) throw std::runtime_error("--steps must be >= 1");

  std::optional<std::vector<qhwy::Tensor>> stimulus;
  if (!input_path.empty()) {
    const qhwy::Tensor seq = load_single_tensor(input_path);
    if (seq.ndim() != 2 || seq.extent(1) != base.input_size) {
      throw std::runtime_error("--input " + input_path + ": want shape [steps, " +
                               std::to_string(base.input_size) + "], got " + seq.shape_str());
    }
    std::vector<qhwy::Tensor> xs;
    for (std::int64_t t = 0; t < seq.extent(0); ++t) {
      qhwy::Tensor x({base.input_size});
      for (std::int64_t i = 0; i < base.input_size; ++i) x[i] = seq.at(t, i);
      xs.push_back(std::move(x));
    }
    steps = static_cast<int>(xs.size());
    stimulus = std::move(xs);
  }

  std::vector<qhwy::ErrorProfile> profiles(2 * seeds.size());
  run_indexed(jobs, seeds.size(), [&](std::size_t i) {
    qhwy::LstmConfig cfg = base;
    cfg.seed = seeds[i];
    const qhwy::LstmWeights weights = qhwy::build_random_lstm(cfg);
    const std::vector<qhwy::Tensor> xs = stimulus ? *stimulus : qhwy::default_lstm_inputs(cfg, steps);
    profiles[2 * i] = qhwy::profile_lstm(cfg, weights, xs, qhwy::Variant::Conventional);
    profiles[2 * i + 1] = qhwy::profile_lstm(cfg, weights, xs, qhwy::Variant::Highway);
  });
  const qhwy::ComparisonReport rep = qhwy::compare(profiles);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  if (emit.csv) write_output(dir, "profile_lstm.csv", qhwy::profiles_csv(profiles));
  if (emit.json_out) {
    write_output(dir, "profile_lstm_summary.json", dump_json(comparison_to_json(rep, "cosine_error")));
  }
  if (emit.svg) {
    write_output(dir, "profile_lstm.svg",
                 qhwy::comparison_chart_svg(rep, "cell state error by time step", "time step"));
  }
  const std::string stim =
      stimulus ? "container:" + input_path : "seeded random walk, innovation 0.35";
  json meta = base_metadata("profile-lstm", qhwy::lstm_config_to_json(base), seeds, emit,
                            "cosine_error", stim);
  meta["steps"] = steps;
  write_output(dir, "metadata.json", dump_json(meta));
}

void cmd_sweep_highway(const std::string& config_path, const std::string& seeds_text,
                       const std::string& bits_text, const std::string& out_dir,
                       const std::string& emit_text, int jobs, const std::string& input_path) {
  const json cfg_json = load_config_json(config_path);
  check_kind(cfg_json, config_path, "resnet");
  qhwy::ResidualNetConfig base = qhwy::resnet_config_from_json(cfg_json);
  // The sweep is defined on the highway variant; a conventional style in the
  // config would make highway_bits a no-op.
  if (!qhwy::is_highway(base.style)) base.style = qhwy::BlockStyle::HighwayPostAct;
  const std::vector<std::uint64_t> seeds = parse_seeds(seeds_text);
  const EmitFlags emit = parse_emit(emit_text);

  std::vector<std::string> tokens;
  std::vector<qhwy::Precision> widths;
  {
    std::stringstream ss(bits_text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok == "full") {
        widths.push_back(qhwy::Precision::full());
      } else {
        std::size_t pos = 0;
        int k = 0;
        try {
          k = std::stoi(tok, &pos);
        } catch (const std::exception&) {
          pos = 0;
        }
        if (pos != tok.size() || k < 1 || k > 64) {
          throw std::runtime_error("--bits: '" + tok + "' is not \"full\" or an integer in 1..64");
        }
        widths.push_back(qhwy::Precision::of(k));
      }
      tokens.push_back(tok);
    }
    if (tokens.empty()) throw std::runtime_error("--bits: list is empty");
  }

  std::optional<qhwy::Tensor> stimulus;
  if (!input_path.empty()) stimulus = load_single_tensor(input_path);

  std::vector<qhwy::SweepRow> rows(seeds.size() * tokens.size());
  run_indexed(jobs, seeds.size(), [&](std::size_t i) {
    qhwy::ResidualNetConfig cfg = base;
    cfg.seed = seeds[i];
    const qhwy::Tensor x = stimulus ? *stimulus : qhwy::default_resnet_input(cfg);
    qhwy::ResidualNet net = qhwy::build_random_net(cfg);
    const qhwy::ForwardResult fp = qhwy::forward(net, x, false);
    net.config.highway_bits = qhwy::Precision::full();
    const qhwy::ForwardResult q_full = qhwy::forward(net, x, true);
    for (std::size_t s = 0; s < widths.size(); ++s) {
      net.config.highway_bits = widths[s];
      const qhwy::ForwardResult q =
          widths[s].is_full() ? q_full : qhwy::forward(net, x, true);
      qhwy::SweepRow row;
      row.order = static_cast<int>(s);
      row.setting = tokens[s];
      row.seed = seeds[i];
      row.error_vs_full_precision = qhwy::cosine_error(fp.taps.back(), q.taps.back());
      row.error_vs_full_highway = qhwy::cosine_error(q_full.taps.back(), q.taps.back());
      rows[i * widths.size() + s] = row;
    }
  });

  // Per-setting medians over seeds, in command-line order.
  std::vector<double> med_fp, med_hw;
  for (std::size_t s = 0; s < tokens.size(); ++s) {
    std::vector<double> col_fp, col_hw;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      col_fp.push_back(rows[i * tokens.size() + s].error_vs_full_precision);
      col_hw.push_back(rows[i * tokens.size() + s].error_vs_full_highway);
    }
    med_fp.push_back(qhwy::median(col_fp));
    med_hw.push_back(qhwy::median(col_hw));
  }

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  if (emit.csv) write_output(dir, "sweep_highway.csv", qhwy::sweep_csv(rows));
  if (emit.json_out) {
    json j;
    j["schema_version"] = qhwy::schema_version;
    j["metric"] = "cosine_error";
    j["settings"] = tokens;
    j["median_error_vs_full_precision"] = med_fp;
    j["median_error_vs_full_highway"] = med_hw;
    j["seeds"] = seeds;
    j["config"] = qhwy::resnet_config_to_json(base);
    write_output(dir, "sweep_highway_summary.json", dump_json(j));
  }
  if (emit.svg) {
    std::vector<double> xs;
    for (std::size_t s = 0; s < tokens.size(); ++s) xs.push_back(static_cast<double>(s));
    qhwy::ChartSeries fp_series{"median error vs full precision", "#d62728", xs, med_fp};
    qhwy::ChartSeries hw_series{"median error vs full highway", "#1f77b4", xs, med_hw};
    write_output(dir, "sweep_highway.svg",
                 qhwy::svg_line_chart({fp_series, hw_series}, "final-block error by highway width",
                                      "setting index", "error (1 - cosine similarity)"));
  }
  const std::string stim = stimulus ? "container:" + input_path : "seeded uniform [0,1]";
  json meta = base_metadata("sweep-highway", qhwy::resnet_config_to_json(base), seeds, emit,
                            "cosine_error", stim);
  meta["bits"] = tokens;
  write_output(dir, "metadata.json", dump_json(meta));
}

void cmd_count(const std::string& config_path, const std::string& out_dir) {
  const json cfg_json = load_config_json(config_path);
  const std::string kind = qhwy::detail::require<std::string>(cfg_json, "kind");
  json j;
  j["schema_version"] = qhwy::schema_version;
  j["kind"] = kind;
  if (kind == "resnet") {
    const qhwy::ResidualNetConfig cfg = qhwy::resnet_config_from_json(cfg_json);
    j["config"] = qhwy::resnet_config_to_json(cfg);
    j["granularity"] = "per_forward";
    j["counts"] = qhwy::op_counts_to_json(qhwy::count_resnet_ops(cfg));
  } else if (kind == "lstm") {
    const qhwy::LstmConfig cfg = qhwy::lstm_config_from_json(cfg_json);
    j["config"] = qhwy::lstm_config_to_json(cfg);
    j["granularity"] = "per_layer_per_step";
    j["counts"] =
        qhwy::op_counts_to_json(qhwy::count_lstm_ops(cfg.input_size, cfg.hidden_size, cfg.placement));
  } else {
    throw std::runtime_error("config " + config_path + ": kind must be \"resnet\" or \"lstm\"");
  }
  std::cout << dump_json(j);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_output(dir, "counts.json", dump_json(j));
    json meta;
    meta["command"] = "count";
    meta["config"] = j["config"];
    meta["version"] = qhwy::version;
    meta["schema_version"] = qhwy::schema_version;
    write_output(dir, "metadata.json", dump_json(meta));
  }
}

void cmd_cost(const std::string& config_path, const std::string& params_path, int steps,
              const std::string& out_dir) {
  const json cfg_json = load_config_json(config_path);
  const std::string kind = qhwy::detail::require<std::string>(cfg_json, "kind");
  qhwy::CostParams params;
  if (!params_path.empty()) params = qhwy::cost_params_from_json(load_config_json(params_path));
  if (steps < 1) throw std::runtime_error("--steps must be >= 1");

  json j;
  j["schema_version"] = qhwy::schema_version;
  j["kind"] = kind;
  j["params"] = qhwy::cost_params_to_json(params);
  if (kind == "resnet") {
    const qhwy::ResidualNetConfig cfg = qhwy::resnet_config_from_json(cfg_json);
    const qhwy::OpCounts counts = qhwy::count_resnet_ops(cfg);
    const qhwy::CostReport rep = qhwy::estimate_cost(counts, cfg.activation_bits, cfg.weight_bits,
                                                     cfg.highway_bits, params, qhwy::resnet_traffic(cfg));
    j["config"] = qhwy::resnet_config_to_json(cfg);
    j["granularity"] = "per_forward";
    j["report"] = qhwy::cost_report_to_json(rep);
  } else if (kind == "lstm") {
    const qhwy::LstmConfig cfg = qhwy::lstm_config_from_json(cfg_json);
    // Whole-sequence totals: the first layer consumes the input width, the
    // rest consume hidden-width activations.
    qhwy::OpCounts total = qhwy::count_lstm_ops(cfg.input_size, cfg.hidden_size, cfg.placement);
    if (cfg.num_layers > 1) {
      total = total + qhwy::count_lstm_ops(cfg.hidden_size, cfg.hidden_size, cfg.placement) *
                          (cfg.num_layers - 1);
    }
    total = total * steps;
    const qhwy::Precision highway_width = cfg.placement == qhwy::LstmPlacement::Highway
                                              ? qhwy::Precision::full()
                                              : qhwy::Precision::of(cfg.activation_bits);
    const qhwy::CostReport rep = qhwy::estimate_cost(total, cfg.activation_bits, cfg.weight_bits,
                                                     highway_width, params,
                                                     qhwy::lstm_traffic(cfg, steps));
    j["config"] = qhwy::lstm_config_to_json(cfg);
    j["granularity"] = "per_sequence";
    j["steps"] = steps;
    j["report"] = qhwy::cost_report_to_json(rep);
  } else {
    throw std::runtime_error("config " + config_path + ": kind must be \"resnet\" or \"lstm\"");
  }
  std::cout << dump_json(j);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_output(dir, "cost.json", dump_json(j));
    json meta;
    meta["command"] = "cost";
    meta["config"] = j["config"];
    meta["params"] = j["params"];
    meta["version"] = qhwy::version;
    meta["schema_version"] = qhwy::schema_version;
    write_output(dir, "metadata.json", dump_json(meta));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantization highway analysis toolkit"};
  app.require_subcommand(1);

  // levels
  int lv_bits = 2;
  double lv_mu = 1.0;
  bool lv_json = false;
  CLI::App* levels = app.add_subcommand("levels", "print the optimal Laplace quantizer level table");
  levels->add_option("--bits", lv_bits, "bit width (1..8)")->required();
  levels->add_option("--mu", lv_mu, "Laplace scale of the weight distribution")->capture_default_str();
  levels->add_flag("--json", lv_json, "emit JSON instead of text");
  levels->callback([&] { cmd_levels(lv_bits, lv_mu, lv_json); });

  // shared option storage per subcommand
  struct RunOpts {
    std::string config, seeds = "1", out, emit = "csv,json,svg", input;
    int jobs = 1;
  };

  RunOpts pr;
  CLI::App* profile_resnet =
      app.add_subcommand("profile-resnet", "per-block error of both residual variants");
  profile_resnet->add_option("--config", pr.config, "residual net config (JSON)")->required();
  profile_resnet->add_option("--seeds", pr.seeds, "comma-separated seed list")->capture_default_str();
  profile_resnet->add_option("--out", pr.out, "output directory")->required();
  profile_resnet->add_option("--emit", pr.emit, "output formats")->capture_default_str();
  profile_resnet->add_option("--jobs", pr.jobs, "worker threads over seeds")->check(CLI::Range(1, 256));
  profile_resnet->add_option("--input", pr.input,
                             "stimulus container (one tensor, [channels, s, s]); replaces the "
                             "seeded default for every seed");
  profile_resnet->callback(
      [&] { cmd_profile_resnet(pr.config, pr.seeds, pr.out, pr.emit, pr.jobs, pr.input); });

  RunOpts pl;
  int pl_steps = 50;
  CLI::App* profile_lstm =
      app.add_subcommand("profile-lstm", "per-step cell state error of both placements");
  profile_lstm->add_option("--config", pl.config, "lstm config (JSON)")->required();
  profile_lstm->add_option("--seeds", pl.seeds, "comma-separated seed list")->capture_default_str();
  profile_lstm->add_option("--out", pl.out, "output directory")->required();
  profile_lstm->add_option("--emit", pl.emit, "output formats")->capture_default_str();
  profile_lstm->add_option("--jobs", pl.jobs, "worker threads over seeds")->check(CLI::Range(1, 256));
  profile_lstm->add_option("--steps", pl_steps, "sequence length")->capture_default_str();
  profile_lstm->add_option("--input", pl.input,
                           "stimulus container (one tensor, [steps, input_size]); replaces the "
                           "seeded default for every seed");
  profile_lstm->callback(
      [&] { cmd_profile_lstm(pl.config, pl.seeds, pl.out, pl.emit, pl.jobs, pl_steps, pl.input); });

  RunOpts sw;
  std::string sw_bits = "full,8,6";
  CLI::App* sweep = app.add_subcommand("sweep-highway", "final-block error across highway widths");
  sweep->add_option("--config", sw.config, "residual net config (JSON)")->required();
  sweep->add_option("--seeds", sw.seeds, "comma-separated seed list")->capture_default_str();
  sweep->add_option("--bits", sw_bits, "highway widths, e.g. full,8,6")->capture_default_str();
  sweep->add_option("--out", sw.out, "output directory")->required();
  sweep->add_option("--emit", sw.emit, "output formats")->capture_default_str();
  sweep->add_option("--jobs", sw.jobs, "worker threads over seeds")->check(CLI::Range(1, 256));
  sweep->add_option("--input", sw.input, "stimulus container (one tensor, [channels, s, s])");
  sweep->callback(
      [&] { cmd_sweep_highway(sw.config, sw.seeds, sw_bits, sw.out, sw.emit, sw.jobs, sw.input); });

  std::string count_config, count_out;
  CLI::App* count = app.add_subcommand("count", "operation counts by precision class, as JSON");
  count->add_option("--config", count_config, "resnet or lstm config (JSON, requires \"kind\")")
      ->required();
  count->add_option("--out", count_out, "also write counts.json + metadata.json here");
  count->callback([&] { cmd_count(count_config, count_out); });

  std::string cost_config, cost_params, cost_out;
  int cost_steps = 50;
  CLI::App* cost = app.add_subcommand("cost", "parametric energy/area estimate, as JSON");
  cost->add_option("--config", cost_config, "resnet or lstm config (JSON, requires \"kind\")")
      ->required();
  cost->add_option("--params", cost_params, "cost parameter file (JSON)");
  cost->add_option("--steps", cost_steps, "sequence length for lstm configs")->capture_default_str();
  cost->add_option("--out", cost_out, "also write cost.json + metadata.json here");
  cost->callback([&] { cmd_cost(cost_config, cost_params, cost_steps, cost_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
