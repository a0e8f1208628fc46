#pragma once

// Lockstep comparison of full-precision and quantized executions. The error
// metric is 1 - cosine similarity over the flattened tensor, evaluated at the
// post-addition tap of every residual block, or at c_t for every LSTM step
// (the recurrent carrier itself).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhwy/lstm.hpp"
#include "qhwy/resnet.hpp"
#include "qhwy/tensor.hpp"

namespace qhwy {

enum class Variant { Conventional, Highway };

inline const char* to_string(Variant v) {
  return v == Variant::Conventional ? "conventional" : "highway";
}

inline double cosine_error(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument("cosine_error: shape mismatch " + a.shape_str() + " vs " +
                                b.shape_str());
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 && nb == 0.0) {
    throw std::invalid_argument("cosine_error: both tensors are zero, similarity undefined");
  }
  if (na == 0.0 || nb == 0.0) return 1.0;  // one zero tensor: no shared direction
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

struct ErrorProfile {
  std::string variant;               // "conventional" | "highway"
  std::uint64_t seed = 0;
  std::vector<std::int64_t> labels;  // block indices or time steps, 1-based
  std::vector<double> errors;        // 1 - cosine similarity, in [0, 2]
  std::string config_summary;        // identical across comparable profiles
};

namespace detail {

inline std::string precision_str(Precision p) {
  return p.is_full() ? std::string("full") : std::to_string(p.bits);
}

inline std::string resnet_summary(const ResidualNetConfig& cfg) {
  std::ostringstream os;
  os << "resnet blocks=" << cfg.num_blocks << " channels=" << cfg.channels
     << " spatial=" << cfg.spatial << " convs=" << cfg.convs_per_block
     << " ka=" << cfg.activation_bits << " kw=" << precision_str(cfg.weight_bits)
     << " hw=" << precision_str(cfg.highway_bits) << " qfl=" << (cfg.quantize_first_last ? 1 : 0);
  return os.str();
}

inline std::string lstm_summary(const LstmConfig& cfg, std::size_t steps) {
  std::ostringstream os;
  os << "lstm in=" << cfg.input_size << " hidden=" << cfg.hidden_size
     << " layers=" << cfg.num_layers << " ka=" << cfg.activation_bits
     << " kw=" << precision_str(cfg.weight_bits) << " clip=" << cfg.cell_clip
     << " steps=" << steps;
  return os.str();
}

}  // namespace detail

// Runs both executions of the seeded net on x and profiles the chosen variant.
inline ErrorProfile profile_residual(const ResidualNetConfig& cfg, const Tensor& x, Variant variant) {
  ResidualNetConfig run_cfg = cfg;
  if (variant == Variant::Conventional) {
    run_cfg.style = BlockStyle::ConventionalPostAct;
  } else if (!is_highway(run_cfg.style)) {
    run_cfg.style = BlockStyle::HighwayPostAct;
  }
  const TapPair taps = run_pair(run_cfg, x);
  ErrorProfile p;
  p.variant = to_string(variant);
  p.seed = cfg.seed;
  p.config_summary = detail::resnet_summary(cfg);
  for (std::size_t i = 0; i < taps.full_precision.size(); ++i) {
    p.labels.push_back(static_cast<std::int64_t>(i) + 1);
    p.errors.push_back(cosine_error(taps.full_precision[i], taps.quantized[i]));
  }
  return p;
}

// Lockstep full-precision vs quantized sequence run; error per step on c_t of
// the top layer.
inline ErrorProfile profile_lstm(const LstmConfig& cfg, const LstmWeights& weights,
                                 const std::vector<Tensor>& xs, Variant variant) {
  LstmConfig q_cfg = cfg;
  q_cfg.placement =
      variant == Variant::Conventional ? LstmPlacement::Conventional : LstmPlacement::Highway;
  LstmConfig fp_cfg = q_cfg;
  fp_cfg.activation_bits = kLosslessBits;  // identity grids: a pure full-precision run
  fp_cfg.weight_bits = Precision::full();

  const SequenceResult fp = run_sequence(fp_cfg, weights, xs, zero_states(fp_cfg));
  const SequenceResult q = run_sequence(q_cfg, weights, xs, zero_states(q_cfg));

  ErrorProfile p;
  p.variant = to_string(variant);
  p.seed = cfg.seed;
  p.config_summary = detail::lstm_summary(cfg, xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) {
    p.labels.push_back(static_cast<std::int64_t>(t) + 1);
    p.errors.push_back(cosine_error(fp.trace[t].back().c, q.trace[t].back().c));
  }
  return p;
}

struct ComparisonReport {
  std::vector<std::int64_t> labels;
  std::vector<double> conventional_median, conventional_iqr;
  std::vector<double> highway_median, highway_iqr;
  std::vector<double> gap;  // conventional_median - highway_median per position
  double widening = 0.0;    // gap at last position minus gap at first
  std::size_t seeds_per_variant = 0;
  std::string config_summary;
};

namespace detail {

inline double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile: empty");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

}  // namespace detail

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return detail::percentile_sorted(v, 0.5);
}

// Aggregates per-seed profiles of the two variants into aligned median/IQR
// series plus the accumulation-widening statistic. Profiles must agree on
// everything except the variant tag and the seed.
inline ComparisonReport compare(const std::vector<ErrorProfile>& profiles) {
  if (profiles.empty()) throw std::invalid_argument("compare: no profiles");
  const std::string& summary = profiles.front().config_summary;
  const auto& labels = profiles.front().labels;
  std::vector<const ErrorProfile*> conv, hw;
  for (const ErrorProfile& p : profiles) {
    if (p.config_summary != summary) {
      throw std::invalid_argument("compare: profiles have mismatched configs: '" + summary +
                                  "' vs '" + p.config_summary + "'");
    }
    if (p.labels != labels) throw std::invalid_argument("compare: profiles have mismatched labels");
    if (p.variant == "conventional") {
      conv.push_back(&p);
    } else if (p.variant == "highway") {
      hw.push_back(&p);
    } else {
      throw std::invalid_argument("compare: unknown variant tag '" + p.variant + "'");
    }
  }
  if (conv.empty() || hw.empty()) {
    throw std::invalid_argument("compare: need at least one profile of each variant");
  }
  // Order-independence: aggregate in seed order regardless of arrival order.
  auto by_seed = [](const ErrorProfile* a, const ErrorProfile* b) { return a->seed < b->seed; };
  std::sort(conv.begin(), conv.end(), by_seed);
  std::sort(hw.begin(), hw.end(), by_seed);

  ComparisonReport r;
  r.labels = labels;
  r.config_summary = summary;
  r.seeds_per_variant = std::min(conv.size(), hw.size());
  for (std::size_t pos = 0; pos < labels.size(); ++pos) {
    auto collect = [pos](const std::vector<const ErrorProfile*>& set) {
      std::vector<double> v;
      v.reserve(set.size());
      for (const ErrorProfile* p : set) v.push_back(p->errors[pos]);
      std::sort(v.begin(), v.end());
      return v;
    };
    const std::vector<double> cv = collect(conv);
    const std::vector<double> hv = collect(hw);
    r.conventional_median.push_back(detail::percentile_sorted(cv, 0.5));
    r.conventional_iqr.push_back(detail::percentile_sorted(cv, 0.75) -
                                 detail::percentile_sorted(cv, 0.25));
    r.highway_median.push_back(detail::percentile_sorted(hv, 0.5));
    r.highway_iqr.push_back(detail::percentile_sorted(hv, 0.75) -
                            detail::percentile_sorted(hv, 0.25));
    r.gap.push_back(r.conventional_median.back() - r.highway_median.back());
  }
  r.widening = r.gap.back() - r.gap.front();
  return r;
}

// Spearman rank correlation, used to quantify the growth trend of an error
// series against its position index. Ties get average ranks.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("spearman: need two equal-length series of size >= 2");
  }
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(xs), ry = ranks(ys);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(rx.size());
  my /= static_cast<double>(ry.size());
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0.0 || dy == 0.0) return 0.0;
  return num / std::sqrt(dx * dy);
}

}  // namespace qhwy
