#pragma once

// Dense row-major tensors over double, plus the handful of kernels the rest
// of the toolkit composes: matmul, conv2d, pointwise nonlinearities, and
// elementwise arithmetic. No views, no batch dimension, no autodiff.

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qhwy/rng.hpp"

namespace qhwy {

class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::int64_t> shape)
      : shape_(std::move(shape)), data_(checked_numel(shape_), 0.0) {}

  Tensor(std::vector<std::int64_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_numel(shape_) != static_cast<std::int64_t>(data_.size())) {
      throw std::invalid_argument("tensor: shape/data size mismatch");
    }
  }

  static Tensor full(std::vector<std::int64_t> shape, double value) {
    Tensor t(std::move(shape));
    for (double& v : t.data_) v = value;
    return t;
  }

  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t ndim() const { return static_cast<std::int64_t>(shape_.size()); }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  std::int64_t extent(std::size_t d) const { return shape_.at(d); }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }

  double& at(std::int64_t i, std::int64_t j) {
    return data_[static_cast<std::size_t>(i * shape_[1] + j)];
  }
  double at(std::int64_t i, std::int64_t j) const {
    return data_[static_cast<std::size_t>(i * shape_[1] + j)];
  }
  double& at(std::int64_t c, std::int64_t h, std::int64_t w) {
    return data_[static_cast<std::size_t>((c * shape_[1] + h) * shape_[2] + w)];
  }
  double at(std::int64_t c, std::int64_t h, std::int64_t w) const {
    return data_[static_cast<std::size_t>((c * shape_[1] + h) * shape_[2] + w)];
  }
  double& at(std::int64_t o, std::int64_t c, std::int64_t h, std::int64_t w) {
    return data_[static_cast<std::size_t>(((o * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }
  double at(std::int64_t o, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return data_[static_cast<std::size_t>(((o * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  std::string shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) os << ",";
      os << shape_[i];
    }
    os << "]";
    return os.str();
  }

 private:
  static std::int64_t checked_numel(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (std::int64_t e : shape) {
      if (e <= 0) throw std::invalid_argument("tensor: non-positive extent");
      n *= e;
    }
    return n;
  }

  std::vector<std::int64_t> shape_;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// MAC tallying. A scope registers itself for the current thread; matmul and
// conv2d add their multiply-accumulate counts to every active scope in the
// chain. Zero overhead when no scope is active.

class MacCounter {
 public:
  MacCounter() : prev_(active_) { active_ = this; }
  ~MacCounter() { active_ = prev_; }
  MacCounter(const MacCounter&) = delete;
  MacCounter& operator=(const MacCounter&) = delete;

  std::int64_t macs() const { return macs_; }

  static void add(std::int64_t n) {
    for (MacCounter* c = active_; c != nullptr; c = c->prev_) c->macs_ += n;
  }

 private:
  std::int64_t macs_ = 0;
  MacCounter* prev_ = nullptr;
  inline static thread_local MacCounter* active_ = nullptr;
};

// ---------------------------------------------------------------------------

struct ConvSpec {
  std::int64_t in_channels = 0;
  std::int64_t out_channels = 0;
  std::int64_t kernel_size = 1;  // square kernels only
  std::int64_t stride = 1;
  std::int64_t padding = 0;
};

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2) {
    throw std::invalid_argument("matmul: operands must be rank 2, got " + a.shape_str() + " x " +
                                b.shape_str());
  }
  const std::int64_t m = a.extent(0), k = a.extent(1), k2 = b.extent(0), n = b.extent(1);
  if (k != k2) {
    throw std::invalid_argument("matmul: inner extents disagree: " + a.shape_str() + " x " +
                                b.shape_str());
  }
  Tensor out({m, n});
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::int64_t p = 0; p < k; ++p) acc += a.at(i, p) * b.at(p, j);
      out.at(i, j) = acc;
    }
  }
  MacCounter::add(m * k * n);
  return out;
}

// Cross-correlation (no kernel flip), zero padding. x is CxHxW, w is CoxCxkxk.
inline Tensor conv2d(const Tensor& x, const Tensor& w, const ConvSpec& spec) {
  if (x.ndim() != 3) throw std::invalid_argument("conv2d: input must be CxHxW, got " + x.shape_str());
  if (w.ndim() != 4) throw std::invalid_argument("conv2d: kernel must be CoxCxkxk, got " + w.shape_str());
  if (spec.kernel_size < 1 || spec.stride < 1 || spec.padding < 0) {
    throw std::invalid_argument("conv2d: invalid spec");
  }
  const std::int64_t c_in = x.extent(0), h = x.extent(1), wd = x.extent(2);
  if (spec.in_channels != c_in || w.extent(1) != c_in || w.extent(0) != spec.out_channels ||
      w.extent(2) != spec.kernel_size || w.extent(3) != spec.kernel_size) {
    throw std::invalid_argument("conv2d: shapes inconsistent with spec: input " + x.shape_str() +
                                ", kernel " + w.shape_str());
  }
  const std::int64_t k = spec.kernel_size;
  const std::int64_t h_num = h + 2 * spec.padding - k;
  const std::int64_t w_num = wd + 2 * spec.padding - k;
  if (h_num < 0 || w_num < 0 || h_num % spec.stride != 0 || w_num % spec.stride != 0) {
    throw std::invalid_argument("conv2d: output extent not integral for input " + x.shape_str());
  }
  const std::int64_t ho = h_num / spec.stride + 1;
  const std::int64_t wo = w_num / spec.stride + 1;

  Tensor out({spec.out_channels, ho, wo});
  for (std::int64_t co = 0; co < spec.out_channels; ++co) {
    for (std::int64_t oy = 0; oy < ho; ++oy) {
      for (std::int64_t ox = 0; ox < wo; ++ox) {
        double acc = 0.0;
        const std::int64_t iy0 = oy * spec.stride - spec.padding;
        const std::int64_t ix0 = ox * spec.stride - spec.padding;
        for (std::int64_t ci = 0; ci < c_in; ++ci) {
          for (std::int64_t ky = 0; ky < k; ++ky) {
            const std::int64_t iy = iy0 + ky;
            if (iy < 0 || iy >= h) continue;
            for (std::int64_t kx = 0; kx < k; ++kx) {
              const std::int64_t ix = ix0 + kx;
              if (ix < 0 || ix >= wd) continue;
              acc += x.at(ci, iy, ix) * w.at(co, ci, ky, kx);
            }
          }
        }
        out.at(co, oy, ox) = acc;
      }
    }
  }
  MacCounter::add(spec.out_channels * ho * wo * c_in * k * k);
  return out;
}

template <typename F>
inline Tensor map(const Tensor& x, F f) {
  Tensor out(x.shape());
  const auto& in = x.data();
  auto& d = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) d[i] = f(in[i]);
  return out;
}

inline Tensor relu(const Tensor& x) {
  return map(x, [](double v) { return v > 0.0 ? v : 0.0; });
}

inline Tensor sigmoid(const Tensor& x) {
  return map(x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

inline Tensor tanh(const Tensor& x) {
  return map(x, [](double v) { return std::tanh(v); });
}

inline Tensor clamp(const Tensor& x, double lo, double hi) {
  return map(x, [lo, hi](double v) { return v < lo ? lo : (v > hi ? hi : v); });
}

inline Tensor elementwise_add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument("elementwise_add: shape mismatch " + a.shape_str() + " vs " +
                                b.shape_str());
  }
  Tensor out(a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Tensor elementwise_mul(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument("elementwise_mul: shape mismatch " + a.shape_str() + " vs " +
                                b.shape_str());
  }
  Tensor out(a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline bool all_finite(const Tensor& x) {
  for (double v : x.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline Tensor random_uniform(Rng& rng, std::vector<std::int64_t> shape, double lo, double hi) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

inline Tensor random_gaussian(Rng& rng, std::vector<std::int64_t> shape, double stddev) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.gaussian(stddev);
  return t;
}

}  // namespace qhwy
