#pragma once

// Fake quantization: snapping real values onto finite level sets while keeping
// double storage, which simulates fixed-point inference without committing to
// an integer pipeline. Three level-set families:
//
//   fixed(lo, hi)        2^k evenly spaced levels including both endpoints;
//                        out-of-range input clamps to the nearest endpoint.
//   symmetric_laplace    2^k mid-rise levels +-(i+0.5)*delta*mu, no zero level,
//                        with delta chosen to minimize expected squared error
//                        under a Laplace weight model (see solve_laplace_levels).
//   dynamic_minmax       fixed(min(x), max(x)) derived per tensor.
//
// Tie rule everywhere: round half away from zero (on an exact tie, take the
// level of larger magnitude; a symmetric straddle of zero resolves positive).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhwy/tensor.hpp"

namespace qhwy {

// Bit-width that may also be "full" (no quantization). bits == 0 means full.
struct Precision {
  int bits = 0;

  static constexpr Precision full() { return Precision{0}; }
  static constexpr Precision of(int k) { return Precision{k}; }
  bool is_full() const { return bits == 0; }

  friend bool operator==(const Precision& a, const Precision& b) { return a.bits == b.bits; }
};

// Quantization grids denser than the double mantissa are exact identities;
// treat them as such instead of computing degenerate step sizes.
inline constexpr int kLosslessBits = 53;

enum class RangePolicy { Fixed, SymmetricLaplace, DynamicMinMax };

struct QuantSpec {
  int bits = 0;
  RangePolicy policy = RangePolicy::Fixed;
  double lo = 0.0, hi = 1.0;   // Fixed
  double mu = 1.0;             // SymmetricLaplace: scale
  double delta = 0.0;          // SymmetricLaplace: spacing in units of mu

  static QuantSpec fixed(int k, double lo, double hi) {
    if (k < 1) throw std::invalid_argument("quant: bits must be >= 1");
    if (!(lo < hi)) throw std::invalid_argument("quant: degenerate range, lo must be < hi");
    QuantSpec s;
    s.bits = k;
    s.policy = RangePolicy::Fixed;
    s.lo = lo;
    s.hi = hi;
    return s;
  }

  static QuantSpec symmetric_laplace(int k, double mu, double delta) {
    if (k < 1) throw std::invalid_argument("quant: bits must be >= 1");
    if (!(mu > 0.0)) throw std::invalid_argument("quant: mu must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("quant: delta must be positive");
    QuantSpec s;
    s.bits = k;
    s.policy = RangePolicy::SymmetricLaplace;
    s.mu = mu;
    s.delta = delta;
    return s;
  }

  static QuantSpec dynamic_minmax(int k) {
    if (k < 1) throw std::invalid_argument("quant: bits must be >= 1");
    QuantSpec s;
    s.bits = k;
    s.policy = RangePolicy::DynamicMinMax;
    return s;
  }

  // The full level set, smallest to largest. Only sensible for k small enough
  // to enumerate; used by reports and tests.
  std::vector<double> levels() const {
    if (bits >= 31) throw std::invalid_argument("quant: level set too large to enumerate");
    std::vector<double> out;
    if (policy == RangePolicy::SymmetricLaplace) {
      const std::int64_t half = std::int64_t{1} << (bits - 1);
      out.reserve(static_cast<std::size_t>(2 * half));
      for (std::int64_t i = half - 1; i >= 0; --i) out.push_back(-(static_cast<double>(i) + 0.5) * delta * mu);
      for (std::int64_t i = 0; i < half; ++i) out.push_back((static_cast<double>(i) + 0.5) * delta * mu);
    } else {
      const std::int64_t n = std::int64_t{1} << bits;
      const double step = (hi - lo) / static_cast<double>(n - 1);
      out.reserve(static_cast<std::size_t>(n));
      // The top level is hi itself, not lo + (n-1)*step: the latter can land
      // an ulp away and would split the endpoint into two distinct values.
      for (std::int64_t i = 0; i + 1 < n; ++i) out.push_back(lo + static_cast<double>(i) * step);
      out.push_back(hi);
    }
    return out;
  }
};

namespace detail {

// Choose between the two neighboring levels around x. Exact ties go to the
// level of larger magnitude; equal magnitudes resolve positive.
inline double pick_nearer(double x, double lower, double upper) {
  const double d0 = x - lower;
  const double d1 = upper - x;
  if (d0 < d1) return lower;
  if (d1 < d0) return upper;
  const double a0 = std::fabs(lower), a1 = std::fabs(upper);
  if (a0 > a1) return lower;
  if (a1 > a0) return upper;
  return upper >= 0.0 ? upper : lower;
}

inline double snap_fixed(double x, int k, double lo, double hi) {
  if (x <= lo) return lo;
  if (x >= hi) return hi;
  if (k >= kLosslessBits) return x;
  const double n_minus_1 = static_cast<double>((std::int64_t{1} << k) - 1);
  const double step = (hi - lo) / n_minus_1;
  double idx = std::floor((x - lo) / step);
  if (idx < 0.0) idx = 0.0;
  if (idx > n_minus_1 - 1.0) idx = n_minus_1 - 1.0;
  const double lower = lo + idx * step;
  // Top cell snaps to hi exactly, matching levels(): recomputing it as
  // lo + (n-1)*step can differ from hi in the last ulp, and that would give
  // the endpoint a second representation (breaking bit-level idempotence,
  // monotonicity, and the 2^k cardinality bound).
  const double upper = (idx + 1.0 == n_minus_1) ? hi : lo + (idx + 1.0) * step;
  return pick_nearer(x, lower, upper);
}

// Mid-rise symmetric grid: cell [i*d, (i+1)*d) maps to (i+0.5)*d; the top cell
// clamps. Cell boundaries are exact midpoints, and floor sends them up -- which
// is exactly round-half-away-from-zero on the magnitude. x == 0 is the one
// symmetric straddle and resolves to the positive level +0.5*d.
inline double snap_symmetric_midrise(double x, int k, double d) {
  const std::int64_t half = std::int64_t{1} << (k - 1);
  const double a = std::fabs(x);
  double i = std::floor(a / d);
  if (i > static_cast<double>(half - 1)) i = static_cast<double>(half - 1);
  const double level = (i + 0.5) * d;
  return x < 0.0 ? -level : level;
}

}  // namespace detail

inline double quantize_scalar(double x, const QuantSpec& spec) {
  switch (spec.policy) {
    case RangePolicy::Fixed:
      return detail::snap_fixed(x, spec.bits, spec.lo, spec.hi);
    case RangePolicy::SymmetricLaplace:
      return detail::snap_symmetric_midrise(x, spec.bits, spec.delta * spec.mu);
    case RangePolicy::DynamicMinMax:
      throw std::invalid_argument("quant: dynamic policy needs a tensor, not a scalar");
  }
  throw std::logic_error("quant: unreachable");
}

inline Tensor quantize(const Tensor& x, const QuantSpec& spec) {
  if (spec.policy == RangePolicy::DynamicMinMax) {
    if (x.numel() == 0) return x;
    double mn = x[0], mx = x[0];
    for (double v : x.data()) {
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    if (mn == mx || spec.bits >= kLosslessBits) return x;  // constant tensors pass through
    const int k = spec.bits;
    return map(x, [k, mn, mx](double v) { return detail::snap_fixed(v, k, mn, mx); });
  }
  return map(x, [&spec](double v) { return quantize_scalar(v, spec); });
}

inline Tensor quantize_dynamic(const Tensor& x, int k) {
  return quantize(x, QuantSpec::dynamic_minmax(k));
}

// ---------------------------------------------------------------------------
// Optimal evenly spaced symmetric levels for Laplace-distributed weights.
//
// Weights are modeled as Laplace with E|X| = 1 (density exp(-|x|)/2); the
// level set is the 2^k mid-rise grid above with spacing delta. The expected
// squared error reduces by symmetry to
//
//   E(delta) = integral_0^12 exp(-x) * (x - q_delta(x))^2 dx
//
// (tail mass beyond 12 is < 1e-5 relative). Each cell integrates in closed
// form via the antiderivative of exp(-x)*(x-c)^2, so evaluating E is exact up
// to rounding; the minimum is located by a coarse scan plus golden-section
// refinement, certified well inside |delta - delta*| <= 1e-3.

struct LaplaceLevels {
  int k = 0;
  double delta = 0.0;     // spacing in units of mu
  double l2_error = 0.0;  // expected squared error at mu = 1

  std::vector<double> levels(double mu = 1.0) const {
    return QuantSpec::symmetric_laplace(k, mu, delta).levels();
  }
};

namespace detail {

inline constexpr double kLaplaceCut = 12.0;

// integral of exp(-x) * (x - c)^2 dx  =  -exp(-x) * ((x-c)^2 + 2(x-c) + 2)
inline double laplace_cell_antideriv(double x, double c) {
  const double t = x - c;
  return -std::exp(-x) * (t * t + 2.0 * t + 2.0);
}

inline double laplace_expected_sq_error(int k, double delta) {
  const std::int64_t half = std::int64_t{1} << (k - 1);
  double total = 0.0;
  for (std::int64_t i = 0; i < half; ++i) {
    const double a = static_cast<double>(i) * delta;
    if (a >= kLaplaceCut) return total;
    const double b = std::min(static_cast<double>(i + 1) * delta, kLaplaceCut);
    const double c = (static_cast<double>(i) + 0.5) * delta;
    total += laplace_cell_antideriv(b, c) - laplace_cell_antideriv(a, c);
  }
  const double edge = static_cast<double>(half) * delta;
  if (edge < kLaplaceCut) {
    const double c = (static_cast<double>(half) - 0.5) * delta;  // clamp region
    total += laplace_cell_antideriv(kLaplaceCut, c) - laplace_cell_antideriv(edge, c);
  }
  return total;
}

inline LaplaceLevels solve_laplace_levels_uncached(int k) {
  // Coarse scan over (0, 3], then golden-section on the bracketing interval.
  double best_d = 0.0, best_e = std::numeric_limits<double>::infinity();
  const double coarse = 1e-3;
  for (double d = coarse; d <= 3.0 + 1e-12; d += coarse) {
    const double e = laplace_expected_sq_error(k, d);
    if (e < best_e) {
      best_e = e;
      best_d = d;
    }
  }
  double a = std::max(best_d - coarse, coarse * 0.5);
  double b = best_d + coarse;
  const double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = laplace_expected_sq_error(k, x1);
  double f2 = laplace_expected_sq_error(k, x2);
  while (b - a > 1e-10) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = laplace_expected_sq_error(k, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = laplace_expected_sq_error(k, x2);
    }
  }
  LaplaceLevels out;
  out.k = k;
  out.delta = 0.5 * (a + b);
  out.l2_error = laplace_expected_sq_error(k, out.delta);
  return out;
}

}  // namespace detail

inline LaplaceLevels solve_laplace_levels(int k) {
  if (k < 1 || k > 8) throw std::invalid_argument("solve_laplace_levels: k must be in [1, 8]");
  static const std::array<LaplaceLevels, 8> table = [] {
    std::array<LaplaceLevels, 8> t{};
    for (int kk = 1; kk <= 8; ++kk) t[static_cast<std::size_t>(kk - 1)] = detail::solve_laplace_levels_uncached(kk);
    return t;
  }();
  return table[static_cast<std::size_t>(k - 1)];
}

// Fit a Laplace weight quantizer to a concrete tensor: mu is the mean absolute
// weight, the spacing comes from the precomputed optimum for k bits.
inline QuantSpec fit_weight_quantizer(const Tensor& w, int k) {
  if (w.numel() == 0) throw std::invalid_argument("fit_weight_quantizer: empty tensor");
  double mu = 0.0;
  for (double v : w.data()) mu += std::fabs(v);
  mu /= static_cast<double>(w.numel());
  if (mu == 0.0) throw std::invalid_argument("fit_weight_quantizer: all-zero weights (mu = 0)");
  const LaplaceLevels lv = solve_laplace_levels(k);
  return QuantSpec::symmetric_laplace(k, mu, lv.delta);
}

}  // namespace qhwy
