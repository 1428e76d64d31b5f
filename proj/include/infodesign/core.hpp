// Copyright 2026 The InfoDesign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef INFODESIGN_CORE_HPP_
#define INFODESIGN_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace infodesign {

inline constexpr const char* kVersion = "0.1.0";

/// Default limit on the number of cells in any enumerated table.
inline constexpr std::uint64_t kDefaultCellCap = 1'000'000;

/// Tolerance for "row is a distribution" checks.
inline constexpr double kSimplexTol = 1e-12;

enum class ErrorCode {
  kInvalidArgument,
  kOffSupport,
  kCapExceeded,
  kNonConvergence,
  kParse,
  kShapeMismatch,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// -----------------------------------------------------------------------------
// Index arithmetic
// -----------------------------------------------------------------------------

/// Saturating power; returns UINT64_MAX on overflow.
constexpr std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t result = 1;
  for (std::uint64_t k = 0; k < exp; ++k) {
    if (base != 0 && result > std::numeric_limits<std::uint64_t>::max() / base)
      return std::numeric_limits<std::uint64_t>::max();
    result *= base;
  }
  return result;
}

/// Saturating product.
constexpr std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

/**
 * Mixed-radix codec for tuples with a common base (joint actions, joint
 * signals, joint types, signal batches). Position 0 is the most significant
 * digit, so flat indices enumerate tuples in lexicographic order.
 */
class Radix {
 public:
  Radix() = default;
  Radix(std::size_t base, std::size_t length) : base_(base), length_(length) {
    weights_.assign(length, 1);
    for (std::size_t k = length; k-- > 1;) weights_[k - 1] = weights_[k] * base;
    size_ = length == 0 ? 1 : weights_[0] * base;
  }

  std::size_t base() const { return base_; }
  std::size_t length() const { return length_; }
  std::size_t size() const { return size_; }

  std::size_t digit(std::size_t index, std::size_t position) const {
    return (index / weights_[position]) % base_;
  }

  std::size_t with_digit(std::size_t index, std::size_t position,
                         std::size_t value) const {
    return index - digit(index, position) * weights_[position] +
           value * weights_[position];
  }

  std::size_t encode(std::span<const std::size_t> digits) const {
    std::size_t index = 0;
    for (std::size_t k = 0; k < length_; ++k) index += digits[k] * weights_[k];
    return index;
  }

  std::vector<std::size_t> decode(std::size_t index) const {
    std::vector<std::size_t> digits(length_);
    for (std::size_t k = 0; k < length_; ++k) digits[k] = digit(index, k);
    return digits;
  }

  /// Index of the tuple with `position` removed (length - 1 digits).
  std::size_t drop(std::size_t index, std::size_t position) const {
    std::size_t out = 0;
    for (std::size_t k = 0; k < length_; ++k) {
      if (k == position) continue;
      out = out * base_ + digit(index, k);
    }
    return out;
  }

  /// Inverse of drop(): inserts `value` at `position` into a reduced index.
  std::size_t insert(std::size_t reduced, std::size_t position,
                     std::size_t value) const {
    std::size_t out = 0;
    Radix shorter(base_, length_ == 0 ? 0 : length_ - 1);
    std::size_t r = 0;
    for (std::size_t k = 0; k < length_; ++k) {
      std::size_t d = 0;
      if (k == position) {
        d = value;
      } else {
        d = shorter.digit(reduced, r++);
      }
      out = out * base_ + d;
    }
    return out;
  }

 private:
  std::size_t base_ = 1;
  std::size_t length_ = 0;
  std::size_t size_ = 1;
  std::vector<std::size_t> weights_;
};

// -----------------------------------------------------------------------------
// Summation and simplex helpers
// -----------------------------------------------------------------------------

/// Left-to-right sum; switches to Neumaier compensation for long rows.
inline double ordered_sum(std::span<const double> values) {
  if (values.size() <= 10'000) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  double s = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = s + v;
    if (std::abs(s) >= std::abs(v)) {
      c += (s - t) + v;
    } else {
      c += (v - t) + s;
    }
    s = t;
  }
  return s + c;
}

/// Largest deviation of a row from being a probability distribution.
inline double simplex_violation(std::span<const double> row) {
  double worst = std::abs(ordered_sum(row) - 1.0);
  for (double v : row) {
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, -v);
  }
  return worst;
}

/// Euclidean projection of `row` onto the probability simplex, in place.
inline void project_to_simplex(std::span<double> row) {
  const std::size_t n = row.size();
  if (n == 0) return;
  std::vector<double> sorted(row.begin(), row.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cumulative += sorted[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) threshold = t;
  }
  for (double& v : row) v = std::max(v - threshold, 0.0);
  // Restore the exact sum after the floating-point threshold shift.
  const double s = ordered_sum(row);
  if (s > 0.0) {
    for (double& v : row) v /= s;
  } else {
    std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(n));
  }
}

// -----------------------------------------------------------------------------
// Deterministic random numbers
// -----------------------------------------------------------------------------

/**
 * Seeded generator with platform-independent derived draws. std::mt19937_64 is
 * fully specified by the standard; the distributions here avoid the
 * implementation-defined std:: distribution classes.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) %
           std::max<std::size_t>(n, 1);
  }

  /// Uniform draw from the probability simplex (normalized exponentials).
  std::vector<double> simplex(std::size_t n) {
    std::vector<double> row(n);
    for (double& v : row) v = -std::log(1.0 - uniform());
    const double s = ordered_sum(row);
    for (double& v : row) v /= s;
    return row;
  }

  /// Inverse-CDF sample from a row; falls back to the last positive entry.
  std::size_t categorical(std::span<const double> row) {
    const double u = uniform();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] <= 0.0) continue;
      last_positive = k;
      cumulative += row[k];
      if (u < cumulative) return k;
    }
    return last_positive;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed (splitmix64 finalizer).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace infodesign

#endif  // INFODESIGN_CORE_HPP_
