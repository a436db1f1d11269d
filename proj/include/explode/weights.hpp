#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "explode/error.hpp"
#include "explode/scalar.hpp"

namespace explode {

/// Level-weight sequences truncated at cap K.
///
/// `a` is the level measure m({k}) = a_k, strictly decreasing, positive and
/// summing to one. `b` is the explosion reset distribution derived from `a`:
///
///   b_k = (a_k - a_{k+1}) / a_1   for k < K,
///   b_K = a_K / a_1               (capped closure).
///
/// The closure keeps Sum b = 1 and the telescoping identity
/// a_1 b_k + a_{k+1} = a_k (with a_{K+1} read as 0) exact, so the finite
/// operator built on top is exactly doubly stochastic.
template <class S>
class capped_weights {
 public:
  static capped_weights geometric(const S& ratio, int cap) {
    require(ratio > S(0) && ratio < S(1), errc::bad_ratio,
            "ratio must lie strictly between 0 and 1, got " + format_scalar(ratio));
    require(cap >= 2, errc::bad_cap, "cap must be at least 2, got " + std::to_string(cap));
    // a_k proportional to ratio^(k-1), renormalized over the K kept levels.
    std::vector<S> a(static_cast<std::size_t>(cap));
    S power(1);
    S total(0);
    for (int k = 0; k < cap; ++k) {
      a[static_cast<std::size_t>(k)] = power;
      total += power;
      power *= ratio;
    }
    for (auto& value : a) value /= total;
    capped_weights w = from_validated(std::move(a));
    w.geometric_ratio_ = ratio;
    return w;
  }

  /// Validates a user-supplied level measure. No silent renormalization:
  /// sequences that are not strictly decreasing, not positive, or do not sum
  /// to one are rejected outright.
  static capped_weights custom(std::vector<S> a, int cap) {
    require(cap >= 2, errc::bad_cap, "cap must be at least 2, got " + std::to_string(cap));
    require(static_cast<int>(a.size()) == cap, errc::length_mismatch,
            "expected " + std::to_string(cap) + " level weights, got " + std::to_string(a.size()));
    return from_validated(std::move(a));
  }

  int cap() const { return static_cast<int>(a_.size()); }
  const std::vector<S>& a() const { return a_; }
  const std::vector<S>& b() const { return b_; }

  /// a_k, 1-based.
  const S& level_mass(int k) const {
    check_level(k);
    return a_[static_cast<std::size_t>(k - 1)];
  }

  /// b_k, 1-based.
  const S& reset_prob(int k) const {
    check_level(k);
    return b_[static_cast<std::size_t>(k - 1)];
  }

  /// S(i) = sum_{k<=i} b_k, defined for 0 <= i <= K.
  const S& partial_sum(int i) const {
    check_cut(i);
    return prefix_[static_cast<std::size_t>(i)];
  }

  /// R(i) = sum_{k>i} b_k, defined for 0 <= i <= K; R(K) = 0.
  const S& tail(int i) const {
    check_cut(i);
    return suffix_[static_cast<std::size_t>(i)];
  }

  /// sum_{k>=i} R(k) over the capped range, the lemma-bound right-hand side.
  const S& tail_of_tails(int i) const {
    check_cut(i);
    return tail_tails_[static_cast<std::size_t>(i)];
  }

  /// Ratio recorded by the geometric builder; empty for custom weights.
  const std::optional<S>& geometric_ratio() const { return geometric_ratio_; }

 private:
  static capped_weights from_validated(std::vector<S> a) {
    const int cap = static_cast<int>(a.size());
    for (int k = 0; k < cap; ++k) {
      require(a[static_cast<std::size_t>(k)] > S(0), errc::weights_not_positive,
              "a_" + std::to_string(k + 1) + " must be positive");
    }
    for (int k = 0; k + 1 < cap; ++k) {
      require(a[static_cast<std::size_t>(k)] > a[static_cast<std::size_t>(k + 1)],
              errc::weights_not_decreasing,
              "a_" + std::to_string(k + 1) + " must exceed a_" + std::to_string(k + 2));
    }
    S total(0);
    for (const auto& value : a) total += value;
    require(near_equal(total, S(1), kSumTolerance), errc::weights_sum_not_one,
            "level weights sum to " + format_scalar(total) + ", expected 1");

    capped_weights w;
    w.a_ = std::move(a);
    w.b_.resize(static_cast<std::size_t>(cap));
    for (int k = 0; k + 1 < cap; ++k) {
      w.b_[static_cast<std::size_t>(k)] =
          (w.a_[static_cast<std::size_t>(k)] - w.a_[static_cast<std::size_t>(k + 1)]) / w.a_[0];
    }
    w.b_[static_cast<std::size_t>(cap - 1)] = w.a_[static_cast<std::size_t>(cap - 1)] / w.a_[0];

    w.prefix_.resize(static_cast<std::size_t>(cap) + 1);
    w.prefix_[0] = S(0);
    for (int k = 0; k < cap; ++k) {
      w.prefix_[static_cast<std::size_t>(k + 1)] =
          w.prefix_[static_cast<std::size_t>(k)] + w.b_[static_cast<std::size_t>(k)];
    }
    w.suffix_.resize(static_cast<std::size_t>(cap) + 1);
    w.suffix_[static_cast<std::size_t>(cap)] = S(0);
    for (int k = cap - 1; k >= 0; --k) {
      w.suffix_[static_cast<std::size_t>(k)] =
          w.suffix_[static_cast<std::size_t>(k + 1)] + w.b_[static_cast<std::size_t>(k)];
    }
    w.tail_tails_.resize(static_cast<std::size_t>(cap) + 1);
    w.tail_tails_[static_cast<std::size_t>(cap)] = S(0);
    for (int i = cap - 1; i >= 0; --i) {
      w.tail_tails_[static_cast<std::size_t>(i)] =
          w.tail_tails_[static_cast<std::size_t>(i + 1)] + w.suffix_[static_cast<std::size_t>(i)];
    }
    return w;
  }

  void check_level(int k) const {
    require(k >= 1 && k <= cap(), errc::index_out_of_range,
            "level " + std::to_string(k) + " outside 1.." + std::to_string(cap()));
  }
  void check_cut(int i) const {
    require(i >= 0 && i <= cap(), errc::index_out_of_range,
            "index " + std::to_string(i) + " outside 0.." + std::to_string(cap()));
  }

  capped_weights() = default;

  std::vector<S> a_;
  std::vector<S> b_;
  std::vector<S> prefix_;      // prefix_[i] = S(i)
  std::vector<S> suffix_;      // suffix_[i] = R(i)
  std::vector<S> tail_tails_;  // tail_tails_[i] = sum_{k>=i} R(k)
  std::optional<S> geometric_ratio_;
};

}  // namespace explode
