#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "explode/error.hpp"
#include "explode/scalar.hpp"
#include "explode/weights.hpp"

namespace explode {

/// Float-mode comparison tolerance for the shift backend (p may be
/// irrational); rational mode ignores it.
inline constexpr double kShiftTolerance = 1e-9;

inline std::size_t power_size(int base, int exponent) {
  std::size_t out = 1;
  for (int i = 0; i < exponent; ++i) {
    require(out <= (static_cast<std::size_t>(1) << 26) / static_cast<std::size_t>(base),
            errc::depth_budget_exceeded, "cylinder table of depth " + std::to_string(exponent) +
                                             " over alphabet " + std::to_string(base) +
                                             " is too large");
    out *= static_cast<std::size_t>(base);
  }
  return out;
}

/// One-sided full shift over alphabet {0..s-1} with the product measure
/// generated by p. The map drops the first coordinate; it is measure
/// preserving and noninvertible.
template <class S>
class bernoulli_shift {
 public:
  bernoulli_shift(int alphabet, std::vector<S> p) : p_(std::move(p)) {
    require(alphabet >= 2, errc::bad_alphabet,
            "alphabet size must be at least 2, got " + std::to_string(alphabet));
    require(static_cast<int>(p_.size()) == alphabet, errc::length_mismatch,
            "expected " + std::to_string(alphabet) + " symbol probabilities, got " +
                std::to_string(p_.size()));
    S total(0);
    for (std::size_t i = 0; i < p_.size(); ++i) {
      require(p_[i] > S(0), errc::measure_not_positive,
              "p[" + std::to_string(i) + "] must be positive");
      total += p_[i];
    }
    require(near_equal(total, S(1), kShiftTolerance), errc::measure_sum_not_one,
            "symbol probabilities sum to " + format_scalar(total) + ", expected 1");
  }

  int alphabet() const { return static_cast<int>(p_.size()); }
  const std::vector<S>& p() const { return p_; }

  void check_letter(int a) const {
    require(a >= 0 && a < alphabet(), errc::bad_letter,
            "letter " + std::to_string(a) + " outside alphabet 0.." +
                std::to_string(alphabet() - 1));
  }

  S word_mass(std::span<const int> word) const {
    S mass(1);
    for (int a : word) {
      check_letter(a);
      mass *= p_[static_cast<std::size_t>(a)];
    }
    return mass;
  }

 private:
  std::vector<S> p_;
};

/// A function of the first `depth` coordinates, stored as a dense table of
/// alphabet^depth values. Words index the table lexicographically with the
/// FIRST coordinate most significant; this ordering is part of the file
/// format and must not change.
template <class S>
class cylinder_function {
 public:
  cylinder_function(int alphabet, int depth, std::vector<S> table)
      : alphabet_(alphabet), depth_(depth), table_(std::move(table)) {
    require(alphabet_ >= 2, errc::bad_alphabet, "alphabet size must be at least 2");
    require(depth_ >= 0, errc::bad_table, "depth must be nonnegative");
    require(table_.size() == power_size(alphabet_, depth_), errc::bad_table,
            "table has " + std::to_string(table_.size()) + " entries, expected " +
                std::to_string(power_size(alphabet_, depth_)));
  }

  static cylinder_function constant(int alphabet, S value) {
    return cylinder_function(alphabet, 0, std::vector<S>{std::move(value)});
  }

  /// Indicator of the cylinder set fixing coordinates offset+1..offset+|word|
  /// to `word`. With offset i this is the indicator of T^{-i}[word].
  static cylinder_function cylinder_indicator(int alphabet, std::span<const int> word,
                                              int offset = 0) {
    require(offset >= 0, errc::index_out_of_range, "cylinder offset must be nonnegative");
    const int depth = offset + static_cast<int>(word.size());
    std::vector<S> table(power_size(alphabet, depth), S(0));
    const std::size_t block = power_size(alphabet, offset);
    std::size_t target = 0;
    for (int a : word) {
      require(a >= 0 && a < alphabet, errc::bad_letter, "letter outside alphabet");
      target = target * static_cast<std::size_t>(alphabet) + static_cast<std::size_t>(a);
    }
    // Free leading coordinates are most significant: every choice of the
    // first `offset` letters selects the same fixed suffix word.
    for (std::size_t head = 0; head < block; ++head) {
      table[head * power_size(alphabet, static_cast<int>(word.size())) + target] = S(1);
    }
    return cylinder_function(alphabet, depth, std::move(table));
  }

  int alphabet() const { return alphabet_; }
  int depth() const { return depth_; }
  const std::vector<S>& table() const { return table_; }

  std::size_t word_index(std::span<const int> word) const {
    require(static_cast<int>(word.size()) >= depth_, errc::length_mismatch,
            "word of length " + std::to_string(word.size()) + " too short for depth " +
                std::to_string(depth_));
    std::size_t idx = 0;
    for (int j = 0; j < depth_; ++j) {
      const int a = word[static_cast<std::size_t>(j)];
      require(a >= 0 && a < alphabet_, errc::bad_letter, "letter outside alphabet");
      idx = idx * static_cast<std::size_t>(alphabet_) + static_cast<std::size_t>(a);
    }
    return idx;
  }

  /// Value on any sequence beginning with `word` (extra letters ignored).
  const S& value_at(std::span<const int> word) const { return table_[word_index(word)]; }

  /// Same function re-tabulated at a larger depth.
  cylinder_function raised(int new_depth) const {
    require(new_depth >= depth_, errc::bad_table, "cannot lower depth by raising");
    if (new_depth == depth_) return *this;
    const std::size_t copies = power_size(alphabet_, new_depth - depth_);
    std::vector<S> table;
    table.reserve(table_.size() * copies);
    for (const auto& value : table_) {
      for (std::size_t c = 0; c < copies; ++c) table.push_back(value);
    }
    return cylinder_function(alphabet_, new_depth, std::move(table));
  }

  /// Integrates out the first coordinate against `p`; depth drops by one.
  cylinder_function averaged_first(const std::vector<S>& p) const {
    if (depth_ == 0) return *this;
    const std::size_t block = table_.size() / static_cast<std::size_t>(alphabet_);
    std::vector<S> table(block, S(0));
    for (int a = 0; a < alphabet_; ++a) {
      const std::size_t base = static_cast<std::size_t>(a) * block;
      for (std::size_t i = 0; i < block; ++i) {
        table[i] += p[static_cast<std::size_t>(a)] * table_[base + i];
      }
    }
    return cylinder_function(alphabet_, depth_ - 1, std::move(table));
  }

  /// Inserts `count` coordinates in front that the function ignores:
  /// result(x) = this(x_{count+1}, x_{count+2}, ...).
  cylinder_function with_free_prefix(int count) const {
    require(count >= 0, errc::bad_table, "prefix count must be nonnegative");
    if (count == 0) return *this;
    const std::size_t copies = power_size(alphabet_, count);
    std::vector<S> table;
    table.reserve(copies * table_.size());
    for (std::size_t c = 0; c < copies; ++c) {
      table.insert(table.end(), table_.begin(), table_.end());
    }
    return cylinder_function(alphabet_, depth_ + count, std::move(table));
  }

  /// Pins the first |word| coordinates to `word`. If the word covers the
  /// whole depth the result is the constant slice value.
  cylinder_function fixed_prefix(std::span<const int> word) const {
    const int k = static_cast<int>(word.size());
    if (k >= depth_) {
      return constant(alphabet_, value_at(word.subspan(0, static_cast<std::size_t>(depth_))));
    }
    std::size_t head = 0;
    for (int a : word) {
      require(a >= 0 && a < alphabet_, errc::bad_letter, "letter outside alphabet");
      head = head * static_cast<std::size_t>(alphabet_) + static_cast<std::size_t>(a);
    }
    const std::size_t block = power_size(alphabet_, depth_ - k);
    std::vector<S> table(table_.begin() + static_cast<std::ptrdiff_t>(head * block),
                         table_.begin() + static_cast<std::ptrdiff_t>((head + 1) * block));
    return cylinder_function(alphabet_, depth_ - k, std::move(table));
  }

  /// Drops trailing coordinates the table does not actually depend on.
  cylinder_function trimmed() const {
    cylinder_function out = *this;
    while (out.depth_ > 0) {
      const std::size_t block = static_cast<std::size_t>(out.alphabet_);
      const std::size_t groups = out.table_.size() / block;
      bool constant_blocks = true;
      for (std::size_t g = 0; g < groups && constant_blocks; ++g) {
        for (std::size_t a = 1; a < block; ++a) {
          if (out.table_[g * block + a] != out.table_[g * block]) {
            constant_blocks = false;
            break;
          }
        }
      }
      if (!constant_blocks) break;
      std::vector<S> reduced(groups);
      for (std::size_t g = 0; g < groups; ++g) reduced[g] = out.table_[g * block];
      out = cylinder_function(out.alphabet_, out.depth_ - 1, std::move(reduced));
    }
    return out;
  }

 private:
  int alphabet_;
  int depth_;
  std::vector<S> table_;
};

/// Word corresponding to a table index at the given depth.
inline std::vector<int> index_word(std::size_t index, int depth, int alphabet) {
  std::vector<int> word(static_cast<std::size_t>(depth));
  for (int j = depth - 1; j >= 0; --j) {
    word[static_cast<std::size_t>(j)] = static_cast<int>(index % static_cast<std::size_t>(alphabet));
    index /= static_cast<std::size_t>(alphabet);
  }
  return word;
}

inline std::string word_string(std::span<const int> word) {
  std::string out;
  for (int a : word) {
    if (a < 10) {
      out.push_back(static_cast<char>('0' + a));
    } else {
      out += "(" + std::to_string(a) + ")";
    }
  }
  return out;
}

template <class S>
cylinder_function<S> add(const cylinder_function<S>& f, const cylinder_function<S>& g) {
  require(f.alphabet() == g.alphabet(), errc::bad_alphabet, "alphabet mismatch");
  const int depth = std::max(f.depth(), g.depth());
  cylinder_function<S> fa = f.raised(depth);
  cylinder_function<S> ga = g.raised(depth);
  std::vector<S> table = fa.table();
  for (std::size_t i = 0; i < table.size(); ++i) table[i] += ga.table()[i];
  return cylinder_function<S>(f.alphabet(), depth, std::move(table));
}

template <class S>
cylinder_function<S> scaled(const cylinder_function<S>& f, const S& c) {
  std::vector<S> table = f.table();
  for (auto& value : table) value *= c;
  return cylinder_function<S>(f.alphabet(), f.depth(), std::move(table));
}

template <class S>
S max_abs_difference(const cylinder_function<S>& f, const cylinder_function<S>& g) {
  const int depth = std::max(f.depth(), g.depth());
  cylinder_function<S> fa = f.raised(depth);
  cylinder_function<S> ga = g.raised(depth);
  S best(0);
  for (std::size_t i = 0; i < fa.table().size(); ++i) {
    S diff = abs_value<S>(fa.table()[i] - ga.table()[i]);
    if (diff > best) best = diff;
  }
  return best;
}

template <class S>
bool functions_equal(const cylinder_function<S>& f, const cylinder_function<S>& g, double tol = 0.0) {
  if constexpr (scalar_traits<S>::exact) {
    return max_abs_difference(f, g) == S(0);
  } else {
    return to_double(max_abs_difference(f, g)) <= tol;
  }
}

/// Integral of f against the product measure.
template <class S>
S integral(const bernoulli_shift<S>& sh, const cylinder_function<S>& f) {
  cylinder_function<S> g = f;
  while (g.depth() > 0) g = g.averaged_first(sh.p());
  return g.table()[0];
}

/// Composition with the shift: result(x) = f(x_2, ..., x_{d+1}).
template <class S>
cylinder_function<S> koopman(const cylinder_function<S>& f) {
  return f.with_free_prefix(1);
}

/// E_k f(x) = integral of f(T y) over the fiber of x, where the fiber pins
/// every coordinate past k and the conditional measure is the product p on
/// the first k. Concretely: average f over k-1 leading coordinates, then
/// read the result starting at coordinate k+1. Result depth max(d+1, k),
/// constant in coordinates 1..k.
template <class S>
cylinder_function<S> conditional_operator(const bernoulli_shift<S>& sh,
                                          const cylinder_function<S>& f, int k) {
  require(k >= 1, errc::index_out_of_range, "fiber order must be positive, got " + std::to_string(k));
  cylinder_function<S> g = f;
  for (int j = 0; j < k - 1 && g.depth() > 0; ++j) g = g.averaged_first(sh.p());
  return g.with_free_prefix(k);
}

/// f composed with the block-insertion map sigma_B: the first |B|
/// coordinates are overwritten by B and the rest of x shifts by one, so
/// result(x) = f(B_1..B_k, x_{k+2}, x_{k+3}, ...). Result depth d+1.
template <class S>
cylinder_function<S> compose_sigma(const bernoulli_shift<S>& sh, std::span<const int> block,
                                   const cylinder_function<S>& f) {
  for (int a : block) sh.check_letter(a);
  cylinder_function<S> core = f.fixed_prefix(block);
  return core.with_free_prefix(f.depth() + 1 - core.depth());
}

/// Level-1 formula of the worked example: sum over reset levels k of
/// b_k times the p-weighted average of f_k composed with sigma_B over all
/// blocks B of length k. Enumerated literally so it can be compared against
/// the E_k route.
template <class S>
cylinder_function<S> example_operator_level1(const bernoulli_shift<S>& sh,
                                             const std::vector<cylinder_function<S>>& f_levels,
                                             const capped_weights<S>& w) {
  require(static_cast<int>(f_levels.size()) == w.cap(), errc::cap_mismatch,
          "got " + std::to_string(f_levels.size()) + " level components for cap " +
              std::to_string(w.cap()));
  cylinder_function<S> acc = cylinder_function<S>::constant(sh.alphabet(), S(0));
  for (int k = 1; k <= w.cap(); ++k) {
    const std::size_t words = power_size(sh.alphabet(), k);
    cylinder_function<S> level = cylinder_function<S>::constant(sh.alphabet(), S(0));
    for (std::size_t idx = 0; idx < words; ++idx) {
      const std::vector<int> block = index_word(idx, k, sh.alphabet());
      const S mass = sh.word_mass(block);
      level = add(level, scaled(compose_sigma(sh, block, f_levels[static_cast<std::size_t>(k - 1)]),
                                mass));
    }
    acc = add(acc, scaled(level, w.reset_prob(k)));
  }
  return acc;
}

struct tail_witness {
  std::vector<int> inside;   // prefix u with Bset(u...) = 1
  std::vector<int> outside;  // prefix v with Bset(v...) = 0
};

/// For a nonconstant 0/1 cylinder set, produces two prefixes separated by
/// the set. Gluing any common tail onto both yields sequences identified by
/// the eventual-image relation, so the set cannot be a union of its classes.
template <class S>
tail_witness tail_class_witness(const cylinder_function<S>& indicator) {
  std::ptrdiff_t first_inside = -1;
  std::ptrdiff_t first_outside = -1;
  for (std::size_t i = 0; i < indicator.table().size(); ++i) {
    const S& value = indicator.table()[i];
    require(value == S(0) || value == S(1), errc::indicator_not_binary,
            "table entry " + std::to_string(i) + " is not 0 or 1");
    if (value == S(1) && first_inside < 0) first_inside = static_cast<std::ptrdiff_t>(i);
    if (value == S(0) && first_outside < 0) first_outside = static_cast<std::ptrdiff_t>(i);
  }
  require(first_inside >= 0 && first_outside >= 0, errc::indicator_constant,
          "constant indicator admits no separating witness");
  return tail_witness{
      index_word(static_cast<std::size_t>(first_inside), indicator.depth(), indicator.alphabet()),
      index_word(static_cast<std::size_t>(first_outside), indicator.depth(), indicator.alphabet())};
}

/// H(xi^n)/n for the coordinate partition, n = 1..horizon. Atom masses of
/// xi^n are the exact word masses; identical masses are grouped before the
/// logarithm to keep the floating-point sum short.
template <class S>
std::vector<double> coordinate_entropy(const bernoulli_shift<S>& sh, int horizon) {
  require(horizon >= 1, errc::index_out_of_range, "horizon must be positive");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(horizon));
  std::vector<S> masses{S(1)};
  for (int n = 1; n <= horizon; ++n) {
    std::vector<S> next;
    next.reserve(masses.size() * static_cast<std::size_t>(sh.alphabet()));
    for (const auto& m : masses) {
      for (int a = 0; a < sh.alphabet(); ++a) next.push_back(m * sh.p()[static_cast<std::size_t>(a)]);
    }
    masses = std::move(next);
    std::map<S, long long> grouped;
    for (const auto& m : masses) grouped[m] += 1;
    double entropy = 0.0;
    for (const auto& [mass, count] : grouped) {
      const double m = to_double(mass);
      entropy -= static_cast<double>(count) * m * std::log(m);
    }
    out.push_back(entropy / n);
  }
  return out;
}

}  // namespace explode
