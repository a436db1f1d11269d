#pragma once

#include <cstdlib>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "explode/error.hpp"
#include "explode/finite_system.hpp"
#include "explode/scalar.hpp"
#include "explode/shift_system.hpp"
#include "explode/weights.hpp"

namespace explode {

/// Level function f(x,k) = f_k(x), stored as one backend function per level
/// (outer index k-1).
template <class S>
using finite_levels = std::vector<std::vector<S>>;

template <class S>
using shift_levels = std::vector<cylinder_function<S>>;

struct state {
  int x;
  int level;  // 1-based
  friend bool operator==(const state&, const state&) = default;
};

template <class S>
struct kernel_target {
  int x;
  int level;
  S prob;
};

/// Uniform draw on [0,1) from 53 random bits. Rational mode keeps the dyadic
/// value exact so CDF comparisons against exact weights are exact too.
template <class S>
S draw_uniform(std::mt19937_64& rng) {
  const auto bits = static_cast<long long>(rng() >> 11);
  return frac<S>(bits, static_cast<long long>(1) << 53);
}

/// Index i with probability weights[i], by CDF walk against one uniform.
template <class S>
std::size_t draw_index(std::mt19937_64& rng, const std::vector<S>& weights) {
  const S u = draw_uniform<S>(rng);
  S cumulative(0);
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    cumulative += weights[i];
    if (u < cumulative) return i;
  }
  return weights.size() - 1;
}

/// The exploding operator over a finite bijection. States (x,k) are indexed
/// x-major: index = x*K + (k-1); that ordering is part of the file format.
template <class S>
class finite_operator {
 public:
  finite_operator(finite_system<S> sys, capped_weights<S> w)
      : sys_(std::move(sys)), w_(std::move(w)) {
    fibers_.reserve(static_cast<std::size_t>(w_.cap()));
    for (int k = 1; k <= w_.cap(); ++k) fibers_.push_back(sys_.fibers(k));
  }

  const finite_system<S>& system() const { return sys_; }
  const capped_weights<S>& weights() const { return w_; }
  int cap() const { return w_.cap(); }
  int state_count() const { return sys_.size() * w_.cap(); }

  int state_index(const state& s) const {
    check_state(s);
    return s.x * w_.cap() + (s.level - 1);
  }

  state state_of(int index) const {
    require(index >= 0 && index < state_count(), errc::index_out_of_range,
            "state index " + std::to_string(index) + " outside 0.." +
                std::to_string(state_count() - 1));
    return state{index / w_.cap(), index % w_.cap() + 1};
  }

  void check_levels(const finite_levels<S>& f) const {
    require(static_cast<int>(f.size()) == w_.cap(), errc::cap_mismatch,
            "level function has " + std::to_string(f.size()) + " components, expected " +
                std::to_string(w_.cap()));
    for (std::size_t k = 0; k < f.size(); ++k) {
      require(static_cast<int>(f[k].size()) == sys_.size(), errc::length_mismatch,
              "component " + std::to_string(k + 1) + " has " + std::to_string(f[k].size()) +
                  " values, expected " + std::to_string(sys_.size()));
    }
  }

  /// One application: level 1 collects b_k-weighted conditional expectations
  /// of each component, higher levels transport the component below.
  finite_levels<S> apply(const finite_levels<S>& f) const {
    check_levels(f);
    const int n = sys_.size();
    finite_levels<S> g(f.size(), std::vector<S>(static_cast<std::size_t>(n), S(0)));
    for (int k = 1; k <= w_.cap(); ++k) {
      const std::vector<S> ek = sys_.conditional_operator(fibers_[static_cast<std::size_t>(k - 1)],
                                                          f[static_cast<std::size_t>(k - 1)]);
      for (int x = 0; x < n; ++x) {
        g[0][static_cast<std::size_t>(x)] += w_.reset_prob(k) * ek[static_cast<std::size_t>(x)];
      }
    }
    for (int k = 2; k <= w_.cap(); ++k) {
      for (int x = 0; x < n; ++x) {
        g[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(x)] =
            f[static_cast<std::size_t>(k - 2)][static_cast<std::size_t>(sys_.step(x))];
      }
    }
    return g;
  }

  finite_levels<S> iterate(const finite_levels<S>& f, int n) const {
    require(n >= 0, errc::index_out_of_range, "iteration count must be nonnegative");
    finite_levels<S> g = f;
    for (int i = 0; i < n; ++i) g = apply(g);
    return g;
  }

  /// Stationary measure nu = mu x a, flattened in state-index order.
  std::vector<S> nu_flat() const {
    std::vector<S> out(static_cast<std::size_t>(state_count()));
    for (int x = 0; x < sys_.size(); ++x) {
      for (int k = 1; k <= w_.cap(); ++k) {
        out[static_cast<std::size_t>(x * w_.cap() + k - 1)] =
            sys_.mu()[static_cast<std::size_t>(x)] * w_.level_mass(k);
      }
    }
    return out;
  }

  /// Integral of a level function against nu.
  S integral_nu(const finite_levels<S>& f) const {
    check_levels(f);
    S total(0);
    for (int k = 1; k <= w_.cap(); ++k) {
      total += w_.level_mass(k) * sys_.integral(f[static_cast<std::size_t>(k - 1)]);
    }
    return total;
  }

  /// Dense kernel row for source (x,k), entries in target-state-index order.
  std::vector<S> kernel_row_dense(const state& s) const {
    check_state(s);
    std::vector<S> row(static_cast<std::size_t>(state_count()), S(0));
    if (s.level >= 2) {
      row[static_cast<std::size_t>(sys_.step(s.x) * w_.cap() + (s.level - 2))] = S(1);
      return row;
    }
    for (int k = 1; k <= w_.cap(); ++k) {
      const auto& part = fibers_[static_cast<std::size_t>(k - 1)];
      const int c = part.class_of[static_cast<std::size_t>(s.x)];
      const auto& cls = part.classes[static_cast<std::size_t>(c)];
      const S& mass = part.quotient_weights[static_cast<std::size_t>(c)];
      for (int z : cls) {
        row[static_cast<std::size_t>(sys_.step(z) * w_.cap() + (k - 1))] +=
            w_.reset_prob(k) * sys_.mu()[static_cast<std::size_t>(z)] / mass;
      }
    }
    return row;
  }

  std::vector<kernel_target<S>> kernel_row(const state& s) const {
    const std::vector<S> dense = kernel_row_dense(s);
    std::vector<kernel_target<S>> out;
    for (int i = 0; i < state_count(); ++i) {
      if (dense[static_cast<std::size_t>(i)] != S(0)) {
        const state t = state_of(i);
        out.push_back(kernel_target<S>{t.x, t.level, dense[static_cast<std::size_t>(i)]});
      }
    }
    return out;
  }

  /// Full kernel as a dense row-stochastic matrix, [from][to].
  std::vector<std::vector<S>> to_matrix() const {
    std::vector<std::vector<S>> P;
    P.reserve(static_cast<std::size_t>(state_count()));
    for (int i = 0; i < state_count(); ++i) P.push_back(kernel_row_dense(state_of(i)));
    return P;
  }

  /// One trajectory of the kernel chain; steps transitions, so steps+1
  /// states. Without a start the initial state is nu-distributed.
  std::vector<state> sample_path(std::mt19937_64& rng, int steps,
                                 std::optional<state> start = std::nullopt) const {
    require(steps >= 0, errc::index_out_of_range, "step count must be nonnegative");
    state current{};
    if (start) {
      require(start->x >= 0 && start->x < sys_.size() && start->level >= 1 &&
                  start->level <= w_.cap(),
              errc::invalid_start,
              "start state (" + std::to_string(start->x) + "," + std::to_string(start->level) +
                  ") outside the state space");
      current = *start;
    } else {
      current.x = static_cast<int>(draw_index(rng, sys_.mu()));
      current.level = static_cast<int>(draw_index(rng, w_.a())) + 1;
    }
    std::vector<state> path;
    path.reserve(static_cast<std::size_t>(steps) + 1);
    path.push_back(current);
    for (int i = 0; i < steps; ++i) {
      if (current.level >= 2) {
        current = state{sys_.step(current.x), current.level - 1};
      } else {
        const int k = static_cast<int>(draw_index(rng, w_.b())) + 1;
        const auto& part = fibers_[static_cast<std::size_t>(k - 1)];
        const int c = part.class_of[static_cast<std::size_t>(current.x)];
        const auto& cls = part.classes[static_cast<std::size_t>(c)];
        int z = cls[0];
        if (cls.size() > 1) {
          std::vector<S> cond;
          cond.reserve(cls.size());
          const S& mass = part.quotient_weights[static_cast<std::size_t>(c)];
          for (int member : cls) cond.push_back(sys_.mu()[static_cast<std::size_t>(member)] / mass);
          z = cls[draw_index(rng, cond)];
        }
        current = state{sys_.step(z), k};
      }
      path.push_back(current);
    }
    return path;
  }

 private:
  void check_state(const state& s) const {
    require(s.x >= 0 && s.x < sys_.size(), errc::index_out_of_range,
            "point " + std::to_string(s.x) + " outside 0.." + std::to_string(sys_.size() - 1));
    require(s.level >= 1 && s.level <= w_.cap(), errc::index_out_of_range,
            "level " + std::to_string(s.level) + " outside 1.." + std::to_string(w_.cap()));
  }

  finite_system<S> sys_;
  capped_weights<S> w_;
  std::vector<fiber_partition<S>> fibers_;
};

/// Stacked value vector in state-index order, v[x*K + (k-1)] = f_k(x).
template <class S>
std::vector<S> flatten_levels(const finite_levels<S>& f) {
  const int cap = static_cast<int>(f.size());
  const int n = static_cast<int>(f[0].size());
  std::vector<S> out(static_cast<std::size_t>(n * cap));
  for (int x = 0; x < n; ++x) {
    for (int k = 1; k <= cap; ++k) {
      out[static_cast<std::size_t>(x * cap + k - 1)] =
          f[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(x)];
    }
  }
  return out;
}

template <class S>
finite_levels<S> unflatten_levels(const std::vector<S>& v, int n, int cap) {
  require(static_cast<int>(v.size()) == n * cap, errc::length_mismatch,
          "flat vector has " + std::to_string(v.size()) + " entries, expected " +
              std::to_string(n * cap));
  finite_levels<S> f(static_cast<std::size_t>(cap),
                     std::vector<S>(static_cast<std::size_t>(n)));
  for (int x = 0; x < n; ++x) {
    for (int k = 1; k <= cap; ++k) {
      f[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(x)] =
          v[static_cast<std::size_t>(x * cap + k - 1)];
    }
  }
  return f;
}

/// (P v)[i] = sum_j P[i][j] v[j]; the kernel acting on functions.
template <class S>
std::vector<S> apply_matrix(const std::vector<std::vector<S>>& P, const std::vector<S>& v) {
  std::vector<S> out(P.size(), S(0));
  for (std::size_t i = 0; i < P.size(); ++i) {
    require(P[i].size() == v.size(), errc::length_mismatch, "matrix/vector size mismatch");
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += P[i][j] * v[j];
  }
  return out;
}

/// (v P)[j] = sum_i v[i] P[i][j]; the kernel acting on measures.
template <class S>
std::vector<S> apply_matrix_left(const std::vector<S>& v, const std::vector<std::vector<S>>& P) {
  require(v.size() == P.size(), errc::length_mismatch, "matrix/vector size mismatch");
  std::vector<S> out(P.empty() ? 0 : P[0].size(), S(0));
  for (std::size_t i = 0; i < P.size(); ++i) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += v[i] * P[i][j];
  }
  return out;
}

inline int default_depth_budget() {
  if (const char* env = std::getenv("EXPLODE_DEPTH_BUDGET")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed >= 1 && parsed <= 64) return static_cast<int>(parsed);
  }
  return 22;
}

/// State of a shift-backend trajectory: the coordinates materialized so far
/// plus the level counter. Unmaterialized coordinates are i.i.d. p and are
/// drawn only when a transition or observable needs them.
struct shift_state {
  std::vector<int> prefix;
  int level = 1;
};

/// The exploding operator over a one-sided Bernoulli shift, acting on
/// cylinder level functions. Depths grow by one per application, so iterate
/// enforces a budget and fails fast instead of truncating.
template <class S>
class shift_operator {
 public:
  shift_operator(bernoulli_shift<S> sh, capped_weights<S> w,
                 int depth_budget = default_depth_budget())
      : sh_(std::move(sh)), w_(std::move(w)), budget_(depth_budget) {
    require(budget_ >= 1, errc::depth_budget_exceeded, "depth budget must be positive");
  }

  const bernoulli_shift<S>& shift() const { return sh_; }
  const capped_weights<S>& weights() const { return w_; }
  int cap() const { return w_.cap(); }
  int depth_budget() const { return budget_; }

  void check_levels(const shift_levels<S>& f) const {
    require(static_cast<int>(f.size()) == w_.cap(), errc::cap_mismatch,
            "level function has " + std::to_string(f.size()) + " components, expected " +
                std::to_string(w_.cap()));
    for (const auto& component : f) {
      require(component.alphabet() == sh_.alphabet(), errc::bad_alphabet,
              "component alphabet does not match the shift");
    }
  }

  int applied_depth(const shift_levels<S>& f) const {
    int out = 0;
    for (int k = 1; k <= w_.cap(); ++k) {
      const int d = f[static_cast<std::size_t>(k - 1)].depth();
      out = std::max(out, std::max(d + 1, k));
    }
    return out;
  }

  shift_levels<S> apply(const shift_levels<S>& f) const {
    check_levels(f);
    require(applied_depth(f) <= budget_, errc::depth_budget_exceeded,
            "applying would reach depth " + std::to_string(applied_depth(f)) +
                ", budget is " + std::to_string(budget_));
    shift_levels<S> g;
    g.reserve(f.size());
    cylinder_function<S> top = cylinder_function<S>::constant(sh_.alphabet(), S(0));
    for (int k = 1; k <= w_.cap(); ++k) {
      top = add(top, scaled(conditional_operator(sh_, f[static_cast<std::size_t>(k - 1)], k),
                            w_.reset_prob(k)));
    }
    g.push_back(std::move(top));
    for (int k = 2; k <= w_.cap(); ++k) {
      g.push_back(koopman(f[static_cast<std::size_t>(k - 2)]));
    }
    return g;
  }

  shift_levels<S> iterate(const shift_levels<S>& f, int n) const {
    require(n >= 0, errc::index_out_of_range, "iteration count must be nonnegative");
    shift_levels<S> g = f;
    for (int i = 0; i < n; ++i) {
      check_levels(g);
      require(applied_depth(g) <= budget_, errc::depth_budget_exceeded,
              "iterate step " + std::to_string(i + 1) + " would reach depth " +
                  std::to_string(applied_depth(g)) + ", budget is " + std::to_string(budget_));
      g = apply(g);
    }
    return g;
  }

  /// Integral against nu = (product measure) x a.
  S integral_nu(const shift_levels<S>& f) const {
    check_levels(f);
    S total(0);
    for (int k = 1; k <= w_.cap(); ++k) {
      total += w_.level_mass(k) * integral(sh_, f[static_cast<std::size_t>(k - 1)]);
    }
    return total;
  }

  /// Extends the materialized prefix to at least `depth` coordinates.
  void materialize(shift_state& s, std::mt19937_64& rng, int depth) const {
    while (static_cast<int>(s.prefix.size()) < depth) {
      s.prefix.push_back(static_cast<int>(draw_index(rng, sh_.p())));
    }
  }

  std::vector<shift_state> sample_path(std::mt19937_64& rng, int steps,
                                       std::optional<shift_state> start = std::nullopt) const {
    require(steps >= 0, errc::index_out_of_range, "step count must be nonnegative");
    shift_state current;
    if (start) {
      require(start->level >= 1 && start->level <= w_.cap(), errc::invalid_start,
              "start level " + std::to_string(start->level) + " outside 1.." +
                  std::to_string(w_.cap()));
      for (int a : start->prefix) {
        require(a >= 0 && a < sh_.alphabet(), errc::invalid_start,
                "start prefix letter " + std::to_string(a) + " outside the alphabet");
      }
      current = *start;
    } else {
      current.level = static_cast<int>(draw_index(rng, w_.a())) + 1;
    }
    std::vector<shift_state> path;
    path.reserve(static_cast<std::size_t>(steps) + 1);
    path.push_back(current);
    for (int i = 0; i < steps; ++i) {
      if (current.level >= 2) {
        if (!current.prefix.empty()) current.prefix.erase(current.prefix.begin());
        current.level -= 1;
      } else {
        const int k = static_cast<int>(draw_index(rng, w_.b())) + 1;
        // The new point is (c_1..c_k, tail of x past k) with c ~ p^k; the
        // transition lands on its shift, so c_1 is never drawn.
        std::vector<int> next;
        for (int j = 0; j < k - 1; ++j) {
          next.push_back(static_cast<int>(draw_index(rng, sh_.p())));
        }
        for (std::size_t j = static_cast<std::size_t>(k); j < current.prefix.size(); ++j) {
          next.push_back(current.prefix[j]);
        }
        current.prefix = std::move(next);
        current.level = k;
      }
      path.push_back(current);
    }
    return path;
  }

 private:
  bernoulli_shift<S> sh_;
  capped_weights<S> w_;
  int budget_;
};

}  // namespace explode
