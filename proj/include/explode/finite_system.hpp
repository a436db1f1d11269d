#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "explode/error.hpp"
#include "explode/scalar.hpp"

namespace explode {

/// Atoms of xi_k, the partition of the space by the value of the k-fold
/// iterate: x and y share an atom iff t^k(x) = t^k(y). `quotient_weights`
/// is the measure transported to the quotient.
template <class S>
struct fiber_partition {
  int order = 0;
  std::vector<std::vector<int>> classes;
  std::vector<int> class_of;
  std::vector<S> quotient_weights;
};

struct cycle_decomposition {
  bool ergodic = false;
  std::vector<std::vector<int>> cycles;
};

/// A finite probability space (points 0..n-1, all weights positive) together
/// with a measure-preserving map given as a table. Surjectivity is required;
/// on a finite set that forces the map to be a bijection, so this backend
/// covers exactly the invertible case. Validation happens in the constructor;
/// instances are immutable afterwards.
template <class S>
class finite_system {
 public:
  finite_system(std::vector<S> mu, std::vector<int> map_table)
      : mu_(std::move(mu)), t_(std::move(map_table)) {
    const int n = static_cast<int>(mu_.size());
    require(n >= 1, errc::bad_partition, "system needs at least one point");
    require(static_cast<int>(t_.size()) == n, errc::length_mismatch,
            "map table length " + std::to_string(t_.size()) + " differs from point count " +
                std::to_string(n));
    S total(0);
    for (int x = 0; x < n; ++x) {
      require(mu_[static_cast<std::size_t>(x)] > S(0), errc::measure_not_positive,
              "mu[" + std::to_string(x) + "] must be positive");
      total += mu_[static_cast<std::size_t>(x)];
    }
    require(near_equal(total, S(1), kSumTolerance), errc::measure_sum_not_one,
            "mu sums to " + format_scalar(total) + ", expected 1");
    std::vector<int> hit(static_cast<std::size_t>(n), -1);
    for (int x = 0; x < n; ++x) {
      const int y = t_[static_cast<std::size_t>(x)];
      require(y >= 0 && y < n, errc::map_out_of_range,
              "map[" + std::to_string(x) + "] = " + std::to_string(y) + " outside 0.." +
                  std::to_string(n - 1));
      // Surjectivity of a self-map of a finite set is equivalent to
      // injectivity; we detect the failure as a collision.
      require(hit[static_cast<std::size_t>(y)] < 0, errc::map_not_injective,
              "points " + std::to_string(hit[static_cast<std::size_t>(y)]) + " and " +
                  std::to_string(x) + " collide at " + std::to_string(y));
      hit[static_cast<std::size_t>(y)] = x;
    }
    for (int x = 0; x < n; ++x) {
      require(near_equal(mu_[static_cast<std::size_t>(t_[static_cast<std::size_t>(x)])],
                         mu_[static_cast<std::size_t>(x)], kSumTolerance),
              errc::measure_not_preserved,
              "mu[map[" + std::to_string(x) + "]] differs from mu[" + std::to_string(x) + "]");
    }
  }

  int size() const { return static_cast<int>(mu_.size()); }
  const std::vector<S>& mu() const { return mu_; }
  const std::vector<int>& map_table() const { return t_; }

  int step(int x) const { return t_[static_cast<std::size_t>(x)]; }

  int iterate_map(int x, int k) const {
    for (int j = 0; j < k; ++j) x = step(x);
    return x;
  }

  S measure_of(const std::vector<int>& points) const {
    S total(0);
    for (int x : points) total += mu_[static_cast<std::size_t>(x)];
    return total;
  }

  /// Integral of a point function against mu.
  S integral(const std::vector<S>& f) const {
    require(f.size() == mu_.size(), errc::length_mismatch,
            "function has " + std::to_string(f.size()) + " values, expected " +
                std::to_string(mu_.size()));
    S total(0);
    for (std::size_t x = 0; x < f.size(); ++x) total += mu_[x] * f[x];
    return total;
  }

  /// Partition by the k-fold image. For a bijection every class is a
  /// singleton; the generic grouping is kept so the disintegration and E_k
  /// formulas below read exactly as defined.
  fiber_partition<S> fibers(int k) const {
    require(k >= 1, errc::index_out_of_range, "fiber order must be positive, got " + std::to_string(k));
    const int n = size();
    fiber_partition<S> part;
    part.order = k;
    part.class_of.assign(static_cast<std::size_t>(n), -1);
    std::map<int, int> class_by_image;
    for (int x = 0; x < n; ++x) {
      const int image = iterate_map(x, k);
      auto [it, inserted] = class_by_image.try_emplace(image, static_cast<int>(part.classes.size()));
      if (inserted) part.classes.emplace_back();
      part.class_of[static_cast<std::size_t>(x)] = it->second;
      part.classes[static_cast<std::size_t>(it->second)].push_back(x);
    }
    part.quotient_weights.reserve(part.classes.size());
    for (const auto& cls : part.classes) part.quotient_weights.push_back(measure_of(cls));
    return part;
  }

  /// Conditional measure mu_C for C = the atom containing x: mu restricted
  /// to C and renormalized, zero off the atom.
  std::vector<S> disintegration(const fiber_partition<S>& part, int x) const {
    const int n = size();
    require(x >= 0 && x < n, errc::index_out_of_range,
            "point " + std::to_string(x) + " outside 0.." + std::to_string(n - 1));
    std::vector<S> weights(static_cast<std::size_t>(n), S(0));
    const int c = part.class_of[static_cast<std::size_t>(x)];
    const S& mass = part.quotient_weights[static_cast<std::size_t>(c)];
    for (int y : part.classes[static_cast<std::size_t>(c)]) {
      weights[static_cast<std::size_t>(y)] = mu_[static_cast<std::size_t>(y)] / mass;
    }
    return weights;
  }

  /// E_k f(x) = integral of f(t(.)) against the conditional measure of the
  /// atom of x. With singleton atoms this collapses to f(t(x)).
  std::vector<S> conditional_operator(const fiber_partition<S>& part, const std::vector<S>& f) const {
    const int n = size();
    require(static_cast<int>(f.size()) == n, errc::length_mismatch,
            "function has " + std::to_string(f.size()) + " values, expected " + std::to_string(n));
    std::vector<S> class_value(part.classes.size());
    for (std::size_t c = 0; c < part.classes.size(); ++c) {
      S acc(0);
      for (int y : part.classes[c]) {
        acc += mu_[static_cast<std::size_t>(y)] * f[static_cast<std::size_t>(step(y))];
      }
      class_value[c] = acc / part.quotient_weights[c];
    }
    std::vector<S> result(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x) {
      result[static_cast<std::size_t>(x)] = class_value[static_cast<std::size_t>(
          part.class_of[static_cast<std::size_t>(x)])];
    }
    return result;
  }

  std::vector<S> conditional_operator(int k, const std::vector<S>& f) const {
    return conditional_operator(fibers(k), f);
  }

  /// Classes of the relation x ~ x' <=> t^m(x) = t^m(x') for some m.
  /// Trajectories on n points enter cycles within n steps, so merging along
  /// m = 1..n is exhaustive. For a bijection nothing merges.
  std::vector<std::vector<int>> equivalence_classes() const {
    const int n = size();
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) {
        parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        x = parent[static_cast<std::size_t>(x)];
      }
      return x;
    };
    auto unite = [&](int x, int y) {
      x = find(x);
      y = find(y);
      if (x != y) parent[static_cast<std::size_t>(std::max(x, y))] = std::min(x, y);
    };
    std::vector<int> image(static_cast<std::size_t>(n));
    std::iota(image.begin(), image.end(), 0);
    for (int m = 1; m <= n; ++m) {
      std::map<int, int> first_with_image;
      for (int x = 0; x < n; ++x) {
        image[static_cast<std::size_t>(x)] = step(image[static_cast<std::size_t>(x)]);
        auto [it, inserted] = first_with_image.try_emplace(image[static_cast<std::size_t>(x)], x);
        if (!inserted) unite(it->second, x);
      }
    }
    std::map<int, std::vector<int>> grouped;
    for (int x = 0; x < n; ++x) grouped[find(x)].push_back(x);
    std::vector<std::vector<int>> classes;
    classes.reserve(grouped.size());
    for (auto& [root, members] : grouped) classes.push_back(std::move(members));
    return classes;
  }

  /// Ergodicity of the map itself. On a finite space with full-support
  /// invariant measure this means the permutation is a single cycle; the
  /// cycle list is returned as the witness either way.
  cycle_decomposition cycle_structure() const {
    const int n = size();
    cycle_decomposition result;
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int x = 0; x < n; ++x) {
      if (seen[static_cast<std::size_t>(x)]) continue;
      std::vector<int> cycle;
      int y = x;
      while (!seen[static_cast<std::size_t>(y)]) {
        seen[static_cast<std::size_t>(y)] = true;
        cycle.push_back(y);
        y = step(y);
      }
      result.cycles.push_back(std::move(cycle));
    }
    result.ergodic = result.cycles.size() == 1;
    return result;
  }

  bool is_ergodic_map() const { return cycle_structure().ergodic; }

  /// Normalized Shannon entropies H(join of t^{-j} xi, j < N) / N for
  /// N = 1..horizon, natural logarithm. Atoms of the join are itinerary
  /// classes; their masses are exact, only the final log is floating point.
  std::vector<double> ks_entropy(const std::vector<std::vector<int>>& partition, int horizon) const {
    const int n = size();
    require(horizon >= 1, errc::index_out_of_range, "horizon must be positive");
    std::vector<int> block_of(static_cast<std::size_t>(n), -1);
    for (std::size_t blk = 0; blk < partition.size(); ++blk) {
      for (int x : partition[blk]) {
        require(x >= 0 && x < n, errc::bad_partition,
                "partition names point " + std::to_string(x) + " outside the space");
        require(block_of[static_cast<std::size_t>(x)] < 0, errc::bad_partition,
                "point " + std::to_string(x) + " appears in two blocks");
        block_of[static_cast<std::size_t>(x)] = static_cast<int>(blk);
      }
    }
    for (int x = 0; x < n; ++x) {
      require(block_of[static_cast<std::size_t>(x)] >= 0, errc::bad_partition,
              "point " + std::to_string(x) + " missing from the partition");
    }

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    std::vector<std::vector<int>> itinerary(static_cast<std::size_t>(n));
    std::vector<int> position(static_cast<std::size_t>(n));
    std::iota(position.begin(), position.end(), 0);
    for (int N = 1; N <= horizon; ++N) {
      for (int x = 0; x < n; ++x) {
        itinerary[static_cast<std::size_t>(x)].push_back(
            block_of[static_cast<std::size_t>(position[static_cast<std::size_t>(x)])]);
        position[static_cast<std::size_t>(x)] = step(position[static_cast<std::size_t>(x)]);
      }
      std::map<std::vector<int>, S> atom_mass;
      for (int x = 0; x < n; ++x) {
        atom_mass[itinerary[static_cast<std::size_t>(x)]] += mu_[static_cast<std::size_t>(x)];
      }
      double entropy = 0.0;
      for (const auto& [atom, mass] : atom_mass) {
        const double m = to_double(mass);
        if (m > 0.0) entropy -= m * std::log(m);
      }
      out.push_back(entropy / N);
    }
    return out;
  }

 private:
  std::vector<S> mu_;
  std::vector<int> t_;
};

}  // namespace explode
