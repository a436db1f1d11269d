#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "explode/error.hpp"
#include "explode/operator.hpp"
#include "explode/scalar.hpp"

namespace explode {

/// Empirical tolerance for the Markov-axiom checks in float mode; rational
/// mode checks are exact.
inline constexpr double kAxiomTolerance = 1e-9;

struct ds_report {
  bool positivity = false;
  bool unit = false;
  bool nu_preservation = false;
  std::string witness;  // empty when everything passes
  bool pass() const { return positivity && unit && nu_preservation; }
};

namespace detail {

template <class S>
bool is_zero(const S& v, double tol) {
  if constexpr (scalar_traits<S>::exact) {
    (void)tol;
    return v == S(0);
  } else {
    return std::abs(to_double(v)) <= tol;
  }
}

}  // namespace detail

/// Axioms checked directly on a kernel matrix with its stationary vector:
/// entries nonnegative, rows sum to one, nu is a left fixed point. Split out
/// from the operator overload so a deliberately corrupted matrix can be fed
/// in to confirm the check actually detects violations.
template <class S>
ds_report check_doubly_stochastic_matrix(const std::vector<std::vector<S>>& P,
                                         const std::vector<S>& nu,
                                         double tol = kAxiomTolerance) {
  ds_report report;
  report.positivity = true;
  report.unit = true;
  report.nu_preservation = true;
  for (std::size_t i = 0; i < P.size() && report.positivity; ++i) {
    for (std::size_t j = 0; j < P[i].size(); ++j) {
      if (P[i][j] < S(0)) {
        report.positivity = false;
        report.witness = "negative kernel entry at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")";
        break;
      }
    }
  }
  for (std::size_t i = 0; i < P.size() && report.unit; ++i) {
    S row_sum(0);
    for (const auto& entry : P[i]) row_sum += entry;
    if (!detail::is_zero(S(row_sum - S(1)), tol)) {
      report.unit = false;
      report.witness = "row " + std::to_string(i) + " sums to " + format_scalar(row_sum);
    }
  }
  const std::vector<S> pushed = apply_matrix_left(nu, P);
  for (std::size_t j = 0; j < nu.size(); ++j) {
    if (!detail::is_zero(S(pushed[j] - nu[j]), tol)) {
      report.nu_preservation = false;
      report.witness = "stationary vector moved at state " + std::to_string(j) + ": " +
                       format_scalar(pushed[j]) + " vs " + format_scalar(nu[j]);
      break;
    }
  }
  return report;
}

template <class S>
ds_report check_doubly_stochastic(const finite_operator<S>& op, double tol = kAxiomTolerance) {
  ds_report report = check_doubly_stochastic_matrix(op.to_matrix(), op.nu_flat(), tol);
  // Functional cross-check of unit preservation through apply().
  const finite_levels<S> ones(static_cast<std::size_t>(op.cap()),
                              std::vector<S>(static_cast<std::size_t>(op.system().size()), S(1)));
  const finite_levels<S> image = op.apply(ones);
  for (const auto& component : image) {
    for (const auto& value : component) {
      if (!detail::is_zero(S(value - S(1)), tol)) {
        report.unit = false;
        report.witness = "apply(1) produced " + format_scalar(value);
      }
    }
  }
  return report;
}

/// Shift-backend axioms, checked on a deterministic suite of cylinder level
/// functions (a few pinned indicators plus seeded random tables).
template <class S>
ds_report check_doubly_stochastic(const shift_operator<S>& op, unsigned seed = 1u,
                                  double tol = kAxiomTolerance) {
  ds_report report;
  report.positivity = true;
  report.unit = true;
  report.nu_preservation = true;
  const int s = op.shift().alphabet();
  const int K = op.cap();

  const shift_levels<S> ones(static_cast<std::size_t>(K),
                             cylinder_function<S>::constant(s, S(1)));
  const shift_levels<S> image_ones = op.apply(ones);
  for (const auto& component : image_ones) {
    for (const auto& value : component.table()) {
      if (!detail::is_zero(S(value - S(1)), tol)) {
        report.unit = false;
        report.witness = "apply(1) produced " + format_scalar(value);
      }
    }
  }

  std::mt19937_64 rng(seed);
  for (int trial = 0; trial < 8; ++trial) {
    shift_levels<S> f;
    for (int k = 0; k < K; ++k) {
      const int depth = static_cast<int>(rng() % 3);
      std::vector<S> table(power_size(s, depth));
      for (auto& value : table) value = frac<S>(static_cast<long long>(rng() % 17), 16);
      f.push_back(cylinder_function<S>(s, depth, std::move(table)));
    }
    const shift_levels<S> g = op.apply(f);
    for (const auto& component : g) {
      for (const auto& value : component.table()) {
        if (value < S(0) && !detail::is_zero(value, tol)) {
          report.positivity = false;
          report.witness = "nonnegative input mapped to " + format_scalar(value);
        }
      }
    }
    const S before = op.integral_nu(f);
    const S after = op.integral_nu(g);
    if (!detail::is_zero(S(after - before), tol)) {
      report.nu_preservation = false;
      report.witness = "integral moved from " + format_scalar(before) + " to " +
                       format_scalar(after);
    }
  }
  return report;
}

/// Rank of a dense matrix by Gaussian elimination; exact pivoting in
/// rational mode, magnitude pivoting with a zero threshold in float mode.
template <class S>
int matrix_rank(std::vector<std::vector<S>> m, double tol = kAxiomTolerance) {
  if (m.empty()) return 0;
  const std::size_t rows = m.size();
  const std::size_t cols = m[0].size();
  int rank = 0;
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < rows; ++col) {
    std::size_t pivot = rows;
    if constexpr (scalar_traits<S>::exact) {
      for (std::size_t r = row; r < rows; ++r) {
        if (m[r][col] != S(0)) {
          pivot = r;
          break;
        }
      }
    } else {
      double best = tol;
      for (std::size_t r = row; r < rows; ++r) {
        const double mag = std::abs(to_double(m[r][col]));
        if (mag > best) {
          best = mag;
          pivot = r;
        }
      }
    }
    if (pivot == rows) continue;
    std::swap(m[row], m[pivot]);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == row || detail::is_zero(m[r][col], 0.0)) continue;
      const S factor = m[r][col] / m[row][col];
      for (std::size_t c = col; c < cols; ++c) m[r][c] -= factor * m[row][c];
    }
    ++rank;
    ++row;
  }
  return rank;
}

struct ergodicity_report {
  int eig_multiplicity = 0;
  bool scc_irreducible = false;
  bool sum_positivity = false;
  bool map_ergodic = false;
  std::vector<std::vector<int>> cycles;
  bool agree() const {
    const bool e = eig_multiplicity == 1;
    return e == scc_irreducible && e == sum_positivity && e == map_ergodic;
  }
};

namespace detail {

inline bool reaches_all(const std::vector<std::vector<int>>& adjacency) {
  const std::size_t n = adjacency.size();
  std::vector<char> seen(n, 0);
  std::deque<std::size_t> queue{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (int w : adjacency[v]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++count;
        queue.push_back(static_cast<std::size_t>(w));
      }
    }
  }
  return count == n;
}

}  // namespace detail

/// Four independent routes to the same yes/no question. Multiplicity of the
/// fixed-function space is computed exactly; the support graph is checked
/// for strong connectivity; the summed-iterates positivity criterion runs in
/// double (signs of sums of nonnegative terms are exact); the base map is
/// classified by its cycle structure. agree() ties them together.
template <class S>
ergodicity_report compute_ergodicity(const finite_operator<S>& op) {
  ergodicity_report report;
  const int N = op.state_count();
  const std::vector<std::vector<S>> P = op.to_matrix();

  std::vector<std::vector<S>> shifted = P;
  for (int i = 0; i < N; ++i) shifted[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] -= S(1);
  report.eig_multiplicity = N - matrix_rank(std::move(shifted));

  std::vector<std::vector<int>> forward(static_cast<std::size_t>(N));
  std::vector<std::vector<int>> backward(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (P[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > S(0)) {
        forward[static_cast<std::size_t>(i)].push_back(j);
        backward[static_cast<std::size_t>(j)].push_back(i);
      }
    }
  }
  report.scc_irreducible = detail::reaches_all(forward) && detail::reaches_all(backward);

  std::vector<std::vector<double>> Pd(static_cast<std::size_t>(N),
                                      std::vector<double>(static_cast<std::size_t>(N)));
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      Pd[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          to_double(P[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
  }
  std::vector<double> v(static_cast<std::size_t>(N), 0.0);
  v[0] = 1.0;  // indicator of the first state
  std::vector<double> total(static_cast<std::size_t>(N), 0.0);
  for (int m = 1; m <= N; ++m) {
    std::vector<double> next(static_cast<std::size_t>(N), 0.0);
    for (int i = 0; i < N; ++i) {
      double acc = 0.0;
      for (int j = 0; j < N; ++j) {
        acc += Pd[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
               v[static_cast<std::size_t>(j)];
      }
      next[static_cast<std::size_t>(i)] = acc;
      total[static_cast<std::size_t>(i)] += acc;
    }
    v = std::move(next);
  }
  report.sum_positivity = std::all_of(total.begin(), total.end(), [](double t) { return t > 0.0; });

  const cycle_decomposition cycles = op.system().cycle_structure();
  report.map_ergodic = cycles.ergodic;
  report.cycles = cycles.cycles;
  return report;
}

/// The indicator of A x {1..K} for a T-invariant point set A, together with
/// the exact check that the operator fixes it.
template <class S>
struct invariant_witness {
  finite_levels<S> indicator;
  bool fixed_by_operator = false;
};

template <class S>
invariant_witness<S> invariant_indicator_witness(const finite_operator<S>& op,
                                                 const std::vector<int>& points) {
  const auto& sys = op.system();
  const int n = sys.size();
  std::vector<char> in_set(static_cast<std::size_t>(n), 0);
  for (int x : points) {
    require(x >= 0 && x < n, errc::index_out_of_range,
            "point " + std::to_string(x) + " outside 0.." + std::to_string(n - 1));
    in_set[static_cast<std::size_t>(x)] = 1;
  }
  const int count = static_cast<int>(std::count(in_set.begin(), in_set.end(), char(1)));
  require(count > 0 && count < n, errc::set_trivial,
          "set has measure " + std::string(count == 0 ? "0" : "1") +
              ", needs a proper invariant set");
  for (int x = 0; x < n; ++x) {
    if (in_set[static_cast<std::size_t>(x)] != in_set[static_cast<std::size_t>(sys.step(x))]) {
      fail(errc::set_not_invariant,
           "point " + std::to_string(x) + " and its image " + std::to_string(sys.step(x)) +
               " straddle the set");
    }
  }
  invariant_witness<S> out;
  std::vector<S> column(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) column[static_cast<std::size_t>(x)] = S(in_set[static_cast<std::size_t>(x)] ? 1 : 0);
  out.indicator.assign(static_cast<std::size_t>(op.cap()), column);
  const finite_levels<S> image = op.apply(out.indicator);
  out.fixed_by_operator = true;
  for (std::size_t k = 0; k < image.size() && out.fixed_by_operator; ++k) {
    for (std::size_t x = 0; x < image[k].size(); ++x) {
      if (!detail::is_zero(S(image[k][x] - out.indicator[k][x]), kAxiomTolerance)) {
        out.fixed_by_operator = false;
        break;
      }
    }
  }
  return out;
}

/// Quotient of a finite system by the eventual-collision relation. For a
/// bijection every class is a singleton, so the quotient is the system
/// itself and pointwise factors abound; the quotient is trivial only when
/// there is a single class of full measure.
struct finite_factor_report {
  bool trivial_quotient = false;
  std::vector<std::vector<int>> classes;
  std::vector<int> witness_class;  // a proper class when the quotient is nontrivial
};

template <class S>
finite_factor_report pointwise_factor_report(const finite_system<S>& sys) {
  finite_factor_report report;
  report.classes = sys.equivalence_classes();
  report.trivial_quotient = report.classes.size() == 1;
  if (!report.trivial_quotient) report.witness_class = report.classes.front();
  return report;
}

/// Shift-backend counterpart: the quotient is always trivial, and for any
/// nonconstant cylinder set the report carries a pair of prefixes that the
/// set separates even though the tail relation identifies them.
struct shift_factor_report {
  bool trivial_quotient = true;
  std::vector<int> inside;
  std::vector<int> outside;
  bool separated = false;
};

template <class S>
shift_factor_report pointwise_factor_report(const bernoulli_shift<S>& sh,
                                            const cylinder_function<S>& indicator) {
  require(indicator.alphabet() == sh.alphabet(), errc::bad_alphabet,
          "indicator alphabet does not match the shift");
  shift_factor_report report;
  const tail_witness w = tail_class_witness(indicator);
  report.inside = w.inside;
  report.outside = w.outside;
  report.separated = indicator.value_at(report.inside) == S(1) &&
                     indicator.value_at(report.outside) == S(0) &&
                     report.inside.size() == report.outside.size();
  return report;
}

template <class S>
struct lemma_row {
  int i = 0;
  int n = 0;
  S lhs{};
  S bound{};
  S margin{};
};

/// Level function 1_{T^{-i}[word] x levels}: every component is the same
/// cylinder indicator at offset i.
template <class S>
shift_levels<S> offset_indicator_levels(const shift_operator<S>& op, std::span<const int> word,
                                        int offset) {
  const cylinder_function<S> component =
      cylinder_function<S>::cylinder_indicator(op.shift().alphabet(), word, offset);
  return shift_levels<S>(static_cast<std::size_t>(op.cap()), component);
}

/// One cell of the transport-error table: sup norm of Ex^n 1_{T^-i[word]xL}
/// minus 1_{T^-(i+n)[word]xL}, against the summed-tail bound.
template <class S>
lemma_row<S> lemma_cell(const shift_operator<S>& op, std::span<const int> word, int i, int n) {
  require(i >= 1 && n >= 1, errc::index_out_of_range, "lemma cell needs i >= 1 and n >= 1");
  shift_levels<S> current = offset_indicator_levels(op, word, i);
  current = op.iterate(current, n);
  const shift_levels<S> target = offset_indicator_levels(op, word, i + n);
  S lhs(0);
  for (int k = 0; k < op.cap(); ++k) {
    const S level_diff = max_abs_difference(current[static_cast<std::size_t>(k)],
                                            target[static_cast<std::size_t>(k)]);
    if (level_diff > lhs) lhs = level_diff;
  }
  lemma_row<S> row;
  row.i = i;
  row.n = n;
  row.lhs = lhs;
  row.bound = op.weights().tail_of_tails(std::min(i, op.cap()));
  row.margin = row.bound - row.lhs;
  return row;
}

template <class S>
std::vector<lemma_row<S>> lemma_bound_table(const shift_operator<S>& op,
                                            std::span<const int> word, int i_max, int n_max) {
  require(i_max >= 1 && n_max >= 1, errc::index_out_of_range,
          "lemma table needs i_max >= 1 and n_max >= 1");
  std::vector<lemma_row<S>> rows;
  rows.reserve(static_cast<std::size_t>(i_max) * static_cast<std::size_t>(n_max));
  for (int i = 1; i <= i_max; ++i) {
    shift_levels<S> current = offset_indicator_levels(op, word, i);
    for (int n = 1; n <= n_max; ++n) {
      current = op.apply(current);
      const shift_levels<S> target = offset_indicator_levels(op, word, i + n);
      S lhs(0);
      for (int k = 0; k < op.cap(); ++k) {
        const S level_diff = max_abs_difference(current[static_cast<std::size_t>(k)],
                                                target[static_cast<std::size_t>(k)]);
        if (level_diff > lhs) lhs = level_diff;
      }
      lemma_row<S> row;
      row.i = i;
      row.n = n;
      row.lhs = lhs;
      row.bound = op.weights().tail_of_tails(std::min(i, op.cap()));
      row.margin = row.bound - row.lhs;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

template <class S>
struct r_summability_report {
  std::vector<S> r;  // R(1)..R(K)
  S total{};
  std::optional<std::vector<S>> geometric_reference;  // ratio^i, when applicable
  bool matches_reference_below_cap = true;
};

template <class S>
r_summability_report<S> r_summability(const capped_weights<S>& w) {
  r_summability_report<S> report;
  report.total = S(0);
  for (int i = 1; i <= w.cap(); ++i) {
    report.r.push_back(w.tail(i));
    report.total += w.tail(i);
  }
  if (const auto ratio = w.geometric_ratio()) {
    std::vector<S> reference;
    S power(1);
    for (int i = 1; i <= w.cap(); ++i) {
      power *= *ratio;
      reference.push_back(power);
      if (i < w.cap() && report.r[static_cast<std::size_t>(i - 1)] != power) {
        report.matches_reference_below_cap = false;
      }
    }
    report.geometric_reference = std::move(reference);
  }
  return report;
}

/// H(join)/N sequences. The finite overload takes any partition; the shift
/// overload uses the coordinate partition and respects the depth budget.
template <class S>
std::vector<double> ks_entropy_report(const finite_system<S>& sys,
                                      const std::vector<std::vector<int>>& partition,
                                      int horizon) {
  return sys.ks_entropy(partition, horizon);
}

template <class S>
std::vector<double> ks_entropy_report(const shift_operator<S>& op, int horizon) {
  require(horizon <= op.depth_budget(), errc::depth_budget_exceeded,
          "entropy horizon " + std::to_string(horizon) + " exceeds depth budget " +
              std::to_string(op.depth_budget()));
  return coordinate_entropy(op.shift(), horizon);
}

struct birkhoff_report {
  double tv_distance = 0.0;
  double birkhoff_average = 0.0;
  double nu_integral = 0.0;
  std::vector<double> occupancy;  // empirical state frequencies, index order
};

/// Runs one seeded trajectory and compares its occupancy to nu in total
/// variation, and the running average of f to the nu-integral of f.
template <class S>
birkhoff_report stationarity_and_birkhoff(const finite_operator<S>& op,
                                          const finite_levels<S>& f, int steps,
                                          unsigned long long seed,
                                          std::optional<state> start = std::nullopt) {
  op.check_levels(f);
  std::mt19937_64 rng(seed);
  const std::vector<state> path = op.sample_path(rng, steps, start);
  birkhoff_report report;
  report.occupancy.assign(static_cast<std::size_t>(op.state_count()), 0.0);
  double running = 0.0;
  for (const state& s : path) {
    report.occupancy[static_cast<std::size_t>(op.state_index(s))] += 1.0;
    running += to_double(f[static_cast<std::size_t>(s.level - 1)][static_cast<std::size_t>(s.x)]);
  }
  const double total = static_cast<double>(path.size());
  for (auto& entry : report.occupancy) entry /= total;
  report.birkhoff_average = running / total;
  const std::vector<S> nu = op.nu_flat();
  double tv = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    tv += std::abs(report.occupancy[i] - to_double(nu[i]));
  }
  report.tv_distance = tv / 2.0;
  report.nu_integral = to_double(op.integral_nu(f));
  return report;
}

template <class S>
struct definition_example_report {
  bool example_equals_reindexed = false;  // expected true: the k-term equals E_{k+1}
  bool definition_equals_example = false;
  std::vector<int> witness_word;  // minimal-depth witness when they differ
  S definition_value{};
  S example_value{};
};

/// Level-1 output of the operator versus the worked example's formula on the
/// same level function. The two differ in general; the example's k-term
/// instead matches the conditional expectation of order k+1, which is
/// verified exactly alongside.
template <class S>
definition_example_report<S> compare_definition_vs_example(const shift_operator<S>& op,
                                                           const shift_levels<S>& f) {
  op.check_levels(f);
  const auto& sh = op.shift();
  const auto& w = op.weights();
  const cylinder_function<S> definition = op.apply(f)[0];
  const cylinder_function<S> example = example_operator_level1(sh, f, w);
  cylinder_function<S> reindexed = cylinder_function<S>::constant(sh.alphabet(), S(0));
  for (int k = 1; k <= w.cap(); ++k) {
    reindexed = add(reindexed,
                    scaled(conditional_operator(sh, f[static_cast<std::size_t>(k - 1)], k + 1),
                           w.reset_prob(k)));
  }
  definition_example_report<S> report;
  report.example_equals_reindexed = functions_equal(example, reindexed, kAxiomTolerance);
  report.definition_equals_example = functions_equal(definition, example, kAxiomTolerance);
  if (!report.definition_equals_example) {
    const cylinder_function<S> diff = add(definition, scaled(example, S(-1))).trimmed();
    for (std::size_t idx = 0; idx < diff.table().size(); ++idx) {
      if (!detail::is_zero(diff.table()[idx], kAxiomTolerance)) {
        report.witness_word = index_word(idx, diff.depth(), sh.alphabet());
        std::vector<int> padded = report.witness_word;
        const int need = std::max(definition.depth(), example.depth());
        while (static_cast<int>(padded.size()) < need) padded.push_back(0);
        report.definition_value = definition.value_at(padded);
        report.example_value = example.value_at(padded);
        break;
      }
    }
  }
  return report;
}

}  // namespace explode
