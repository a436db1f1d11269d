// Acceptance gate: runs the full criteria list and prints one PASS/FAIL line
// per criterion. Exit code is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "../support/gen.hpp"
#include "explode/explode.hpp"

namespace {

using explode::bernoulli_shift;
using explode::capped_weights;
using explode::cylinder_function;
using explode::finite_levels;
using explode::finite_operator;
using explode::finite_system;
using explode::rational;
using explode::shift_operator;
using explode::state;

rational r(long long num, long long den = 1) { return rational(num, den); }

std::string fixture(const std::string& name) {
  return std::string(EXPLODE_FIXTURE_DIR) + "/" + name;
}

finite_operator<rational> finite_from_fixture(const std::string& name) {
  const auto def = explode::load_definition(fixture(name));
  return finite_operator<rational>(explode::build_finite<rational>(def),
                                   explode::build_weights<rational>(def));
}

shift_operator<rational> shift_from_fixture(const std::string& name) {
  const auto def = explode::load_definition(fixture(name));
  return shift_operator<rational>(explode::build_shift<rational>(def),
                                  explode::build_weights<rational>(def));
}

struct outcome {
  bool pass = false;
  std::string note;
};

outcome ok(std::string note = "") { return outcome{true, std::move(note)}; }
outcome bad(std::string note) { return outcome{false, std::move(note)}; }

// --- criterion 1: exact Markov axioms on the bundled definitions ----------

outcome criterion1() {
  for (const auto* name : {"eight_cycle_cap5.json", "two_2cycles_cap2.json", "identity_cap3.json"}) {
    const auto report = check_doubly_stochastic(finite_from_fixture(name));
    if (!report.pass() || !report.witness.empty()) {
      return bad(std::string(name) + ": " + report.witness);
    }
  }
  const auto report = check_doubly_stochastic(shift_from_fixture("fair_coin_cap4.json"));
  if (!report.pass()) return bad("fair_coin_cap4.json: " + report.witness);
  return ok("4 definitions, exact rational arithmetic");
}

// --- criterion 2: four-way ergodicity equivalence --------------------------

outcome criterion2() {
  std::mt19937_64 rng(20260814u);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = testgen::draw_int(rng, 2, 10);
    const auto lengths = testgen::random_cycle_lengths(rng, n);
    const auto map = testgen::permutation_with_cycles(rng, lengths);
    const finite_system<rational> sys(testgen::random_invariant_mu(rng, map), map);
    const finite_operator<rational> op(sys, testgen::random_weights(rng, testgen::draw_int(rng, 2, 6)));
    const auto report = compute_ergodicity(op);
    const bool single = lengths.size() == 1;
    std::ostringstream where;
    where << "trial " << trial << " (n=" << n << ", cycles=" << lengths.size() << ")";
    if (!report.agree()) return bad(where.str() + ": diagnostics disagree");
    if ((report.eig_multiplicity == 1) != single) {
      return bad(where.str() + ": multiplicity " + std::to_string(report.eig_multiplicity));
    }
    if (report.scc_irreducible != single || report.sum_positivity != single ||
        report.map_ergodic != single) {
      return bad(where.str() + ": route mismatch");
    }
    if (report.eig_multiplicity != static_cast<int>(lengths.size())) {
      return bad(where.str() + ": multiplicity does not count the cycles");
    }
  }
  const auto op = finite_from_fixture("two_2cycles_cap2.json");
  const auto witness = invariant_indicator_witness(op, {0, 1});
  if (!witness.fixed_by_operator) return bad("invariant indicator not fixed");
  if (witness.indicator[0][0] == witness.indicator[0][2]) {
    return bad("invariant indicator is constant");
  }
  return ok("100 random systems plus a verified nonconstant invariant function");
}

// --- criterion 3: apply/iterate versus kernel matrix powers ----------------

outcome criterion3() {
  const char* names[] = {"eight_cycle_cap5.json", "two_2cycles_cap2.json", "identity_cap3.json"};
  std::vector<finite_operator<rational>> ops;
  std::vector<std::vector<std::vector<rational>>> matrices;
  for (const auto* name : names) {
    ops.push_back(finite_from_fixture(name));
    matrices.push_back(ops.back().to_matrix());
  }
  std::mt19937_64 rng(314159u);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t pick = static_cast<std::size_t>(trial % 3);
    const auto& op = ops[pick];
    const auto& P = matrices[pick];
    const auto f = testgen::random_finite_levels(rng, op.system().size(), op.cap(), false);
    auto flat = explode::flatten_levels(f);
    auto g = f;
    for (int steps = 1; steps <= 20; ++steps) {
      flat = explode::apply_matrix(P, flat);
      g = op.apply(g);
      if (explode::flatten_levels(g) != flat) {
        return bad("trial " + std::to_string(trial) + " diverged at step " + std::to_string(steps));
      }
    }
    if (explode::flatten_levels(op.iterate(f, 20)) != flat) {
      return bad("trial " + std::to_string(trial) + ": iterate(20) mismatch");
    }
  }
  return ok("50 random level functions, 20 steps each, exact");
}

// --- criterion 4: conditional operator against brute-force averaging -------

cylinder_function<rational> ek_oracle(const bernoulli_shift<rational>& sh,
                                      const cylinder_function<rational>& f, int k) {
  const int s = sh.alphabet();
  const int depth = std::max(f.depth() + 1, k);
  std::vector<rational> table(explode::power_size(s, depth), r(0));
  for (std::size_t xi = 0; xi < table.size(); ++xi) {
    const std::vector<int> x = explode::index_word(xi, depth, s);
    rational acc(0);
    for (std::size_t ci = 0; ci < explode::power_size(s, k); ++ci) {
      const std::vector<int> c = explode::index_word(ci, k, s);
      rational mass(1);
      for (int letter : c) mass *= sh.p()[static_cast<std::size_t>(letter)];
      std::vector<int> image(c.begin() + 1, c.end());
      for (std::size_t j = static_cast<std::size_t>(k); j < x.size(); ++j) image.push_back(x[j]);
      acc += mass * f.value_at(image);
    }
    table[xi] = acc;
  }
  return cylinder_function<rational>(s, depth, std::move(table));
}

outcome criterion4() {
  const bernoulli_shift<rational> fair(2, {r(1, 2), r(1, 2)});
  const bernoulli_shift<rational> biased(2, {r(1, 4), r(3, 4)});
  std::mt19937_64 rng(271828u);
  for (int trial = 0; trial < 20; ++trial) {
    const auto& sh = trial % 2 == 0 ? fair : biased;
    const auto f = testgen::random_cylinder(rng, 2, testgen::draw_int(rng, 0, 4));
    for (int k = 1; k <= 5; ++k) {
      if (!functions_equal(conditional_operator(sh, f, k), ek_oracle(sh, f, k))) {
        return bad("trial " + std::to_string(trial) + ", k=" + std::to_string(k));
      }
    }
  }
  const auto one = cylinder_function<rational>::cylinder_indicator(2, std::vector<int>{1});
  for (const auto* sh : {&fair, &biased}) {
    const auto e1 = conditional_operator(*sh, one, 1);
    if (!functions_equal(e1, cylinder_function<rational>::cylinder_indicator(2, std::vector<int>{1}, 1))) {
      return bad("first-order value is not the shifted indicator");
    }
    const auto e2 = conditional_operator(*sh, one, 2).trimmed();
    if (e2.depth() != 0 || e2.table()[0] != sh->p()[1]) {
      return bad("second-order value is not the letter mass");
    }
  }
  return ok("fair and biased coins, k <= 5, depth <= 4, exact");
}

// --- criterion 5: transport-error margins on the cap-10 coin ---------------

outcome criterion5() {
  const auto start = std::chrono::steady_clock::now();
  const auto op = shift_from_fixture("fair_coin_cap10.json");
  const std::vector<int> word{1};
  const auto rows = lemma_bound_table(op, word, 6, 6);
  for (const auto& row : rows) {
    if (row.margin < r(0)) {
      return bad("negative margin at i=" + std::to_string(row.i) + ", n=" + std::to_string(row.n));
    }
  }
  for (const auto& row : rows) {
    for (const auto& other : rows) {
      if (other.n == row.n && other.i == row.i + 1 && other.lhs > row.lhs) {
        return bad("lhs grew from i=" + std::to_string(row.i) + " at n=" + std::to_string(row.n));
      }
    }
  }
  for (int i = 10; i <= 11; ++i) {
    const auto cell = lemma_cell(op, word, i, 1);
    if (cell.lhs != r(0)) return bad("nonzero lhs at i=" + std::to_string(i));
  }
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  if (elapsed > 60000) return bad("took " + std::to_string(elapsed) + " ms");
  return ok("36 cells plus past-cap spots in " + std::to_string(elapsed) + " ms");
}

// --- criterion 6: cylinder sets versus the tail relation -------------------

bool verified_witness(const bernoulli_shift<rational>& sh, const cylinder_function<rational>& f) {
  const auto report = pointwise_factor_report(sh, f);
  if (!report.trivial_quotient || !report.separated) return false;
  if (report.inside.size() != report.outside.size()) return false;
  return f.value_at(report.inside) == r(1) && f.value_at(report.outside) == r(0);
}

outcome criterion6() {
  const bernoulli_shift<rational> sh(2, {r(1, 2), r(1, 2)});
  long long checked = 0;
  for (int depth = 1; depth <= 3; ++depth) {
    const std::size_t entries = explode::power_size(2, depth);
    const std::size_t tables = std::size_t{1} << entries;
    for (std::size_t bits = 1; bits + 1 < tables; ++bits) {
      std::vector<rational> table(entries);
      for (std::size_t i = 0; i < entries; ++i) table[i] = r((bits >> i) & 1u);
      const cylinder_function<rational> f(2, depth, std::move(table));
      if (!verified_witness(sh, f)) {
        return bad("exhaustive table " + std::to_string(bits) + " at depth " + std::to_string(depth));
      }
      ++checked;
    }
  }
  std::mt19937_64 rng(141421u);
  for (int trial = 0; trial < 200; ++trial) {
    const int depth = testgen::draw_int(rng, 4, 5);
    const std::size_t entries = explode::power_size(2, depth);
    std::vector<rational> table(entries, r(0));
    bool any_zero = false;
    bool any_one = false;
    for (auto& value : table) {
      value = r(static_cast<long long>(rng() & 1u));
      (value == r(0) ? any_zero : any_one) = true;
    }
    if (!any_zero) table[0] = r(0);
    if (!any_one) table[1] = r(1);
    const cylinder_function<rational> f(2, depth, std::move(table));
    if (!verified_witness(sh, f)) return bad("random table at trial " + std::to_string(trial));
    ++checked;
  }
  return ok(std::to_string(checked) + " nonconstant sets, all separated");
}

// --- criterion 7: entropy sequences -----------------------------------------

outcome criterion7() {
  const bernoulli_shift<rational> fair(2, {r(1, 2), r(1, 2)});
  for (double value : coordinate_entropy(fair, 12)) {
    if (std::abs(value - std::log(2.0)) > 1e-12) return bad("fair coin value off");
  }
  const bernoulli_shift<rational> biased(2, {r(1, 4), r(3, 4)});
  const double h = -0.25 * std::log(0.25) - 0.75 * std::log(0.75);
  for (double value : coordinate_entropy(biased, 12)) {
    if (std::abs(value - h) > 1e-12) return bad("biased coin value off");
  }
  std::mt19937_64 rng(161803u);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = testgen::draw_int(rng, 2, 10);
    const auto map = testgen::permutation_with_cycles(rng, testgen::random_cycle_lengths(rng, n));
    const finite_system<rational> sys(testgen::random_invariant_mu(rng, map), map);
    std::vector<std::vector<int>> points;
    for (int x = 0; x < n; ++x) points.push_back({x});
    const auto values = sys.ks_entropy(points, 6);
    for (std::size_t step = 0; step < values.size(); ++step) {
      const double limit = std::log(static_cast<double>(n)) / static_cast<double>(step + 1);
      if (values[step] > limit + 1e-9) {
        return bad("trial " + std::to_string(trial) + " exceeds the join bound");
      }
    }
  }
  return ok("coin values exact to 1e-12, 100 bijections under log(n)/N");
}

// --- criterion 8: trajectory statistics -------------------------------------

outcome criterion8() {
  const auto op = finite_from_fixture("eight_cycle_cap5.json");
  const finite_levels<rational> ones(static_cast<std::size_t>(op.cap()),
                                     std::vector<rational>(8, r(1)));
  const auto ergodic = stationarity_and_birkhoff(op, ones, 100000, 2026u);
  if (ergodic.tv_distance > 0.02) {
    return bad("TV distance " + std::to_string(ergodic.tv_distance));
  }
  const auto confined = finite_from_fixture("two_2cycles_cap2.json");
  const finite_levels<rational> half(static_cast<std::size_t>(confined.cap()),
                                     {r(1), r(1), r(0), r(0)});
  const auto trapped = stationarity_and_birkhoff(confined, half, 20000, 2026u, state{0, 1});
  if (trapped.birkhoff_average != 1.0) {
    return bad("confined average " + std::to_string(trapped.birkhoff_average));
  }
  if (std::abs(trapped.nu_integral - 0.5) > 1e-12) {
    return bad("integral " + std::to_string(trapped.nu_integral));
  }
  std::ostringstream note;
  note << "TV " << ergodic.tv_distance << " at 1e5 steps; confined average 1 vs integral 1/2";
  return ok(note.str());
}

// --- criterion 9: level-one formula comparison report ----------------------

outcome criterion9() {
  const bernoulli_shift<rational> sh(2, {r(1, 2), r(1, 2)});
  std::mt19937_64 rng(602214u);
  int coincided = 0;
  int differed = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int cap = testgen::draw_int(rng, 2, 5);
    const shift_operator<rational> op(sh, capped_weights<rational>::geometric(r(1, 2), cap));
    const auto f = testgen::random_shift_levels(rng, 2, cap, 3, false);
    const auto report = compare_definition_vs_example(op, f);
    if (!report.example_equals_reindexed) {
      return bad("trial " + std::to_string(trial) + ": reindexing identity failed");
    }
    if (report.definition_equals_example) {
      ++coincided;
      continue;
    }
    ++differed;
    if (report.witness_word.empty()) {
      return bad("trial " + std::to_string(trial) + ": missing witness");
    }
    const auto definition = op.apply(f)[0];
    const auto example = example_operator_level1(sh, f, op.weights());
    std::vector<int> padded = report.witness_word;
    const int need = std::max(definition.depth(), example.depth());
    while (static_cast<int>(padded.size()) < need) padded.push_back(0);
    if (definition.value_at(padded) != report.definition_value ||
        example.value_at(padded) != report.example_value ||
        report.definition_value == report.example_value) {
      return bad("trial " + std::to_string(trial) + ": witness does not re-evaluate");
    }
    const auto diff = add(definition, scaled(example, r(-1))).trimmed();
    if (static_cast<int>(report.witness_word.size()) != diff.depth()) {
      return bad("trial " + std::to_string(trial) + ": witness is not minimal");
    }
  }
  std::ostringstream note;
  note << coincided << " coincided, " << differed << " differed; every witness re-evaluated";
  return ok(note.str());
}

// --- criterion 10: weight identities ----------------------------------------

outcome criterion10() {
  std::mt19937_64 rng(173205u);
  long long premise_hits = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int cap = testgen::draw_int(rng, 2, 8);
    const auto w = testgen::random_weights(rng, cap);
    const rational ratio = r(1) - w.level_mass(1);
    for (int k = 1; k < cap; ++k) {
      if (w.level_mass(k) == w.reset_prob(k)) {
        ++premise_hits;
        if (w.level_mass(k + 1) != ratio * w.level_mass(k)) {
          return bad("ratio step failed at trial " + std::to_string(trial));
        }
      }
    }
  }
  for (int trial = 0; trial < 100; ++trial) {
    const rational a1 = explode::frac<rational>(testgen::draw_int(rng, 9, 15), 16);
    const int cap = testgen::draw_int(rng, 3, 8);
    const auto w = capped_weights<rational>::custom(testgen::self_matching_masses(a1, cap), cap);
    const rational ratio = r(1) - a1;
    for (int k = 1; k <= cap - 2; ++k) {
      if (w.level_mass(k) != w.reset_prob(k)) {
        return bad("constructed family misses the premise at k=" + std::to_string(k));
      }
      if (w.level_mass(k + 1) != ratio * w.level_mass(k)) {
        return bad("constructed family breaks the ratio at k=" + std::to_string(k));
      }
      ++premise_hits;
    }
  }
  for (const auto* name :
       {"eight_cycle_cap5.json", "two_2cycles_cap2.json", "identity_cap3.json",
        "fair_coin_cap4.json", "biased_coin_cap4.json", "fair_coin_cap10.json"}) {
    const auto def = explode::load_definition(fixture(name));
    const auto w = explode::build_weights<rational>(def);
    const rational a1 = w.level_mass(1);
    for (int k = 1; k < w.cap(); ++k) {
      if (a1 * w.reset_prob(k) + w.level_mass(k + 1) != w.level_mass(k)) {
        return bad(std::string(name) + ": telescoping failed at k=" + std::to_string(k));
      }
    }
    if (a1 * w.reset_prob(w.cap()) != w.level_mass(w.cap())) {
      return bad(std::string(name) + ": capped telescoping failed");
    }
  }
  return ok(std::to_string(premise_hits) + " premise instances, telescoping exact on 6 fixtures");
}

}  // namespace

int main() {
  struct item {
    int id;
    const char* label;
    outcome (*run)();
  };
  const item items[] = {
      {1, "exact Markov axioms on the bundled definitions", criterion1},
      {2, "ergodicity equivalence across four diagnostics", criterion2},
      {3, "apply and iterate match kernel matrix powers", criterion3},
      {4, "conditional operators match brute-force fiber averages", criterion4},
      {5, "transport-error margins against tail bounds", criterion5},
      {6, "cylinder sets separated from the tail relation", criterion6},
      {7, "entropy sequences exact and bounded", criterion7},
      {8, "trajectory statistics match nu and confinement", criterion8},
      {9, "level-one formula comparison with verified witnesses", criterion9},
      {10, "weight telescoping and constant-ratio identities", criterion10},
  };
  bool all_pass = true;
  for (const auto& entry : items) {
    outcome result;
    try {
      result = entry.run();
    } catch (const std::exception& e) {
      result = bad(std::string("exception: ") + e.what());
    }
    all_pass = all_pass && result.pass;
    std::cout << (result.pass ? "PASS" : "FAIL") << " criterion-" << entry.id << " " << entry.label;
    if (!result.note.empty()) std::cout << " (" << result.note << ")";
    std::cout << "\n";
  }
  return all_pass ? 0 : 1;
}
