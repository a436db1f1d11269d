#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <map>
#include <vector>

#include "../support/gen.hpp"
#include "explode/explode.hpp"

using explode::capped_weights;
using explode::cylinder_function;
using explode::errc;
using explode::error;
using explode::finite_levels;
using explode::finite_operator;
using explode::finite_system;
using explode::rational;
using explode::shift_operator;
using explode::state;

namespace {

rational r(long long num, long long den = 1) { return rational(num, den); }

finite_system<rational> four_cycle() {
  return finite_system<rational>({r(1, 4), r(1, 4), r(1, 4), r(1, 4)}, {1, 2, 3, 0});
}

finite_system<rational> identity3() {
  return finite_system<rational>({r(1, 2), r(1, 3), r(1, 6)}, {0, 1, 2});
}

capped_weights<rational> half(int cap) {
  return capped_weights<rational>::geometric(r(1, 2), cap);
}

finite_levels<rational> constant_levels(int n, int cap, const rational& value) {
  return finite_levels<rational>(static_cast<std::size_t>(cap),
                                 std::vector<rational>(static_cast<std::size_t>(n), value));
}

}  // namespace

TEST_CASE("finite operator construction") {
  const finite_operator<rational> op(four_cycle(), half(2));
  CHECK(op.state_count() == 8);
  CHECK(op.state_index(state{2, 2}) == 5);
  CHECK(op.state_of(5) == state{2, 2});
  const auto nu = op.nu_flat();
  rational total(0);
  for (const auto& mass : nu) total += mass;
  CHECK(total == r(1));
  CHECK(nu[0] == r(1, 4) * r(2, 3));
  CHECK(nu[1] == r(1, 4) * r(1, 3));
}

TEST_CASE("finite apply") {
  SECTION("constants are fixed") {
    const finite_operator<rational> op(four_cycle(), half(3));
    const auto g = op.apply(constant_levels(4, 3, r(7, 2)));
    for (const auto& level : g) {
      for (const auto& value : level) REQUIRE(value == r(7, 2));
    }
  }
  SECTION("identity map mixes levels by reset mass") {
    const finite_operator<rational> op(identity3(), half(3));
    finite_levels<rational> f(3, std::vector<rational>(3, r(0)));
    f[0] = {r(1), r(2), r(3)};
    f[1] = {r(5), r(7), r(11)};
    f[2] = {r(13), r(17), r(19)};
    const auto g = op.apply(f);
    // Identity fibers are singletons, so E_k f = f and the first level is
    // the plain reset mixture.
    for (int x = 0; x < 3; ++x) {
      const auto xs = static_cast<std::size_t>(x);
      REQUIRE(g[0][xs] == r(1, 2) * f[0][xs] + r(1, 4) * f[1][xs] + r(1, 4) * f[2][xs]);
      REQUIRE(g[1][xs] == f[0][xs]);
      REQUIRE(g[2][xs] == f[1][xs]);
    }
  }
  SECTION("invertible map composes with the map before mixing") {
    const finite_operator<rational> op(four_cycle(), half(2));
    finite_levels<rational> f(2);
    f[0] = {r(1), r(0), r(0), r(0)};
    f[1] = {r(0), r(0), r(1), r(0)};
    const auto g = op.apply(f);
    // (Ex f)_1(x) = sum_k b_k f_k(T x) for a bijection.
    for (int x = 0; x < 4; ++x) {
      const int tx = (x + 1) % 4;
      REQUIRE(g[0][static_cast<std::size_t>(x)] ==
              r(1, 2) * f[0][static_cast<std::size_t>(tx)] + r(1, 2) * f[1][static_cast<std::size_t>(tx)]);
    }
  }
  SECTION("level count must match the cap") {
    const finite_operator<rational> op(four_cycle(), half(2));
    CHECK_THROWS_AS(op.apply(constant_levels(4, 3, r(1))), error);
  }
  SECTION("level length must match the point count") {
    const finite_operator<rational> op(four_cycle(), half(2));
    CHECK_THROWS_AS(op.apply(constant_levels(3, 2, r(1))), error);
  }
}

TEST_CASE("finite kernel matrix") {
  const finite_operator<rational> op(four_cycle(), half(2));
  const auto P = op.to_matrix();
  REQUIRE(P.size() == 8);

  SECTION("bijection rows from level 1 split mass over the image point") {
    std::map<std::size_t, rational> row;
    for (std::size_t j = 0; j < 8; ++j) {
      if (P[0][j] != r(0)) row[j] = P[0][j];
    }
    // From (0,1): T0 = 1, so targets (1,1) with b_1 and (1,2) with b_2.
    const std::map<std::size_t, rational> expected{
        {op.state_index(state{1, 1}), r(1, 2)},
        {op.state_index(state{1, 2}), r(1, 2)},
    };
    CHECK(row == expected);
  }
  SECTION("higher levels transport deterministically") {
    const auto from = static_cast<std::size_t>(op.state_index(state{0, 2}));
    const auto target = static_cast<std::size_t>(op.state_index(state{1, 1}));
    for (std::size_t j = 0; j < 8; ++j) {
      REQUIRE(P[from][j] == (j == target ? r(1) : r(0)));
    }
  }
  SECTION("rows are stochastic and nu is invariant on both sides") {
    const auto nu = op.nu_flat();
    for (std::size_t i = 0; i < 8; ++i) {
      rational row_sum(0);
      for (std::size_t j = 0; j < 8; ++j) row_sum += P[i][j];
      REQUIRE(row_sum == r(1));
    }
    const auto pushed = explode::apply_matrix_left(nu, P);
    CHECK(pushed == nu);
    CHECK(nu[op.state_index(state{1, 2})] == r(1, 12));
  }
  SECTION("sparse rows agree with the dense matrix") {
    for (std::size_t i = 0; i < 8; ++i) {
      const auto sparse = op.kernel_row(op.state_of(i));
      std::vector<rational> rebuilt(8, r(0));
      std::size_t last = 0;
      bool ordered = true;
      for (const auto& entry : sparse) {
        const auto j = static_cast<std::size_t>(op.state_index(state{entry.x, entry.level}));
        if (j < last) ordered = false;
        last = j;
        rebuilt[j] += entry.prob;
      }
      REQUIRE(ordered);
      REQUIRE(rebuilt == P[i]);
    }
  }
}

TEST_CASE("finite iterate") {
  SECTION("zero steps is the identity") {
    const finite_operator<rational> op(four_cycle(), half(2));
    std::mt19937_64 rng(441u);
    const auto f = testgen::random_finite_levels(rng, 4, 2, false);
    CHECK(op.iterate(f, 0) == f);
  }
  SECTION("matches matrix powers on random systems") {
    std::mt19937_64 rng(442u);
    for (int trial = 0; trial < 6; ++trial) {
      const int n = testgen::draw_int(rng, 2, 6);
      const int cap = testgen::draw_int(rng, 2, 4);
      const auto map = testgen::permutation_with_cycles(rng, testgen::random_cycle_lengths(rng, n));
      const finite_system<rational> sys(testgen::random_invariant_mu(rng, map), map);
      const finite_operator<rational> op(sys, testgen::random_weights(rng, cap));
      const auto P = op.to_matrix();
      const auto f = testgen::random_finite_levels(rng, n, cap, false);
      auto flat = explode::flatten_levels(f);
      auto iterated = f;
      for (int steps = 1; steps <= 8; ++steps) {
        flat = explode::apply_matrix(P, flat);
        iterated = op.apply(iterated);
        REQUIRE(explode::flatten_levels(iterated) == flat);
        REQUIRE(explode::flatten_levels(op.iterate(f, steps)) == flat);
      }
    }
  }
  SECTION("upper levels replay the first level with a lag") {
    const finite_operator<rational> op(four_cycle(), half(3));
    std::mt19937_64 rng(443u);
    const auto f = testgen::random_finite_levels(rng, 4, 3, false);
    const auto g = op.iterate(f, 2);
    // After n steps, level k > n holds f_{k-n} composed with T^n.
    for (int x = 0; x < 4; ++x) {
      REQUIRE(g[2][static_cast<std::size_t>(x)] == f[0][static_cast<std::size_t>((x + 2) % 4)]);
    }
  }
  SECTION("positivity is preserved") {
    std::mt19937_64 rng(444u);
    const finite_operator<rational> op(four_cycle(), half(3));
    const auto f = testgen::random_finite_levels(rng, 4, 3, true);
    auto g = f;
    for (int steps = 0; steps < 5; ++steps) {
      for (const auto& level : g) {
        for (const auto& value : level) REQUIRE(value >= r(0));
      }
      g = op.apply(g);
    }
  }
}

TEST_CASE("finite sampling") {
  const finite_operator<rational> op(four_cycle(), half(2));
  SECTION("upper levels step deterministically") {
    std::mt19937_64 rng(445u);
    const auto path = op.sample_path(rng, 30, state{0, 2});
    REQUIRE(path.size() == 31);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (path[i].level == 2) {
        REQUIRE(path[i + 1] == state{op.system().step(path[i].x), 1});
      }
    }
  }
  SECTION("level-1 exits follow the reset distribution") {
    std::mt19937_64 rng(446u);
    const auto path = op.sample_path(rng, 100000, state{0, 1});
    long long to_level1 = 0;
    long long from_level1 = 0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (path[i].level != 1) continue;
      ++from_level1;
      REQUIRE(path[i + 1].x == op.system().step(path[i].x));
      if (path[i + 1].level == 1) ++to_level1;
    }
    const double ratio = static_cast<double>(to_level1) / static_cast<double>(from_level1);
    CHECK(ratio == Catch::Approx(0.5).margin(0.01));
  }
  SECTION("fixed seeds reproduce the path") {
    std::mt19937_64 a(447u);
    std::mt19937_64 b(447u);
    const auto first = op.sample_path(a, 500, std::nullopt);
    const auto second = op.sample_path(b, 500, std::nullopt);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) REQUIRE(first[i] == second[i]);
  }
  SECTION("invalid starts are rejected") {
    std::mt19937_64 rng(448u);
    CHECK_THROWS_AS(op.sample_path(rng, 1, state{4, 1}), error);
    CHECK_THROWS_AS(op.sample_path(rng, 1, state{0, 3}), error);
    CHECK_THROWS_AS(op.sample_path(rng, 1, state{0, 0}), error);
  }
}

TEST_CASE("shift operator") {
  const explode::bernoulli_shift<rational> sh(2, {r(1, 2), r(1, 2)});
  const shift_operator<rational> op(sh, half(2));

  SECTION("apply matches the hand value on the coin example") {
    explode::shift_levels<rational> f(2, cylinder_function<rational>::cylinder_indicator(2, std::vector<int>{1}));
    const auto g = op.apply(f);
    // Level 1: 1/2 * 1{x_2 = 1} + 1/4, level 2: 1{x_2 = 1}.
    const auto level1 = g[0].trimmed();
    REQUIRE(level1.depth() == 2);
    CHECK(level1.table() == std::vector<rational>{r(1, 4), r(3, 4), r(1, 4), r(3, 4)});
    CHECK(functions_equal(g[1], koopman(f[1])));
  }
  SECTION("iterate grows depth within budget") {
    explode::shift_levels<rational> f(2, cylinder_function<rational>::cylinder_indicator(2, std::vector<int>{1}));
    const auto g = op.iterate(f, 3);
    for (const auto& level : g) REQUIRE(level.depth() <= 5);
    rational mixed(0);
    mixed += op.weights().level_mass(1) * integral(sh, g[0]);
    mixed += op.weights().level_mass(2) * integral(sh, g[1]);
    CHECK(mixed == op.integral_nu(f));
  }
  SECTION("budget overruns fail fast and name the step") {
    explode::shift_levels<rational> f(
        2, cylinder_function<rational>::cylinder_indicator(2, std::vector<int>{1}));
    try {
      op.iterate(f, 64);
      FAIL("expected a depth budget failure");
    } catch (const error& e) {
      CHECK(e.code() == errc::depth_budget_exceeded);
      CHECK(std::string(e.what()).find("iterate step") != std::string::npos);
    }
  }
  SECTION("environment variable overrides the default budget") {
    ::setenv("EXPLODE_DEPTH_BUDGET", "7", 1);
    CHECK(explode::default_depth_budget() == 7);
    ::setenv("EXPLODE_DEPTH_BUDGET", "not a number", 1);
    CHECK(explode::default_depth_budget() == 22);
    ::unsetenv("EXPLODE_DEPTH_BUDGET");
    CHECK(explode::default_depth_budget() == 22);
  }
  SECTION("sample paths track prefixes and reproduce under a seed") {
    std::mt19937_64 a(449u);
    std::mt19937_64 b(449u);
    const auto first = op.sample_path(a, 200, std::nullopt);
    const auto second = op.sample_path(b, 200, std::nullopt);
    REQUIRE(first.size() == 201);
    REQUIRE(second.size() == 201);
    for (std::size_t i = 0; i < first.size(); ++i) {
      REQUIRE(first[i].level == second[i].level);
      REQUIRE(first[i].prefix == second[i].prefix);
      REQUIRE(first[i].level >= 1);
      REQUIRE(first[i].level <= 2);
    }
    for (std::size_t i = 0; i + 1 < first.size(); ++i) {
      const auto& cur = first[i];
      const auto& nxt = first[i + 1];
      if (cur.level >= 2) {
        // Deterministic shift: drop the first materialized letter.
        REQUIRE(nxt.level == cur.level - 1);
        if (!cur.prefix.empty()) {
          REQUIRE(nxt.prefix == std::vector<int>(cur.prefix.begin() + 1, cur.prefix.end()));
        }
      } else {
        // Explosion to level j rewrites j - 1 leading letters after the shift.
        const int j = nxt.level;
        REQUIRE(static_cast<int>(nxt.prefix.size()) >= j - 1);
        if (static_cast<int>(cur.prefix.size()) > j) {
          REQUIRE(std::vector<int>(nxt.prefix.begin() + (j - 1), nxt.prefix.end()) ==
                  std::vector<int>(cur.prefix.begin() + j, cur.prefix.end()));
        }
      }
    }
  }
}
