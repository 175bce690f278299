#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <stdexcept>

#include "polgame/game.hpp"
#include "support.hpp"

using namespace polgame;

TEST_CASE("validate_spec accepts the reference game") {
  CHECK(validate_spec(testsupport::g1()).valid());
}

TEST_CASE("validate_spec reports a regularity breach on the offending player") {
  // Total cost rate 0.3 over a unit horizon demands caps of at least 0.3.
  GameSpec spec = GameSpec::make(0.0, 1.0, 0.0, {{0.25, 0.1}, {2.0, 0.2}});
  const ValidationReport report = validate_spec(spec);
  REQUIRE_FALSE(report.valid());
  REQUIRE(report.issues.size() == 1);
  CHECK(report.issues[0].field == "players[0].b");
  CHECK(report.issues[0].message.find("regularity") != std::string::npos);
}

TEST_CASE("validate_spec lists every violated constraint") {
  GameSpec spec = GameSpec::make(1.0, 1.0, -0.5, {{-1.0, 0.0}});
  const ValidationReport report = validate_spec(spec);
  REQUIRE_FALSE(report.valid());

  auto has_issue = [&report](const std::string& field) {
    for (const auto& issue : report.issues)
      if (issue.field == field) return true;
    return false;
  };
  CHECK(has_issue("T"));
  CHECK(has_issue("x0"));
  CHECK(has_issue("players[0].b"));
  CHECK(has_issue("players[0].d"));
}

TEST_CASE("validate_spec rejects duplicate player ids and empty specs") {
  GameSpec empty;
  empty.T = 1.0;
  CHECK_FALSE(validate_spec(empty).valid());

  GameSpec dup = testsupport::g1();
  dup.players[1].id = dup.players[0].id;
  const ValidationReport report = validate_spec(dup);
  REQUIRE_FALSE(report.valid());
  CHECK(report.issues[0].field == "players[1].id");
}

TEST_CASE("require_valid throws with the offending field in the message") {
  GameSpec spec = testsupport::g1();
  spec.x0 = -1.0;
  CHECK_THROWS_WITH_AS(require_valid(spec),
                       doctest::Contains("x0"), std::invalid_argument);
}

TEST_CASE("coalition_aggregates on hand-checked subsets") {
  const GameSpec spec = testsupport::g1();

  const Aggregates both = coalition_aggregates(spec, Coalition::full(2));
  CHECK(both.cap_sum == 3.0);
  CHECK(both.cap_sq_sum == 5.0);
  CHECK(both.cost_rate_sum == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(both.count == 2);

  const Aggregates second = coalition_aggregates(spec, Coalition::single(1));
  CHECK(second.cap_sum == 2.0);
  CHECK(second.cap_sq_sum == 4.0);
  CHECK(second.cost_rate_sum == 0.2);
  CHECK(second.count == 1);

  const Aggregates none = coalition_aggregates(spec, Coalition());
  CHECK(none.cap_sum == 0.0);
  CHECK(none.cap_sq_sum == 0.0);
  CHECK(none.cost_rate_sum == 0.0);
  CHECK(none.count == 0);
}

TEST_CASE("coalition_aggregates rejects members outside the spec") {
  CHECK_THROWS_AS(coalition_aggregates(testsupport::g1(), Coalition::of({0, 5})),
                  std::invalid_argument);
}

TEST_CASE("aggregates add exactly over disjoint coalitions") {
  // Parameters on a dyadic grid make every sum exact, so additivity holds
  // bitwise, not merely within a tolerance.
  std::mt19937_64 rng(20240817);
  for (int round = 0; round < 50; ++round) {
    const int n = 2 + static_cast<int>(rng() % 7);
    std::vector<std::pair<double, double>> bd;
    for (int i = 0; i < n; ++i)
      bd.emplace_back(1.0 + testsupport::dyadic_unit(rng),
                      0.125 * (1.0 + testsupport::dyadic_unit(rng)));
    const GameSpec spec = GameSpec::make(0.0, 1.0, 0.0, bd);

    const std::uint32_t all = (1u << n) - 1u;
    const std::uint32_t first = static_cast<std::uint32_t>(rng()) & all;
    const std::uint32_t second = static_cast<std::uint32_t>(rng()) & all & ~first;

    const Aggregates a = coalition_aggregates(spec, Coalition(first));
    const Aggregates b = coalition_aggregates(spec, Coalition(second));
    const Aggregates ab = coalition_aggregates(spec, Coalition(first | second));
    CHECK(ab.cap_sum == a.cap_sum + b.cap_sum);
    CHECK(ab.cap_sq_sum == a.cap_sq_sum + b.cap_sq_sum);
    CHECK(ab.cost_rate_sum == a.cost_rate_sum + b.cost_rate_sum);
    CHECK(ab.count == a.count + b.count);
  }
}

TEST_CASE("enumerate_coalitions covers the power set in mask order") {
  const auto subsets = enumerate_coalitions(3);
  REQUIRE(subsets.size() == 8);
  CHECK(subsets.front().empty());
  CHECK(subsets.back() == Coalition::full(3));
  for (std::size_t i = 0; i < subsets.size(); ++i)
    CHECK(subsets[i].mask() == i);

  CHECK(enumerate_coalitions(1).size() == 2);
  CHECK_THROWS_AS(enumerate_coalitions(kMaxPlayers + 1), std::length_error);
}

TEST_CASE("coalition set algebra") {
  const Coalition s = Coalition::of({0, 2, 3});
  CHECK(s.size() == 3);
  CHECK(s.contains(2));
  CHECK_FALSE(s.contains(1));
  CHECK(s.members() == std::vector<int>{0, 2, 3});
  CHECK(s.without(2) == Coalition::of({0, 3}));
  CHECK(s.with(1) == Coalition::of({0, 1, 2, 3}));
  CHECK(s.complement_in(5) == Coalition::of({1, 4}));
  CHECK(s.unite(Coalition::of({1})) == Coalition::of({0, 1, 2, 3}));
  CHECK(s.intersect(Coalition::of({2, 4})) == Coalition::of({2}));
  CHECK(s.disjoint_with(Coalition::of({1, 4})));
  CHECK(s.subset_of(Coalition::full(4)));
  CHECK_FALSE(Coalition::full(4).subset_of(s));
}

TEST_CASE("random_regular_spec always yields valid games") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 200; ++round) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const GameSpec spec = random_regular_spec(rng, n);
    CAPTURE(round);
    CHECK(validate_spec(spec).valid());
    CHECK(spec.player_count() == n);
  }
}
