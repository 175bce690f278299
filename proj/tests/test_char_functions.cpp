#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <random>
#include <stdexcept>

#include "polgame/char_functions.hpp"
#include "polgame/oracle.hpp"
#include "support.hpp"

using namespace polgame;

namespace {

// Fits value = c0 + c1*s + c2*s^2 + c3*s^3 through four samples by Gaussian
// elimination on the Vandermonde system.
std::array<double, 4> fit_cubic(const std::array<double, 4>& s, const std::array<double, 4>& v) {
  double m[4][5];
  for (int r = 0; r < 4; ++r) {
    m[r][0] = 1.0;
    m[r][1] = s[r];
    m[r][2] = s[r] * s[r];
    m[r][3] = s[r] * s[r] * s[r];
    m[r][4] = v[r];
  }
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    for (int c = 0; c < 5; ++c) std::swap(m[col][c], m[pivot][c]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 5; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return {m[0][4] / m[0][0], m[1][4] / m[1][1], m[2][4] / m[2][2], m[3][4] / m[3][3]};
}

}  // namespace

TEST_CASE("kind names round-trip") {
  for (CFKind kind : kAllKinds) CHECK(cf_kind_from_string(to_string(kind)) == kind);
  CHECK_FALSE(cf_kind_from_string("gamma").has_value());
}

TEST_CASE("closed-form values on the reference game") {
  const GameSpec spec = testsupport::g1();
  const Coalition first = Coalition::single(0);
  const Coalition second = Coalition::single(1);
  const auto at_start = [&spec](CFKind kind, Coalition coalition) {
    return cf_value(spec, kind, coalition, spec.x0, spec.t0);
  };

  CHECK(at_start(CFKind::Alpha, first) == doctest::Approx(0.3516666667).epsilon(1e-10));
  CHECK(at_start(CFKind::Delta, first) == doctest::Approx(0.3583333333).epsilon(1e-10));
  CHECK(at_start(CFKind::Zeta, first) == doctest::Approx(0.345).epsilon(1e-12));
  CHECK(at_start(CFKind::Eta, first) == doctest::Approx(0.3516666667).epsilon(1e-10));
  CHECK(at_start(CFKind::Alpha, second) == doctest::Approx(1.7066666667).epsilon(1e-10));
  CHECK(at_start(CFKind::Delta, second) == doctest::Approx(1.7133333333).epsilon(1e-10));
  CHECK(at_start(CFKind::Zeta, second) == doctest::Approx(1.705).epsilon(1e-12));
  CHECK(at_start(CFKind::Eta, second) == doctest::Approx(1.7116666667).epsilon(1e-10));
  for (CFKind kind : kBaseKinds) {
    CHECK(at_start(kind, Coalition::full(2)) == doctest::Approx(2.08).epsilon(1e-12));
    CHECK(at_start(kind, Coalition()) == 0.0);
  }
  CHECK(at_start(CFKind::Beta, first) == at_start(CFKind::Alpha, first));
}

TEST_CASE("closed forms agree with the discretized-control oracle") {
  std::mt19937_64 rng(101);
  for (int round = 0; round < 4; ++round) {
    const GameSpec spec = random_regular_spec(rng, 2 + static_cast<int>(rng() % 3));
    for (CFKind kind : kBaseKinds)
      for (Coalition coalition : enumerate_coalitions(spec.player_count())) {
        CAPTURE(round);
        CAPTURE(to_string(kind));
        CAPTURE(coalition.mask());
        CHECK(testsupport::rel_err(oracle_cf(spec, kind, coalition, 2000).value,
                                   cf_value(spec, kind, coalition, spec.x0, spec.t0)) < 1e-3);
      }
  }
}

TEST_CASE("values are consistent with restarting the game mid-flight") {
  // Evaluating at (x, t) must equal evaluating a fresh game that starts at
  // (x, t); the oracle on the restarted game then validates the original.
  const GameSpec spec = testsupport::g1();
  GameSpec restarted = spec;
  restarted.t0 = 0.5;
  restarted.x0 = 1.0;
  REQUIRE(validate_spec(restarted).valid());

  for (CFKind kind : kBaseKinds)
    for (Coalition coalition : enumerate_coalitions(2)) {
      const double shifted = cf_value(spec, kind, coalition, 1.0, 0.5);
      CHECK(shifted == cf_value(restarted, kind, coalition, restarted.x0, restarted.t0));
      CHECK(testsupport::rel_err(oracle_cf(restarted, kind, coalition, 2000).value, shifted) < 1e-3);
    }
}

TEST_CASE("cf_value argument errors") {
  const GameSpec spec = testsupport::g1();
  CHECK_THROWS_AS(cf_value(spec, CFKind::Alpha, Coalition::single(0), 0.0, 1.5),
                  std::domain_error);
  CHECK_THROWS_AS(cf_value(spec, CFKind::EtaCover, Coalition::single(0), 0.0, 0.0),
                  std::invalid_argument);
  GameSpec broken = spec;
  broken.players[0].d = -0.1;
  CHECK_THROWS_AS(cf_value(broken, CFKind::Alpha, Coalition::single(0), 0.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("tables enumerate the power set and match cf_value entry by entry") {
  const GameSpec spec = testsupport::g1();
  const CFTable table = cf_table(spec, CFKind::Delta, 0.5, 0.25);
  REQUIRE(table.complete());
  CHECK(table.players == 2);
  CHECK(table.kind == CFKind::Delta);
  CHECK(table.state == 0.5);
  CHECK(table.time == 0.25);
  CHECK(table.values[0] == 0.0);
  for (Coalition coalition : enumerate_coalitions(2))
    CHECK(table.value(coalition) == cf_value(spec, CFKind::Delta, coalition, 0.5, 0.25));
}

TEST_CASE("guarantee and order-swapped tables are bitwise identical") {
  std::mt19937_64 rng(55);
  const GameSpec spec = random_regular_spec(rng, 5);
  const CFTable lower = cf_table(spec, CFKind::Alpha, spec.x0, spec.t0);
  const CFTable upper = cf_table(spec, CFKind::Beta, spec.x0, spec.t0);
  CHECK(lower.values == upper.values);
}

TEST_CASE("all kinds meet exactly at the grand coalition") {
  std::mt19937_64 rng(56);
  for (int round = 0; round < 10; ++round) {
    const GameSpec spec = random_regular_spec(rng, 1 + static_cast<int>(rng() % 6));
    const Coalition grand = Coalition::full(spec.player_count());
    const double t = spec.t0 + 0.3 * spec.horizon();
    const double x = spec.x0 + 1.5;
    const double reference = cf_value(spec, CFKind::Delta, grand, x, t);
    for (CFKind kind : kBaseKinds) {
      CAPTURE(to_string(kind));
      CHECK(cf_value(spec, kind, grand, x, t) == reference);
    }
  }
}

TEST_CASE("each kind is a cubic in time-to-go with the advertised coefficients") {
  std::mt19937_64 rng(57);
  const GameSpec spec = random_regular_spec(rng, 3);
  const double x = 2.0;
  const Coalition coalition = Coalition::of({0, 2});
  const Aggregates coal = coalition_aggregates(spec, coalition);
  const Aggregates rest = coalition_aggregates(spec, coalition.complement_in(3));
  const Aggregates all = coalition_aggregates(spec, Coalition::full(3));
  const double s = coal.count;
  const double dc = coal.cost_rate_sum;
  const double dr = rest.cost_rate_sum;
  const double dn = all.cost_rate_sum;

  const std::array<double, 4> ttg = {0.2, 0.5, 0.9, 1.3};
  for (CFKind kind : kBaseKinds) {
    std::array<double, 4> samples{};
    for (int j = 0; j < 4; ++j)
      samples[j] = cf_value(spec, kind, coalition, x, spec.T - ttg[j]);
    const auto coeff = fit_cubic(ttg, samples);

    double cubic = 0.0;
    switch (kind) {
      case CFKind::Alpha:
      case CFKind::Beta: cubic = s * dc * dc; break;
      case CFKind::Delta: cubic = 2.0 * dr * dc + s * dc * dc; break;
      case CFKind::Zeta: cubic = -s * dn * (dn - 2.0 * dc); break;
      case CFKind::Eta: cubic = 2.0 * s * dn * dc + 2.0 * dr * dc - s * dn * dn; break;
      default: break;
    }
    CAPTURE(to_string(kind));
    CHECK(testsupport::close(coeff[0], 0.0, 1e-9));
    CHECK(testsupport::close(coeff[1], -dc * x + 0.5 * coal.cap_sq_sum, 1e-9));
    CHECK(testsupport::close(coeff[2], -0.5 * all.cap_sum * dc, 1e-9));
    CHECK(testsupport::close(coeff[3], cubic / 6.0, 1e-9));
  }
}

TEST_CASE("cover lifts a table to its best partition, hand-checked") {
  CFTable table;
  table.kind = CFKind::Alpha;
  table.players = 2;
  table.values = {0.0, 1.0, 1.0, 1.0};  // two singletons beat the pair
  const CFTable cover = superadditive_cover(table);
  CHECK(cover.values == std::vector<double>{0.0, 1.0, 1.0, 2.0});
  CHECK(cover.kind == CFKind::Alpha);
}

TEST_CASE("cover of an additive table is the table itself") {
  CFTable table;
  table.kind = CFKind::Zeta;
  table.players = 3;
  table.values.assign(8, 0.0);
  const double w[3] = {0.25, 1.5, 0.125};
  for (std::uint32_t mask = 1; mask < 8; ++mask)
    for (int i = 0; i < 3; ++i)
      if (mask & (1u << i)) table.values[mask] += w[i];
  CHECK(superadditive_cover(table).values == table.values);
}

TEST_CASE("cover equals exhaustive partition enumeration on dyadic tables") {
  std::mt19937_64 rng(61);
  for (int round = 0; round < 6; ++round) {
    const int n = 2 + static_cast<int>(rng() % 7);
    CFTable table;
    table.kind = CFKind::Eta;
    table.players = n;
    table.values.assign(std::size_t{1} << n, 0.0);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask)
      table.values[mask] = testsupport::dyadic_unit(rng);

    const CFTable cover = superadditive_cover(table);
    CHECK(cover.kind == CFKind::EtaCover);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      CAPTURE(round);
      CAPTURE(mask);
      CHECK(cover.values[mask] == testsupport::best_partition_value(table.values, mask));
      CHECK(cover.values[mask] >= table.values[mask]);
    }
    CHECK(verify_superadditivity(cover, 0.0).ok());
    CHECK(superadditive_cover(cover).values == cover.values);
  }
}

TEST_CASE("the frozen-agreement table is already superadditive") {
  const GameSpec spec = testsupport::g1();
  const CFTable table = cf_table(spec, CFKind::Eta, spec.x0, spec.t0);
  const CFTable cover = superadditive_cover(table);
  CHECK(cover.values == table.values);
  CHECK(cf_table(spec, CFKind::EtaCover, spec.x0, spec.t0).values == table.values);
}

TEST_CASE("cover rejects incomplete tables") {
  CFTable bad;
  bad.players = 3;
  bad.values.assign(5, 0.0);
  CHECK_THROWS_AS(superadditive_cover(bad), std::invalid_argument);
}

TEST_CASE("bracket distances on the reference game") {
  const GameSpec spec = testsupport::g1();
  const BoundsGap gap = distances(spec, CFKind::Alpha, Coalition::single(0), 0.0);
  CHECK(gap.upper_gap == doctest::Approx(1.0 / 150.0).epsilon(1e-10));
  CHECK(gap.lower_gap == doctest::Approx(1.0 / 150.0).epsilon(1e-10));

  CHECK(distances(spec, CFKind::Delta, Coalition::single(0), 0.0).upper_gap == 0.0);
  CHECK(distances(spec, CFKind::Zeta, Coalition::single(1), 0.0).lower_gap == 0.0);
  CHECK_THROWS_AS(distances(spec, CFKind::EtaCover, Coalition::single(0), 0.0),
                  std::invalid_argument);
}

TEST_CASE("distances follow the cubic gap laws and ignore the state") {
  std::mt19937_64 rng(62);
  for (int round = 0; round < 10; ++round) {
    const GameSpec spec = random_regular_spec(rng, 2 + static_cast<int>(rng() % 4));
    const int n = spec.player_count();
    const double t = spec.t0 + 0.4 * spec.horizon();
    const double ttg = spec.T - t;
    for (Coalition coalition : enumerate_coalitions(n)) {
      const Aggregates coal = coalition_aggregates(spec, coalition);
      const Aggregates rest = coalition_aggregates(spec, coalition.complement_in(n));
      const double s = coal.count;
      const double dc = coal.cost_rate_sum;
      const double dr = rest.cost_rate_sum;

      const BoundsGap at_alpha = distances(spec, CFKind::Alpha, coalition, t);
      CHECK(testsupport::close(at_alpha.upper_gap, dr * dc * ttg * ttg * ttg / 3.0, 1e-12));
      CHECK(testsupport::close(at_alpha.lower_gap, s * dr * dr * ttg * ttg * ttg / 6.0, 1e-12));

      const BoundsGap at_eta = distances(spec, CFKind::Eta, coalition, t);
      CHECK(testsupport::close(at_eta.upper_gap, s * dr * dr * ttg * ttg * ttg / 6.0, 1e-12));
      CHECK(testsupport::close(at_eta.lower_gap, dr * dc * ttg * ttg * ttg / 3.0, 1e-12));

      // The same differences reconstructed at two other stock levels.
      for (double x : {0.0, 4.0}) {
        const double mid = cf_value(spec, CFKind::Alpha, coalition, x, t);
        CHECK(testsupport::close(cf_value(spec, CFKind::Delta, coalition, x, t) - mid,
                                 at_alpha.upper_gap, 1e-12));
        CHECK(testsupport::close(mid - cf_value(spec, CFKind::Zeta, coalition, x, t),
                                 at_alpha.lower_gap, 1e-12));
      }
    }
  }
}

TEST_CASE("alignment coefficients on the reference game") {
  const GameSpec spec = testsupport::g1();
  const Alignment first = alignment_coefficient(spec, Coalition::single(0));
  CHECK(first.k_eta == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(first.k_alpha == doctest::Approx(0.5).epsilon(1e-14));
  const Alignment second = alignment_coefficient(spec, Coalition::single(1));
  CHECK(second.k_eta == doctest::Approx(0.8).epsilon(1e-14));
  const Alignment grand = alignment_coefficient(spec, Coalition::full(2));
  CHECK(grand.k_eta == 1.0);
  CHECK_THROWS_AS(alignment_coefficient(spec, Coalition()), std::domain_error);
}

TEST_CASE("the frozen-agreement value is the aligned convex combination") {
  std::mt19937_64 rng(63);
  for (int round = 0; round < 10; ++round) {
    const GameSpec spec = random_regular_spec(rng, 2 + static_cast<int>(rng() % 4));
    const int n = spec.player_count();
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      const Coalition coalition{mask};
      const Alignment k = alignment_coefficient(spec, coalition);
      for (const auto& [x, t] : {std::pair{spec.x0, spec.t0},
                                 std::pair{spec.x0 + 2.0, spec.t0 + 0.5 * spec.horizon()},
                                 std::pair{0.0, spec.t0 + 0.9 * spec.horizon()}}) {
        const double combo = k.k_eta * cf_value(spec, CFKind::Delta, coalition, x, t) +
                             k.k_alpha * cf_value(spec, CFKind::Zeta, coalition, x, t);
        CHECK(testsupport::close(cf_value(spec, CFKind::Eta, coalition, x, t), combo, 1e-12));
      }
    }
  }
}

TEST_CASE("gap reflection symmetry between the optimizing and frozen kinds") {
  std::mt19937_64 rng(64);
  for (int round = 0; round < 10; ++round) {
    const GameSpec spec = random_regular_spec(rng, 2 + static_cast<int>(rng() % 4));
    const double x = spec.x0;
    const double t = spec.t0 + 0.25 * spec.horizon();
    for (Coalition coalition : enumerate_coalitions(spec.player_count())) {
      const double alpha = cf_value(spec, CFKind::Alpha, coalition, x, t);
      const double delta = cf_value(spec, CFKind::Delta, coalition, x, t);
      const double zeta = cf_value(spec, CFKind::Zeta, coalition, x, t);
      const double eta = cf_value(spec, CFKind::Eta, coalition, x, t);
      CHECK(testsupport::close(delta - alpha, eta - zeta, 1e-12));
      CHECK(testsupport::close(delta - eta, alpha - zeta, 1e-12));
    }
  }
}

TEST_CASE("partial order holds for valid games and the report names breaches") {
  const GameSpec spec = testsupport::g1();
  CHECK(verify_partial_order(spec, spec.x0, spec.t0, 1e-9).ok());
  CHECK(verify_partial_order(spec, 3.0, 0.7, 1e-9).ok());

  // A negative tolerance reclassifies exact ties as breaches, which shows
  // the report carries the right pair and coalition data.
  const OrderReport strict = verify_partial_order(spec, spec.x0, spec.t0, -0.5);
  REQUIRE_FALSE(strict.ok());
  const OrderViolation& v = strict.violations.front();
  CHECK(v.coalition == Coalition());
  CHECK(v.gap == 0.0);
  CHECK(v.upper == CFKind::Delta);
}

TEST_CASE("superadditivity report pinpoints the offending split") {
  CFTable table;
  table.kind = CFKind::Alpha;
  table.players = 2;
  table.values = {0.0, 1.0, 1.0, 1.0};
  const SuperadditivityReport report = verify_superadditivity(table, 1e-12);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].first == Coalition::single(0));
  CHECK(report.violations[0].second == Coalition::single(1));
  CHECK(report.violations[0].deficit == doctest::Approx(1.0));

  CFTable bad;
  bad.players = 2;
  bad.values.assign(3, 0.0);
  CHECK_THROWS_AS(verify_superadditivity(bad, 0.0), std::invalid_argument);
}

TEST_CASE("the three guarantee-style kinds are superadditive") {
  std::mt19937_64 rng(65);
  for (int round = 0; round < 8; ++round) {
    const GameSpec spec = random_regular_spec(rng, 2 + static_cast<int>(rng() % 5));
    for (CFKind kind : {CFKind::Alpha, CFKind::Zeta, CFKind::Eta}) {
      CAPTURE(round);
      CAPTURE(to_string(kind));
      CHECK(verify_superadditivity(cf_table(spec, kind, spec.x0, spec.t0), 1e-12).ok());
    }
  }
}
