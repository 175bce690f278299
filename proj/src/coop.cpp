#include "polgame/coop.hpp"

#include <bit>
#include <stdexcept>

namespace polgame {

bool RationalityReport::individually_rational() const {
  for (double slack : individual_slack)
    if (slack < -tolerance) return false;
  return true;
}

namespace {

// Row n-1 of Pascal's triangle via the stepwise product formula; every
// intermediate is an exact integer and the largest entry, C(23, 11), is far
// below 2^53.
std::vector<unsigned long long> binomials(int n_minus_1) {
  std::vector<unsigned long long> row(static_cast<std::size_t>(n_minus_1) + 1);
  row[0] = 1;
  for (int k = 1; k <= n_minus_1; ++k)
    row[static_cast<std::size_t>(k)] =
        row[static_cast<std::size_t>(k - 1)] *
        static_cast<unsigned long long>(n_minus_1 - k + 1) /
        static_cast<unsigned long long>(k);
  return row;
}

void require_table(const CFTable& table) {
  if (!table.complete() || table.players < 1)
    throw std::invalid_argument("operation needs a complete table with at least one player");
}

}  // namespace

Imputation shapley(const CFTable& table) {
  require_table(table);
  const int n = table.players;
  const std::uint32_t size = std::uint32_t{1} << n;

  const auto choose = binomials(n - 1);
  std::vector<double> weight(static_cast<std::size_t>(n) + 1, 0.0);
  for (int s = 1; s <= n; ++s)
    weight[static_cast<std::size_t>(s)] =
        1.0 / (static_cast<double>(n) * static_cast<double>(choose[static_cast<std::size_t>(s - 1)]));

  Imputation result;
  result.payoffs.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const std::uint32_t bit = std::uint32_t{1} << i;
    double sum = 0.0;
    for (std::uint32_t mask = bit; mask < size; ++mask) {
      if ((mask & bit) == 0) continue;
      const int s = std::popcount(mask);
      sum += weight[static_cast<std::size_t>(s)] *
             (table.values[mask] - table.values[mask ^ bit]);
    }
    result.payoffs[static_cast<std::size_t>(i)] = sum;
  }
  return result;
}

Imputation shapley_closed_form(const GameSpec& spec, ShapleyFamily family, double x, double t) {
  if (family != ShapleyFamily::ZetaEta)
    throw std::invalid_argument("unknown closed-form family");
  require_valid(spec);
  if (t > spec.T) throw std::domain_error("evaluation time is past the horizon end");

  const int n = spec.player_count();
  const Aggregates all = coalition_aggregates(spec, Coalition::full(n));
  const double ttg = spec.T - t;

  // The cubic weight n/6 is forced by efficiency: the shares must sum to the
  // grand-coalition value, whose cubic term is (n/6) D_N^2 ttg^3.
  const double cubic = static_cast<double>(n) * all.cost_rate_sum * ttg * ttg * ttg / 6.0;

  Imputation result;
  result.payoffs.reserve(static_cast<std::size_t>(n));
  for (const auto& p : spec.players) {
    const double share = -p.d * ttg * x + 0.5 * p.b * p.b * ttg -
                         0.5 * all.cap_sum * p.d * ttg * ttg + cubic * p.d;
    result.payoffs.push_back(share);
  }
  return result;
}

VertexSet imputation_vertices(const CFTable& table) {
  require_table(table);
  const int n = table.players;

  std::vector<double> singles(static_cast<std::size_t>(n));
  double singles_total = 0.0;
  for (int i = 0; i < n; ++i) {
    singles[static_cast<std::size_t>(i)] = table.values[std::uint32_t{1} << i];
    singles_total += singles[static_cast<std::size_t>(i)];
  }
  const double grand = table.values[(std::uint32_t{1} << n) - 1u];

  VertexSet set;
  set.surplus = grand - singles_total;
  set.degenerate = grand < singles_total;
  set.vertices.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Imputation vertex;
    vertex.payoffs = singles;
    double others = 0.0;
    for (int i = 0; i < n; ++i)
      if (i != k) others += singles[static_cast<std::size_t>(i)];
    vertex.payoffs[static_cast<std::size_t>(k)] = grand - others;
    set.vertices.push_back(std::move(vertex));
  }
  return set;
}

RationalityReport check_imputation(const CFTable& table, const Imputation& allocation, double tol) {
  require_table(table);
  const int n = table.players;
  if (static_cast<int>(allocation.payoffs.size()) != n)
    throw std::invalid_argument("allocation length does not match the table");

  RationalityReport report;
  report.tolerance = tol;
  report.individual_slack.reserve(static_cast<std::size_t>(n));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double payoff = allocation.payoffs[static_cast<std::size_t>(i)];
    report.individual_slack.push_back(payoff - table.values[std::uint32_t{1} << i]);
    total += payoff;
  }
  report.group_residual = total - table.values[(std::uint32_t{1} << n) - 1u];
  return report;
}

ShapleyComparisonReport compare_shapley(const GameSpec& spec, double x, double t, double tol) {
  require_valid(spec);
  const int n = spec.player_count();

  ShapleyComparisonReport report;
  report.tolerance = tol;
  for (std::size_t k = 0; k < kBaseKinds.size(); ++k)
    report.per_kind[k] = shapley(cf_table(spec, kBaseKinds[k], x, t));

  auto max_deviation = [n](const Imputation& a, const Imputation& b) {
    double dev = 0.0;
    for (int i = 0; i < n; ++i)
      dev = std::max(dev, std::abs(a.payoffs[static_cast<std::size_t>(i)] -
                                   b.payoffs[static_cast<std::size_t>(i)]));
    return dev;
  };
  const auto& alpha = report.per_kind[static_cast<std::size_t>(CFKind::Alpha)];
  const auto& delta = report.per_kind[static_cast<std::size_t>(CFKind::Delta)];
  const auto& zeta = report.per_kind[static_cast<std::size_t>(CFKind::Zeta)];
  const auto& eta = report.per_kind[static_cast<std::size_t>(CFKind::Eta)];
  report.alpha_delta_deviation = max_deviation(alpha, delta);
  report.zeta_eta_deviation = max_deviation(zeta, eta);
  report.difference.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    report.difference.push_back(alpha.payoffs[static_cast<std::size_t>(i)] -
                                zeta.payoffs[static_cast<std::size_t>(i)]);
  report.coincident =
      report.alpha_delta_deviation <= tol && report.zeta_eta_deviation <= tol;
  return report;
}

}  // namespace polgame
