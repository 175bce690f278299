#include "polgame/char_functions.hpp"

#include <stdexcept>

namespace polgame {

std::string_view to_string(CFKind kind) {
  switch (kind) {
    case CFKind::Alpha: return "alpha";
    case CFKind::Beta: return "beta";
    case CFKind::Delta: return "delta";
    case CFKind::Zeta: return "zeta";
    case CFKind::Eta: return "eta";
    case CFKind::EtaCover: return "eta_cover";
  }
  return "unknown";
}

std::optional<CFKind> cf_kind_from_string(std::string_view name) {
  for (CFKind kind : kAllKinds)
    if (name == to_string(kind)) return kind;
  return std::nullopt;
}

namespace {

// Coefficient of (T - t)^3 / 6 in the coalition value. All five kinds share
// the lower-order terms and differ only here. At S = N the four expressions
// collapse to the same value exactly: the extra terms either multiply the
// complement cost rate (then 0) or combine as 2y - y with y representable.
double cubic_coefficient(CFKind kind, double count, double cost_coal, double cost_rest) {
  const double cost_total = cost_coal + cost_rest;
  switch (kind) {
    case CFKind::Alpha:
    case CFKind::Beta:
      return count * cost_coal * cost_coal;
    case CFKind::Delta:
      return 2.0 * cost_rest * cost_coal + count * cost_coal * cost_coal;
    case CFKind::Zeta:
      return -(count * cost_total * (cost_total - 2.0 * cost_coal));
    case CFKind::Eta:
      return 2.0 * count * cost_total * cost_coal + 2.0 * cost_rest * cost_coal -
             count * cost_total * cost_total;
    case CFKind::EtaCover:
      break;
  }
  throw std::invalid_argument("no closed form for this kind");
}

double base_value_unchecked(const GameSpec& spec, CFKind kind, Coalition coalition,
                            double x, double t) {
  const int n = spec.player_count();
  const Aggregates coal = coalition_aggregates(spec, coalition);
  const Aggregates rest = coalition_aggregates(spec, coalition.complement_in(n));
  const double cap_total = coal.cap_sum + rest.cap_sum;
  const double ttg = spec.T - t;

  const double coeff = cubic_coefficient(kind, static_cast<double>(coal.count),
                                         coal.cost_rate_sum, rest.cost_rate_sum);
  return -coal.cost_rate_sum * ttg * x + 0.5 * coal.cap_sq_sum * ttg -
         0.5 * cap_total * coal.cost_rate_sum * ttg * ttg +
         coeff * ttg * ttg * ttg / 6.0;
}

void check_base_args(const GameSpec& spec, CFKind kind, double t) {
  if (kind == CFKind::EtaCover)
    throw std::invalid_argument("eta_cover has no per-coalition closed form; build it from a table");
  require_valid(spec);
  if (t > spec.T) throw std::domain_error("evaluation time is past the horizon end");
}

}  // namespace

double cf_value(const GameSpec& spec, CFKind kind, Coalition coalition, double x, double t) {
  check_base_args(spec, kind, t);
  return base_value_unchecked(spec, kind, coalition, x, t);
}

CFTable cf_table(const GameSpec& spec, CFKind kind, double x, double t) {
  if (kind == CFKind::EtaCover)
    return superadditive_cover(cf_table(spec, CFKind::Eta, x, t));
  check_base_args(spec, kind, t);

  const int n = spec.player_count();
  CFTable table;
  table.kind = kind;
  table.state = x;
  table.time = t;
  table.players = n;
  table.values.reserve(std::size_t{1} << n);
  for (Coalition coalition : enumerate_coalitions(n))
    table.values.push_back(base_value_unchecked(spec, kind, coalition, x, t));
  return table;
}

CFTable superadditive_cover(const CFTable& table) {
  if (!table.complete()) throw std::invalid_argument("cover needs a complete table");
  const std::uint32_t size = std::uint32_t{1} << table.players;

  CFTable cover = table;
  if (table.kind == CFKind::Eta) cover.kind = CFKind::EtaCover;
  cover.values[0] = table.values[0];
  for (std::uint32_t mask = 1; mask < size; ++mask) {
    double best = table.values[mask];
    // Enough to try splits whose first part contains the lowest member:
    // every two-block split is seen once and deeper partitions are reached
    // through already-covered halves.
    const std::uint32_t anchor = mask & (0u - mask);
    for (std::uint32_t sub = mask; sub != 0; sub = (sub - 1) & mask) {
      if (sub == mask || (sub & anchor) == 0) continue;
      const double split = cover.values[sub] + cover.values[mask ^ sub];
      if (split > best) best = split;
    }
    cover.values[mask] = best;
  }
  return cover;
}

BoundsGap distances(const GameSpec& spec, CFKind kind, Coalition coalition, double t) {
  // State terms are identical across kinds, so the gaps are state-free;
  // evaluate everything at stock 0.
  const double at_kind = cf_value(spec, kind, coalition, 0.0, t);
  BoundsGap gap;
  gap.upper_gap = cf_value(spec, CFKind::Delta, coalition, 0.0, t) - at_kind;
  gap.lower_gap = at_kind - cf_value(spec, CFKind::Zeta, coalition, 0.0, t);
  return gap;
}

Alignment alignment_coefficient(const GameSpec& spec, Coalition coalition) {
  require_valid(spec);
  if (coalition.empty())
    throw std::domain_error("alignment coefficient is undefined for the empty coalition");
  const int n = spec.player_count();
  const Aggregates coal = coalition_aggregates(spec, coalition);
  const Aggregates rest = coalition_aggregates(spec, coalition.complement_in(n));
  Alignment alignment;
  alignment.k_eta = 2.0 * coal.cost_rate_sum /
                    (2.0 * coal.cost_rate_sum + coal.count * rest.cost_rate_sum);
  alignment.k_alpha = 1.0 - alignment.k_eta;
  return alignment;
}

OrderReport verify_partial_order(const GameSpec& spec, double x, double t, double tol) {
  static constexpr std::array<std::pair<CFKind, CFKind>, 6> chains = {{
      {CFKind::Delta, CFKind::Alpha},
      {CFKind::Alpha, CFKind::Zeta},
      {CFKind::Delta, CFKind::Beta},
      {CFKind::Beta, CFKind::Zeta},
      {CFKind::Delta, CFKind::Eta},
      {CFKind::Eta, CFKind::Zeta},
  }};

  std::array<CFTable, 5> tables;
  for (std::size_t k = 0; k < kBaseKinds.size(); ++k)
    tables[k] = cf_table(spec, kBaseKinds[k], x, t);
  auto table_of = [&tables](CFKind kind) -> const CFTable& {
    return tables[static_cast<std::size_t>(kind)];
  };

  OrderReport report;
  for (Coalition coalition : enumerate_coalitions(spec.player_count())) {
    for (const auto& [upper, lower] : chains) {
      const double gap = table_of(upper).value(coalition) - table_of(lower).value(coalition);
      if (gap < -tol) report.violations.push_back({upper, lower, coalition, gap});
    }
  }
  return report;
}

SuperadditivityReport verify_superadditivity(const CFTable& table, double tol) {
  if (!table.complete()) throw std::invalid_argument("superadditivity check needs a complete table");
  const std::uint32_t size = std::uint32_t{1} << table.players;

  SuperadditivityReport report;
  for (std::uint32_t first = 1; first < size; ++first) {
    const std::uint32_t rest = (size - 1) ^ first;
    for (std::uint32_t second = rest; second != 0; second = (second - 1) & rest) {
      if (second < first) continue;  // each unordered pair once
      const double deficit =
          table.values[first] + table.values[second] - table.values[first | second];
      if (deficit > tol)
        report.violations.push_back({Coalition(first), Coalition(second), deficit});
    }
  }
  return report;
}

}  // namespace polgame
