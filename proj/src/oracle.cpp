#include "polgame/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace polgame {

DiscretizedControl DiscretizedControl::zeros(int players, int steps) {
  DiscretizedControl u;
  u.steps = steps;
  u.values.assign(static_cast<std::size_t>(players),
                  std::vector<double>(static_cast<std::size_t>(steps), 0.0));
  return u;
}

namespace {

struct Grid {
  int steps = 0;
  double h = 0.0;
  // weight[k] is the exact sensitivity of the stock time-integral to one
  // unit of emission rate held during step k: half the emitting step (the
  // stock ramps up linearly inside it) plus every later step in full.
  std::vector<double> weight;
};

Grid make_grid(const GameSpec& spec, int steps) {
  if (steps < 1) throw std::invalid_argument("oracle grid needs at least one step");
  if (!(spec.T >= spec.t0)) throw std::invalid_argument("spec horizon is reversed");
  Grid grid;
  grid.steps = steps;
  grid.h = spec.horizon() / steps;
  grid.weight.resize(static_cast<std::size_t>(steps));
  double acc = 0.5 * grid.h;
  for (int k = steps - 1; k >= 0; --k) {
    grid.weight[static_cast<std::size_t>(k)] = acc;
    acc += grid.h;
  }
  return grid;
}

void require_profile_shape(const GameSpec& spec, const DiscretizedControl& u) {
  const std::size_t n = spec.players.size();
  if (n == 0) throw std::invalid_argument("spec has no players");
  if (u.steps < 1 || u.values.size() != n)
    throw std::invalid_argument("control profile does not match the spec");
  for (const auto& row : u.values)
    if (row.size() != static_cast<std::size_t>(u.steps))
      throw std::invalid_argument("control rows must all have `steps` entries");
}

void require_coalition_fits(const GameSpec& spec, Coalition coalition) {
  if (spec.player_count() < 32 && (coalition.mask() >> spec.player_count()) != 0)
    throw std::invalid_argument("coalition contains players outside the spec");
}

double coalition_payoff(const GameSpec& spec, const DiscretizedControl& u, Coalition coalition) {
  const std::vector<double> payoffs = integrate_payoffs(spec, u);
  double total = 0.0;
  for (int i = 0; i < spec.player_count(); ++i)
    if (coalition.contains(i)) total += payoffs[static_cast<std::size_t>(i)];
  return total;
}

}  // namespace

std::vector<double> integrate_payoffs(const GameSpec& spec, const DiscretizedControl& u) {
  require_profile_shape(spec, u);
  const int n = spec.player_count();
  for (int i = 0; i < n; ++i) {
    const double cap = spec.players[static_cast<std::size_t>(i)].b;
    for (int k = 0; k < u.steps; ++k) {
      const double v = u.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      if (!(v >= 0.0 && v <= cap)) {
        std::ostringstream os;
        os << "control out of [0, b] box: player " << i << ", step " << k << ", value " << v;
        throw std::invalid_argument(os.str());
      }
    }
  }

  const double h = spec.horizon() / u.steps;
  std::vector<double> payoffs(static_cast<std::size_t>(n), 0.0);
  double stock = spec.x0;
  for (int k = 0; k < u.steps; ++k) {
    double flow = 0.0;
    for (int i = 0; i < n; ++i) flow += u.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    const double next = stock + h * flow;
    const double mean_stock = 0.5 * (stock + next);
    for (int i = 0; i < n; ++i) {
      const auto& p = spec.players[static_cast<std::size_t>(i)];
      const double v = u.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      payoffs[static_cast<std::size_t>(i)] += h * (p.b * v - 0.5 * v * v - p.d * mean_stock);
    }
    stock = next;
  }
  return payoffs;
}

OracleResult oracle_min_complement(const GameSpec& spec, Coalition coalition,
                                   const DiscretizedControl& coalition_controls, int steps) {
  require_coalition_fits(spec, coalition);
  const Grid grid = make_grid(spec, steps);
  const int n = spec.player_count();

  DiscretizedControl u = DiscretizedControl::zeros(n, steps);
  for (int i = 0; i < n; ++i) {
    if (!coalition.contains(i)) continue;
    if (coalition_controls.values.size() != static_cast<std::size_t>(n) ||
        coalition_controls.values[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(steps))
      throw std::invalid_argument("coalition rows missing from the fixed profile");
    u.values[static_cast<std::size_t>(i)] = coalition_controls.values[static_cast<std::size_t>(i)];
  }

  const double coal_cost_rate = coalition_aggregates(spec, coalition).cost_rate_sum;
  for (int j = 0; j < n; ++j) {
    if (coalition.contains(j)) continue;
    const double cap = spec.players[static_cast<std::size_t>(j)].b;
    for (int k = 0; k < steps; ++k) {
      // The coalition's payoff depends on an outsider's step-k rate only
      // through the stock: the exact coefficient is -D * h * weight[k] with
      // D the coalition's total cost rate. Minimizing a linear function
      // over [0, cap] picks a corner; ties resolve to 0 deterministically.
      const double coeff = -(coal_cost_rate * grid.h * grid.weight[static_cast<std::size_t>(k)]);
      u.values[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = coeff < 0.0 ? cap : 0.0;
    }
  }

  OracleResult result;
  result.control = std::move(u);
  result.value = coalition_payoff(spec, result.control, coalition);
  return result;
}

OracleResult oracle_max_coalition(const GameSpec& spec, Coalition coalition,
                                  const DiscretizedControl& complement_controls, int steps) {
  require_coalition_fits(spec, coalition);
  const Grid grid = make_grid(spec, steps);
  const int n = spec.player_count();

  DiscretizedControl u = DiscretizedControl::zeros(n, steps);
  for (int j = 0; j < n; ++j) {
    if (coalition.contains(j)) continue;
    if (complement_controls.values.size() != static_cast<std::size_t>(n) ||
        complement_controls.values[static_cast<std::size_t>(j)].size() != static_cast<std::size_t>(steps))
      throw std::invalid_argument("complement rows missing from the fixed profile");
    u.values[static_cast<std::size_t>(j)] = complement_controls.values[static_cast<std::size_t>(j)];
  }

  const double coal_cost_rate = coalition_aggregates(spec, coalition).cost_rate_sum;
  for (int i = 0; i < n; ++i) {
    if (!coalition.contains(i)) continue;
    const double cap = spec.players[static_cast<std::size_t>(i)].b;
    for (int k = 0; k < steps; ++k) {
      // Member i's step-k rate enters the coalition payoff as the concave
      // quadratic h*(b*v - v^2/2) - D*h*weight[k]*v; the maximizer over
      // [0, b] is the clamped stationary point b - D*weight[k]. Everything
      // else is additively separate, so pointwise choices are jointly
      // optimal.
      const double stationary = cap - coal_cost_rate * grid.weight[static_cast<std::size_t>(k)];
      u.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
          std::clamp(stationary, 0.0, cap);
    }
  }

  OracleResult result;
  result.control = std::move(u);
  result.value = coalition_payoff(spec, result.control, coalition);
  return result;
}

OracleResult oracle_nash(const GameSpec& spec, int steps, int max_sweeps, double tol) {
  const Grid grid = make_grid(spec, steps);
  const int n = spec.player_count();
  if (n == 0) throw std::invalid_argument("spec has no players");
  if (max_sweeps < 1) throw std::invalid_argument("at least one sweep is required");

  OracleResult result;
  result.control = DiscretizedControl::zeros(n, steps);
  result.residual = std::numeric_limits<double>::infinity();
  while (result.iterations < max_sweeps) {
    ++result.iterations;
    double change = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto& p = spec.players[static_cast<std::size_t>(i)];
      for (int k = 0; k < steps; ++k) {
        // Player i's own payoff restricted to its step-k rate is the same
        // concave quadratic as in the coalition case with D = d_i; the
        // others only shift it by a constant, so this is the exact best
        // response no matter what they play.
        const double stationary = p.b - p.d * grid.weight[static_cast<std::size_t>(k)];
        const double next = std::clamp(stationary, 0.0, p.b);
        double& cell = result.control.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        change = std::max(change, std::abs(next - cell));
        cell = next;
      }
    }
    result.residual = change;
    if (change < tol) break;
  }
  result.converged = result.residual < tol;
  result.value = coalition_payoff(spec, result.control, Coalition::full(n));
  return result;
}

OracleResult oracle_cf(const GameSpec& spec, CFKind kind, Coalition coalition, int steps) {
  if (kind == CFKind::EtaCover)
    throw std::invalid_argument("eta_cover is a table transform; the oracle handles base kinds only");
  require_coalition_fits(spec, coalition);
  const int n = spec.player_count();
  if (n == 0) throw std::invalid_argument("spec has no players");
  if (coalition.empty()) {
    OracleResult empty;
    empty.control = DiscretizedControl::zeros(n, steps < 1 ? 1 : steps);
    return empty;  // an empty coalition earns 0 by definition
  }

  switch (kind) {
    case CFKind::Alpha: {
      const OracleResult adversary =
          oracle_min_complement(spec, coalition, DiscretizedControl::zeros(n, steps), steps);
      return oracle_max_coalition(spec, coalition, adversary.control, steps);
    }
    case CFKind::Beta: {
      // Swapped order: derive the coalition's best response first, let the
      // complement minimize against it, then re-derive the best response to
      // the minimizer. For this game both orders meet at the same profile.
      const OracleResult reply =
          oracle_max_coalition(spec, coalition, DiscretizedControl::zeros(n, steps), steps);
      const OracleResult adversary = oracle_min_complement(spec, coalition, reply.control, steps);
      return oracle_max_coalition(spec, coalition, adversary.control, steps);
    }
    case CFKind::Delta: {
      const OracleResult equilibrium = oracle_nash(spec, steps);
      OracleResult result = oracle_max_coalition(spec, coalition, equilibrium.control, steps);
      result.iterations = equilibrium.iterations;
      result.residual = equilibrium.residual;
      result.converged = equilibrium.converged;
      return result;
    }
    case CFKind::Zeta: {
      const OracleResult joint = oracle_max_coalition(
          spec, Coalition::full(n), DiscretizedControl::zeros(n, steps), steps);
      return oracle_min_complement(spec, coalition, joint.control, steps);
    }
    case CFKind::Eta: {
      const OracleResult joint = oracle_max_coalition(
          spec, Coalition::full(n), DiscretizedControl::zeros(n, steps), steps);
      const OracleResult equilibrium = oracle_nash(spec, steps);
      OracleResult result;
      result.control = DiscretizedControl::zeros(n, steps);
      for (int i = 0; i < n; ++i)
        result.control.values[static_cast<std::size_t>(i)] =
            coalition.contains(i) ? joint.control.values[static_cast<std::size_t>(i)]
                                  : equilibrium.control.values[static_cast<std::size_t>(i)];
      result.iterations = equilibrium.iterations;
      result.residual = equilibrium.residual;
      result.converged = equilibrium.converged;
      result.value = coalition_payoff(spec, result.control, coalition);
      return result;
    }
    case CFKind::EtaCover:
      break;
  }
  throw std::invalid_argument("unknown characteristic function kind");
}

ValidationMatrix validate_against_closed_forms(const GameSpec& spec, int steps, double rel_tol) {
  require_valid(spec);
  if (spec.player_count() > 10)
    throw std::length_error("validation sweep is exponential; capped at 10 players");

  ValidationMatrix matrix;
  matrix.tolerance = rel_tol;
  for (CFKind kind : kBaseKinds) {
    for (Coalition coalition : enumerate_coalitions(spec.player_count())) {
      ValidationEntry entry;
      entry.kind = kind;
      entry.coalition = coalition;
      entry.oracle_value = oracle_cf(spec, kind, coalition, steps).value;
      entry.closed_form = cf_value(spec, kind, coalition, spec.x0, spec.t0);
      entry.rel_error =
          std::abs(entry.oracle_value - entry.closed_form) / (1.0 + std::abs(entry.closed_form));
      if (entry.rel_error >= matrix.max_rel_error) {
        matrix.max_rel_error = entry.rel_error;
        matrix.worst_kind = kind;
        matrix.worst_coalition = coalition;
      }
      matrix.entries.push_back(entry);
    }
  }
  matrix.pass = matrix.max_rel_error < rel_tol;
  return matrix;
}

}  // namespace polgame
