#pragma once

#include "polgame/char_functions.hpp"

namespace polgame {

/// Piecewise-constant controls on a uniform grid over [t0, T]: values[i][k]
/// is player i's emission rate on step k. The discrete dynamics and payoff
/// integrals are evaluated exactly for this class (the stock is piecewise
/// linear), so the only gap to the continuous game is the control class
/// itself, which shrinks as O(1/steps^2) for the smooth optima met here.
struct DiscretizedControl {
  int steps = 0;
  std::vector<std::vector<double>> values;  ///< [player][step]

  static DiscretizedControl zeros(int players, int steps);
};

struct OracleResult {
  double value = 0.0;           ///< coalition payoff under the final profile
  DiscretizedControl control;   ///< full profile, all players
  int iterations = 0;           ///< best-response sweeps, when iterating
  double residual = 0.0;        ///< last sweep's largest control change
  bool converged = true;
};

struct ValidationEntry {
  CFKind kind = CFKind::Alpha;
  Coalition coalition;
  double oracle_value = 0.0;
  double closed_form = 0.0;
  double rel_error = 0.0;  ///< |oracle - closed| / (1 + |closed|)
};

/// Oracle-versus-closed-form comparison over every base kind and coalition.
struct ValidationMatrix {
  std::vector<ValidationEntry> entries;
  double max_rel_error = 0.0;
  CFKind worst_kind = CFKind::Alpha;
  Coalition worst_coalition;
  double tolerance = 0.0;
  bool pass = false;
};

/// Exact payoff of every player under a piecewise-constant profile: the
/// stock is propagated step by step and each step's stock integral uses the
/// trapezoid of its endpoints, which is exact for a linear stock. Throws
/// std::invalid_argument on dimension mismatches or box violations.
std::vector<double> integrate_payoffs(const GameSpec& spec, const DiscretizedControl& u);

/// Fills the complement rows with the pointwise minimizer of the coalition's
/// payoff, keeping the given coalition rows. An outsider's control enters
/// that payoff only through the stock, linearly, so each step picks a box
/// corner of the exact per-step objective.
OracleResult oracle_min_complement(const GameSpec& spec, Coalition coalition,
                                   const DiscretizedControl& coalition_controls, int steps);

/// Fills the coalition rows with the exact per-step clamped stationary point
/// of the coalition's payoff, keeping the given complement rows.
OracleResult oracle_max_coalition(const GameSpec& spec, Coalition coalition,
                                  const DiscretizedControl& complement_controls, int steps);

/// Discrete open-loop Nash equilibrium by synchronous best-response sweeps.
/// Each best response is an exact per-step clamped stationary point and does
/// not depend on the others' controls, so the iteration settles after one
/// effective sweep; `iterations` and `residual` report the actual run.
OracleResult oracle_nash(const GameSpec& spec, int steps, int max_sweeps = 50,
                         double tol = 1e-10);

/// Numeric counterpart of cf_value for the five base kinds, composed from
/// the primitives above per the kind's definition. The empty coalition is 0
/// by definition. Throws std::invalid_argument for EtaCover.
OracleResult oracle_cf(const GameSpec& spec, CFKind kind, Coalition coalition, int steps);

/// Runs oracle_cf against cf_value for every base kind and coalition.
/// Capped at 10 players (the sweep is exponential in n). Throws
/// std::length_error above the cap.
ValidationMatrix validate_against_closed_forms(const GameSpec& spec, int steps, double rel_tol);

}  // namespace polgame
