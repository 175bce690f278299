#pragma once

#include <cmath>

#include "polgame/char_functions.hpp"

namespace polgame {

/// A payoff vector over all players.
struct Imputation {
  std::vector<double> payoffs;
};

/// Families with a per-player closed-form Shapley value. Zeta and eta share
/// one (their tables differ by a symmetric reshuffle that the Shapley
/// average cancels), so a single family covers both.
enum class ShapleyFamily { ZetaEta };

/// Extreme points of the imputation set of a table: vertex k gives every
/// player its singleton value except player k, who absorbs the surplus.
struct VertexSet {
  std::vector<Imputation> vertices;
  bool degenerate = false;  ///< grand value below the sum of singleton values
  double surplus = 0.0;     ///< V(N) - sum of V({i})
};

/// Slack of an allocation against individual and group rationality.
struct RationalityReport {
  std::vector<double> individual_slack;  ///< payoff_i - V({i})
  double group_residual = 0.0;           ///< sum of payoffs - V(N)
  double tolerance = 0.0;

  bool individually_rational() const;
  bool group_rational() const { return std::abs(group_residual) <= tolerance; }
  bool ok() const { return individually_rational() && group_rational(); }
};

/// Shapley values of the five base kinds at one evaluation point, with the
/// two coincidence checks this game satisfies: alpha with delta, zeta with
/// eta.
struct ShapleyComparisonReport {
  std::array<Imputation, 5> per_kind;    ///< indexed like kBaseKinds
  double alpha_delta_deviation = 0.0;    ///< max_i |Sh_alpha_i - Sh_delta_i|
  double zeta_eta_deviation = 0.0;       ///< max_i |Sh_zeta_i - Sh_eta_i|
  std::vector<double> difference;        ///< Sh_alpha - Sh_zeta componentwise
  double tolerance = 0.0;
  bool coincident = false;               ///< both deviations within tolerance
};

/// Combinatorial Shapley value of a complete table. Weights are the exact
/// rationals (n-s)!(s-1)!/n!, computed as 1/(n*binomial(n-1, s-1)) in
/// integer arithmetic and converted to double once.
Imputation shapley(const CFTable& table);

/// Closed-form Shapley value for the given family at stock x and time t.
Imputation shapley_closed_form(const GameSpec& spec, ShapleyFamily family, double x, double t);

/// All n vertices of the imputation set. Vertices are group-rational by
/// construction; when the table is not superadditive the set may be empty,
/// flagged via `degenerate`.
VertexSet imputation_vertices(const CFTable& table);

/// Rationality slacks of one allocation against a table.
RationalityReport check_imputation(const CFTable& table, const Imputation& allocation, double tol);

/// Builds the five base tables at (x, t), computes their Shapley values and
/// the coincidence deviations.
ShapleyComparisonReport compare_shapley(const GameSpec& spec, double x, double t, double tol);

}  // namespace polgame
