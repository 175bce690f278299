#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "polgame/game.hpp"

namespace polgame {

/// The five coalition value concepts, plus the superadditive cover of eta.
///
///  - Alpha: the coalition guarantees itself a value against a complement
///    that minimizes the coalition's payoff (max-min).
///  - Beta: the order-swapped min-max value. It coincides with alpha here.
///  - Delta: the coalition optimizes while outsiders keep playing their
///    Nash-equilibrium controls.
///  - Zeta: the coalition keeps playing its share of the cooperative
///    agreement while outsiders minimize the coalition's payoff.
///  - Eta: the coalition keeps its cooperative share and outsiders keep
///    their Nash controls; nobody optimizes.
///  - EtaCover: the superadditive cover of the eta table.
enum class CFKind { Alpha, Beta, Delta, Zeta, Eta, EtaCover };

inline constexpr std::array<CFKind, 5> kBaseKinds = {
    CFKind::Alpha, CFKind::Beta, CFKind::Delta, CFKind::Zeta, CFKind::Eta};
inline constexpr std::array<CFKind, 6> kAllKinds = {
    CFKind::Alpha, CFKind::Beta, CFKind::Delta,
    CFKind::Zeta,  CFKind::Eta,  CFKind::EtaCover};

std::string_view to_string(CFKind kind);
std::optional<CFKind> cf_kind_from_string(std::string_view name);

/// A complete characteristic function at one evaluation point: values for
/// all 2^n coalitions indexed by mask.
struct CFTable {
  CFKind kind = CFKind::Alpha;
  double state = 0.0;  ///< stock level the values were computed at
  double time = 0.0;   ///< evaluation time
  int players = 0;
  std::vector<double> values;  ///< size 1 << players, index = coalition mask

  double value(Coalition coalition) const { return values.at(coalition.mask()); }
  bool complete() const {
    return players >= 0 && players <= kMaxPlayers &&
           values.size() == (std::size_t{1} << players);
  }
};

/// Value margin of a coalition inside the delta..zeta bracket:
/// upper_gap = V_delta - V_kind, lower_gap = V_kind - V_zeta. Both are
/// nonnegative for the five base kinds and independent of the state.
struct BoundsGap {
  double upper_gap = 0.0;
  double lower_gap = 0.0;
};

/// Convex weight placing eta inside the [zeta, delta] bracket:
/// V_eta = k_eta * V_delta + k_alpha * V_zeta with k_alpha = 1 - k_eta.
/// Depends only on coalition parameters, not on state or time.
struct Alignment {
  double k_eta = 0.0;
  double k_alpha = 0.0;
};

struct OrderViolation {
  CFKind upper = CFKind::Delta;
  CFKind lower = CFKind::Alpha;
  Coalition coalition;
  double gap = 0.0;  ///< V_upper - V_lower, negative when violated
};

struct OrderReport {
  std::vector<OrderViolation> violations;
  bool ok() const { return violations.empty(); }
};

struct SuperadditivityViolation {
  Coalition first;
  Coalition second;
  double deficit = 0.0;  ///< V(S) + V(Q) - V(S union Q), positive when violated
};

struct SuperadditivityReport {
  std::vector<SuperadditivityViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Closed-form coalition value of one base kind at stock x and time t <= T.
/// Throws std::invalid_argument for EtaCover (cover values only exist at
/// table level) or invalid specs, std::domain_error for t > T.
double cf_value(const GameSpec& spec, CFKind kind, Coalition coalition, double x, double t);

/// Builds the complete table of one kind at (x, t). EtaCover is accepted
/// here and materializes superadditive_cover of the eta table.
CFTable cf_table(const GameSpec& spec, CFKind kind, double x, double t);

/// Superadditive cover by subset dynamic programming over all partitions,
/// O(3^n). The result dominates the input entrywise, is superadditive, and
/// equals the input when the input is already superadditive. An eta input
/// is relabeled EtaCover; other kinds keep their label.
CFTable superadditive_cover(const CFTable& table);

/// Distances to the bracket ends at time t (state-independent).
/// Same argument errors as cf_value.
BoundsGap distances(const GameSpec& spec, CFKind kind, Coalition coalition, double t);

/// Alignment coefficients for a non-empty coalition.
/// Throws std::domain_error for the empty coalition.
Alignment alignment_coefficient(const GameSpec& spec, Coalition coalition);

/// Checks V_delta >= V_alpha >= V_zeta, V_delta >= V_beta >= V_zeta and
/// V_delta >= V_eta >= V_zeta for every coalition at (x, t), flagging pairs
/// whose gap drops below -tol.
OrderReport verify_partial_order(const GameSpec& spec, double x, double t, double tol);

/// Exhaustively checks V(S) + V(Q) <= V(S union Q) + tol over all disjoint
/// nonempty pairs of a complete table.
SuperadditivityReport verify_superadditivity(const CFTable& table, double tol);

}  // namespace polgame
