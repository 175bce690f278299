#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace polgame {

/// Hard cap on the player count. Coalition masks are 32-bit and several
/// operations enumerate all 2^n subsets, so the cap keeps them tractable.
inline constexpr int kMaxPlayers = 24;

/// Per-player model parameters. `b` is both the emission cap and the revenue
/// coefficient: instantaneous revenue is b*u - u^2/2, maximal at u = b.
/// `d` is the cost per unit of pollution stock per unit of time.
struct PlayerParams {
  int id = 0;      ///< 0-based index, unique within a spec
  double b = 0.0;  ///< emission cap / revenue coefficient, > 0
  double d = 0.0;  ///< marginal stock cost rate, > 0
};

/// One game instance: n players emitting on [t0, T], stock x' = sum of
/// emissions, player i's payoff integrates b_i*u_i - u_i^2/2 - d_i*x.
struct GameSpec {
  double t0 = 0.0;
  double T = 0.0;
  double x0 = 0.0;  ///< initial pollution stock, >= 0
  std::vector<PlayerParams> players;

  int player_count() const { return static_cast<int>(players.size()); }
  double horizon() const { return T - t0; }

  /// Convenience constructor assigning sequential ids to (b, d) pairs.
  static GameSpec make(double t0, double T, double x0,
                       const std::vector<std::pair<double, double>>& bd);
};

/// A subset of the player set {0, ..., n-1} stored as a bitmask. Bit i set
/// means player i is a member. The empty coalition is mask 0.
class Coalition {
 public:
  constexpr Coalition() = default;
  constexpr explicit Coalition(std::uint32_t mask) : mask_(mask) {}

  static Coalition single(int player) { return Coalition(std::uint32_t{1} << player); }
  static Coalition full(int n);
  static Coalition of(std::initializer_list<int> members);

  std::uint32_t mask() const { return mask_; }
  bool empty() const { return mask_ == 0; }
  bool contains(int player) const { return (mask_ >> player) & 1u; }
  int size() const;

  Coalition with(int player) const { return Coalition(mask_ | (std::uint32_t{1} << player)); }
  Coalition without(int player) const { return Coalition(mask_ & ~(std::uint32_t{1} << player)); }
  Coalition unite(Coalition other) const { return Coalition(mask_ | other.mask_); }
  Coalition intersect(Coalition other) const { return Coalition(mask_ & other.mask_); }
  Coalition complement_in(int n) const;
  bool subset_of(Coalition other) const { return (mask_ & ~other.mask_) == 0; }
  bool disjoint_with(Coalition other) const { return (mask_ & other.mask_) == 0; }

  /// Members in increasing index order.
  std::vector<int> members() const;

  friend bool operator==(Coalition a, Coalition b) { return a.mask_ == b.mask_; }
  friend bool operator!=(Coalition a, Coalition b) { return a.mask_ != b.mask_; }
  friend bool operator<(Coalition a, Coalition b) { return a.mask_ < b.mask_; }

 private:
  std::uint32_t mask_ = 0;
};

/// Sums of player parameters over one coalition.
struct Aggregates {
  double cap_sum = 0.0;        ///< sum of b_i over members
  double cap_sq_sum = 0.0;     ///< sum of b_i^2 over members
  double cost_rate_sum = 0.0;  ///< sum of d_i over members
  int count = 0;               ///< member count
};

struct SpecIssue {
  std::string field;    ///< dotted path, e.g. "players[2].b"
  std::string message;
};

struct ValidationReport {
  std::vector<SpecIssue> issues;
  bool valid() const { return issues.empty(); }
};

/// Checks every model constraint with exact comparisons: n >= 1, T > t0,
/// x0 >= 0, b_i > 0, d_i > 0, unique ids, and the regularity condition
/// b_i >= (sum of all d_j) * (T - t0) that keeps equilibrium controls
/// inside [0, b_i] on the whole horizon.
ValidationReport validate_spec(const GameSpec& spec);

/// Throws std::invalid_argument with the first issue if the spec is invalid.
void require_valid(const GameSpec& spec);

/// Componentwise parameter sums over the coalition. Members are accumulated
/// in increasing index order. Throws std::invalid_argument if the mask
/// contains players outside the spec.
Aggregates coalition_aggregates(const GameSpec& spec, Coalition coalition);

/// All 2^n coalitions in increasing mask order (empty first, grand last).
/// Throws std::length_error if n exceeds kMaxPlayers.
std::vector<Coalition> enumerate_coalitions(int n);

/// Draws a random n-player spec that satisfies every validity constraint,
/// with strictly positive regularity margin. Used by randomized checks.
GameSpec random_regular_spec(std::mt19937_64& rng, int n);

}  // namespace polgame
