#include "polgame/game.hpp"

#include <bit>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace polgame {

GameSpec GameSpec::make(double t0, double T, double x0,
                        const std::vector<std::pair<double, double>>& bd) {
  GameSpec spec;
  spec.t0 = t0;
  spec.T = T;
  spec.x0 = x0;
  spec.players.reserve(bd.size());
  int id = 0;
  for (const auto& [b, d] : bd) spec.players.push_back({id++, b, d});
  return spec;
}

Coalition Coalition::full(int n) {
  if (n < 0 || n > kMaxPlayers) throw std::length_error("coalition size out of range");
  if (n == 0) return Coalition();
  return Coalition((std::uint32_t{1} << n) - 1u);
}

Coalition Coalition::of(std::initializer_list<int> members) {
  std::uint32_t mask = 0;
  for (int m : members) {
    if (m < 0 || m >= kMaxPlayers) throw std::invalid_argument("player index out of range");
    mask |= std::uint32_t{1} << m;
  }
  return Coalition(mask);
}

int Coalition::size() const { return std::popcount(mask_); }

Coalition Coalition::complement_in(int n) const {
  return Coalition(full(n).mask() & ~mask_);
}

std::vector<int> Coalition::members() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (int i = 0; i < kMaxPlayers; ++i)
    if (contains(i)) out.push_back(i);
  return out;
}

namespace {

std::string player_field(int i, const char* name) {
  std::ostringstream os;
  os << "players[" << i << "]." << name;
  return os.str();
}

}  // namespace

ValidationReport validate_spec(const GameSpec& spec) {
  ValidationReport report;
  auto add = [&report](std::string field, std::string message) {
    report.issues.push_back({std::move(field), std::move(message)});
  };

  const int n = spec.player_count();
  if (n < 1) add("players", "at least one player is required");
  if (n > kMaxPlayers) add("players", "player count exceeds the supported maximum of 24");
  if (!(spec.T > spec.t0)) add("T", "horizon end must be strictly greater than t0");
  if (!(spec.x0 >= 0.0)) add("x0", "initial stock must be >= 0");

  double total_cost_rate = 0.0;
  for (const auto& p : spec.players) total_cost_rate += p.d;
  const double required_cap = total_cost_rate * spec.horizon();

  std::unordered_set<int> seen_ids;
  for (int i = 0; i < n; ++i) {
    const auto& p = spec.players[i];
    if (!seen_ids.insert(p.id).second) add(player_field(i, "id"), "duplicate player id");
    if (!(p.b > 0.0)) add(player_field(i, "b"), "emission cap must be > 0");
    if (!(p.d > 0.0)) add(player_field(i, "d"), "cost rate must be > 0");
    if (spec.T > spec.t0 && p.b > 0.0 && !(p.b >= required_cap)) {
      std::ostringstream os;
      os << "regularity requires b >= " << required_cap
         << " (total cost rate times horizon), got " << p.b;
      add(player_field(i, "b"), os.str());
    }
  }
  return report;
}

void require_valid(const GameSpec& spec) {
  const ValidationReport report = validate_spec(spec);
  if (report.valid()) return;
  const SpecIssue& first = report.issues.front();
  throw std::invalid_argument("invalid game spec: " + first.field + ": " + first.message);
}

Aggregates coalition_aggregates(const GameSpec& spec, Coalition coalition) {
  const int n = spec.player_count();
  if (n < 32 && (coalition.mask() >> n) != 0)
    throw std::invalid_argument("coalition contains players outside the spec");
  Aggregates agg;
  for (int i = 0; i < n; ++i) {
    if (!coalition.contains(i)) continue;
    const auto& p = spec.players[i];
    agg.cap_sum += p.b;
    agg.cap_sq_sum += p.b * p.b;
    agg.cost_rate_sum += p.d;
    ++agg.count;
  }
  return agg;
}

std::vector<Coalition> enumerate_coalitions(int n) {
  if (n < 0 || n > kMaxPlayers) throw std::length_error("player count exceeds the supported maximum of 24");
  std::vector<Coalition> out;
  out.reserve(std::size_t{1} << n);
  const std::uint32_t limit = (n == 0) ? 1u : ((std::uint32_t{1} << n));
  for (std::uint32_t mask = 0; mask < limit; ++mask) out.push_back(Coalition(mask));
  return out;
}

GameSpec random_regular_spec(std::mt19937_64& rng, int n) {
  if (n < 1 || n > kMaxPlayers) throw std::length_error("player count out of range");
  std::uniform_real_distribution<double> start(0.0, 1.0);
  std::uniform_real_distribution<double> length(0.5, 2.0);
  std::uniform_real_distribution<double> stock(0.0, 5.0);
  std::uniform_real_distribution<double> cost(0.02, 0.5);
  std::uniform_real_distribution<double> slack(0.05, 2.0);

  GameSpec spec;
  spec.t0 = start(rng);
  spec.T = spec.t0 + length(rng);
  spec.x0 = stock(rng);
  std::vector<double> costs(static_cast<std::size_t>(n));
  double total_cost_rate = 0.0;
  for (double& d : costs) {
    d = cost(rng);
    total_cost_rate += d;
  }
  const double required_cap = total_cost_rate * spec.horizon();
  for (int i = 0; i < n; ++i)
    spec.players.push_back({i, required_cap * (1.0 + slack(rng)), costs[static_cast<std::size_t>(i)]});
  return spec;
}

}  // namespace polgame
