#include "polgame/analytic.hpp"

#include <algorithm>
#include <stdexcept>

namespace polgame {

double AffineControl::value(double time_to_go) const {
  return std::clamp(unclipped(time_to_go), 0.0, cap);
}

bool AffineControl::clipping_inactive(double horizon) const {
  const double at_end = unclipped(0.0);
  const double at_start = unclipped(horizon);
  return at_end >= 0.0 && at_end <= cap && at_start >= 0.0 && at_start <= cap;
}

double ControlProfile::value(int player, double t) const {
  if (player < 0 || player >= player_count())
    throw std::invalid_argument("player index out of range");
  return controls[static_cast<std::size_t>(player)].value(end_time - t);
}

ControlProfile nash_equilibrium(const GameSpec& spec) {
  require_valid(spec);
  ControlProfile profile;
  profile.end_time = spec.T;
  profile.controls.reserve(spec.players.size());
  for (const auto& p : spec.players) profile.controls.push_back({p.b, p.b, p.d});
  return profile;
}

ControlProfile cooperative_agreement(const GameSpec& spec) {
  require_valid(spec);
  const double total_cost_rate = coalition_aggregates(spec, Coalition::full(spec.player_count())).cost_rate_sum;
  ControlProfile profile;
  profile.end_time = spec.T;
  profile.controls.reserve(spec.players.size());
  for (const auto& p : spec.players) profile.controls.push_back({p.b, p.b, total_cost_rate});
  return profile;
}

namespace {

void require_affine_profile(const GameSpec& spec, const ControlProfile& profile) {
  if (profile.player_count() != spec.player_count())
    throw std::invalid_argument("profile length does not match the spec");
  if (!(spec.T >= spec.t0)) throw std::invalid_argument("spec horizon is reversed");
  for (const auto& c : profile.controls)
    if (!c.clipping_inactive(spec.horizon()))
      throw std::invalid_argument("profile clips inside the horizon; exact integration needs unclipped controls");
}

}  // namespace

Trajectory state_trajectory(const GameSpec& spec, const ControlProfile& profile) {
  require_affine_profile(spec, profile);
  double level_sum = 0.0;
  double slope_sum = 0.0;
  for (const auto& c : profile.controls) {
    level_sum += c.c0;
    slope_sum += c.c1;
  }
  Trajectory traj;
  traj.x0 = spec.x0;
  traj.t0 = spec.t0;
  traj.a1 = level_sum - slope_sum * spec.T;
  traj.a2 = 0.5 * slope_sum;
  return traj;
}

double player_payoff(const GameSpec& spec, const ControlProfile& profile, int player) {
  require_affine_profile(spec, profile);
  if (player < 0 || player >= spec.player_count())
    throw std::invalid_argument("player index out of range");

  const Trajectory traj = state_trajectory(spec, profile);
  const double horizon = spec.horizon();
  // Rewrite both the control and the stock in time-to-go s = T - t:
  //   u(s) = c0 - c1*s
  //   x(s) = end_state - end_slope*s + a2*s^2
  const double end_state = traj.value(spec.T);
  const double end_slope = traj.a1 + 2.0 * traj.a2 * spec.T;

  const auto& c = profile.controls[static_cast<std::size_t>(player)];
  const auto& p = spec.players[static_cast<std::size_t>(player)];
  const double const_term = p.b * c.c0 - 0.5 * c.c0 * c.c0 - p.d * end_state;
  const double linear_term = c.c0 * c.c1 - p.b * c.c1 + p.d * end_slope;
  const double quad_term = -(0.5 * c.c1 * c.c1 + p.d * traj.a2);
  return const_term * horizon + linear_term * horizon * horizon / 2.0 +
         quad_term * horizon * horizon * horizon / 3.0;
}

double pollution_gap(const GameSpec& spec, double t) {
  require_valid(spec);
  if (t < spec.t0 || t > spec.T)
    throw std::domain_error("evaluation time outside [t0, T]");
  const int n = spec.player_count();
  const double total_cost_rate = coalition_aggregates(spec, Coalition::full(n)).cost_rate_sum;
  return 0.5 * (n - 1) * total_cost_rate * (t - spec.t0) * (2.0 * spec.T - t - spec.t0);
}

}  // namespace polgame
