#pragma once

#include "polgame/game.hpp"

namespace polgame {

/// A control that is affine in time-to-go: u(t) = c0 - c1 * (T - t),
/// clamped to the box [0, cap]. Both equilibrium families below have this
/// shape with clamping inactive on the whole horizon for valid specs.
struct AffineControl {
  double cap = 0.0;
  double c0 = 0.0;  ///< value at t = T
  double c1 = 0.0;  ///< slope in time-to-go

  double unclipped(double time_to_go) const { return c0 - c1 * time_to_go; }
  double value(double time_to_go) const;

  /// True when the unclipped control stays inside [0, cap] on [0, horizon].
  /// Affine controls attain extremes at the endpoints, so two checks suffice.
  bool clipping_inactive(double horizon) const;
};

/// One control per player plus the horizon end they refer to.
struct ControlProfile {
  double end_time = 0.0;
  std::vector<AffineControl> controls;

  int player_count() const { return static_cast<int>(controls.size()); }
  double value(int player, double t) const;
};

/// Quadratic stock path x(t) = x0 + a1*(t - t0) + a2*(t^2 - t0^2).
struct Trajectory {
  double x0 = 0.0;
  double t0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;

  double value(double t) const { return x0 + a1 * (t - t0) + a2 * (t * t - t0 * t0); }
};

/// Open-loop Nash equilibrium: u_i(t) = b_i - d_i * (T - t). Each player's
/// best response ignores the others' controls, so the profile is the unique
/// equilibrium. Throws std::invalid_argument on invalid specs.
ControlProfile nash_equilibrium(const GameSpec& spec);

/// Joint-welfare optimum: u_i(t) = b_i - D * (T - t) with D the sum of all
/// cost rates. Throws std::invalid_argument on invalid specs.
ControlProfile cooperative_agreement(const GameSpec& spec);

/// Integrates the stock under an affine profile with inactive clipping.
/// Throws std::invalid_argument if any control clips on [t0, T] or the
/// profile length does not match the spec.
Trajectory state_trajectory(const GameSpec& spec, const ControlProfile& profile);

/// Exact payoff of one player under an affine profile with inactive
/// clipping: integral of b*u - u^2/2 - d*x over [t0, T].
double player_payoff(const GameSpec& spec, const ControlProfile& profile, int player);

/// Stock excess of the Nash path over the cooperative path at time t,
/// equal to (n - 1) * D * (t - t0) * (2T - t - t0) / 2 and nonnegative on
/// [t0, T]. Throws std::domain_error for t outside [t0, T].
double pollution_gap(const GameSpec& spec, double t);

}  // namespace polgame
