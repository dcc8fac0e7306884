#pragma once

#include <utility>

#include "hill/monodromy.hpp"
#include "hill/tracer.hpp"

namespace hill {

/// 2 cosh(2 pi kappa): the trace bound of the shifted undamped problem.
double damped_threshold(double kappa);

/// Stability test for theta'' + 2 kappa theta' + (a + eps p) theta = 0 through
/// the undamped system with spring constant a - kappa^2.
struct DampedCriterion {
  double kappa = 0.0;

  double threshold() const { return damped_threshold(kappa); }
  double shifted_a(double a) const { return a - kappa * kappa; }
};

struct TongueTip {
  double epsilon0 = 0.0;
  double a0 = 0.0;
  int tongue_index = 0;
  double kappa = 0.0;
  double trace_at_tip = 0.0;
  double d_trace_da_at_tip = 0.0;
};

/// Phi(2pi, 0; a, eps): undamped monodromy at a - kappa^2.
Mat2 transformed_monodromy(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg);

/// Theta(2pi, 0) of the damped first-order system [[0, 1], [-a - eps p, -2 kappa]],
/// integrated directly with fixed Dormand-Prince steps on the forcing-aligned grid
/// of cfg.steps_per_period. Intended as a cross-check; the fast path is transformed_monodromy.
Mat2 damped_monodromy_direct(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg);

/// K = [[1, 0], [kappa, 1]], relating e^{2 pi kappa} Theta = K^-1 Phi K.
Mat2 similarity_k(double kappa);

/// |tr Phi| <= 2cosh(2 pi kappa).
bool is_stable_damped(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg);
bool is_stable_damped(const Params& params, const HillPropagator& prop);

struct TipSearchConfig {
  double epsilon_hi = 0.1;      // first upper bracket, doubled while needed
  double epsilon_limit = 4.0;
  double a_tolerance = 1e-10;
  double epsilon_tolerance = 1e-8;
};

/// Left-most point (eps0, a0) of damped tongue n: sign tr Phi reaches the
/// threshold at an extremum in a. Throws TipNotFound when no tip exists for eps <= 4.
TongueTip find_tongue_tip(int n, double kappa, const HillPropagator& prop,
                          const TipSearchConfig& cfg = {});
TongueTip find_tongue_tip(int n, double kappa, const Forcing& forcing, const IntegratorConfig& cfg);

struct DampedTongue {
  TongueTip tip;
  BoundaryCurve upper;
  BoundaryCurve lower;
};

/// Both branches of damped tongue n, starting at the computed tip.
DampedTongue trace_damped_tongue(int n, double kappa, const HillPropagator& prop,
                                 const TraceConfig& tcfg, const TipSearchConfig& scfg = {});
DampedTongue trace_damped_tongue(int n, double kappa, const Forcing& forcing,
                                 const TraceConfig& tcfg, const IntegratorConfig& icfg);

}  // namespace hill
