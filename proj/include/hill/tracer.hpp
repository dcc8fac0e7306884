#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hill/monodromy.hpp"

namespace hill {

enum class Orientation { DaDeps, DepsDa };
enum class Branch { Upper, Lower };

std::string to_string(Orientation o);
std::string to_string(Branch b);

struct BoundaryPoint {
  double epsilon = 0.0;
  double a = 0.0;
  double trace_value = 0.0;
  /// |trace| - target
  double residual = 0.0;
  Orientation orientation = Orientation::DaDeps;
  /// da/deps at the point; NaN at a degenerate tip.
  double slope = std::numeric_limits<double>::quiet_NaN();
  /// Transverse correction applied after prediction (0 for bootstrap/tip points).
  double correction = 0.0;
};

struct EvalCounts {
  std::int64_t traces = 0;
  std::int64_t bundles = 0;

  EvalCounts& operator+=(const EvalCounts& o) {
    traces += o.traces;
    bundles += o.bundles;
    return *this;
  }
};

struct BoundaryCurve {
  /// 0 is used for curves found by the a < 0 stabilization-window scan.
  int tongue_index = 0;
  Branch branch = Branch::Upper;
  double target = 2.0;
  int sign = 1;
  double kappa = 0.0;
  std::vector<BoundaryPoint> points;
  bool truncated = false;
  std::string truncation_reason;
  EvalCounts evaluations;
};

struct TraceConfig {
  double d_epsilon = 0.05;
  double epsilon_max = 2.0;
  double trace_tolerance = 1e-6;
  double slope_switch_threshold = 50.0;
  double bootstrap_offset = 1e-3;
  int max_points = 10000;
  // continuation integrator in epsilon (or a)
  double rk_atol = 1e-6;
  double rk_rtol = 1e-6;
  int max_step_multiple = 10;
  // stabilization-window scan column
  double kapitza_epsilon = 1.0;
  double kapitza_a_min = -1.0;
  int kapitza_samples = 400;
};

/// Throws InvalidArgument unless every field is positive and kapitza_a_min < 0.
void validate(const TraceConfig& cfg);

/// Partial derivatives of f(eps, a) = sign * tr Phi(a - kappa^2, eps) - target.
struct Partials {
  double f = 0.0;
  double trace = 0.0;
  double fa = 0.0;
  double fe = 0.0;
};

/// The contour sign * tr = target of the (possibly kappa-shifted) undamped
/// problem, with evaluation bookkeeping. One instance per sequential task.
class ContourProblem {
 public:
  ContourProblem(const HillPropagator& prop, double kappa, double target, int sign)
      : prop_(&prop), kappa_(kappa), target_(target), sign_(sign) {}

  double trace(double epsilon, double a);
  double f(double epsilon, double a) { return sign_ * trace(epsilon, a) - target_; }
  Partials partials(double epsilon, double a);

  /// Evaluates a fresh on-contour point record.
  BoundaryPoint make_point(double epsilon, double a, Orientation o);

  const HillPropagator& propagator() const { return *prop_; }
  double kappa() const { return kappa_; }
  double target() const { return target_; }
  int sign() const { return sign_; }
  const EvalCounts& counts() const { return counts_; }

 private:
  const HillPropagator* prop_;
  double kappa_;
  double target_;
  int sign_;
  EvalCounts counts_;
};

struct SlopeResult {
  /// da/deps for DaDeps, deps/da for DepsDa.
  double slope = 0.0;
  Orientation orientation = Orientation::DaDeps;
};

/// Boundary slope from the variational traces. DaDeps is chosen while
/// |da/deps| <= switch_threshold. Throws BothDerivativesVanish when both traces are < 1e-12.
SlopeResult boundary_slope(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg,
                           double switch_threshold = 50.0);
SlopeResult slope_from_partials(double fa, double fe, double switch_threshold);

/// Maximizer of sign * tr over a near `a_guess` at fixed epsilon, located as
/// the sign change of the variational derivative. Throws BracketNotFound.
double locate_extremum(ContourProblem& problem, double epsilon, double a_guess, double radius,
                       double a_tolerance = 1e-10);

/// Steps from a degenerate point (eps0, a0) to eps0 + delta and root-finds the
/// requested branch. delta starts at cfg.bootstrap_offset and is doubled (up to
/// d_epsilon) while the tongue is too thin to resolve.
BoundaryPoint bootstrap_branch(ContourProblem& problem, double epsilon0, double a0, Branch branch,
                               const TraceConfig& cfg);
/// Undamped form starting from (0, n^2/4).
BoundaryPoint bootstrap_branch(int n, Branch branch, double target, int sign, const Forcing& forcing,
                               const TraceConfig& tcfg, const IntegratorConfig& icfg);

/// Continuation from an on-contour start point in direction +1/-1 of epsilon.
/// Backward continuation stops at epsilon = bootstrap_offset.
BoundaryCurve trace_from(ContourProblem& problem, const BoundaryPoint& start, int direction,
                         const TraceConfig& cfg);
BoundaryCurve trace_from(const BoundaryPoint& start, int direction, double target, int sign,
                         const Forcing& forcing, const TraceConfig& tcfg,
                         const IntegratorConfig& icfg);

/// Upper and lower boundary of tongue n of the undamped equation.
std::pair<BoundaryCurve, BoundaryCurve> trace_tongue(int n, const HillPropagator& prop,
                                                     const TraceConfig& cfg);
std::pair<BoundaryCurve, BoundaryCurve> trace_tongue(int n, const Forcing& forcing,
                                                     const TraceConfig& tcfg,
                                                     const IntegratorConfig& icfg);

/// Boundaries of the a < 0 stabilization window found on the scan column
/// eps = cfg.kapitza_epsilon. Throws NoWindowFound.
std::vector<BoundaryCurve> trace_kapitza_boundary(const HillPropagator& prop, const TraceConfig& cfg);
std::vector<BoundaryCurve> trace_kapitza_boundary(const Forcing& forcing, const TraceConfig& tcfg,
                                                  const IntegratorConfig& icfg);

/// Value of a(0) from the cubic through the first four points with eps > 0.
double extrapolate_to_axis(const BoundaryCurve& curve);

}  // namespace hill
