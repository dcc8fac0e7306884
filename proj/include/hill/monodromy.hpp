#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hill/forcing.hpp"
#include "hill/mat2.hpp"

namespace hill {

/// A point (a, epsilon, kappa) in parameter space.
struct Params {
  double a = 0.0;
  double epsilon = 0.0;
  double kappa = 0.0;
};

enum class Scheme { SymplecticEuler, ImplicitTrapezoid };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

struct IntegratorConfig {
  Scheme scheme = Scheme::SymplecticEuler;
  int steps_per_period = 4096;
  /// Fine steps per Dormand-Prince step of the sensitivity integration.
  int sensitivity_stride = 64;
};

/// Throws InvalidArgument unless steps_per_period >= 16 and stride >= 1.
void validate(const IntegratorConfig& cfg);

struct SensitivityBundle {
  Mat2 theta;
  Mat2 d_theta_da;
  Mat2 d_theta_deps;
};

/// Outcome of a non-throwing trace evaluation. On overflow `value` is a signed infinity.
struct TraceSample {
  double value = 0.0;
  bool overflow = false;
  double t_overflow = 0.0;
};

/// Generator A(t) = [[0, 1], [-a - eps p(t), 0]] of the undamped first-order system.
Mat2 generator(const Params& params, const Forcing& forcing, double t);

/// One-period propagator of Hill's equation for a fixed forcing and integrator.
///
/// The period is split at the forcing's discontinuities and each piece is
/// subdivided uniformly, so steps never straddle a jump. Forcing samples on
/// this grid are computed once at construction and shared by every call;
/// all evaluation methods are const and safe to call concurrently.
///
/// The state-transition matrix is advanced with the configured symplectic
/// scheme. Parameter sensitivities are obtained from the variational
/// equations written in variation-of-constants form,
///   dTheta/dp (2pi) = Theta(2pi) W_p,  W_p' = Theta^-1 (dA/dp) Theta,  W_p(0) = 0,
/// integrated with Dormand-Prince 5(4) steps of `sensitivity_stride` fine
/// steps; Theta at the stage times comes from cubic Hermite interpolation of
/// the symplectic trajectory using Theta' = A Theta.
class HillPropagator {
 public:
  HillPropagator(Forcing forcing, IntegratorConfig cfg);

  /// Theta(2pi, 0; a, eps). Throws NonFiniteState on overflow.
  Mat2 monodromy(double a, double epsilon) const;
  double trace(double a, double epsilon) const { return monodromy(a, epsilon).trace(); }
  /// Like trace() but reports overflow instead of throwing.
  TraceSample try_trace(double a, double epsilon) const;

  SensitivityBundle with_sensitivities(double a, double epsilon) const;

  const Forcing& forcing() const { return forcing_; }
  const IntegratorConfig& config() const { return cfg_; }
  std::size_t step_count() const { return steps_.size(); }

  static constexpr double kOverflowThreshold = 1e150;
  static constexpr int kOverflowCheckInterval = 64;

 private:
  struct StepData {
    double t0;
    double h;
    double p_mid;
    double p_start;  // right limit at t0
    double p_end;    // left limit at t0 + h
  };
  struct Node {
    std::size_t step;
    double s;          // position inside the fine step, [0, 1]
    double h00, h10, h01, h11;  // Hermite weights, derivative terms pre-scaled by h
    double weight;     // quadrature weight b_i * H
    double p;
  };

  // Steps [j0, j1) applied to theta. Returns false on overflow; `t_fail` receives the time.
  bool advance(double a, double epsilon, Mat2& theta, std::size_t j0, std::size_t j1,
               double& t_fail) const;
  // Full period from the identity, calling on_step(j, before, after) at the marked steps.
  template <class OnStep>
  bool propagate(double a, double epsilon, Mat2& theta, double& t_fail,
                 const std::vector<std::size_t>& marks, OnStep&& on_step) const;

  Forcing forcing_;
  IntegratorConfig cfg_;
  std::vector<StepData> steps_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> marks_;  // distinct steps holding nodes
};

/// Free-function forms. These build a propagator per call; hot loops should
/// keep a HillPropagator instead. params.kappa must be 0.
Mat2 monodromy(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg);
SensitivityBundle monodromy_with_sensitivities(const Params& params, const Forcing& forcing,
                                               const IntegratorConfig& cfg);
double trace_objective(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg);

/// Closed-form trace at eps = 0: 2cos(2pi sqrt a), 2, or 2cosh(2pi sqrt(-a)).
double unforced_trace(double a);

}  // namespace hill
