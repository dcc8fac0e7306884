#include "hill/damped.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "hill/rk.hpp"

namespace hill {

double damped_threshold(double kappa) { return 2.0 * std::cosh(kTwoPi * kappa); }

Mat2 similarity_k(double kappa) { return {1.0, 0.0, kappa, 1.0}; }

Mat2 transformed_monodromy(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg) {
  return HillPropagator(forcing, cfg).monodromy(params.a - params.kappa * params.kappa, params.epsilon);
}

Mat2 damped_monodromy_direct(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg) {
  validate(cfg);
  using V = rk::Vec<4>;
  const std::vector<double> starts = forcing.segment_starts();
  const double two_kappa = 2.0 * params.kappa;
  V y{1.0, 0.0, 0.0, 1.0};  // Theta row-major

  for (std::size_t seg = 0; seg < starts.size(); ++seg) {
    const double t_begin = starts[seg];
    const double t_end = seg + 1 < starts.size() ? starts[seg + 1] : kTwoPi;
    const double len = t_end - t_begin;
    const int n = std::max(1, static_cast<int>(std::lround(cfg.steps_per_period * len / kTwoPi)));
    const double h = len / n;
    for (int j = 0; j < n; ++j) {
      const double t0 = t_begin + j * h;
      const double t1 = (j + 1 == n) ? t_end : t0 + h;
      // stages at the step end see the left limit of the forcing
      auto f = [&](double t, const V& s) {
        const double p = (t1 - t) <= 1e-9 * h ? forcing.eval_left(t1) : forcing.eval(t);
        const double q = params.a + params.epsilon * p;
        return V{s[2], s[3], -q * s[0] - two_kappa * s[2], -q * s[1] - two_kappa * s[3]};
      };
      y = rk::step<4>(f, t0, y, t1 - t0, f(t0, y)).y1;
    }
    if (!std::isfinite(y[0] + y[1] + y[2] + y[3])) {
      throw Error(ErrorCode::NonFiniteState, "damped state transition matrix is not finite");
    }
  }
  return {y[0], y[1], y[2], y[3]};
}

bool is_stable_damped(const Params& params, const HillPropagator& prop) {
  const double tr = prop.trace(params.a - params.kappa * params.kappa, params.epsilon);
  return std::abs(tr) <= damped_threshold(params.kappa);
}

bool is_stable_damped(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg) {
  return is_stable_damped(params, HillPropagator(forcing, cfg));
}

namespace {

[[noreturn]] void tip_not_found(int n, double kappa, const std::string& why) {
  std::ostringstream os;
  os << "tongue " << n << " at kappa=" << kappa << ": " << why;
  throw Error(ErrorCode::TipNotFound, os.str());
}

void require_damped(int n, double kappa) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "tongue index must be >= 1");
  if (!(kappa > 0.0)) {
    throw Error(ErrorCode::PreconditionViolated, "damped analysis requires kappa > 0");
  }
}

}  // namespace

TongueTip find_tongue_tip(int n, double kappa, const HillPropagator& prop, const TipSearchConfig& cfg) {
  require_damped(n, kappa);
  const double threshold = damped_threshold(kappa);
  const int sign = n % 2 == 0 ? 1 : -1;
  ContourProblem pr(prop, kappa, threshold, sign);

  double guess = 0.25 * n * n + kappa * kappa;
  auto extremizer = [&](double eps) {
    for (double radius = 0.05; radius <= 0.4; radius *= 2.0) {
      try {
        guess = locate_extremum(pr, eps, guess, radius, cfg.a_tolerance);
        return guess;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BracketNotFound) throw;
      }
    }
    std::ostringstream os;
    os << "no extremum of the trace near a=" << guess << " at eps=" << eps;
    tip_not_found(n, kappa, os.str());
  };
  auto g = [&](double eps) { return pr.f(eps, extremizer(eps)); };

  // at eps = 0 the extremal value of sign*tr is exactly 2
  double lo = 0.0, g_lo = 2.0 - threshold;
  double hi = std::min(cfg.epsilon_hi, cfg.epsilon_limit);
  double g_hi = g(hi);
  while (!(g_hi > 0.0)) {
    if (hi >= cfg.epsilon_limit) tip_not_found(n, kappa, "threshold not reached for eps <= limit");
    lo = hi;
    g_lo = g_hi;
    hi = std::min(2.0 * hi, cfg.epsilon_limit);
    g_hi = g(hi);
  }

  std::uintmax_t iters = 200;
  const double tol = cfg.epsilon_tolerance;
  const auto r = boost::math::tools::toms748_solve(
      g, lo, hi, g_lo, g_hi, [tol](double x, double y) { return std::abs(x - y) <= tol; }, iters);

  TongueTip tip;
  tip.tongue_index = n;
  tip.kappa = kappa;
  tip.epsilon0 = 0.5 * (r.first + r.second);
  tip.a0 = extremizer(tip.epsilon0);
  const Partials p = pr.partials(tip.epsilon0, tip.a0);
  tip.trace_at_tip = p.trace;
  tip.d_trace_da_at_tip = sign * p.fa;
  if (sign * tip.trace_at_tip <= 0.0) tip_not_found(n, kappa, "trace sign at the tip differs from (-1)^n");
  return tip;
}

TongueTip find_tongue_tip(int n, double kappa, const Forcing& forcing, const IntegratorConfig& cfg) {
  return find_tongue_tip(n, kappa, HillPropagator(forcing, cfg));
}

DampedTongue trace_damped_tongue(int n, double kappa, const HillPropagator& prop,
                                 const TraceConfig& tcfg, const TipSearchConfig& scfg) {
  validate(tcfg);
  DampedTongue out;
  out.tip = find_tongue_tip(n, kappa, prop, scfg);
  const double threshold = damped_threshold(kappa);
  const int sign = n % 2 == 0 ? 1 : -1;
  ContourProblem pr(prop, kappa, threshold, sign);
  const BoundaryPoint tip = pr.make_point(out.tip.epsilon0, out.tip.a0, Orientation::DaDeps);

  for (Branch br : {Branch::Upper, Branch::Lower}) {
    const EvalCounts before = pr.counts();
    BoundaryCurve c;
    try {
      const BoundaryPoint boot = bootstrap_branch(pr, out.tip.epsilon0, out.tip.a0, br, tcfg);
      c = trace_from(pr, boot, +1, tcfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BothDerivativesVanish) throw;
      c.truncated = true;
      c.truncation_reason = e.what();
    }
    c.tongue_index = n;
    c.branch = br;
    c.target = threshold;
    c.sign = sign;
    c.kappa = kappa;
    c.points.insert(c.points.begin(), tip);
    c.evaluations = pr.counts();
    c.evaluations.traces -= before.traces;
    c.evaluations.bundles -= before.bundles;
    (br == Branch::Upper ? out.upper : out.lower) = std::move(c);
  }
  return out;
}

DampedTongue trace_damped_tongue(int n, double kappa, const Forcing& forcing,
                                 const TraceConfig& tcfg, const IntegratorConfig& icfg) {
  return trace_damped_tongue(n, kappa, HillPropagator(forcing, icfg), tcfg);
}

}  // namespace hill
