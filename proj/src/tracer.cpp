#include "hill/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "hill/rk.hpp"

namespace hill {

std::string to_string(Orientation o) { return o == Orientation::DaDeps ? "da/deps" : "deps/da"; }
std::string to_string(Branch b) { return b == Branch::Upper ? "upper" : "lower"; }

void validate(const TraceConfig& c) {
  const bool ok = c.d_epsilon > 0 && c.epsilon_max > 0 && c.trace_tolerance > 0 &&
                  c.slope_switch_threshold > 0 && c.bootstrap_offset > 0 && c.max_points > 0 &&
                  c.rk_atol > 0 && c.rk_rtol > 0 && c.max_step_multiple > 0 &&
                  c.kapitza_epsilon > 0 && c.kapitza_a_min < 0 && c.kapitza_samples > 1;
  if (!ok) throw Error(ErrorCode::InvalidArgument, "trace configuration values must be positive");
}

double ContourProblem::trace(double epsilon, double a) {
  ++counts_.traces;
  return prop_->trace(a - kappa_ * kappa_, epsilon);
}

Partials ContourProblem::partials(double epsilon, double a) {
  ++counts_.bundles;
  const SensitivityBundle b = prop_->with_sensitivities(a - kappa_ * kappa_, epsilon);
  Partials p;
  p.trace = b.theta.trace();
  p.f = sign_ * p.trace - target_;
  p.fa = sign_ * b.d_theta_da.trace();
  p.fe = sign_ * b.d_theta_deps.trace();
  return p;
}

BoundaryPoint ContourProblem::make_point(double epsilon, double a, Orientation o) {
  BoundaryPoint pt;
  pt.epsilon = epsilon;
  pt.a = a;
  pt.trace_value = trace(epsilon, a);
  pt.residual = std::abs(pt.trace_value) - target_;
  pt.orientation = o;
  return pt;
}

namespace {

constexpr double kDegenerate = 1e-12;
// Minimum excess of sign*tr over the target at the bootstrap pivot; below it
// the two branches are not separable in floating point.
constexpr double kExcessFloor = 1e-12;

// Transverse convergence of the corrector; thin tongues need it beyond the residual bound.
constexpr double kYTolerance = 1e-8;

struct SwitchNeeded {};

template <class F>
double bracketed_root(F&& f, double lo, double hi, double flo, double fhi, double tol) {
  if (lo > hi) {
    std::swap(lo, hi);
    std::swap(flo, fhi);
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iters = 200;
  auto stop = [tol](double x, double y) { return std::abs(x - y) <= tol; };
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, iters);
  return 0.5 * (r.first + r.second);
}

double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }

[[noreturn]] void throw_bracket(const std::string& what, double eps, double a) {
  std::ostringstream os;
  os << what << " (eps=" << eps << ", a=" << a << ")";
  throw Error(ErrorCode::BracketNotFound, os.str());
}

struct Pivot {
  double epsilon;
  double a;
  double f;
  double delta;
};

Pivot find_pivot(ContourProblem& pr, double epsilon0, double a0, const TraceConfig& cfg) {
  double delta = cfg.bootstrap_offset;
  for (;;) {
    const double e1 = epsilon0 + delta;
    Pivot p{e1, a0, pr.f(e1, a0), delta};
    if (!(p.f > kExcessFloor)) {
      try {
        p.a = locate_extremum(pr, e1, a0, 0.05);
        p.f = pr.f(e1, p.a);
      } catch (const Error&) {
        // fall through to a larger offset
      }
    }
    if (p.f > kExcessFloor) return p;
    if (delta >= cfg.d_epsilon) {
      throw_bracket("no resolvable tongue interior above the degenerate point", e1, a0);
    }
    delta = std::min(2.0 * delta, cfg.d_epsilon);
  }
}

BoundaryPoint bootstrap_from_pivot(ContourProblem& pr, const Pivot& pivot, Branch branch) {
  const double dir = branch == Branch::Upper ? 1.0 : -1.0;
  double inner = pivot.a, f_inner = pivot.f;
  // the first tongue opens linearly in eps, higher tongues far slower, so a
  // trial offset of delta usually brackets at once
  for (double w = pivot.delta; w <= 0.5 * 4.0; w *= 4.0) {
    const double outer = pivot.a + dir * std::min(w, 0.5);
    const double f_outer = pr.f(pivot.epsilon, outer);
    if (f_outer < 0.0) {
      auto f = [&](double a) { return pr.f(pivot.epsilon, a); };
      const double tol = 1e-14 * std::max(1.0, std::abs(pivot.a));
      const double root = bracketed_root(f, inner, outer, f_inner, f_outer, tol);
      return pr.make_point(pivot.epsilon, root, Orientation::DaDeps);
    }
    inner = outer;
    f_inner = f_outer;
    if (w >= 0.5) break;
  }
  throw_bracket("no sign change within |a - a0| <= 0.5", pivot.epsilon, pivot.a);
}

/// Predictor-corrector continuation of one contour branch.
class Continuation {
 public:
  Continuation(ContourProblem& pr, const TraceConfig& cfg) : pr_(pr), cfg_(cfg) {}

  BoundaryCurve run(const BoundaryPoint& start, int direction);

 private:
  struct Mode {
    Orientation o;
    int dir;  // direction of travel in the independent variable
  };

  static double eps_of(Orientation o, double x, double y) { return o == Orientation::DaDeps ? x : y; }
  static double a_of(Orientation o, double x, double y) { return o == Orientation::DaDeps ? y : x; }
  static double fy_of(Orientation o, const Partials& p) { return o == Orientation::DaDeps ? p.fa : p.fe; }
  static double fx_of(Orientation o, const Partials& p) { return o == Orientation::DaDeps ? p.fe : p.fa; }

  double rhs(Orientation o, double x, double y) {
    last_ = pr_.partials(eps_of(o, x, y), a_of(o, x, y));
    const double fy = fy_of(o, last_), fx = fx_of(o, last_);
    if (std::abs(last_.fa) < kDegenerate && std::abs(last_.fe) < kDegenerate) {
      std::ostringstream os;
      os << "both variational traces vanish at eps=" << eps_of(o, x, y) << ", a=" << a_of(o, x, y);
      throw Error(ErrorCode::BothDerivativesVanish, os.str());
    }
    if (!(std::abs(fx) < 10.0 * cfg_.slope_switch_threshold * std::abs(fy))) throw SwitchNeeded{};
    return -fx / fy;
  }

  // Transverse correction of the dependent variable back onto the contour.
  // A known trace value at y0 (from the predictor's last stage) saves one evaluation.
  bool correct(Orientation o, double x, double y0, double fy_hint, BoundaryPoint& out,
               const double* tr0 = nullptr);

  ContourProblem& pr_;
  const TraceConfig& cfg_;
  Partials last_;
};

bool Continuation::correct(Orientation o, double x, double y0, double fy_hint, BoundaryPoint& out,
                           const double* tr0) {
  const double goal = 0.1 * cfg_.trace_tolerance;
  auto finish = [&](double y, double tr) {
    out = BoundaryPoint{};
    out.epsilon = eps_of(o, x, y);
    out.a = a_of(o, x, y);
    out.trace_value = tr;
    out.residual = std::abs(tr) - pr_.target();
    out.orientation = o;
    out.correction = y - y0;
    return true;
  };
  auto f_at = [&](double y, double& tr) {
    tr = pr_.trace(eps_of(o, x, y), a_of(o, x, y));
    return pr_.sign() * tr - pr_.target();
  };

  double tr = 0.0;
  double f0;
  if (tr0 != nullptr) {
    tr = *tr0;
    f0 = pr_.sign() * tr - pr_.target();
  } else {
    f0 = f_at(y0, tr);
  }
  if (!std::isfinite(f0)) return false;
  if (std::abs(f0) <= goal &&
      (fy_hint == 0.0 || std::abs(f0 / fy_hint) <= kYTolerance * std::max(1.0, std::abs(y0)))) {
    return finish(y0, tr);
  }

  // secant iterations seeded with the predictor's derivative; converged once the
  // residual is below target and the next update is negligible in y
  if (fy_hint != 0.0 && std::isfinite(fy_hint)) {
    double y = y0, f = f0, slope = fy_hint;
    for (int it = 0; it < 8; ++it) {
      const double dy = -f / slope;
      const double yn = y + dy;
      double trn = 0.0;
      const double fn = f_at(yn, trn);
      if (!std::isfinite(fn)) break;
      if (std::abs(fn) <= goal &&
          std::abs(fn / slope) <= kYTolerance * std::max(1.0, std::abs(yn))) {
        return finish(yn, trn);
      }
      if (std::abs(fn) > 0.5 * std::abs(f) && std::abs(fn) > goal) break;
      if (fn != f) slope = (fn - f) / (yn - y);
      y = yn;
      f = fn;
      tr = trn;
    }
  }

  // bracketed fallback around the prediction
  for (double w = 1e-9; w <= 1e-2; w *= 10.0) {
    for (double side : {1.0, -1.0}) {
      const double y1 = y0 + side * w;
      double tr1 = 0.0;
      const double f1 = f_at(y1, tr1);
      if (std::isfinite(f1) && f1 * f0 <= 0.0) {
        auto f = [&](double y) {
          double t = 0.0;
          return f_at(y, t);
        };
        const double tol = 1e-14 * std::max(1.0, std::abs(y0));
        const double root = bracketed_root(f, y0, y1, f0, f1, tol);
        const double fr = f_at(root, tr);
        if (std::abs(std::abs(tr) - pr_.target()) <= cfg_.trace_tolerance && std::abs(fr) < 1.0) {
          return finish(root, tr);
        }
        return false;
      }
    }
  }
  return false;
}

BoundaryCurve Continuation::run(const BoundaryPoint& start, int direction) {
  BoundaryCurve curve;
  curve.target = pr_.target();
  curve.sign = pr_.sign();
  curve.kappa = pr_.kappa();
  const EvalCounts before = pr_.counts();

  Partials p_start = pr_.partials(start.epsilon, start.a);
  if (!(std::abs(std::abs(p_start.trace) - pr_.target()) <= cfg_.trace_tolerance)) {
    std::ostringstream os;
    os << "start point is off the contour: residual " << std::abs(p_start.trace) - pr_.target();
    throw Error(ErrorCode::PreconditionViolated, os.str());
  }
  if (std::abs(p_start.fa) < kDegenerate && std::abs(p_start.fe) < kDegenerate) {
    throw Error(ErrorCode::BothDerivativesVanish, "start point is degenerate");
  }

  const double eps_lo = cfg_.bootstrap_offset;
  const double eps_hi = cfg_.epsilon_max;
  const double de = cfg_.d_epsilon;
  const double tiny = 1e-12;

  const SlopeResult s0 = slope_from_partials(p_start.fa, p_start.fe, cfg_.slope_switch_threshold);
  Mode mode{s0.orientation, direction};
  if (mode.o == Orientation::DepsDa) mode.dir = direction * static_cast<int>(sgn(s0.slope));

  BoundaryPoint first = start;
  first.orientation = mode.o;
  first.slope = p_start.fa != 0.0 ? -p_start.fe / p_start.fa : std::numeric_limits<double>::infinity();
  curve.points.push_back(first);

  double x = mode.o == Orientation::DaDeps ? start.epsilon : start.a;
  double y = mode.o == Orientation::DaDeps ? start.a : start.epsilon;
  double side = sgn(fy_of(mode.o, p_start));
  double k1 = -fx_of(mode.o, p_start) / fy_of(mode.o, p_start);
  // near a tip the boundary varies on the scale of eps itself
  double h = std::clamp(start.epsilon, 1e-4 * de, de);
  const double h_min = 1e-4 * de;
  int switches = 0;
  bool switched_here = false;

  auto truncate = [&](const std::string& why) {
    curve.truncated = true;
    curve.truncation_reason = why;
  };

  // Swap the roles of eps and a at the current point.
  auto switch_mode = [&]() -> bool {
    if (switched_here || switches > 100) return false;
    const Orientation no = mode.o == Orientation::DaDeps ? Orientation::DepsDa : Orientation::DaDeps;
    const double fy = fy_of(no, p_start);
    if (fy == 0.0) return false;
    const double k1n = -fx_of(no, p_start) / fy;
    mode = Mode{no, mode.dir * static_cast<int>(sgn(k1n))};
    std::swap(x, y);
    k1 = k1n;
    side = sgn(fy);
    h = de;
    ++switches;
    switched_here = true;
    return true;
  };

  std::vector<BoundaryPoint> pending;
  while (static_cast<int>(curve.points.size()) < cfg_.max_points) {
    const double eps_now = eps_of(mode.o, x, y);
    if (mode.o == Orientation::DaDeps) {
      if (mode.dir > 0 && eps_now >= eps_hi - tiny) break;
      if (mode.dir < 0 && eps_now <= eps_lo + tiny) break;
    }

    // choose the step end; in da/deps mode steps end on the output grid when possible
    double x_end;
    if (mode.o == Orientation::DaDeps) {
      const double hx = std::min(h, cfg_.max_step_multiple * de);
      if (mode.dir > 0) {
        x_end = std::min(x + hx, eps_hi);
        if (x_end < eps_hi) {
          const double g = std::floor((x_end + tiny) / de) * de;
          if (g > x + tiny) x_end = g;
        }
      } else {
        x_end = std::max(x - hx, eps_lo);
        if (x_end > eps_lo) {
          const double g = std::ceil((x_end - tiny) / de) * de;
          if (g < x - tiny) x_end = g;
        }
      }
    } else {
      x_end = x + mode.dir * std::min(h, de);
    }
    const double step_h = x_end - x;

    rk::Step<1> st;
    try {
      auto f = [&](double t, const rk::Vec<1>& yy) { return rk::Vec<1>{rhs(mode.o, t, yy[0])}; };
      st = rk::step<1>(f, x, rk::Vec<1>{y}, step_h, rk::Vec<1>{k1});
    } catch (const SwitchNeeded&) {
      if (std::abs(step_h) > 2.0 * h_min) {
        h = 0.25 * std::abs(step_h);
        continue;
      }
      if (!switch_mode()) {
        truncate("slope singular in both orientations");
        break;
      }
      continue;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BothDerivativesVanish) throw;
      truncate(e.what());
      break;
    }
    const Partials p_end = last_;
    const double err = rk::error_norm(st, cfg_.rk_atol, cfg_.rk_rtol);

    auto reject = [&](double factor) -> bool {
      h = std::abs(step_h) * factor;
      if (h < h_min) {
        if (!switch_mode()) {
          truncate("step size underflow during continuation");
          return false;
        }
      }
      return true;
    };

    if (!(err <= 1.0) || !std::isfinite(st.y1[0])) {
      if (!reject(std::isfinite(err) ? rk::step_factor(err) : 0.25)) break;
      continue;
    }
    if (sgn(fy_of(mode.o, p_end)) != side) {
      // predictor crossed onto a different branch of the contour
      if (!reject(0.25)) break;
      continue;
    }

    // dense output onto intermediate grid points
    pending.clear();
    bool ok = true;
    if (mode.o == Orientation::DaDeps) {
      const double lo = std::min(x, x_end), hi = std::max(x, x_end);
      const long k_lo = static_cast<long>(std::floor((lo + tiny) / de)) + 1;
      const long k_hi = static_cast<long>(std::ceil((hi - tiny) / de)) - 1;
      std::vector<double> grid;
      for (long k = k_lo; k <= k_hi; ++k) grid.push_back(k * de);
      if (mode.dir < 0) std::reverse(grid.begin(), grid.end());
      for (double g : grid) {
        const double theta = (g - x) / step_h;
        const double yd = st.dense(theta)[0];
        const double fy = (1.0 - theta) * fy_of(mode.o, p_start) + theta * fy_of(mode.o, p_end);
        BoundaryPoint pt;
        if (!correct(mode.o, g, yd, fy, pt)) {
          ok = false;
          break;
        }
        const double ex = (1.0 - theta) * k1 + theta * st.k[6][0];  // dy/dx estimate
        pt.slope = ex;
        pending.push_back(pt);
      }
    }
    BoundaryPoint end_pt;
    if (ok) ok = correct(mode.o, x_end, st.y1[0], fy_of(mode.o, p_end), end_pt, &p_end.trace);
    if (!ok) {
      // The correction failed: try a shorter step, then the reciprocal problem.
      if (std::abs(step_h) > 4.0 * h_min) {
        h = 0.25 * std::abs(step_h);
        continue;
      }
      if (!switch_mode()) {
        truncate("transverse correction failed in both orientations");
        break;
      }
      continue;
    }

    // da/deps mode can leave the window only by clamping; deps/da mode can overshoot
    if (mode.o == Orientation::DepsDa &&
        (end_pt.epsilon > eps_hi + tiny || end_pt.epsilon < eps_lo - tiny)) {
      break;
    }

    const double k_end = st.k[6][0];
    end_pt.slope = k_end;
    for (auto& pt : pending) {
      if (mode.o == Orientation::DepsDa) pt.slope = 1.0 / pt.slope;
      curve.points.push_back(pt);
    }
    if (mode.o == Orientation::DepsDa) end_pt.slope = 1.0 / end_pt.slope;
    // da/deps mode reports only grid points and the window ends; other step ends stay internal
    const bool on_grid = std::abs(x_end / de - std::round(x_end / de)) < 1e-9 ||
                         x_end >= eps_hi - tiny || x_end <= eps_lo + tiny;
    if (mode.o == Orientation::DepsDa || on_grid) curve.points.push_back(end_pt);

    x = x_end;
    y = mode.o == Orientation::DaDeps ? end_pt.a : end_pt.epsilon;
    p_start = p_end;
    k1 = k_end;
    switched_here = false;
    h = std::min(std::abs(step_h) * rk::step_factor(err), cfg_.max_step_multiple * de);

    if (std::abs(k1) > cfg_.slope_switch_threshold) switch_mode();
  }

  curve.evaluations = pr_.counts();
  curve.evaluations.traces -= before.traces;
  curve.evaluations.bundles -= before.bundles;
  return curve;
}

}  // namespace

SlopeResult slope_from_partials(double fa, double fe, double switch_threshold) {
  if (std::abs(fa) < kDegenerate && std::abs(fe) < kDegenerate) {
    throw Error(ErrorCode::BothDerivativesVanish, "both variational traces are below 1e-12");
  }
  if (std::abs(fe) <= switch_threshold * std::abs(fa)) return {-fe / fa, Orientation::DaDeps};
  return {-fa / fe, Orientation::DepsDa};
}

SlopeResult boundary_slope(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg,
                           double switch_threshold) {
  const SensitivityBundle b = HillPropagator(forcing, cfg).with_sensitivities(params.a, params.epsilon);
  return slope_from_partials(b.d_theta_da.trace(), b.d_theta_deps.trace(), switch_threshold);
}

double locate_extremum(ContourProblem& problem, double epsilon, double a_guess, double radius,
                       double a_tolerance) {
  auto g = [&](double a) { return problem.partials(epsilon, a).fa; };
  const double lo = a_guess - radius, hi = a_guess + radius;
  const double glo = g(lo), ghi = g(hi);
  if (!(glo > 0.0 && ghi < 0.0)) throw_bracket("no interior maximum of sign*tr", epsilon, a_guess);
  return bracketed_root(g, lo, hi, glo, ghi, a_tolerance);
}

BoundaryPoint bootstrap_branch(ContourProblem& problem, double epsilon0, double a0, Branch branch,
                               const TraceConfig& cfg) {
  return bootstrap_from_pivot(problem, find_pivot(problem, epsilon0, a0, cfg), branch);
}

BoundaryPoint bootstrap_branch(int n, Branch branch, double target, int sign, const Forcing& forcing,
                               const TraceConfig& tcfg, const IntegratorConfig& icfg) {
  validate(tcfg);
  HillPropagator prop(forcing, icfg);
  ContourProblem pr(prop, 0.0, target, sign);
  return bootstrap_branch(pr, 0.0, 0.25 * n * n, branch, tcfg);
}

BoundaryCurve trace_from(ContourProblem& problem, const BoundaryPoint& start, int direction,
                         const TraceConfig& cfg) {
  if (direction != 1 && direction != -1) {
    throw Error(ErrorCode::InvalidArgument, "direction must be +1 or -1");
  }
  return Continuation(problem, cfg).run(start, direction);
}

BoundaryCurve trace_from(const BoundaryPoint& start, int direction, double target, int sign,
                         const Forcing& forcing, const TraceConfig& tcfg,
                         const IntegratorConfig& icfg) {
  validate(tcfg);
  HillPropagator prop(forcing, icfg);
  ContourProblem pr(prop, 0.0, target, sign);
  return trace_from(pr, start, direction, tcfg);
}

std::pair<BoundaryCurve, BoundaryCurve> trace_tongue(int n, const HillPropagator& prop,
                                                     const TraceConfig& cfg) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "tongue index must be >= 1");
  validate(cfg);
  const double a0 = 0.25 * n * n;
  // the boundary sign is measured, (-1)^n is only the expectation
  const double probe = prop.trace(a0, cfg.bootstrap_offset);
  const int sign = probe >= 0.0 ? 1 : -1;
  ContourProblem pr(prop, 0.0, 2.0, sign);
  const BoundaryPoint tip = pr.make_point(0.0, a0, Orientation::DaDeps);
  const Pivot pivot = find_pivot(pr, 0.0, a0, cfg);

  auto one = [&](Branch br) {
    const EvalCounts before = pr.counts();
    BoundaryCurve c;
    try {
      const BoundaryPoint boot = bootstrap_from_pivot(pr, pivot, br);
      c = trace_from(pr, boot, +1, cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BothDerivativesVanish) throw;
      c.truncated = true;
      c.truncation_reason = e.what();
    }
    c.tongue_index = n;
    c.branch = br;
    c.target = 2.0;
    c.sign = sign;
    c.points.insert(c.points.begin(), tip);
    c.evaluations = pr.counts();
    c.evaluations.traces -= before.traces;
    c.evaluations.bundles -= before.bundles;
    return c;
  };
  BoundaryCurve upper = one(Branch::Upper);
  // probe, tip and pivot cost is charged to the upper branch
  upper.evaluations.traces += 1;
  BoundaryCurve lower = one(Branch::Lower);
  const EvalCounts total = pr.counts();
  upper.evaluations.traces = total.traces + 1 - lower.evaluations.traces;
  upper.evaluations.bundles = total.bundles - lower.evaluations.bundles;
  return {std::move(upper), std::move(lower)};
}

std::pair<BoundaryCurve, BoundaryCurve> trace_tongue(int n, const Forcing& forcing,
                                                     const TraceConfig& tcfg,
                                                     const IntegratorConfig& icfg) {
  HillPropagator prop(forcing, icfg);
  return trace_tongue(n, prop, tcfg);
}

std::vector<BoundaryCurve> trace_kapitza_boundary(const HillPropagator& prop, const TraceConfig& cfg) {
  validate(cfg);
  const double eps = cfg.kapitza_epsilon;
  const int k = cfg.kapitza_samples;
  const double a_min = cfg.kapitza_a_min;
  EvalCounts scan_counts;

  std::vector<double> as(k), gs(k);
  for (int i = 0; i < k; ++i) {
    as[i] = a_min + (-a_min) * i / k;
    const TraceSample s = prop.try_trace(as[i], eps);
    ++scan_counts.traces;
    gs[i] = s.overflow ? HUGE_VAL : std::abs(s.value) - 2.0;
  }

  std::vector<BoundaryCurve> curves;
  for (int i = 0; i + 1 < k; ++i) {
    if (!std::isfinite(gs[i]) || !std::isfinite(gs[i + 1])) continue;
    if (!(gs[i] * gs[i + 1] < 0.0 || (gs[i] == 0.0 && gs[i + 1] != 0.0))) continue;
    auto g = [&](double a) {
      ++scan_counts.traces;
      return std::abs(prop.trace(a, eps)) - 2.0;
    };
    const double root = bracketed_root(g, as[i], as[i + 1], gs[i], gs[i + 1], 1e-14);
    const double tr = prop.trace(root, eps);
    ++scan_counts.traces;
    const int sign = tr >= 0.0 ? 1 : -1;

    ContourProblem pr(prop, 0.0, 2.0, sign);
    const BoundaryPoint start = pr.make_point(eps, root, Orientation::DaDeps);
    BoundaryCurve fwd = trace_from(pr, start, +1, cfg);
    BoundaryCurve bwd = trace_from(pr, start, -1, cfg);

    BoundaryCurve c;
    c.tongue_index = 0;
    // unstable below the root means the root bounds the window from below
    c.branch = gs[i] > 0.0 ? Branch::Lower : Branch::Upper;
    c.target = 2.0;
    c.sign = sign;
    c.points.assign(bwd.points.rbegin(), bwd.points.rend());
    c.points.insert(c.points.end(), fwd.points.begin() + 1, fwd.points.end());
    c.truncated = fwd.truncated || bwd.truncated;
    c.truncation_reason = fwd.truncated ? fwd.truncation_reason : bwd.truncation_reason;
    c.evaluations = pr.counts();
    curves.push_back(std::move(c));
  }
  if (curves.empty()) {
    std::ostringstream os;
    os << "no |tr| = 2 crossing on eps=" << eps << " for a in [" << a_min << ", 0)";
    throw Error(ErrorCode::NoWindowFound, os.str());
  }
  curves.front().evaluations += scan_counts;
  return curves;
}

std::vector<BoundaryCurve> trace_kapitza_boundary(const Forcing& forcing, const TraceConfig& tcfg,
                                                  const IntegratorConfig& icfg) {
  HillPropagator prop(forcing, icfg);
  return trace_kapitza_boundary(prop, tcfg);
}

double extrapolate_to_axis(const BoundaryCurve& curve) {
  std::vector<const BoundaryPoint*> pts;
  for (const auto& p : curve.points) {
    if (p.epsilon > 0.0) pts.push_back(&p);
    if (pts.size() == 4) break;
  }
  if (pts.empty()) throw Error(ErrorCode::InvalidArgument, "curve has no points with eps > 0");
  // Lagrange polynomial through the leading points, evaluated at eps = 0
  double a0 = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != i) w *= (0.0 - pts[j]->epsilon) / (pts[i]->epsilon - pts[j]->epsilon);
    }
    a0 += w * pts[i]->a;
  }
  return a0;
}

}  // namespace hill
