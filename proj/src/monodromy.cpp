#include "hill/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hill/rk.hpp"

namespace hill {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::SymplecticEuler: return "symplectic-euler";
    case Scheme::ImplicitTrapezoid: return "trapezoid";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "symplectic-euler") return Scheme::SymplecticEuler;
  if (name == "trapezoid") return Scheme::ImplicitTrapezoid;
  throw Error(ErrorCode::InvalidArgument, "unknown scheme '" + name + "'");
}

void validate(const IntegratorConfig& cfg) {
  if (cfg.steps_per_period < 16) {
    throw Error(ErrorCode::InvalidArgument, "steps_per_period must be >= 16");
  }
  if (cfg.sensitivity_stride < 1) {
    throw Error(ErrorCode::InvalidArgument, "sensitivity_stride must be >= 1");
  }
}

Mat2 generator(const Params& params, const Forcing& forcing, double t) {
  return {0.0, 1.0, -params.a - params.epsilon * forcing.eval(t), 0.0};
}

double unforced_trace(double a) {
  if (a > 0.0) return 2.0 * std::cos(kTwoPi * std::sqrt(a));
  if (a < 0.0) return 2.0 * std::cosh(kTwoPi * std::sqrt(-a));
  return 2.0;
}

HillPropagator::HillPropagator(Forcing forcing, IntegratorConfig cfg)
    : forcing_(std::move(forcing)), cfg_(cfg) {
  validate(cfg_);
  const std::vector<double> starts = forcing_.segment_starts();
  const int total = cfg_.steps_per_period;
  using DP = rk::DormandPrince;
  constexpr std::array<int, 5> quad_stages{0, 2, 3, 4, 5};  // stages with b != 0

  for (std::size_t seg = 0; seg < starts.size(); ++seg) {
    const double t_begin = starts[seg];
    const double t_end = seg + 1 < starts.size() ? starts[seg + 1] : kTwoPi;
    const double len = t_end - t_begin;
    const int n = std::max(1, static_cast<int>(std::lround(total * len / kTwoPi)));
    const double h = len / n;
    const std::size_t first = steps_.size();
    for (int j = 0; j < n; ++j) {
      const double t0 = t_begin + j * h;
      const double t1 = (j + 1 == n) ? t_end : t0 + h;
      steps_.push_back({t0, t1 - t0, forcing_.eval(t0 + 0.5 * (t1 - t0)), forcing_.eval(t0),
                        forcing_.eval_left(t1)});
    }

    // quadrature nodes of the sensitivity integration, blocked inside the segment
    const int stride = cfg_.sensitivity_stride;
    for (int j0 = 0; j0 < n; j0 += stride) {
      const int m = std::min(stride, n - j0);
      const double big_h = m * h;
      const double block_t0 = t_begin + j0 * h;
      for (int stage : quad_stages) {
        const double c = DP::c[stage];
        const double local = c * m;
        int k = std::min(static_cast<int>(std::floor(local)), m - 1);
        double s = local - k;
        if (stage == 5) {
          k = m - 1;
          s = 1.0;
        }
        const double s2 = s * s, s3 = s2 * s;
        Node node;
        node.step = first + static_cast<std::size_t>(j0 + k);
        node.s = s;
        node.h00 = 2 * s3 - 3 * s2 + 1;
        node.h10 = (s3 - 2 * s2 + s) * h;
        node.h01 = -2 * s3 + 3 * s2;
        node.h11 = (s3 - s2) * h;
        node.weight = DP::b[stage] * big_h;
        const double t = block_t0 + c * big_h;
        if (stage == 0) {
          node.p = forcing_.eval(block_t0);
        } else if (stage == 5) {
          node.p = forcing_.eval_left(j0 + m == n ? t_end : block_t0 + big_h);
        } else {
          node.p = forcing_.eval(t);
        }
        nodes_.push_back(node);
      }
    }
  }
  std::stable_sort(nodes_.begin(), nodes_.end(),
                   [](const Node& x, const Node& y) { return x.step < y.step; });
  for (const Node& nd : nodes_) {
    if (marks_.empty() || marks_.back() != nd.step) marks_.push_back(nd.step);
  }
}

bool HillPropagator::advance(double a, double epsilon, Mat2& theta, std::size_t j0, std::size_t j1,
                             double& t_fail) const {
  const std::size_t n = steps_.size();
  const bool trapezoid = cfg_.scheme == Scheme::ImplicitTrapezoid;
  double m11 = theta.m11, m12 = theta.m12, m21 = theta.m21, m22 = theta.m22;
  std::size_t j = j0;
  while (j < j1) {
    const std::size_t chunk_end =
        std::min(j1, (j / kOverflowCheckInterval + 1) * kOverflowCheckInterval);
    if (!trapezoid) {
      // drift / kick / drift (Stormer-Verlet: symmetric composition of the two
      // symplectic Euler half steps), forcing sampled at the step midpoint
      for (; j < chunk_end; ++j) {
        const StepData& st = steps_[j];
        const double h = st.h, hh = 0.5 * h;
        const double q = a + epsilon * st.p_mid;
        const double x1 = m11 + hh * m21, x2 = m12 + hh * m22;
        m21 -= h * q * x1;
        m22 -= h * q * x2;
        m11 = x1 + hh * m21;
        m12 = x2 + hh * m22;
      }
    } else {
      for (; j < chunk_end; ++j) {
        const StepData& st = steps_[j];
        const double hh = 0.5 * st.h;
        const double q0 = a + epsilon * st.p_start;
        const double q1 = a + epsilon * st.p_end;
        // right = (I + h/2 A0) theta
        const double r11 = m11 + hh * m21, r12 = m12 + hh * m22;
        const double r21 = m21 - hh * q0 * m11, r22 = m22 - hh * q0 * m12;
        // (I - h/2 A1)^-1 = [[1, h/2], [-h q1 / 2, 1]] / (1 + h^2 q1 / 4)
        const double inv_det = 1.0 / (1.0 + hh * hh * q1);
        m11 = (r11 + hh * r21) * inv_det;
        m12 = (r12 + hh * r22) * inv_det;
        m21 = (r21 - hh * q1 * r11) * inv_det;
        m22 = (r22 - hh * q1 * r12) * inv_det;
      }
    }
    if (j % kOverflowCheckInterval == 0 || j == n) {
      const Mat2 cur{m11, m12, m21, m22};
      if (!cur.is_finite() || cur.max_abs() > kOverflowThreshold) {
        theta = cur;
        t_fail = steps_[j - 1].t0 + steps_[j - 1].h;
        return false;
      }
    }
  }
  theta = {m11, m12, m21, m22};
  return true;
}

template <class OnStep>
bool HillPropagator::propagate(double a, double epsilon, Mat2& theta, double& t_fail,
                               const std::vector<std::size_t>& marks, OnStep&& on_step) const {
  theta = Mat2::identity();
  const std::size_t n = steps_.size();
  std::size_t j = 0;
  for (const std::size_t mark : marks) {
    if (!advance(a, epsilon, theta, j, mark, t_fail)) return false;
    const Mat2 prev = theta;
    if (!advance(a, epsilon, theta, mark, mark + 1, t_fail)) return false;
    on_step(mark, prev, theta);
    j = mark + 1;
  }
  return advance(a, epsilon, theta, j, n, t_fail);
}

namespace {

[[noreturn]] void throw_overflow(double a, double epsilon, double t) {
  std::ostringstream os;
  os << "state transition matrix overflowed at t=" << t << " (a=" << a << ", eps=" << epsilon
     << ")";
  throw Error(ErrorCode::NonFiniteState, os.str());
}

}  // namespace

Mat2 HillPropagator::monodromy(double a, double epsilon) const {
  Mat2 theta = Mat2::identity();
  double t_fail = 0.0;
  if (!advance(a, epsilon, theta, 0, steps_.size(), t_fail)) {
    throw_overflow(a, epsilon, t_fail);
  }
  return theta;
}

TraceSample HillPropagator::try_trace(double a, double epsilon) const {
  Mat2 theta = Mat2::identity();
  TraceSample out;
  if (!advance(a, epsilon, theta, 0, steps_.size(), out.t_overflow)) {
    out.overflow = true;
    const double tr = theta.trace();
    out.value = (std::isnan(tr) || tr >= 0.0) ? HUGE_VAL : -HUGE_VAL;
    return out;
  }
  out.value = theta.trace();
  return out;
}

SensitivityBundle HillPropagator::with_sensitivities(double a, double epsilon) const {
  // W_a = int Theta^-1 E Theta with E = [[0,0],[-1,0]]:
  //   Theta^-1 E Theta = [[u v, v^2], [-u^2, -u v]] / det Theta, (u, v) = first row of Theta.
  double wa11 = 0.0, wa12 = 0.0, wa21 = 0.0;
  double we11 = 0.0, we12 = 0.0, we21 = 0.0;
  std::size_t next = 0;
  const std::size_t n_nodes = nodes_.size();
  auto on_step = [&](std::size_t j, const Mat2& t0, const Mat2& t1) {
    if (next >= n_nodes || nodes_[next].step != j) return;
    const double inv_det = 1.0 / t0.det();
    while (next < n_nodes && nodes_[next].step == j) {
      const Node& nd = nodes_[next++];
      const double u = nd.h00 * t0.m11 + nd.h10 * t0.m21 + nd.h01 * t1.m11 + nd.h11 * t1.m21;
      const double v = nd.h00 * t0.m12 + nd.h10 * t0.m22 + nd.h01 * t1.m12 + nd.h11 * t1.m22;
      const double w = nd.weight * inv_det;
      const double uv = w * u * v, vv = w * v * v, uu = w * u * u;
      wa11 += uv;
      wa12 += vv;
      wa21 -= uu;
      we11 += nd.p * uv;
      we12 += nd.p * vv;
      we21 -= nd.p * uu;
    }
  };
  Mat2 theta;
  double t_fail = 0.0;
  if (!propagate(a, epsilon, theta, t_fail, marks_, on_step)) throw_overflow(a, epsilon, t_fail);
  const Mat2 wa{wa11, wa12, wa21, -wa11};
  const Mat2 we{we11, we12, we21, -we11};
  return {theta, theta * wa, theta * we};
}

namespace {

void require_undamped(const Params& params) {
  if (params.kappa != 0.0) {
    throw Error(ErrorCode::PreconditionViolated,
                "undamped monodromy requires kappa = 0; use the damped transformation");
  }
}

}  // namespace

Mat2 monodromy(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg) {
  require_undamped(params);
  return HillPropagator(forcing, cfg).monodromy(params.a, params.epsilon);
}

SensitivityBundle monodromy_with_sensitivities(const Params& params, const Forcing& forcing,
                                               const IntegratorConfig& cfg) {
  require_undamped(params);
  return HillPropagator(forcing, cfg).with_sensitivities(params.a, params.epsilon);
}

double trace_objective(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg) {
  return monodromy(params, forcing, cfg).trace();
}

}  // namespace hill
