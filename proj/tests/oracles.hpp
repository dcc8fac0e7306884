#pragma once

// Reference computations used only by the tests. They share nothing with the
// library's integrators beyond the forcing evaluation.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "hill/forcing.hpp"
#include "hill/mat2.hpp"

namespace oracle {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double closed_form_trace(double a) {
  if (a > 0.0) return 2.0 * std::cos(kTwoPi * std::sqrt(a));
  if (a < 0.0) return 2.0 * std::cosh(kTwoPi * std::sqrt(-a));
  return 2.0;
}

// Classic RK4 for theta'' + 2 kappa theta' + (a + eps p) theta = 0, both
// fundamental solutions at once, with steps aligned to the forcing's jumps.
inline hill::Mat2 rk4_monodromy(const hill::Forcing& f, double a, double eps, double kappa, int steps) {
  using S = std::array<double, 4>;  // x1, x2, v1, v2
  std::vector<double> cuts = f.segment_starts();
  cuts.push_back(kTwoPi);
  S y{1.0, 0.0, 0.0, 1.0};
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double t0 = cuts[s], t1 = cuts[s + 1];
    const int n = std::max(1, static_cast<int>(std::lround(steps * (t1 - t0) / kTwoPi)));
    const double h = (t1 - t0) / n;
    // jumps only happen at the segment ends, so the midpoint value is the segment's
    const double p_seg = f.eval(0.5 * (t0 + t1));
    const bool constant = f.spec().kind == hill::ForcingKind::Square ||
                          f.spec().kind == hill::ForcingKind::PiecewiseConstant;
    auto rhs = [&](double t, const S& u) {
      const double p = constant ? p_seg : f.eval(std::min(t, t1 - 1e-15));
      const double q = a + eps * p;
      return S{u[2], u[3], -q * u[0] - 2.0 * kappa * u[2], -q * u[1] - 2.0 * kappa * u[3]};
    };
    for (int j = 0; j < n; ++j) {
      const double t = t0 + j * h;
      auto add = [](const S& u, double c, const S& k) {
        return S{u[0] + c * k[0], u[1] + c * k[1], u[2] + c * k[2], u[3] + c * k[3]};
      };
      const S k1 = rhs(t, y);
      const S k2 = rhs(t + 0.5 * h, add(y, 0.5 * h, k1));
      const S k3 = rhs(t + 0.5 * h, add(y, 0.5 * h, k2));
      const S k4 = rhs(t + h, add(y, h, k3));
      for (int i = 0; i < 4; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  return {y[0], y[1], y[2], y[3]};
}

inline double rk4_trace(const hill::Forcing& f, double a, double eps, int steps = 8192) {
  return rk4_monodromy(f, a, eps, 0.0, steps).trace();
}

// Plain bisection; fn(lo) and fn(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& fn, double lo, double hi, int iters = 200) {
  double flo = fn(lo);
  for (int i = 0; i < iters && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fn(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// First sign change of fn on a uniform scan of [lo, hi], refined by bisection.
inline bool scan_root(const std::function<double(double)>& fn, double lo, double hi, int samples, double& root) {
  double x0 = lo, f0 = fn(lo);
  for (int i = 1; i <= samples; ++i) {
    const double x1 = lo + (hi - lo) * i / samples;
    const double f1 = fn(x1);
    if ((f0 < 0.0) != (f1 < 0.0)) {
      root = bisect(fn, x0, x1);
      return true;
    }
    x0 = x1;
    f0 = f1;
  }
  return false;
}

// Brute-force distance from a point to a polyline.
inline double point_polyline(double x, double y, const std::vector<std::array<double, 2>>& line) {
  double best = INFINITY;
  for (std::size_t i = 0; i < line.size(); ++i) {
    best = std::min(best, std::hypot(x - line[i][0], y - line[i][1]));
    if (i + 1 == line.size()) break;
    const double dx = line[i + 1][0] - line[i][0], dy = line[i + 1][1] - line[i][1];
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) continue;
    const double u = ((x - line[i][0]) * dx + (y - line[i][1]) * dy) / len2;
    if (u > 0.0 && u < 1.0) best = std::min(best, std::hypot(x - line[i][0] - u * dx, y - line[i][1] - u * dy));
  }
  return best;
}

}  // namespace oracle
