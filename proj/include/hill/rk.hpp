#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>

namespace hill::rk {

/// Dormand-Prince 5(4) tableau with Hairer's 4th-order continuous extension.
struct DormandPrince {
  static constexpr const char* name = "dormand-prince-5(4)";

  static constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};

  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;

  // 5th-order weights (row 7 of the tableau, FSAL); b2 = b7 = 0.
  static constexpr std::array<double, 7> b{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                                           -2187.0 / 6784, 11.0 / 84, 0.0};
  // b5 - b4
  static constexpr std::array<double, 7> e{71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
                                           -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
  // dense output
  static constexpr std::array<double, 7> d{-12715105075.0 / 11282082432, 0.0,
                                           87487479700.0 / 32700410799, -10690763975.0 / 1880347072,
                                           701980252875.0 / 199316789632, -1453857185.0 / 822651844,
                                           69997945.0 / 29380423};
};

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
Vec<N> axpy(const Vec<N>& y, double h, std::initializer_list<std::pair<double, const Vec<N>*>> terms) {
  Vec<N> out = y;
  for (std::size_t i = 0; i < N; ++i) {
    double acc = 0.0;
    for (const auto& [w, k] : terms) acc += w * (*k)[i];
    out[i] += h * acc;
  }
  return out;
}

/// Result of one Dormand-Prince step from (t, y) with size h.
template <std::size_t N>
struct Step {
  double t0 = 0.0, h = 0.0;
  Vec<N> y0{}, y1{}, err{};
  std::array<Vec<N>, 7> k{};  // k[6] is f(t0 + h, y1)

  /// Continuous extension at theta in [0, 1].
  Vec<N> dense(double theta) const {
    using T = DormandPrince;
    Vec<N> out{};
    const double th1 = 1.0 - theta;
    for (std::size_t i = 0; i < N; ++i) {
      const double ydiff = y1[i] - y0[i];
      const double bspl = h * k[0][i] - ydiff;
      const double r4 = ydiff - h * k[6][i] - bspl;
      double r5 = 0.0;
      for (std::size_t s = 0; s < 7; ++s) r5 += T::d[s] * k[s][i];
      r5 *= h;
      out[i] = y0[i] + theta * (ydiff + th1 * (bspl + theta * (r4 + th1 * r5)));
    }
    return out;
  }
};

/// One step given k1 = f(t, y). `f(t, y) -> Vec<N>` may throw to abort the step.
template <std::size_t N, class F>
Step<N> step(F&& f, double t, const Vec<N>& y, double h, const Vec<N>& k1) {
  using T = DormandPrince;
  Step<N> s;
  s.t0 = t;
  s.h = h;
  s.y0 = y;
  s.k[0] = k1;
  s.k[1] = f(t + T::c[1] * h, axpy<N>(y, h, {{T::a21, &s.k[0]}}));
  s.k[2] = f(t + T::c[2] * h, axpy<N>(y, h, {{T::a31, &s.k[0]}, {T::a32, &s.k[1]}}));
  s.k[3] = f(t + T::c[3] * h,
             axpy<N>(y, h, {{T::a41, &s.k[0]}, {T::a42, &s.k[1]}, {T::a43, &s.k[2]}}));
  s.k[4] = f(t + T::c[4] * h, axpy<N>(y, h,
                                      {{T::a51, &s.k[0]}, {T::a52, &s.k[1]}, {T::a53, &s.k[2]},
                                       {T::a54, &s.k[3]}}));
  s.k[5] = f(t + h, axpy<N>(y, h,
                            {{T::a61, &s.k[0]}, {T::a62, &s.k[1]}, {T::a63, &s.k[2]},
                             {T::a64, &s.k[3]}, {T::a65, &s.k[4]}}));
  s.y1 = axpy<N>(y, h,
                 {{T::b[0], &s.k[0]}, {T::b[2], &s.k[2]}, {T::b[3], &s.k[3]}, {T::b[4], &s.k[4]},
                  {T::b[5], &s.k[5]}});
  s.k[6] = f(t + h, s.y1);
  for (std::size_t i = 0; i < N; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < 7; ++j) acc += T::e[j] * s.k[j][i];
    s.err[i] = h * acc;
  }
  return s;
}

/// Scaled RMS error norm used for step acceptance.
template <std::size_t N>
double error_norm(const Step<N>& s, double atol, double rtol) {
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double scale = atol + rtol * std::max(std::abs(s.y0[i]), std::abs(s.y1[i]));
    const double r = s.err[i] / scale;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(N));
}

/// Standard step-size factor with safety 0.9 and clamps [0.2, 5].
inline double step_factor(double err) {
  if (err == 0.0) return 5.0;
  return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

}  // namespace hill::rk
