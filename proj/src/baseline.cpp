#include "hill/baseline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>
#include <unordered_map>

#include "hill/damped.hpp"

namespace hill {

int Range::count() const { return static_cast<int>(std::floor((max - min) / step + 1e-9)) + 1; }

void validate(const GridRanges& r) {
  for (const Range* x : {&r.epsilon, &r.a}) {
    if (!(x->step > 0.0) || !(x->max >= x->min) || !std::isfinite(x->min) || !std::isfinite(x->max)) {
      throw Error(ErrorCode::InvalidArgument, "grid ranges need step > 0 and max >= min");
    }
  }
}

StabilityGrid grid_scan(const GridRanges& ranges, const HillPropagator& prop, double kappa,
                        unsigned threads) {
  validate(ranges);
  StabilityGrid g;
  g.ranges = ranges;
  g.rows = ranges.epsilon.count();
  g.cols = ranges.a.count();
  g.kappa = kappa;
  g.forcing = prop.forcing().spec();
  g.integrator = prop.config();
  g.values.assign(static_cast<std::size_t>(g.rows) * g.cols, 0.0);

  const double shift = kappa * kappa;
  auto run_rows = [&](int r0, int r1) {
    for (int i = r0; i < r1; ++i) {
      for (int j = 0; j < g.cols; ++j) {
        g.values[static_cast<std::size_t>(i) * g.cols + j] = prop.try_trace(g.a(j) - shift, g.epsilon(i)).value;
      }
    }
  };

  unsigned n = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n = std::min<unsigned>(n, static_cast<unsigned>(g.rows));
  if (n <= 1) {
    run_rows(0, g.rows);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) {
      const int r0 = static_cast<int>(static_cast<long>(g.rows) * t / n);
      const int r1 = static_cast<int>(static_cast<long>(g.rows) * (t + 1) / n);
      pool.emplace_back(run_rows, r0, r1);
    }
    for (auto& th : pool) th.join();
  }
  g.overflow_count = std::count_if(g.values.begin(), g.values.end(), [](double v) { return !std::isfinite(v); });
  return g;
}

StabilityGrid grid_scan(const GridRanges& ranges, const Forcing& forcing, double kappa,
                        const IntegratorConfig& cfg, unsigned threads) {
  return grid_scan(ranges, HillPropagator(forcing, cfg), kappa, threads);
}

namespace {

enum Edge { Bottom, Right, Top, Left };

// Edge pairs per case; bit 0 = (i, j), 1 = (i+1, j), 2 = (i+1, j+1), 3 = (i, j+1).
// Saddles 5 and 10 are filled in at run time.
constexpr std::array<std::array<int, 4>, 16> kCases{{
    {-1, -1, -1, -1}, {Left, Bottom, -1, -1}, {Bottom, Right, -1, -1}, {Left, Right, -1, -1},
    {Right, Top, -1, -1}, {-1, -1, -1, -1},    {Bottom, Top, -1, -1},   {Left, Top, -1, -1},
    {Top, Left, -1, -1},  {Bottom, Top, -1, -1}, {-1, -1, -1, -1},      {Right, Top, -1, -1},
    {Left, Right, -1, -1}, {Bottom, Right, -1, -1}, {Left, Bottom, -1, -1}, {-1, -1, -1, -1},
}};

}  // namespace

std::vector<ContourPolyline> marching_squares(const StabilityGrid& grid, double level) {
  const int rows = grid.rows, cols = grid.cols;
  std::vector<ContourPolyline> out;
  if (rows < 2 || cols < 2) return out;

  // Edge ids: eps-edges (i,j)-(i+1,j) are 2*(i*cols+j), a-edges (i,j)-(i,j+1) are 2*(i*cols+j)+1.
  auto edge_id = [cols](int i, int j, int e) -> std::int64_t {
    switch (e) {
      case Bottom: return 2LL * (static_cast<std::int64_t>(i) * cols + j);
      case Top: return 2LL * (static_cast<std::int64_t>(i) * cols + j + 1);
      case Left: return 2LL * (static_cast<std::int64_t>(i) * cols + j) + 1;
      default: return 2LL * (static_cast<std::int64_t>(i + 1) * cols + j) + 1;
    }
  };
  auto edge_point = [&](std::int64_t id) {
    const std::int64_t node = id / 2;
    const int i = static_cast<int>(node / cols), j = static_cast<int>(node % cols);
    const int i2 = (id % 2 == 0) ? i + 1 : i;
    const int j2 = (id % 2 == 0) ? j : j + 1;
    const double v0 = grid.value(i, j), v1 = grid.value(i2, j2);
    const double t = (v1 == v0) ? 0.5 : (level - v0) / (v1 - v0);
    return Point2{grid.epsilon(i) + t * (grid.epsilon(i2) - grid.epsilon(i)),
                  grid.a(j) + t * (grid.a(j2) - grid.a(j))};
  };

  std::vector<std::array<std::int64_t, 2>> segs;
  for (int i = 0; i + 1 < rows; ++i) {
    for (int j = 0; j + 1 < cols; ++j) {
      const double v[4] = {grid.value(i, j), grid.value(i + 1, j), grid.value(i + 1, j + 1),
                           grid.value(i, j + 1)};
      if (!(std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]) && std::isfinite(v[3]))) continue;
      int idx = 0;
      for (int k = 0; k < 4; ++k) idx |= (v[k] >= level ? 1 : 0) << k;
      std::array<int, 4> e = kCases[idx];
      if (idx == 5 || idx == 10) {
        const bool center_above = 0.25 * (v[0] + v[1] + v[2] + v[3]) >= level;
        // the two high corners join through the centre when it is above the level
        if ((idx == 5) == center_above) {
          e = {Bottom, Right, Left, Top};
        } else {
          e = {Left, Bottom, Right, Top};
        }
      }
      for (int k = 0; k < 4 && e[k] >= 0; k += 2) {
        segs.push_back({edge_id(i, j, e[k]), edge_id(i, j, e[k + 1])});
      }
    }
  }

  // join segments sharing edge crossings
  std::unordered_map<std::int64_t, std::array<int, 2>> at;
  at.reserve(segs.size() * 2);
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    for (std::int64_t id : segs[s]) {
      auto [it, fresh] = at.try_emplace(id, std::array<int, 2>{-1, -1});
      (it->second[0] < 0 ? it->second[0] : it->second[1]) = s;
    }
  }
  std::vector<char> used(segs.size(), 0);
  auto other = [&](std::int64_t id, int s) {
    const auto& v = at.at(id);
    return v[0] == s ? v[1] : v[0];
  };
  auto walk = [&](int s0, std::int64_t start) {
    ContourPolyline pl;
    pl.level = level;
    pl.points.push_back(edge_point(start));
    int s = s0;
    std::int64_t id = start;
    while (s >= 0 && !used[s]) {
      used[s] = 1;
      id = segs[s][0] == id ? segs[s][1] : segs[s][0];
      pl.points.push_back(edge_point(id));
      s = other(id, s);
    }
    pl.closed = id == start && pl.points.size() > 2;
    return pl;
  };
  // open chains first, starting from crossings used by a single segment
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    if (used[s]) continue;
    for (std::int64_t id : segs[s]) {
      if (other(id, s) < 0) {
        out.push_back(walk(s, id));
        break;
      }
    }
  }
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    if (!used[s]) out.push_back(walk(s, segs[s][0]));
  }
  return out;
}

std::vector<ContourPolyline> stability_contours(const StabilityGrid& grid, double target) {
  std::vector<ContourPolyline> out = marching_squares(grid, target);
  std::vector<ContourPolyline> neg = marching_squares(grid, -target);
  out.insert(out.end(), std::make_move_iterator(neg.begin()), std::make_move_iterator(neg.end()));
  return out;
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Marginal: return "marginal";
  }
  return "unknown";
}

Classification classify(const Params& params, const HillPropagator& prop) {
  Classification c;
  c.target = damped_threshold(params.kappa);
  const TraceSample s = prop.try_trace(params.a - params.kappa * params.kappa, params.epsilon);
  c.trace = s.value;
  c.overflow = s.overflow;
  const double excess = std::abs(s.value) - c.target;
  if (s.overflow || excess > kMarginalBand) {
    c.stability = Stability::Unstable;
  } else if (excess >= -kMarginalBand) {
    c.stability = Stability::Marginal;
  } else {
    c.stability = Stability::Stable;
  }
  return c;
}

Classification classify(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg) {
  return classify(params, HillPropagator(forcing, cfg));
}

BenchWindow fig3_window() {
  BenchWindow w;
  w.grid.epsilon = {0.0, 1.5, 0.02};
  w.grid.a = {-1.0, 3.0, 0.02};
  w.tongues = {1, 2, 3};
  w.trace.d_epsilon = 0.05;
  w.trace.epsilon_max = 1.5;
  return w;
}

BenchReport benchmark(const BenchWindow& window, const Forcing& forcing, const IntegratorConfig& cfg,
                      int repeats) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };
  BenchReport r;
  r.repeats = std::max(1, repeats);
  r.grid_seconds = r.contour_seconds = r.tracer_seconds = std::numeric_limits<double>::infinity();

  for (int rep = 0; rep < r.repeats; ++rep) {
    const auto g0 = clock::now();
    StabilityGrid grid;
    {
      const HillPropagator prop(forcing, cfg);
      grid = grid_scan(window.grid, prop, 0.0, 1);
    }
    const auto g1 = clock::now();
    std::vector<ContourPolyline> contours = stability_contours(grid, 2.0);
    const auto g2 = clock::now();
    if (seconds(g0, g2) < r.grid_seconds + r.contour_seconds) {
      r.grid_seconds = seconds(g0, g1);
      r.contour_seconds = seconds(g1, g2);
    }
    r.grid_nodes = grid.evaluations();
    r.grid_evaluations = grid.evaluations();
    r.grid_overflow = grid.overflow_count;
    r.contour_polylines = static_cast<std::int64_t>(contours.size());
    r.contours = std::move(contours);
  }

  for (int rep = 0; rep < r.repeats; ++rep) {
    std::vector<BoundaryCurve> curves;
    const auto t0 = clock::now();
    {
      const HillPropagator prop(forcing, cfg);
      for (int n : window.tongues) {
        auto [upper, lower] = trace_tongue(n, prop, window.trace);
        curves.push_back(std::move(upper));
        curves.push_back(std::move(lower));
      }
    }
    r.tracer_seconds = std::min(r.tracer_seconds, seconds(t0, clock::now()));
    r.curves = std::move(curves);
  }
  r.tracer_trace_evaluations = r.tracer_bundle_evaluations = r.tracer_points = 0;
  for (const auto& c : r.curves) {
    r.tracer_trace_evaluations += c.evaluations.traces;
    r.tracer_bundle_evaluations += c.evaluations.bundles;
    r.tracer_points += static_cast<std::int64_t>(c.points.size());
  }
  r.speedup = r.tracer_seconds > 0.0 ? (r.grid_seconds + r.contour_seconds) / r.tracer_seconds
                                     : std::numeric_limits<double>::infinity();
  return r;
}

namespace {

double point_segment(const Point2& p, const Point2& s0, const Point2& s1) {
  const double dx = s1.epsilon - s0.epsilon, dy = s1.a - s0.a;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.epsilon - s0.epsilon) * dx + (p.a - s0.a) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.epsilon - (s0.epsilon + t * dx), p.a - (s0.a + t * dy));
}

}  // namespace

double directed_hausdorff(const std::vector<Point2>& from, const std::vector<std::vector<Point2>>& to) {
  double worst = 0.0;
  for (const Point2& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& line : to) {
      if (line.size() == 1) best = std::min(best, point_segment(p, line[0], line[0]));
      for (std::size_t k = 0; k + 1 < line.size(); ++k) {
        best = std::min(best, point_segment(p, line[k], line[k + 1]));
      }
    }
    worst = std::max(worst, best);
  }
  return worst;
}

double hausdorff(const std::vector<std::vector<Point2>>& x, const std::vector<std::vector<Point2>>& y) {
  auto flat = [](const std::vector<std::vector<Point2>>& v) {
    std::vector<Point2> out;
    for (const auto& line : v) out.insert(out.end(), line.begin(), line.end());
    return out;
  };
  return std::max(directed_hausdorff(flat(x), y), directed_hausdorff(flat(y), x));
}

std::vector<std::vector<Point2>> clip_to_box(const std::vector<std::vector<Point2>>& lines,
                                             double eps_min, double eps_max, double a_min,
                                             double a_max) {
  const auto inside = [&](const Point2& p) {
    return p.epsilon >= eps_min && p.epsilon <= eps_max && p.a >= a_min && p.a <= a_max;
  };
  // Liang-Barsky: parameter interval of segment p + u (q - p) inside the box
  const auto clip = [&](const Point2& p, const Point2& q, double& u0, double& u1) {
    const double dx = q.epsilon - p.epsilon, dy = q.a - p.a;
    const double num[4] = {p.epsilon - eps_min, eps_max - p.epsilon, p.a - a_min, a_max - p.a};
    const double den[4] = {-dx, dx, -dy, dy};
    u0 = 0.0;
    u1 = 1.0;
    for (int k = 0; k < 4; ++k) {
      if (den[k] == 0.0) {
        if (num[k] < 0.0) return false;
        continue;
      }
      const double u = num[k] / den[k];
      if (den[k] < 0.0) {
        u0 = std::max(u0, u);
      } else {
        u1 = std::min(u1, u);
      }
    }
    return u0 <= u1;
  };
  const auto lerp = [](const Point2& p, const Point2& q, double u) {
    return Point2{p.epsilon + u * (q.epsilon - p.epsilon), p.a + u * (q.a - p.a)};
  };

  std::vector<std::vector<Point2>> out;
  for (const auto& line : lines) {
    std::vector<Point2> cur;
    if (line.size() == 1 && inside(line[0])) cur.push_back(line[0]);
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      double u0 = 0.0, u1 = 1.0;
      if (!clip(line[i], line[i + 1], u0, u1)) {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
        continue;
      }
      if (cur.empty()) cur.push_back(lerp(line[i], line[i + 1], u0));
      cur.push_back(lerp(line[i], line[i + 1], u1));
      if (u1 < 1.0) {
        out.push_back(std::move(cur));
        cur.clear();
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
  }
  return out;
}

std::vector<Point2> to_points(const BoundaryCurve& curve) {
  std::vector<Point2> out;
  out.reserve(curve.points.size());
  for (const auto& p : curve.points) out.push_back({p.epsilon, p.a});
  return out;
}

}  // namespace hill
