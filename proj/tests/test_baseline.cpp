#include <doctest.h>

#include <cmath>

#include "hill/baseline.hpp"
#include "oracles.hpp"

using namespace hill;
using doctest::Approx;

namespace {

const Forcing kCosine;

StabilityGrid synthetic(int rows, int cols, double (*field)(double eps, double a)) {
  StabilityGrid g;
  g.ranges = {{0.0, (rows - 1) * 1.0, 1.0}, {0.0, (cols - 1) * 1.0, 1.0}};
  g.rows = rows;
  g.cols = cols;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) g.values.push_back(field(i, j));
  }
  return g;
}

// corner (row, col) nearest to the middle of a two-point polyline
std::pair<int, int> nearest_corner(const ContourPolyline& line) {
  const double e = 0.5 * (line.points.front().epsilon + line.points.back().epsilon);
  const double a = 0.5 * (line.points.front().a + line.points.back().a);
  return {e < 0.5 ? 0 : 1, a < 0.5 ? 0 : 1};
}

}  // namespace

TEST_CASE("range sampling") {
  CHECK(Range{0.0, 1.5, 0.02}.count() == 76);
  CHECK(Range{-1.0, 3.0, 0.02}.count() == 201);
  CHECK(Range{0.3, 0.3, 0.1}.count() == 1);
  CHECK_THROWS_AS(validate(GridRanges{{0.0, 1.0, 0.0}, {0.0, 1.0, 0.1}}), Error);
  CHECK_THROWS_AS(validate(GridRanges{{1.0, 0.0, 0.1}, {0.0, 1.0, 0.1}}), Error);
}

TEST_CASE("eps = 0 row is the closed form") {
  // the trace error grows like (sqrt(a) h)^2, so a = 9 needs a fine step; large cosh values are compared relatively
  const StabilityGrid g = grid_scan({{0.0, 0.0, 1.0}, {-1.0, 9.0, 0.25}}, kCosine, 0.0,
                                    IntegratorConfig{Scheme::SymplecticEuler, 131072});
  REQUIRE(g.rows == 1);
  for (int j = 0; j < g.cols; ++j) {
    const double t = oracle::closed_form_trace(g.a(j));
    CHECK(std::abs(g.value(0, j) - t) <= 1e-6 * std::max(1.0, std::abs(t)));
  }
}

TEST_CASE("single node grid") {
  const StabilityGrid g = grid_scan({{0.3, 0.3, 0.1}, {0.7, 0.7, 0.1}}, kCosine, 0.0, IntegratorConfig{});
  REQUIRE(g.values.size() == 1);
  CHECK(g.value(0, 0) == trace_objective({0.7, 0.3}, kCosine, IntegratorConfig{}));
  CHECK(g.evaluations() == 1);
}

TEST_CASE("partitioning does not change the grid") {
  const GridRanges r{{0.0, 1.0, 0.1}, {-0.5, 2.0, 0.1}};
  const HillPropagator prop(parse_forcing("square:0.4"), IntegratorConfig{});
  const StabilityGrid one = grid_scan(r, prop, 0.0, 1);
  for (unsigned threads : {2u, 3u, 7u, 64u}) CHECK(grid_scan(r, prop, 0.0, threads).values == one.values);
  const StabilityGrid damped = grid_scan(r, prop, 0.1, 2);
  CHECK(damped.value(3, 4) == prop.trace(damped.a(4) - 0.1 * 0.1, damped.epsilon(3)));
  CHECK(damped.kappa == 0.1);
}

TEST_CASE("overflowing nodes are counted") {
  const StabilityGrid g = grid_scan({{0.0, 0.0, 1.0}, {-10000.0, -9999.0, 1.0}}, kCosine, 0.0, IntegratorConfig{});
  CHECK(g.overflow_count == 2);
  CHECK(std::isinf(g.value(0, 0)));
  CHECK(marching_squares(g, 2.0).empty());
}

TEST_CASE("marching squares on a planar field") {
  const StabilityGrid g = synthetic(5, 4, [](double, double a) { return 0.3 * a; });
  const auto lines = marching_squares(g, 0.5);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].level == 0.5);
  CHECK_FALSE(lines[0].closed);
  CHECK(lines[0].points.size() == 5);
  for (const auto& p : lines[0].points) CHECK(p.a == Approx(0.5 / 0.3));
  CHECK(marching_squares(synthetic(4, 4, [](double, double) { return 1.0; }), 0.5).empty());
}

TEST_CASE("closed contours") {
  const StabilityGrid g = synthetic(7, 7, [](double e, double a) { return std::hypot(e - 3.0, a - 3.0); });
  const auto lines = marching_squares(g, 2.0);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].closed);
  for (const auto& p : lines[0].points) CHECK(std::hypot(p.epsilon - 3.0, p.a - 3.0) == Approx(2.0).epsilon(0.1));
}

TEST_CASE("saddle cells follow the centre average") {
  // high corners at (0,0) and (1,1)
  const StabilityGrid low = synthetic(2, 2, [](double e, double a) { return e == a ? (e == 0 ? 1.0 : 0.9) : 0.0; });
  const auto split = marching_squares(low, 0.5);
  REQUIRE(split.size() == 2);
  for (const auto& l : split) {
    const auto c = nearest_corner(l);
    CHECK(c.first == c.second);  // each segment cuts off a high corner
  }
  const StabilityGrid high = synthetic(2, 2, [](double e, double a) { return e == a ? 1.0 : 0.2; });
  const auto joined = marching_squares(high, 0.5);
  REQUIRE(joined.size() == 2);
  for (const auto& l : joined) {
    const auto c = nearest_corner(l);
    CHECK(c.first != c.second);  // the high corners stay connected
  }
}

TEST_CASE("stability contours of a small grid") {
  const StabilityGrid g = grid_scan({{0.0, 0.6, 0.05}, {0.0, 0.6, 0.05}}, kCosine, 0.0, IntegratorConfig{});
  const auto lines = stability_contours(g);
  bool minus = false;
  for (const auto& l : lines) minus = minus || l.level == -2.0;
  CHECK(minus);
}

TEST_CASE("classification") {
  const IntegratorConfig cfg;
  CHECK(classify({1.2, 0.01}, kCosine, cfg).stability == Stability::Stable);
  CHECK(classify({0.25, 0.2}, kCosine, cfg).stability == Stability::Unstable);
  CHECK(classify({0.25, 0.0}, kCosine, cfg).stability == Stability::Marginal);
  const Classification deep = classify({-10000.0, 0.0}, kCosine, cfg);
  CHECK(deep.stability == Stability::Unstable);
  CHECK(deep.overflow);
  CHECK(classify({0.25, 0.01, 0.1}, kCosine, cfg).stability == Stability::Stable);
  CHECK(to_string(Stability::Marginal) == "marginal");
}

TEST_CASE("benchmark bookkeeping") {
  BenchWindow w;
  w.grid = {{0.0, 0.3, 0.1}, {0.0, 0.3, 0.1}};
  w.tongues = {1};
  w.trace.epsilon_max = 0.1;
  const BenchReport r = benchmark(w, kCosine, IntegratorConfig{}, 1);
  CHECK(r.grid_nodes == 16);
  CHECK(r.grid_evaluations == 16);
  REQUIRE(r.curves.size() == 2);
  CHECK(r.tracer_points == static_cast<std::int64_t>(r.curves[0].points.size() + r.curves[1].points.size()));
  CHECK(r.tracer_trace_evaluations ==
        r.curves[0].evaluations.traces + r.curves[1].evaluations.traces);
  CHECK(r.speedup > 0.0);
  CHECK(r.repeats == 1);

  BenchWindow fine = w;
  fine.grid.epsilon.step = fine.grid.a.step = 0.05;
  const BenchReport rf = benchmark(fine, kCosine, IntegratorConfig{}, 1);
  CHECK(rf.grid_evaluations == 49);
  CHECK(rf.tracer_trace_evaluations == r.tracer_trace_evaluations);
  CHECK(rf.tracer_bundle_evaluations == r.tracer_bundle_evaluations);
}

TEST_CASE("fig3 window") {
  const BenchWindow w = fig3_window();
  CHECK(w.grid.epsilon.step == 0.02);
  CHECK(w.grid.a.step == 0.02);
  CHECK(w.trace.d_epsilon == 0.05);
  CHECK(w.tongues == std::vector<int>{1, 2, 3});
}

TEST_CASE("polyline distances") {
  const std::vector<std::vector<Point2>> x{{{0.0, 0.0}, {1.0, 0.0}}};
  const std::vector<std::vector<Point2>> y{{{0.0, 0.1}, {1.0, 0.1}, {1.0, 0.5}}};
  CHECK(directed_hausdorff(x[0], y) == Approx(0.1));
  CHECK(hausdorff(x, y) == Approx(0.5));
  const auto clipped = clip_to_box({{{-1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}, {2.0, 5.0}}}, -0.5, 1.5, -1.0, 1.0);
  REQUIRE(clipped.size() == 1);
  CHECK(clipped[0].front().epsilon == Approx(-0.5));
  CHECK(clipped[0].back().epsilon == Approx(1.2));
  CHECK(clipped[0].back().a == Approx(1.0));
  // leaving and re-entering splits the line
  const auto two = clip_to_box({{{0.0, 0.0}, {0.0, 2.0}, {0.5, 0.0}}}, -1.0, 1.0, -1.0, 1.0);
  CHECK(two.size() == 2);
  CHECK(clip_to_box({{{5.0, 5.0}, {6.0, 6.0}}}, 0.0, 1.0, 0.0, 1.0).empty());
}
