#pragma once

#include <cstdint>
#include <vector>

#include "hill/monodromy.hpp"
#include "hill/tracer.hpp"

namespace hill {

/// Uniform sample positions min, min + step, ... up to max (inclusive within 1e-9 steps).
struct Range {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  int count() const;
  double at(int i) const { return min + i * step; }
};

struct GridRanges {
  Range epsilon;
  Range a;
};

/// Throws InvalidArgument for non-positive steps or inverted ranges.
void validate(const GridRanges& r);

/// Trace samples on an (eps, a) lattice. Row i holds eps_i, column j holds a_j;
/// values are stored row-major. Overflowed nodes hold a signed infinity.
struct StabilityGrid {
  GridRanges ranges;
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
  double kappa = 0.0;
  ForcingSpec forcing;
  IntegratorConfig integrator;
  std::int64_t overflow_count = 0;

  double value(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
  double epsilon(int i) const { return ranges.epsilon.at(i); }
  double a(int j) const { return ranges.a.at(j); }
  std::int64_t evaluations() const { return static_cast<std::int64_t>(values.size()); }
};

/// Evaluates tr Phi(a - kappa^2, eps) at every node. `threads` = 0 uses the
/// hardware concurrency, 1 runs serially; rows are split into contiguous blocks
/// and every partition produces the same grid.
StabilityGrid grid_scan(const GridRanges& ranges, const HillPropagator& prop, double kappa = 0.0,
                        unsigned threads = 0);
StabilityGrid grid_scan(const GridRanges& ranges, const Forcing& forcing, double kappa,
                        const IntegratorConfig& cfg, unsigned threads = 0);

struct Point2 {
  double epsilon = 0.0;
  double a = 0.0;
};

struct ContourPolyline {
  double level = 0.0;
  std::vector<Point2> points;
  bool closed = false;
};

/// Marching squares with linear edge interpolation. Saddle cells are resolved by
/// the mean of the four corners; cells touching a non-finite node are skipped.
std::vector<ContourPolyline> marching_squares(const StabilityGrid& grid, double level);

/// Contours at +target and -target.
std::vector<ContourPolyline> stability_contours(const StabilityGrid& grid, double target = 2.0);

enum class Stability { Stable, Unstable, Marginal };
std::string to_string(Stability s);

struct Classification {
  Stability stability = Stability::Stable;
  double trace = 0.0;
  double target = 2.0;
  bool overflow = false;
};

/// |tr| against 2 (or 2cosh(2 pi kappa)) with a marginal band of 1e-9.
Classification classify(const Params& params, const HillPropagator& prop);
Classification classify(const Params& params, const Forcing& forcing, const IntegratorConfig& cfg);

constexpr double kMarginalBand = 1e-9;

struct BenchWindow {
  GridRanges grid;
  std::vector<int> tongues;
  TraceConfig trace;
};

/// eps in [0, 1.5], a in [-1, 3] at (0.02, 0.02) against the tracer at
/// d_eps = 0.05 for tongues 1-3 up to eps = 1.5.
BenchWindow fig3_window();

struct BenchReport {
  std::int64_t grid_nodes = 0;
  std::int64_t grid_evaluations = 0;
  std::int64_t grid_overflow = 0;
  std::int64_t contour_polylines = 0;
  double grid_seconds = 0.0;
  double contour_seconds = 0.0;

  std::int64_t tracer_trace_evaluations = 0;
  std::int64_t tracer_bundle_evaluations = 0;
  std::int64_t tracer_points = 0;
  double tracer_seconds = 0.0;

  /// (grid + contour time) / tracer time, each the best of `repeats` runs
  double speedup = 0.0;
  int repeats = 1;

  std::vector<BoundaryCurve> curves;
  std::vector<ContourPolyline> contours;
};

/// Serial wall-clock comparison of the two methods on the same window.
BenchReport benchmark(const BenchWindow& window, const Forcing& forcing, const IntegratorConfig& cfg,
                      int repeats = 3);

/// Largest distance from a point of `from` to the polyline set `to`.
double directed_hausdorff(const std::vector<Point2>& from, const std::vector<std::vector<Point2>>& to);
/// Symmetric Hausdorff distance between two polyline sets (vertices against segments).
double hausdorff(const std::vector<std::vector<Point2>>& x, const std::vector<std::vector<Point2>>& y);

/// Splits polylines at the box boundary, keeping the parts inside.
std::vector<std::vector<Point2>> clip_to_box(const std::vector<std::vector<Point2>>& lines,
                                             double eps_min, double eps_max, double a_min,
                                             double a_max);

std::vector<Point2> to_points(const BoundaryCurve& curve);

}  // namespace hill
