#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hill/baseline.hpp"
#include "hill/damped.hpp"
#include "hill/tracer.hpp"

namespace hill {

inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest decimal string that reads back to the same double ("nan", "inf", "-inf" otherwise).
std::string format_number(double v);

struct RunMetadata {
  std::string command;
  std::string forcing;  // CLI name, e.g. square:0.3
  double kappa = 0.0;
  IntegratorConfig integrator;
  std::optional<TraceConfig> trace;
  std::vector<int> tongues;
  bool kapitza = false;
  double elapsed_seconds = 0.0;
  std::vector<TongueTip> tips;
  /// Flag values that reproduce the run when passed back through --config.
  nlohmann::json config = nlohmann::json::object();
  /// Per-tongue failures that did not abort the run.
  std::vector<std::string> failures;
};

struct StabilityMapDocument {
  RunMetadata metadata;
  std::vector<BoundaryCurve> curves;
  std::optional<std::string> grid_file;
};

nlohmann::json to_json(const BoundaryCurve& c);
BoundaryCurve curve_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TongueTip& t);
nlohmann::json to_json(const IntegratorConfig& c);
nlohmann::json to_json(const TraceConfig& c);
nlohmann::json to_json(const RunMetadata& m);
nlohmann::json to_json(const StabilityMapDocument& d);
nlohmann::json to_json(const BenchReport& r);
StabilityMapDocument document_from_json(const nlohmann::json& j);

/// Columns tongue, branch, epsilon, a, trace, residual after '#' metadata lines.
void write_curves_csv(std::ostream& os, const std::vector<BoundaryCurve>& curves, const RunMetadata& meta);
/// One line per eps row of trace values after '#' metadata lines.
void write_grid_csv(std::ostream& os, const StabilityGrid& grid);
StabilityGrid read_grid_csv(std::istream& is);
/// Columns polyline, level, epsilon, a.
void write_contours_csv(std::ostream& os, const std::vector<ContourPolyline>& lines, const StabilityGrid& grid);

struct PlotOptions {
  int width = 720;
  int height = 540;
  std::string title;
  /// Band drawn for grid panels, as in the contour method's 1.99 < |tr| < 2.01.
  double band = 0.01;
};

/// SVG stability diagram, eps horizontal and a vertical. With both a grid and
/// curves the grid band and the traced curves are drawn side by side.
std::string render_svg(const std::vector<BoundaryCurve>& curves, const StabilityGrid* grid,
                       const PlotOptions& opt = {});

/// Writes `text` to `path`, throwing Io on failure.
void write_file(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

}  // namespace hill
