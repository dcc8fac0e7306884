#include "hill/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "hill/rk.hpp"

namespace hill {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string forcing_label(const ForcingSpec& spec) { return Forcing(spec).name(); }

std::string breakpoint_text(const ForcingSpec& spec) {
  std::string out;
  for (const auto& b : spec.breakpoints) {
    if (!out.empty()) out += ";";
    out += format_number(b.phase) + " " + format_number(b.value);
  }
  return out;
}

ForcingSpec spec_from_label(const std::string& label, const std::string& breakpoints) {
  if (label == "piecewise") {
    std::vector<Breakpoint> bps;
    std::istringstream is(breakpoints);
    std::string item;
    while (std::getline(is, item, ';')) {
      std::istringstream ls(item);
      Breakpoint b;
      if (ls >> b.phase >> b.value) bps.push_back(b);
    }
    return ForcingSpec::piecewise(std::move(bps));
  }
  return parse_forcing(label).spec();
}

}  // namespace

json to_json(const BoundaryCurve& c) {
  json pts = json::array();
  for (const auto& p : c.points) {
    pts.push_back({{"epsilon", p.epsilon},
                   {"a", p.a},
                   {"trace", p.trace_value},
                   {"residual", p.residual},
                   {"orientation", to_string(p.orientation)},
                   {"slope", number_or_null(p.slope)},
                   {"correction", p.correction}});
  }
  return {{"tongue", c.tongue_index},
          {"branch", to_string(c.branch)},
          {"target", c.target},
          {"sign", c.sign},
          {"kappa", c.kappa},
          {"truncated", c.truncated},
          {"truncation_reason", c.truncation_reason},
          {"evaluations", {{"traces", c.evaluations.traces}, {"bundles", c.evaluations.bundles}}},
          {"points", pts}};
}

BoundaryCurve curve_from_json(const json& j) {
  BoundaryCurve c;
  c.tongue_index = j.at("tongue").get<int>();
  c.branch = j.at("branch").get<std::string>() == "lower" ? Branch::Lower : Branch::Upper;
  c.target = j.value("target", 2.0);
  c.sign = j.value("sign", 1);
  c.kappa = j.value("kappa", 0.0);
  c.truncated = j.value("truncated", false);
  c.truncation_reason = j.value("truncation_reason", std::string());
  if (j.contains("evaluations")) {
    c.evaluations.traces = j["evaluations"].value("traces", std::int64_t{0});
    c.evaluations.bundles = j["evaluations"].value("bundles", std::int64_t{0});
  }
  for (const auto& p : j.at("points")) {
    BoundaryPoint bp;
    bp.epsilon = p.at("epsilon").get<double>();
    bp.a = p.at("a").get<double>();
    bp.trace_value = p.value("trace", 0.0);
    bp.residual = p.value("residual", 0.0);
    bp.orientation = p.value("orientation", std::string("da/deps")) == "deps/da" ? Orientation::DepsDa
                                                                                 : Orientation::DaDeps;
    bp.slope = p.contains("slope") ? number_from(p["slope"]) : std::numeric_limits<double>::quiet_NaN();
    bp.correction = p.value("correction", 0.0);
    c.points.push_back(bp);
  }
  return c;
}

json to_json(const TongueTip& t) {
  return {{"tongue", t.tongue_index},     {"kappa", t.kappa},
          {"epsilon0", t.epsilon0},       {"a0", t.a0},
          {"trace", t.trace_at_tip},      {"d_trace_da", t.d_trace_da_at_tip}};
}

json to_json(const IntegratorConfig& c) {
  return {{"scheme", to_string(c.scheme)},
          {"steps_per_period", c.steps_per_period},
          {"sensitivity_stride", c.sensitivity_stride},
          {"sensitivity_integrator", rk::DormandPrince::name},
          {"interpolation", "cubic-hermite"}};
}

json to_json(const TraceConfig& c) {
  return {{"d_epsilon", c.d_epsilon},
          {"epsilon_max", c.epsilon_max},
          {"trace_tolerance", c.trace_tolerance},
          {"slope_switch_threshold", c.slope_switch_threshold},
          {"bootstrap_offset", c.bootstrap_offset},
          {"max_points", c.max_points},
          {"rk_atol", c.rk_atol},
          {"rk_rtol", c.rk_rtol},
          {"max_step_multiple", c.max_step_multiple},
          {"kapitza_epsilon", c.kapitza_epsilon},
          {"kapitza_a_min", c.kapitza_a_min},
          {"kapitza_samples", c.kapitza_samples}};
}

json to_json(const RunMetadata& m) {
  json tips = json::array();
  for (const auto& t : m.tips) tips.push_back(to_json(t));
  json j = {{"tool", "hillstab"},
            {"version", kToolVersion},
            {"command", m.command},
            {"forcing", m.forcing},
            {"kappa", m.kappa},
            {"integrator", to_json(m.integrator)},
            {"tongues", m.tongues},
            {"kapitza", m.kapitza},
            {"elapsed_seconds", m.elapsed_seconds},
            {"tips", tips},
            {"config", m.config},
            {"failures", m.failures}};
  if (m.trace) j["trace"] = to_json(*m.trace);
  return j;
}

json to_json(const StabilityMapDocument& d) {
  json curves = json::array();
  for (const auto& c : d.curves) curves.push_back(to_json(c));
  json j = {{"metadata", to_json(d.metadata)}, {"curves", curves}};
  if (d.grid_file) j["grid_file"] = *d.grid_file;
  return j;
}

json to_json(const BenchReport& r) {
  return {{"grid", {{"nodes", r.grid_nodes},
                    {"evaluations", r.grid_evaluations},
                    {"overflow", r.grid_overflow},
                    {"polylines", r.contour_polylines},
                    {"scan_seconds", r.grid_seconds},
                    {"contour_seconds", r.contour_seconds}}},
          {"tracer", {{"trace_evaluations", r.tracer_trace_evaluations},
                      {"bundle_evaluations", r.tracer_bundle_evaluations},
                      {"points", r.tracer_points},
                      {"seconds", r.tracer_seconds}}},
          {"speedup", r.speedup},
          {"repeats", r.repeats}};
}

StabilityMapDocument document_from_json(const json& j) {
  StabilityMapDocument d;
  if (j.contains("metadata")) {
    const json& m = j["metadata"];
    d.metadata.command = m.value("command", std::string());
    d.metadata.forcing = m.value("forcing", std::string());
    d.metadata.kappa = m.value("kappa", 0.0);
    if (m.contains("config")) d.metadata.config = m["config"];
    if (m.contains("tongues")) d.metadata.tongues = m["tongues"].get<std::vector<int>>();
    d.metadata.kapitza = m.value("kapitza", false);
  }
  if (j.contains("curves")) {
    for (const auto& c : j["curves"]) d.curves.push_back(curve_from_json(c));
  }
  if (j.contains("grid_file")) d.grid_file = j["grid_file"].get<std::string>();
  return d;
}

void write_curves_csv(std::ostream& os, const std::vector<BoundaryCurve>& curves, const RunMetadata& meta) {
  os << "# hillstab curves\n";
  os << "# version: " << kToolVersion << "\n";
  os << "# command: " << meta.command << "\n";
  os << "# forcing: " << meta.forcing << "\n";
  os << "# kappa: " << format_number(meta.kappa) << "\n";
  os << "# scheme: " << to_string(meta.integrator.scheme) << "\n";
  os << "# steps_per_period: " << meta.integrator.steps_per_period << "\n";
  if (meta.trace) {
    os << "# d_epsilon: " << format_number(meta.trace->d_epsilon) << "\n";
    os << "# epsilon_max: " << format_number(meta.trace->epsilon_max) << "\n";
    os << "# trace_tolerance: " << format_number(meta.trace->trace_tolerance) << "\n";
  }
  os << "# config: " << meta.config.dump() << "\n";
  os << "tongue,branch,epsilon,a,trace,residual\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      os << c.tongue_index << ',' << to_string(c.branch) << ',' << format_number(p.epsilon) << ','
         << format_number(p.a) << ',' << format_number(p.trace_value) << ',' << format_number(p.residual)
         << '\n';
    }
  }
}

void write_grid_csv(std::ostream& os, const StabilityGrid& g) {
  const auto range = [](const Range& r) {
    return format_number(r.min) + "," + format_number(r.max) + "," + format_number(r.step);
  };
  os << "# hillstab grid\n";
  os << "# version: " << kToolVersion << "\n";
  os << "# forcing: " << forcing_label(g.forcing) << "\n";
  if (g.forcing.kind == ForcingKind::PiecewiseConstant) {
    os << "# breakpoints: " << breakpoint_text(g.forcing) << "\n";
  }
  os << "# kappa: " << format_number(g.kappa) << "\n";
  os << "# scheme: " << to_string(g.integrator.scheme) << "\n";
  os << "# steps_per_period: " << g.integrator.steps_per_period << "\n";
  os << "# eps_range: " << range(g.ranges.epsilon) << "\n";
  os << "# a_range: " << range(g.ranges.a) << "\n";
  os << "# rows: " << g.rows << "\n";
  os << "# cols: " << g.cols << "\n";
  os << "# overflow: " << g.overflow_count << "\n";
  os << "# layout: row i is eps_min + i*deps, column j is a_min + j*da\n";
  for (int i = 0; i < g.rows; ++i) {
    for (int j = 0; j < g.cols; ++j) {
      if (j) os << ',';
      os << format_number(g.value(i, j));
    }
    os << '\n';
  }
}

StabilityGrid read_grid_csv(std::istream& is) {
  std::map<std::string, std::string> meta;
  std::vector<double> values;
  std::string line;
  auto bad = [](const std::string& why) { throw Error(ErrorCode::Io, "grid file: " + why); };
  auto to_double = [&](const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) bad("bad number '" + s + "'");
    return v;
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1), val = line.substr(colon + 1);
      key.erase(0, key.find_first_not_of(' '));
      val.erase(0, val.find_first_not_of(' '));
      meta[key] = val;
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) values.push_back(to_double(cell));
  }
  auto need = [&](const char* k) -> const std::string& {
    const auto it = meta.find(k);
    if (it == meta.end()) bad(std::string("missing '") + k + "'");
    return it->second;
  };
  auto range = [&](const std::string& s) {
    Range r;
    std::istringstream rs(s);
    std::string a, b, c;
    std::getline(rs, a, ',');
    std::getline(rs, b, ',');
    std::getline(rs, c, ',');
    r.min = to_double(a);
    r.max = to_double(b);
    r.step = to_double(c);
    return r;
  };

  StabilityGrid g;
  g.ranges.epsilon = range(need("eps_range"));
  g.ranges.a = range(need("a_range"));
  validate(g.ranges);
  g.rows = g.ranges.epsilon.count();
  g.cols = g.ranges.a.count();
  if (values.size() != static_cast<std::size_t>(g.rows) * g.cols) bad("value count does not match ranges");
  g.values = std::move(values);
  g.kappa = to_double(need("kappa"));
  g.forcing = spec_from_label(need("forcing"), meta.count("breakpoints") ? meta["breakpoints"] : "");
  if (meta.count("scheme")) g.integrator.scheme = parse_scheme(meta["scheme"]);
  if (meta.count("steps_per_period")) g.integrator.steps_per_period = std::stoi(meta["steps_per_period"]);
  g.overflow_count = std::count_if(g.values.begin(), g.values.end(), [](double v) { return !std::isfinite(v); });
  return g;
}

void write_contours_csv(std::ostream& os, const std::vector<ContourPolyline>& lines, const StabilityGrid& g) {
  os << "# hillstab contours\n";
  os << "# version: " << kToolVersion << "\n";
  os << "# forcing: " << forcing_label(g.forcing) << "\n";
  os << "# kappa: " << format_number(g.kappa) << "\n";
  os << "# saddle_rule: cell-centre average\n";
  os << "polyline,level,epsilon,a\n";
  for (std::size_t k = 0; k < lines.size(); ++k) {
    for (const auto& p : lines[k].points) {
      os << k << ',' << format_number(lines[k].level) << ',' << format_number(p.epsilon) << ','
         << format_number(p.a) << '\n';
    }
  }
}

namespace {

struct Box {
  double x0, x1, y0, y1;
};

double nice_step(double span, int target_ticks) {
  const double raw = span / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* tongue_colour(int n) {
  static const char* colours[] = {"#444444", "#c0392b", "#2471a3", "#1e8449", "#7d3c98", "#b9770e"};
  return colours[std::clamp(n, 0, 5)];
}

class Panel {
 public:
  Panel(double left, double top, double w, double h, Box data) : l_(left), t_(top), w_(w), h_(h), d_(data) {}

  double x(double eps) const { return l_ + (eps - d_.x0) / (d_.x1 - d_.x0) * w_; }
  double y(double a) const { return t_ + h_ - (a - d_.y0) / (d_.y1 - d_.y0) * h_; }

  void axes(std::ostringstream& os, const std::string& label) const {
    os << "<rect x=\"" << fixed(l_) << "\" y=\"" << fixed(t_) << "\" width=\"" << fixed(w_) << "\" height=\""
       << fixed(h_) << "\" fill=\"none\" stroke=\"#000\"/>\n";
    const double sx = nice_step(d_.x1 - d_.x0, 6), sy = nice_step(d_.y1 - d_.y0, 6);
    for (double v = std::ceil(d_.x0 / sx - 1e-9) * sx; v <= d_.x1 + 1e-9 * sx; v += sx) {
      os << "<line x1=\"" << fixed(x(v)) << "\" y1=\"" << fixed(t_ + h_) << "\" x2=\"" << fixed(x(v))
         << "\" y2=\"" << fixed(t_ + h_ + 5) << "\" stroke=\"#000\"/>\n";
      os << "<text x=\"" << fixed(x(v)) << "\" y=\"" << fixed(t_ + h_ + 18)
         << "\" font-size=\"11\" text-anchor=\"middle\">" << tick_label(v) << "</text>\n";
    }
    for (double v = std::ceil(d_.y0 / sy - 1e-9) * sy; v <= d_.y1 + 1e-9 * sy; v += sy) {
      os << "<line x1=\"" << fixed(l_ - 5) << "\" y1=\"" << fixed(y(v)) << "\" x2=\"" << fixed(l_) << "\" y2=\""
         << fixed(y(v)) << "\" stroke=\"#000\"/>\n";
      os << "<text x=\"" << fixed(l_ - 8) << "\" y=\"" << fixed(y(v) + 4)
         << "\" font-size=\"11\" text-anchor=\"end\">" << tick_label(v) << "</text>\n";
    }
    os << "<text x=\"" << fixed(l_ + w_ / 2) << "\" y=\"" << fixed(t_ + h_ + 36)
       << "\" font-size=\"13\" text-anchor=\"middle\">&#949;</text>\n";
    os << "<text x=\"" << fixed(l_ - 38) << "\" y=\"" << fixed(t_ + h_ / 2)
       << "\" font-size=\"13\" text-anchor=\"middle\">a</text>\n";
    if (!label.empty()) {
      os << "<text x=\"" << fixed(l_ + w_ / 2) << "\" y=\"" << fixed(t_ - 8)
         << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(label) << "</text>\n";
    }
  }

  void clip(std::ostringstream& os, const std::string& id) const {
    os << "<clipPath id=\"" << id << "\"><rect x=\"" << fixed(l_) << "\" y=\"" << fixed(t_) << "\" width=\""
       << fixed(w_) << "\" height=\"" << fixed(h_) << "\"/></clipPath>\n";
  }

 private:
  double l_, t_, w_, h_;
  Box d_;
};

void draw_curves(std::ostringstream& os, const Panel& p, const std::vector<BoundaryCurve>& curves) {
  // shade each tongue between its lower and upper branch
  std::map<std::pair<int, double>, std::pair<const BoundaryCurve*, const BoundaryCurve*>> tongues;
  for (const auto& c : curves) {
    if (c.tongue_index <= 0) continue;
    auto& slot = tongues[{c.tongue_index, c.kappa}];
    (c.branch == Branch::Upper ? slot.first : slot.second) = &c;
  }
  for (const auto& [key, pair] : tongues) {
    if (!pair.first || !pair.second) continue;
    os << "<polygon fill=\"" << tongue_colour(key.first) << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (const auto& pt : pair.second->points) os << fixed(p.x(pt.epsilon)) << ',' << fixed(p.y(pt.a)) << ' ';
    for (auto it = pair.first->points.rbegin(); it != pair.first->points.rend(); ++it) {
      os << fixed(p.x(it->epsilon)) << ',' << fixed(p.y(it->a)) << ' ';
    }
    os << "\"/>\n";
  }
  for (const auto& c : curves) {
    os << "<polyline fill=\"none\" stroke=\"" << tongue_colour(c.tongue_index)
       << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& pt : c.points) os << fixed(p.x(pt.epsilon)) << ',' << fixed(p.y(pt.a)) << ' ';
    os << "\"/>\n";
  }
}

void draw_grid(std::ostringstream& os, const Panel& p, const StabilityGrid& g, double band) {
  const double target = damped_threshold(g.kappa);
  // slightly oversized cells so neighbours do not leave antialiasing seams
  const double hw = 0.5 * std::abs(p.x(g.ranges.epsilon.step) - p.x(0.0)) + 0.2;
  const double hh = 0.5 * std::abs(p.y(g.ranges.a.step) - p.y(0.0)) + 0.2;
  for (int i = 0; i < g.rows; ++i) {
    for (int j = 0; j < g.cols; ++j) {
      const double v = std::abs(g.value(i, j));
      const char* fill = nullptr;
      if (std::abs(v - target) < band) {
        fill = "#000000";
      } else if (v > target) {
        fill = "#f2d7d5";
      }
      if (!fill) continue;
      os << "<rect x=\"" << fixed(p.x(g.epsilon(i)) - hw) << "\" y=\"" << fixed(p.y(g.a(j)) - hh)
         << "\" width=\"" << fixed(2 * hw) << "\" height=\"" << fixed(2 * hh) << "\" fill=\"" << fill
         << "\"/>\n";
    }
  }
}

}  // namespace

std::string render_svg(const std::vector<BoundaryCurve>& curves, const StabilityGrid* grid,
                       const PlotOptions& opt) {
  Box d{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  auto include = [&](double e, double a) {
    if (!std::isfinite(e) || !std::isfinite(a)) return;
    d.x0 = std::min(d.x0, e);
    d.x1 = std::max(d.x1, e);
    d.y0 = std::min(d.y0, a);
    d.y1 = std::max(d.y1, a);
  };
  for (const auto& c : curves) {
    for (const auto& p : c.points) include(p.epsilon, p.a);
  }
  if (grid && grid->rows > 0 && grid->cols > 0) {
    include(grid->epsilon(0), grid->a(0));
    include(grid->epsilon(grid->rows - 1), grid->a(grid->cols - 1));
  }
  if (!(d.x0 < d.x1)) {
    d.x0 = std::isfinite(d.x0) ? d.x0 - 0.5 : 0.0;
    d.x1 = d.x0 + 1.0;
  }
  if (!(d.y0 < d.y1)) {
    d.y0 = std::isfinite(d.y0) ? d.y0 - 0.5 : 0.0;
    d.y1 = d.y0 + 1.0;
  }

  const bool two = grid && !curves.empty();
  const double margin_l = 56, margin_r = 16, margin_t = opt.title.empty() ? 28 : 48, margin_b = 48;
  const double pw = (opt.width - margin_l - margin_r - (two ? margin_l : 0)) / (two ? 2.0 : 1.0);
  const double ph = opt.height - margin_t - margin_b;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
     << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  if (!opt.title.empty()) {
    os << "<text x=\"" << opt.width / 2 << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">"
       << escape(opt.title) << "</text>\n";
  }
  double left = margin_l;
  if (grid) {
    Panel p(left, margin_t, pw, ph, d);
    p.clip(os, "clip-grid");
    os << "<g clip-path=\"url(#clip-grid)\">\n";
    draw_grid(os, p, *grid, opt.band);
    os << "</g>\n";
    p.axes(os, two ? "grid contour" : "");
    left += pw + margin_l;
  }
  if (!grid || two) {
    Panel p(left, margin_t, pw, ph, d);
    p.clip(os, "clip-curves");
    os << "<g clip-path=\"url(#clip-curves)\">\n";
    draw_curves(os, p, curves);
    os << "</g>\n";
    p.axes(os, two ? "implicit function" : "");
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace hill
