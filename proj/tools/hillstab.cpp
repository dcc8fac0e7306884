// hillstab: stability boundaries of Hill's equation from the command line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hill/baseline.hpp"
#include "hill/damped.hpp"
#include "hill/io.hpp"
#include "hill/monodromy.hpp"
#include "hill/tracer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Settings {
  std::string forcing = "cosine";
  std::vector<int> tongues;
  bool kapitza = false;
  double kappa = 0.0;
  int steps = 4096;
  std::string scheme = "symplectic-euler";
  double deps_step = 0.05;
  double eps_max = 2.0;
  double eps_min = 0.0;
  double a_min = -1.0;
  double a_max = 3.0;
  double da = 0.02;
  double deps = 0.02;
  bool contours = false;
  bool svg = false;
  bool serial = false;
  int repeats = 3;
  std::string window = "fig3";
  std::string document;
  std::string grid;
  std::string title;
  std::string out = ".";
  std::string name;
  std::string config;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

hill::IntegratorConfig integrator(const Settings& s) {
  hill::IntegratorConfig c;
  c.scheme = hill::parse_scheme(s.scheme);
  c.steps_per_period = s.steps;
  hill::validate(c);
  return c;
}

hill::TraceConfig trace_config(const Settings& s) {
  hill::TraceConfig c;
  c.d_epsilon = s.deps_step;
  c.epsilon_max = s.eps_max;
  hill::validate(c);
  return c;
}

fs::path output_path(const Settings& s, const std::string& fallback, const std::string& ext) {
  return fs::path(s.out) / ((s.name.empty() ? fallback : s.name) + ext);
}

// Every option of a subcommand can also be set as HILLSTAB_<NAME> in the environment.
void add_env_names(CLI::App* sub) {
  for (CLI::Option* opt : sub->get_options()) {
    std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) {
      return c == '-' ? '_' : static_cast<char>(std::toupper(c));
    });
    opt->envname("HILLSTAB_" + name);
  }
}

std::vector<std::string> config_values(const std::string& key, const json& v) {
  if (v.is_array()) {
    std::vector<std::string> out;
    for (const auto& e : v) {
      const auto one = config_values(key, e);
      out.insert(out.end(), one.begin(), one.end());
    }
    return out;
  }
  if (v.is_string()) return {v.get<std::string>()};
  if (v.is_boolean()) return {v.get<bool>() ? "true" : "false"};
  if (v.is_number_integer()) return {std::to_string(v.get<long long>())};
  if (v.is_number()) return {hill::format_number(v.get<double>())};
  throw hill::Error(hill::ErrorCode::InvalidArgument, "config key '" + key + "' has an unsupported value");
}

// Fills options that were not given on the command line or in the environment.
// Accepts a plain object of flag values or a stability map document.
void apply_config(CLI::App* sub, const std::string& path) {
  json j;
  try {
    j = json::parse(hill::read_file(path));
  } catch (const json::exception& e) {
    throw hill::Error(hill::ErrorCode::Io, "config '" + path + "': " + e.what());
  }
  if (j.contains("metadata") && j["metadata"].contains("config")) j = j["metadata"]["config"];
  if (!j.is_object()) throw hill::Error(hill::ErrorCode::InvalidArgument, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    CLI::Option* opt = key == "config" || key == "help" ? nullptr : sub->get_option_no_throw("--" + key);
    if (!opt) {
      throw hill::Error(hill::ErrorCode::InvalidArgument,
                        "unknown config key '" + key + "' for '" + sub->get_name() + "'");
    }
    if (opt->count() > 0) continue;
    opt->add_result(config_values(key, value));
    opt->run_callback();
  }
}

json shared_config(const Settings& s) {
  return {{"forcing", s.forcing}, {"steps", s.steps}, {"scheme", s.scheme}};
}

hill::RunMetadata base_metadata(const std::string& command, const Settings& s) {
  hill::RunMetadata m;
  m.command = command;
  m.forcing = s.forcing;
  m.kappa = s.kappa;
  m.integrator = integrator(s);
  m.tongues = s.tongues;
  m.kapitza = s.kapitza;
  m.config = shared_config(s);
  return m;
}

// Re-evaluates every emitted point with a fresh propagator.
std::vector<std::string> verify_residuals(const std::vector<hill::BoundaryCurve>& curves,
                                          const hill::Forcing& forcing, const hill::IntegratorConfig& cfg,
                                          double tolerance) {
  const hill::HillPropagator prop(forcing, cfg);
  std::vector<std::string> failures;
  for (const auto& c : curves) {
    double worst = 0.0;
    for (const auto& p : c.points) {
      const double tr = prop.trace(p.a - c.kappa * c.kappa, p.epsilon);
      worst = std::max(worst, std::abs(std::abs(tr) - c.target));
    }
    if (!(worst <= tolerance)) {
      std::ostringstream os;
      os << "tongue " << c.tongue_index << " " << hill::to_string(c.branch) << ": residual " << worst
         << " exceeds " << tolerance;
      failures.push_back(os.str());
    }
  }
  return failures;
}

void write_document(const Settings& s, const std::string& fallback, const hill::StabilityMapDocument& doc) {
  fs::create_directories(s.out);
  std::ostringstream csv;
  hill::write_curves_csv(csv, doc.curves, doc.metadata);
  hill::write_file(output_path(s, fallback, ".csv").string(), csv.str());
  hill::write_file(output_path(s, fallback, ".json").string(), hill::to_json(doc).dump(2) + "\n");
  if (s.svg) {
    hill::PlotOptions opt;
    opt.title = s.title.empty() ? doc.metadata.forcing : s.title;
    hill::write_file(output_path(s, fallback, ".svg").string(), hill::render_svg(doc.curves, nullptr, opt));
  }
}

int report(const hill::StabilityMapDocument& doc, const Settings& s, const std::string& fallback) {
  std::cout << doc.curves.size() << " curves";
  std::size_t points = 0;
  for (const auto& c : doc.curves) points += c.points.size();
  std::cout << ", " << points << " points, " << doc.metadata.elapsed_seconds << " s -> "
            << output_path(s, fallback, ".json").string() << "\n";
  for (const auto& f : doc.metadata.failures) std::cerr << "hillstab: " << f << "\n";
  return doc.metadata.failures.empty() ? 0 : kExitFailure;
}

template <class Task>
auto run_all(const std::vector<int>& tongues, bool serial, Task task) {
  using R = decltype(task(0));
  std::vector<std::future<R>> jobs;
  for (int n : tongues) {
    jobs.push_back(std::async(serial ? std::launch::deferred : std::launch::async, task, n));
  }
  std::vector<R> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

int cmd_trace(const Settings& s) {
  const auto t0 = Clock::now();
  const hill::Forcing forcing = hill::parse_forcing(s.forcing);
  const hill::IntegratorConfig icfg = integrator(s);
  const hill::TraceConfig tcfg = trace_config(s);
  const hill::HillPropagator prop(forcing, icfg);

  struct Result {
    std::vector<hill::BoundaryCurve> curves;
    std::string failure;
  };
  auto results = run_all(s.tongues, s.serial, [&](int n) {
    Result r;
    try {
      auto [upper, lower] = hill::trace_tongue(n, prop, tcfg);
      r.curves = {std::move(upper), std::move(lower)};
    } catch (const hill::Error& e) {
      r.failure = "tongue " + std::to_string(n) + ": " + e.what();
    }
    return r;
  });

  hill::StabilityMapDocument doc;
  doc.metadata = base_metadata("trace", s);
  doc.metadata.trace = tcfg;
  for (auto& r : results) {
    for (auto& c : r.curves) {
      if (c.truncated) doc.metadata.failures.push_back("tongue " + std::to_string(c.tongue_index) + " " +
                                                       hill::to_string(c.branch) + " truncated: " +
                                                       c.truncation_reason);
      doc.curves.push_back(std::move(c));
    }
    if (!r.failure.empty()) doc.metadata.failures.push_back(r.failure);
  }
  if (s.kapitza) {
    try {
      for (auto& c : hill::trace_kapitza_boundary(prop, tcfg)) doc.curves.push_back(std::move(c));
    } catch (const hill::Error& e) {
      doc.metadata.failures.push_back(std::string("kapitza: ") + e.what());
    }
  }
  const auto residual = verify_residuals(doc.curves, forcing, icfg, tcfg.trace_tolerance);
  doc.metadata.failures.insert(doc.metadata.failures.end(), residual.begin(), residual.end());

  doc.metadata.config["tongues"] = s.tongues;
  doc.metadata.config["kapitza"] = s.kapitza;
  doc.metadata.config["deps-step"] = s.deps_step;
  doc.metadata.config["eps-max"] = s.eps_max;
  doc.metadata.elapsed_seconds = seconds_since(t0);
  write_document(s, "trace", doc);
  return report(doc, s, "trace");
}

int cmd_damped(const Settings& s) {
  if (!(s.kappa > 0.0)) {
    std::cerr << "hillstab: damped needs --kappa > 0; use 'hillstab trace' for the undamped equation\n";
    return kExitUsage;
  }
  const auto t0 = Clock::now();
  const hill::Forcing forcing = hill::parse_forcing(s.forcing);
  const hill::IntegratorConfig icfg = integrator(s);
  const hill::TraceConfig tcfg = trace_config(s);
  const hill::HillPropagator prop(forcing, icfg);

  struct Result {
    std::optional<hill::DampedTongue> tongue;
    std::string failure;
  };
  auto results = run_all(s.tongues, s.serial, [&](int n) {
    Result r;
    try {
      r.tongue = hill::trace_damped_tongue(n, s.kappa, prop, tcfg);
    } catch (const hill::Error& e) {
      r.failure = "tongue " + std::to_string(n) + ": " + e.what();
    }
    return r;
  });

  hill::StabilityMapDocument doc;
  doc.metadata = base_metadata("damped", s);
  doc.metadata.trace = tcfg;
  for (auto& r : results) {
    if (r.tongue) {
      doc.metadata.tips.push_back(r.tongue->tip);
      for (auto* c : {&r.tongue->upper, &r.tongue->lower}) {
        if (c->truncated) doc.metadata.failures.push_back("tongue " + std::to_string(c->tongue_index) + " " +
                                                          hill::to_string(c->branch) + " truncated: " +
                                                          c->truncation_reason);
        doc.curves.push_back(std::move(*c));
      }
    }
    if (!r.failure.empty()) doc.metadata.failures.push_back(r.failure);
  }
  const auto residual = verify_residuals(doc.curves, forcing, icfg, tcfg.trace_tolerance);
  doc.metadata.failures.insert(doc.metadata.failures.end(), residual.begin(), residual.end());

  doc.metadata.config["tongues"] = s.tongues;
  doc.metadata.config["kappa"] = s.kappa;
  doc.metadata.config["deps-step"] = s.deps_step;
  doc.metadata.config["eps-max"] = s.eps_max;
  doc.metadata.elapsed_seconds = seconds_since(t0);
  write_document(s, "damped", doc);
  for (const auto& t : doc.metadata.tips) {
    std::cout << "tip n=" << t.tongue_index << ": eps0=" << hill::format_number(t.epsilon0)
              << " a0=" << hill::format_number(t.a0) << "\n";
  }
  return report(doc, s, "damped");
}

hill::GridRanges grid_ranges(const Settings& s) {
  hill::GridRanges r{{s.eps_min, s.eps_max, s.deps}, {s.a_min, s.a_max, s.da}};
  hill::validate(r);
  return r;
}

int cmd_grid(const Settings& s) {
  const auto t0 = Clock::now();
  const hill::Forcing forcing = hill::parse_forcing(s.forcing);
  const hill::IntegratorConfig icfg = integrator(s);
  const hill::StabilityGrid g = hill::grid_scan(grid_ranges(s), forcing, s.kappa, icfg, s.serial ? 1u : 0u);
  const double scan = seconds_since(t0);

  fs::create_directories(s.out);
  std::ostringstream csv;
  hill::write_grid_csv(csv, g);
  const fs::path grid_path = output_path(s, "grid", ".csv");
  hill::write_file(grid_path.string(), csv.str());
  std::cout << g.rows << " x " << g.cols << " nodes in " << scan << " s -> " << grid_path.string() << "\n";
  if (g.overflow_count > 0) std::cout << g.overflow_count << " nodes overflowed\n";
  if (s.contours) {
    const auto lines = hill::stability_contours(g, hill::damped_threshold(s.kappa));
    std::ostringstream cs;
    hill::write_contours_csv(cs, lines, g);
    const fs::path path = output_path(s, "grid", "_contours.csv");
    hill::write_file(path.string(), cs.str());
    std::cout << lines.size() << " contour polylines -> " << path.string() << "\n";
  }
  return 0;
}

int cmd_bench(const Settings& s) {
  if (s.window != "fig3") {
    throw hill::Error(hill::ErrorCode::InvalidArgument, "unknown window '" + s.window + "' (expected fig3)");
  }
  const hill::Forcing forcing = hill::parse_forcing(s.forcing);
  const hill::BenchWindow w = hill::fig3_window();
  const hill::BenchReport r = hill::benchmark(w, forcing, integrator(s), s.repeats);

  std::cout << "window fig3: eps [" << w.grid.epsilon.min << ", " << w.grid.epsilon.max << "] step "
            << w.grid.epsilon.step << ", a [" << w.grid.a.min << ", " << w.grid.a.max << "] step "
            << w.grid.a.step << "\n";
  std::cout << "grid:   " << r.grid_nodes << " nodes, " << r.grid_evaluations << " trace evaluations, "
            << r.contour_polylines << " polylines, " << r.grid_seconds + r.contour_seconds << " s\n";
  std::cout << "tracer: " << r.tracer_points << " points, " << r.tracer_trace_evaluations << " traces + "
            << r.tracer_bundle_evaluations << " sensitivity bundles, " << r.tracer_seconds << " s\n";
  std::cout << "speedup: " << r.speedup << " (best of " << r.repeats << ", serial)\n";

  json j = hill::to_json(r);
  j["window"] = s.window;
  j["forcing"] = s.forcing;
  j["integrator"] = hill::to_json(integrator(s));
  j["version"] = hill::kToolVersion;
  j["config"] = shared_config(s);
  j["config"]["window"] = s.window;
  j["config"]["repeats"] = s.repeats;
  fs::create_directories(s.out);
  const fs::path path = output_path(s, "bench", ".json");
  hill::write_file(path.string(), j.dump(2) + "\n");
  std::cout << "report -> " << path.string() << "\n";
  return 0;
}

int cmd_plot(const Settings& s) {
  std::vector<hill::BoundaryCurve> curves;
  std::string grid_path = s.grid;
  std::string title = s.title;
  if (!s.document.empty()) {
    json j;
    try {
      j = json::parse(hill::read_file(s.document));
    } catch (const json::exception& e) {
      throw hill::Error(hill::ErrorCode::Io, "document '" + s.document + "': " + e.what());
    }
    hill::StabilityMapDocument doc = hill::document_from_json(j);
    curves = std::move(doc.curves);
    if (grid_path.empty() && doc.grid_file) {
      grid_path = (fs::path(s.document).parent_path() / *doc.grid_file).string();
    }
    if (title.empty()) title = doc.metadata.forcing;
  }
  std::optional<hill::StabilityGrid> grid;
  if (!grid_path.empty()) {
    std::istringstream is(hill::read_file(grid_path));
    grid = hill::read_grid_csv(is);
  }
  hill::PlotOptions opt;
  opt.title = title;
  if (grid && !curves.empty()) opt.width = 1080;
  fs::create_directories(s.out);
  const fs::path path = output_path(s, "plot", ".svg");
  hill::write_file(path.string(), hill::render_svg(curves, grid ? &*grid : nullptr, opt));
  std::cout << "-> " << path.string() << "\n";
  return 0;
}

int cmd_validate_forcing(const Settings& s) {
  const hill::Forcing f = hill::parse_forcing(s.forcing);
  const auto starts = f.segment_starts();
  std::cout << "ok: " << f.name() << ", " << starts.size() << " segment" << (starts.size() == 1 ? "" : "s")
            << " per period\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability boundaries of Hill's equation"};
  app.set_version_flag("--version", std::string(hill::kToolVersion));
  app.require_subcommand(1);
  Settings s;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--forcing", s.forcing, "cosine, square:<duty>, ramp or piecewise:<file>")
        ->capture_default_str();
    sub->add_option("--steps", s.steps, "integration steps per period")->capture_default_str();
    sub->add_option("--scheme", s.scheme, "symplectic-euler or trapezoid")->capture_default_str();
    sub->add_option("--out", s.out, "output directory")->capture_default_str();
    sub->add_option("--name", s.name, "output file stem");
    sub->add_option("--config", s.config, "JSON file of flag values or a previous document");
  };
  auto tracing = [&](CLI::App* sub) {
    sub->add_option("--tongues", s.tongues, "tongue indices, e.g. 1,2,3")->delimiter(',');
    sub->add_option("--deps-step", s.deps_step, "output spacing in eps")->capture_default_str();
    sub->add_option("--eps-max", s.eps_max, "end of the eps window")->capture_default_str();
    sub->add_flag("--serial", s.serial, "trace tongues one after another");
    sub->add_flag("--svg", s.svg, "also write an SVG diagram");
    sub->add_option("--title", s.title, "diagram title");
  };

  CLI::App* trace = app.add_subcommand("trace", "trace undamped tongue boundaries");
  common(trace);
  tracing(trace);
  trace->add_flag("--kapitza", s.kapitza, "also trace the a < 0 stabilization window");

  CLI::App* damped = app.add_subcommand("damped", "tip search and boundaries with damping");
  common(damped);
  tracing(damped);
  damped->add_option("--kappa", s.kappa, "damping coefficient (> 0)");

  CLI::App* grid = app.add_subcommand("grid", "brute-force trace grid");
  common(grid);
  grid->add_option("--kappa", s.kappa, "damping coefficient")->capture_default_str();
  grid->add_option("--eps-min", s.eps_min)->capture_default_str();
  grid->add_option("--eps-max", s.eps_max)->capture_default_str();
  grid->add_option("--a-min", s.a_min)->capture_default_str();
  grid->add_option("--a-max", s.a_max)->capture_default_str();
  grid->add_option("--deps", s.deps, "eps spacing")->capture_default_str();
  grid->add_option("--da", s.da, "a spacing")->capture_default_str();
  grid->add_flag("--contours", s.contours, "export marching-squares contours");
  grid->add_flag("--serial", s.serial, "scan on one thread");

  CLI::App* bench = app.add_subcommand("bench", "time the tracer against the grid method");
  common(bench);
  bench->add_option("--window", s.window, "benchmark window")->capture_default_str();
  bench->add_option("--repeats", s.repeats, "timed repeats per method")->capture_default_str();

  CLI::App* plot = app.add_subcommand("plot", "render a document and/or grid as SVG");
  plot->add_option("document", s.document, "stability map document (JSON)");
  plot->add_option("--grid", s.grid, "grid CSV");
  plot->add_option("--title", s.title, "diagram title");
  plot->add_option("--out", s.out, "output directory")->capture_default_str();
  plot->add_option("--name", s.name, "output file stem");

  CLI::App* validate = app.add_subcommand("validate-forcing", "check a forcing specification");
  validate->add_option("--forcing", s.forcing)->capture_default_str();

  for (CLI::App* sub : {trace, damped, grid, bench, plot, validate}) add_env_names(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (CLI::App* sub : {trace, damped, grid, bench}) {
      if (sub->parsed() && !s.config.empty()) apply_config(sub, s.config);
    }
    if (s.tongues.empty()) s.tongues = damped->parsed() ? std::vector<int>{1, 2} : std::vector<int>{1, 2, 3};
    if (trace->parsed()) return cmd_trace(s);
    if (damped->parsed()) return cmd_damped(s);
    if (grid->parsed()) return cmd_grid(s);
    if (bench->parsed()) return cmd_bench(s);
    if (plot->parsed()) return cmd_plot(s);
    if (validate->parsed()) return cmd_validate_forcing(s);
  } catch (const hill::Error& e) {
    std::cerr << "hillstab: " << e.what() << "\n";
    return e.code() == hill::ErrorCode::Io ? kExitFailure : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "hillstab: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
