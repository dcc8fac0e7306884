#include "hill/forcing.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hill {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MeanNotZero: return "MeanNotZero";
    case ErrorCode::DutyOutOfRange: return "DutyOutOfRange";
    case ErrorCode::EmptyPiecewise: return "EmptyPiecewise";
    case ErrorCode::InvalidBreakpoints: return "InvalidBreakpoints";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::BothDerivativesVanish: return "BothDerivativesVanish";
    case ErrorCode::BracketNotFound: return "BracketNotFound";
    case ErrorCode::NoWindowFound: return "NoWindowFound";
    case ErrorCode::TipNotFound: return "TipNotFound";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

constexpr double kMeanTolerance = 1e-12;

bool is_even_duty(double duty) { return duty == 0.5; }

double square_high(double duty) { return is_even_duty(duty) ? 1.0 : 1.0 - duty; }
double square_low(double duty) { return is_even_duty(duty) ? -1.0 : -duty; }

// Index of the breakpoint whose interval contains `phase` (right-continuous).
std::size_t piece_index(const std::vector<Breakpoint>& bps, double phase) {
  auto it = std::upper_bound(bps.begin(), bps.end(), phase,
                             [](double p, const Breakpoint& b) { return p < b.phase; });
  if (it == bps.begin()) return bps.size() - 1;  // before the first breakpoint: wraps from the last
  return static_cast<std::size_t>(std::distance(bps.begin(), it)) - 1;
}

}  // namespace

double wrap_phase(double t) {
  double phase = std::fmod(t, kTwoPi);
  if (phase < 0.0) phase += kTwoPi;
  if (phase >= kTwoPi) phase = 0.0;
  return phase;
}

std::optional<Error> validate(const ForcingSpec& spec) {
  switch (spec.kind) {
    case ForcingKind::Cosine:
    case ForcingKind::Ramp:
      return std::nullopt;
    case ForcingKind::Square:
      if (!(spec.duty > 0.0 && spec.duty < 1.0)) {
        return Error(ErrorCode::DutyOutOfRange, "square duty must lie in (0, 1)");
      }
      return std::nullopt;
    case ForcingKind::PiecewiseConstant: {
      const auto& bps = spec.breakpoints;
      if (bps.empty()) return Error(ErrorCode::EmptyPiecewise, "no breakpoints given");
      for (std::size_t i = 0; i < bps.size(); ++i) {
        if (!std::isfinite(bps[i].phase) || !std::isfinite(bps[i].value) || bps[i].phase < 0.0 ||
            bps[i].phase >= kTwoPi) {
          return Error(ErrorCode::InvalidBreakpoints, "breakpoint phases must lie in [0, 2pi)");
        }
        if (i > 0 && !(bps[i].phase > bps[i - 1].phase)) {
          return Error(ErrorCode::InvalidBreakpoints, "breakpoint phases must be strictly increasing");
        }
      }
      // exact integral of a step function
      double integral = 0.0;
      for (std::size_t i = 0; i < bps.size(); ++i) {
        const double next = (i + 1 < bps.size()) ? bps[i + 1].phase : bps.front().phase + kTwoPi;
        integral += bps[i].value * (next - bps[i].phase);
      }
      const double mean = integral / kTwoPi;
      if (std::abs(mean) > kMeanTolerance) {
        std::ostringstream os;
        os << "piecewise forcing has mean " << mean;
        return Error(ErrorCode::MeanNotZero, os.str());
      }
      return std::nullopt;
    }
  }
  return Error(ErrorCode::InvalidArgument, "unknown forcing kind");
}

Forcing::Forcing(ForcingSpec spec) : spec_(std::move(spec)) {
  if (auto err = validate(spec_)) throw *err;
}

double Forcing::eval_phase(double phase) const {
  switch (spec_.kind) {
    case ForcingKind::Cosine:
      return std::cos(phase);
    case ForcingKind::Square:
      return phase < kTwoPi * spec_.duty ? square_high(spec_.duty) : square_low(spec_.duty);
    case ForcingKind::Ramp:
      return phase / std::numbers::pi - 1.0;
    case ForcingKind::PiecewiseConstant:
      return spec_.breakpoints[piece_index(spec_.breakpoints, phase)].value;
  }
  return 0.0;
}

double Forcing::eval_phase_left(double phase) const {
  switch (spec_.kind) {
    case ForcingKind::Cosine:
      return std::cos(phase);
    case ForcingKind::Square:
      if (phase == 0.0) return square_low(spec_.duty);
      return phase <= kTwoPi * spec_.duty ? square_high(spec_.duty) : square_low(spec_.duty);
    case ForcingKind::Ramp:
      return phase == 0.0 ? 1.0 : phase / std::numbers::pi - 1.0;
    case ForcingKind::PiecewiseConstant: {
      const auto& bps = spec_.breakpoints;
      // the piece strictly before `phase`
      auto it = std::lower_bound(bps.begin(), bps.end(), phase,
                                 [](const Breakpoint& b, double p) { return b.phase < p; });
      if (it == bps.begin()) return bps.back().value;
      return std::prev(it)->value;
    }
  }
  return 0.0;
}

double Forcing::eval(double t) const { return eval_phase(wrap_phase(t)); }

double Forcing::eval_left(double t) const { return eval_phase_left(wrap_phase(t)); }

std::vector<double> Forcing::segment_starts() const {
  std::vector<double> starts{0.0};
  switch (spec_.kind) {
    case ForcingKind::Cosine:
    case ForcingKind::Ramp:
      break;
    case ForcingKind::Square:
      starts.push_back(kTwoPi * spec_.duty);
      break;
    case ForcingKind::PiecewiseConstant:
      for (const auto& b : spec_.breakpoints) {
        if (b.phase > 0.0) starts.push_back(b.phase);
      }
      break;
  }
  return starts;
}

std::string Forcing::name() const {
  switch (spec_.kind) {
    case ForcingKind::Cosine: return "cosine";
    case ForcingKind::Ramp: return "ramp";
    case ForcingKind::PiecewiseConstant: return "piecewise";
    case ForcingKind::Square: {
      std::array<char, 32> buf{};
      auto res = std::to_chars(buf.data(), buf.data() + buf.size(), spec_.duty);
      return "square:" + std::string(buf.data(), res.ptr);
    }
  }
  return "unknown";
}

std::vector<Breakpoint> read_breakpoints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open breakpoint file '" + path + "'");
  std::vector<Breakpoint> bps;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    Breakpoint b;
    if (!(ls >> b.phase)) continue;
    if (!(ls >> b.value)) throw Error(ErrorCode::InvalidBreakpoints, "malformed line: " + line);
    bps.push_back(b);
  }
  return bps;
}

Forcing parse_forcing(const std::string& text) {
  if (text == "cosine") return Forcing(ForcingSpec::cosine());
  if (text == "ramp") return Forcing(ForcingSpec::ramp());
  if (text.rfind("square:", 0) == 0) {
    const std::string arg = text.substr(7);
    double duty = 0.0;
    auto res = std::from_chars(arg.data(), arg.data() + arg.size(), duty);
    if (res.ec != std::errc() || res.ptr != arg.data() + arg.size()) {
      throw Error(ErrorCode::InvalidArgument, "bad square duty '" + arg + "'");
    }
    return Forcing(ForcingSpec::square(duty));
  }
  if (text == "square") return Forcing(ForcingSpec::square(0.5));
  if (text.rfind("piecewise:", 0) == 0) {
    return Forcing(ForcingSpec::piecewise(read_breakpoints(text.substr(10))));
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown forcing '" + text + "' (expected cosine, square:<duty>, ramp, piecewise:<file>)");
}

}  // namespace hill
