#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hill/error.hpp"

namespace hill {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class ForcingKind { Cosine, Square, Ramp, PiecewiseConstant };

/// Value held from `phase` (radians in [0, 2pi)) up to the next breakpoint.
struct Breakpoint {
  double phase = 0.0;
  double value = 0.0;
};

/// Unvalidated description of a zero-mean 2pi-periodic forcing p(t).
///
/// Conventions for the step and ramp families:
///   square, duty 0.5   : +1 on [0, pi), -1 on [pi, 2pi)
///   square, duty d     : (1 - d) on [0, 2 pi d), -d on [2 pi d, 2 pi)
///   ramp               : t / pi - 1 on [0, 2pi)
struct ForcingSpec {
  ForcingKind kind = ForcingKind::Cosine;
  double duty = 0.5;
  std::vector<Breakpoint> breakpoints;

  static ForcingSpec cosine() { return {ForcingKind::Cosine, 0.5, {}}; }
  static ForcingSpec square(double duty) { return {ForcingKind::Square, duty, {}}; }
  static ForcingSpec ramp() { return {ForcingKind::Ramp, 0.5, {}}; }
  static ForcingSpec piecewise(std::vector<Breakpoint> bps) {
    return {ForcingKind::PiecewiseConstant, 0.5, std::move(bps)};
  }
};

/// Checks the zero-mean, breakpoint and duty invariants. Empty optional means ok.
std::optional<Error> validate(const ForcingSpec& spec);

/// A validated forcing. Construction throws hill::Error for invalid specs.
class Forcing {
 public:
  Forcing() : Forcing(ForcingSpec::cosine()) {}
  explicit Forcing(ForcingSpec spec);

  /// p(t mod 2pi); right-continuous at breakpoints.
  double eval(double t) const;
  /// Left limit p(t^-), so that a step ending at a breakpoint sees the old level.
  double eval_left(double t) const;

  /// Phases in [0, 2pi) where p may jump, sorted, always containing 0.
  std::vector<double> segment_starts() const;
  /// True for the smooth cosine family.
  bool is_smooth() const { return spec_.kind == ForcingKind::Cosine; }

  const ForcingSpec& spec() const { return spec_; }
  /// CLI-style name: cosine, square:<duty>, ramp, piecewise.
  std::string name() const;

 private:
  double eval_phase(double phase) const;
  double eval_phase_left(double phase) const;

  ForcingSpec spec_;
};

/// Reduces t into [0, 2pi).
double wrap_phase(double t);

/// Parses `cosine`, `square:<duty>`, `ramp` or `piecewise:<file>`.
Forcing parse_forcing(const std::string& text);

/// Reads a two-column (phase, value) text file. '#' starts a comment.
std::vector<Breakpoint> read_breakpoints(const std::string& path);

}  // namespace hill
