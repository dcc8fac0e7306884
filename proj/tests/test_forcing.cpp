#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "hill/forcing.hpp"

using namespace hill;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(const ForcingSpec& spec) {
  try {
    Forcing f(spec);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected construction to throw");
  return ErrorCode::Io;
}

// composite midpoint rule, plenty for piecewise smooth integrands
double mean_by_quadrature(const Forcing& f, int n = 200000) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += f.eval((i + 0.5) * 2.0 * kPi / n);
  return s / n;
}

}  // namespace

TEST_CASE("cosine values") {
  Forcing f(ForcingSpec::cosine());
  CHECK(f.eval(0.0) == Approx(1.0));
  CHECK(std::abs(f.eval(kPi / 2)) < 1e-15);
  CHECK(f.name() == "cosine");
  CHECK(f.is_smooth());
}

TEST_CASE("square wave levels follow the duty cycle") {
  Forcing half(ForcingSpec::square(0.5));
  CHECK(half.eval(kPi / 4) == 1.0);
  CHECK(half.eval(3 * kPi / 2) == -1.0);

  Forcing quarter(ForcingSpec::square(0.25));
  CHECK(quarter.eval(kPi / 8) == Approx(0.75));
  CHECK(quarter.eval(kPi) == Approx(-0.25));
  CHECK(quarter.name() == "square:0.25");
}

TEST_CASE("ramp") {
  Forcing f(ForcingSpec::ramp());
  CHECK(f.eval(0.0) == Approx(-1.0));
  CHECK(std::abs(f.eval(kPi)) < 1e-15);
  CHECK(f.eval_left(2 * kPi) == Approx(1.0));
}

TEST_CASE("left limits at a jump") {
  Forcing f(ForcingSpec::square(0.3));
  const double jump = 0.3 * 2 * kPi;
  CHECK(f.eval(jump) == Approx(-0.3));
  CHECK(f.eval_left(jump) == Approx(0.7));
  const auto starts = f.segment_starts();
  REQUIRE(starts.size() == 2);
  CHECK(starts[0] == 0.0);
  CHECK(starts[1] == Approx(jump));
}

TEST_CASE("built-ins are 2pi periodic, bounded and zero mean") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> t(-20.0, 20.0);
  for (const auto& spec : {ForcingSpec::cosine(), ForcingSpec::square(0.5), ForcingSpec::square(0.2),
                           ForcingSpec::ramp()}) {
    Forcing f(spec);
    CAPTURE(f.name());
    for (int i = 0; i < 200; ++i) {
      const double x = t(rng);
      // the reduction of t + 2pi rounds differently, so compare away from jumps
      CHECK(f.eval(x) == Approx(f.eval(x + 2 * kPi)).epsilon(1e-9));
      CHECK(std::abs(f.eval(x)) <= 1.0);
    }
    CHECK(std::abs(mean_by_quadrature(f)) < 1e-9);
  }
}

TEST_CASE("validation errors") {
  CHECK(code_of(ForcingSpec::piecewise({{0.0, 1.0}, {kPi, 1.0}})) == ErrorCode::MeanNotZero);
  CHECK(code_of(ForcingSpec::square(0.0)) == ErrorCode::DutyOutOfRange);
  CHECK(code_of(ForcingSpec::square(1.0)) == ErrorCode::DutyOutOfRange);
  CHECK(code_of(ForcingSpec::piecewise({})) == ErrorCode::EmptyPiecewise);
  CHECK(code_of(ForcingSpec::piecewise({{1.0, 1.0}, {0.5, -1.0}})) == ErrorCode::InvalidBreakpoints);
  CHECK_FALSE(validate(ForcingSpec::cosine()).has_value());
}

TEST_CASE("piecewise constant forcing") {
  Forcing f(ForcingSpec::piecewise({{0.0, 2.0}, {kPi / 2, -1.0}, {3 * kPi / 2, 0.0}}));
  // 2 * (pi/2) - 1 * pi + 0 = 0
  CHECK(std::abs(mean_by_quadrature(f)) < 1e-9);
  CHECK(f.eval(0.1) == 2.0);
  CHECK(f.eval(kPi) == -1.0);
  CHECK(f.eval(5.0) == 0.0);
  CHECK(f.segment_starts().size() == 3);
}

TEST_CASE("parsing") {
  CHECK(parse_forcing("cosine").name() == "cosine");
  CHECK(parse_forcing("square:0.4").spec().duty == Approx(0.4));
  CHECK(parse_forcing("ramp").spec().kind == ForcingKind::Ramp);
  CHECK_THROWS_AS(parse_forcing("triangle"), Error);
  CHECK_THROWS_AS(parse_forcing("square:abc"), Error);

  const char* path = "forcing_breakpoints_test.txt";
  {
    std::ofstream out(path);
    out << "# phase value\n0 1\n3.141592653589793 -1\n";
  }
  const Forcing f = parse_forcing(std::string("piecewise:") + path);
  CHECK(f.spec().breakpoints.size() == 2);
  CHECK(f.eval(4.0) == -1.0);
  std::remove(path);
  CHECK_THROWS_AS(read_breakpoints("does/not/exist.txt"), Error);
}
