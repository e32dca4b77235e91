#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "support/oracles.hpp"
#include "uptheriver/errors.hpp"
#include "uptheriver/kernels.hpp"
#include "uptheriver/serialize.hpp"
#include "uptheriver/stefan.hpp"

using namespace uptheriver;
using namespace uptheriver::stefan;
using doctest::Approx;

namespace {

// Solved once and shared; a dt = 1e-3 solve to t = 2 takes a few seconds.
const BoundaryCurve& reference() {
  static const BoundaryCurve curve = solve_boundary(2.0, 1e-3, 1e-8);
  return curve;
}

// U(1/2, y) from its definition 2p(1/2,y) + int_0^{1/2} 2p(s,y) ds.
double u_half(double y) {
  return 2.0 * oracle::normal_pdf(0.5, y) +
         2.0 * oracle::finite([&](double s) { return oracle::normal_pdf(s, y); }, 0.0, 0.5);
}

double lambda_oracle(double t, double z) {
  const double top = u_half(0.0);
  return oracle::half_line([&](double y) { return oracle::normal_pdf(t, z - y) * (top - u_half(y)); }, 0.0);
}

BoundaryCurve shifted(const BoundaryCurve& c, double shift) {
  BoundaryCurve out = c;
  for (std::size_t i = 1; i < out.values.size(); ++i) out.values[i] += shift;
  return out;
}

}  // namespace

TEST_CASE("input validation") {
  CHECK_THROWS_AS(solve_boundary(0.5), DomainError);
  CHECK_THROWS_AS(solve_boundary(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(solve_boundary(1.0, 1e-2, 0.0), DomainError);
  CHECK_THROWS_AS(reference().at(2.5), DomainError);
  CHECK_THROWS_AS(boundary_residual(reference(), 0.5), DomainError);
  CHECK_THROWS_AS(boundary_residual(reference(), 2.1), DomainError);
  CHECK_THROWS_AS(stability_probe(reference(), -1.0), DomainError);
  CHECK_THROWS_AS(eval_tail_moving(reference(), 0.4, 1.0), DomainError);
}

TEST_CASE("solved curve starts at zero and never decreases") {
  const auto& c = reference();
  REQUIRE(c.size() > 1000);
  CHECK(c.times.front() == 0.5);
  CHECK(c.values.front() == 0.0);
  CHECK(c.at(0.3) == 0.0);
  CHECK(c.at(0.5) == 0.0);
  CHECK_FALSE(c.monotonicity_flagged);
  for (std::size_t i = 1; i < c.size(); ++i) {
    CHECK(c.times[i] > c.times[i - 1]);
    CHECK(c.values[i] >= c.values[i - 1]);
  }
  CHECK(c.at(2.0) > 0.3);
}

TEST_CASE("residual vanishes on the grid") {
  const auto& c = reference();
  double worst = 0.0;
  for (std::size_t i = 1; i < c.size(); i += 37) worst = std::max(worst, std::abs(boundary_residual(c, c.times[i])));
  CHECK(worst <= c.root_tol);
  CHECK(c.residual_tol <= c.root_tol);
}

TEST_CASE("residual of the zero curve") {
  BoundaryCurve zero = reference();
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  const double expected = lambda_oracle(0.5, 0.0) - std::sqrt(1.0 / std::numbers::pi);
  const double r = boundary_residual(zero, 1.0);
  CHECK(std::abs(expected) > 1e-3);
  CHECK(r == Approx(expected).epsilon(1e-5));
}

TEST_CASE("Lambda agrees with a direct quadrature") {
  for (double t : {0.05, 0.5, 1.5})
    for (double z : {0.0, 0.1, 0.4}) CHECK(kernels::lambda_lhs(t, z) == Approx(lambda_oracle(t, z)).epsilon(1e-7));
}

TEST_CASE("residual is monotone in a vertical shift") {
  const auto& c = reference();
  const double up = boundary_residual(shifted(c, 0.05), 1.0);
  const double down = boundary_residual(shifted(c, -0.05), 1.0);
  CHECK(up > 0.0);
  CHECK(down < 0.0);

  // Lower bound on d/dz Lambda(1/2, .) over the shifted range.
  const double z1 = c.at(1.0);
  double c1 = 1e300;
  for (double z = z1; z <= z1 + 0.05; z += 0.01) {
    const double d = 1e-4;
    c1 = std::min(c1, (lambda_oracle(0.5, z + d) - lambda_oracle(0.5, z - d)) / (2 * d));
  }
  REQUIRE(c1 > 0.0);
  CHECK(up > c1 * 0.05 / 2);
}

TEST_CASE("moving profile matches the absorption phase at t = 1/2") {
  for (double x : {0.0, 0.1, 0.5, 1.0, 2.5})
    CHECK(std::abs(eval_tail_moving(reference(), 0.5, x) - kernels::tail_absorption_phase(0.5, x)) <= 1e-6);
}

TEST_CASE("particle conservation at the boundary") {
  const auto& c = reference();
  for (double t : {0.6, 1.0, 2.0}) CHECK(std::abs(eval_tail_moving(c, t, c.at(t)) - kernels::kFourOverSqrtPi) <= 5e-3);
  double worst = 0.0;
  for (double t = 0.55; t <= 2.0 + 1e-12; t += 0.01) worst = std::max(worst, std::abs(eval_tail_moving(c, t, c.at(t)) - kernels::kFourOverSqrtPi));
  CHECK(worst <= 5e-3);
}

TEST_CASE("moving profile decays and rejects points left of the boundary") {
  const auto& c = reference();
  CHECK(eval_tail_moving(c, 1.5, 20.0) < 1e-12);
  double prev = eval_tail_moving(c, 1.5, c.at(1.5));
  for (double x = c.at(1.5) + 0.1; x < 5.0; x += 0.1) {
    const double v = eval_tail_moving(c, 1.5, x);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
  CHECK_THROWS_AS(eval_tail_moving(c, 1.5, c.at(1.5) - 0.01), DomainError);
}

TEST_CASE("hydro profile covers both phases") {
  const HydroProfile profile(reference());
  for (double x : {0.0, 0.3, 1.0}) {
    CHECK(profile.tail(0.25, x) == kernels::tail_absorption_phase(0.25, x));
    CHECK(std::abs(profile.tail(0.5 - 1e-9, x) - profile.tail(0.5 + 1e-9, x)) <= 1e-6);
  }
  const double z = profile.boundary(1.0);
  CHECK(profile.tail(1.0, z / 2) == Approx(profile.tail(1.0, z)));
  CHECK_THROWS_AS(profile.tail(0.0, 1.0), DomainError);
}

TEST_CASE("quadratic growth after the phase change") {
  // z(1/2 + u) / u^2 tends to 1/sqrt(pi) (see README). The constant comes
  // from the moment int_0^inf y^3 tail(1,y) dy = 3/8.
  CHECK(oracle::half_line([](double y) { return y > 50.0 ? 0.0 : y * y * y * oracle::normal_tail(1.0, y); }, 0.0) == Approx(0.375).epsilon(1e-10));

  const auto& c = reference();
  const auto ratio = [&](double u) { return c.at(0.5 + u) / (u * u); };
  const double r2 = ratio(0.02), r5 = ratio(0.05), r10 = ratio(0.1);
  CHECK(r2 > r5);
  CHECK(r5 > r10);
  // Linear extrapolation to u = 0.
  const double limit = r2 + (r2 - r5) * (0.02 / 0.03);
  CHECK(limit == Approx(std::numbers::inv_sqrtpi).epsilon(0.03));
}

TEST_CASE("self-convergence under step halving") {
  const auto c4 = solve_boundary(2.0, 4e-3, 1e-8);
  const auto c2 = solve_boundary(2.0, 2e-3, 1e-8);
  const auto& c1 = reference();
  double e42 = 0.0, e21 = 0.0;
  for (double t = 0.5; t <= 2.0 + 1e-12; t += 4e-3) {
    const double tt = std::min(t, 2.0);
    e42 = std::max(e42, std::abs(c4.at(tt) - c2.at(tt)));
    e21 = std::max(e21, std::abs(c2.at(tt) - c1.at(tt)));
  }
  MESSAGE("dt differences: " << e42 << " then " << e21);
  CHECK(e21 > 0.0);
  CHECK(e42 / e21 >= 1.5);
}

TEST_CASE("stability probe") {
  const auto& c = reference();
  CHECK(stability_probe(c, 0.0) == 0.0);
  const double a = stability_probe(c, 1e-3);
  const double b = stability_probe(c, 2e-3);
  CHECK(a > 0.0);
  CHECK(a <= 0.1);
  CHECK(b / a == Approx(2.0).epsilon(0.3));
}

TEST_CASE("curve serialization round trip") {
  const auto& c = reference();
  const auto back = serialize::curve_from_json(serialize::curve_to_json(c));
  CHECK(back.times == c.times);
  CHECK(back.values == c.values);
  CHECK(back.root_tol == c.root_tol);
  const auto csv = serialize::curve_from_csv(serialize::curve_to_csv(c));
  CHECK(csv.values == c.values);
  CHECK(csv.times == c.times);
  CHECK_THROWS_AS(serialize::curve_from_csv("t,z\n0.5,abc\n"), UsageError);
}
