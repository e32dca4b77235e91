#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "support/oracles.hpp"
#include "uptheriver/errors.hpp"
#include "uptheriver/kernels.hpp"

using namespace uptheriver;
using namespace uptheriver::kernels;
using doctest::Approx;

TEST_CASE("heat kernel values and symmetry") {
  CHECK(heat_kernel(1, 0) == Approx(0.3989422804).epsilon(1e-10));
  CHECK(heat_kernel(0.5, 0) == Approx(0.5641895835).epsilon(1e-10));
  CHECK(heat_kernel(2, 3) == heat_kernel(2, -3));
  CHECK_THROWS_AS(heat_kernel(0, 1), DomainError);
  CHECK_THROWS_AS(heat_kernel(-1, 1), DomainError);
}

TEST_CASE("heat kernel has unit mass") {
  for (double t : {0.1, 0.5, 2.0}) {
    const double mass = oracle::finite([&](double x) { return heat_kernel(t, x); }, -40.0 * std::sqrt(t), 40.0 * std::sqrt(t));
    CHECK(std::abs(mass - 1.0) <= 1e-8);
  }
}

TEST_CASE("spatial derivative of the heat kernel") {
  CHECK(heat_kernel_dx(1, 0) == 0.0);
  CHECK(heat_kernel_dx(1, 1) == Approx(-0.2419707245).epsilon(1e-10));
  const double h = 1e-5;
  const double fd = (heat_kernel(1, 1 + h) - heat_kernel(1, 1 - h)) / (2 * h);
  CHECK(std::abs(fd - heat_kernel_dx(1, 1)) <= 1e-8);
  CHECK_THROWS_AS(heat_kernel_dx(0, 1), DomainError);
}

TEST_CASE("Brownian tail") {
  CHECK(bm_tail(1, 0) == 0.5);
  CHECK(bm_tail(1, 2) == Approx(0.02275013).epsilon(1e-7));
  CHECK(bm_tail(4, 2) == Approx(0.15865525).epsilon(1e-7));
  CHECK(bm_tail(1, 1) + bm_cdf(1, 1) == Approx(1.0).epsilon(1e-15));
  // Relative accuracy deep in the tail, where 1 - cdf would cancel.
  const double far = bm_tail(1, 30);
  CHECK(far > 0.0);
  CHECK(far == Approx(oracle::half_line([](double y) { return oracle::normal_pdf(1, y); }, 30.0)).epsilon(1e-10));
  double prev = 1.0;
  for (double x = -3; x <= 3; x += 0.25) {
    CHECK(bm_tail(1, x) < prev);
    prev = bm_tail(1, x);
  }
  CHECK_THROWS_AS(bm_tail(0, 1), DomainError);
}

TEST_CASE("Neumann kernel") {
  for (double x : {0.0, 0.3, 2.0}) CHECK(neumann_kernel(1, 0, x) == Approx(2 * heat_kernel(1, x)));
  // p(1,0) + p(1,2) = (1 + e^-2) / sqrt(2 pi).
  CHECK(neumann_kernel(1, 1, 1) == Approx((1 + std::exp(-2.0)) / std::sqrt(2 * std::numbers::pi)).epsilon(1e-14));
  CHECK(neumann_kernel(1, 1, 1) == Approx(0.452933).epsilon(1e-6));
  CHECK(neumann_kernel(0.7, 0.2, 1.3) == Approx(neumann_kernel(0.7, 1.3, 0.2)));
  CHECK(neumann_kernel(0.7, -0.2, 1.3) == Approx(neumann_kernel(0.7, 0.2, 1.3)));
  CHECK(neumann_kernel(0.7, 0.2, -1.3) == Approx(neumann_kernel(0.7, 0.2, 1.3)));
  CHECK_THROWS_AS(neumann_kernel(0, 1, 1), DomainError);
}

TEST_CASE("Neumann kernel semigroup") {
  const double t = 0.3, s = 0.4, z = 0.7, x = 1.1;
  const double lhs = oracle::half_line([&](double y) { return neumann_kernel(t, y, x) * neumann_kernel(s, z, y); }, 0.0);
  CHECK(std::abs(lhs - neumann_kernel(t + s, z, x)) <= 1e-6);
  for (auto [a, b] : {std::pair{0.1, 0.9}, {1.0, 0.05}}) {
    for (double y0 : {0.0, 0.5, 2.0}) {
      const double l = oracle::half_line([&](double y) { return neumann_kernel(a, y0, y) * neumann_kernel(b, y, 0.8); }, 0.0);
      CHECK(std::abs(l - neumann_kernel(a + b, y0, 0.8)) <= 1e-6);
    }
  }
}

TEST_CASE("absorbed tail") {
  for (double t : {0.1, 1.0, 5.0})
    for (double x : {0.1, 1.0, 3.0}) CHECK(absorbed_tail(t, 0, x) == 0.0);
  // At t = 0 the absorbed tail is the indicator of y > x.
  CHECK(absorbed_tail(0, 2, 1) == 1.0);
  CHECK(absorbed_tail(0, 0.5, 1) == 0.0);
  CHECK(absorbed_tail(1e-12, 2, 1) == Approx(1.0));
  CHECK(absorbed_tail(1e-12, 0.5, 1) == Approx(0.0));
  CHECK(absorbed_tail(1, 1, 1) == Approx(0.47724987).epsilon(1e-7));
  CHECK_THROWS_AS(absorbed_tail(1, -0.1, 1), DomainError);
  CHECK_THROWS_AS(absorbed_tail(1, 0.1, -1), DomainError);
}

// psi(t, y, x): y is where the absorbed motion starts, x the level it must exceed.
TEST_CASE("absorbed tail is monotone and bounded") {
  for (double t : {0.01, 0.3, 2.0}) {
    for (double x = 0.0; x <= 3.0; x += 0.2) {
      for (double y = 0.0; y <= 3.0; y += 0.1) {
        const double v = absorbed_tail(t, y, x);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(absorbed_tail(t, y + 0.1, x) >= v - 1e-15);
        CHECK(absorbed_tail(t, y, x + 0.2) <= v + 1e-15);
      }
    }
  }
}

TEST_CASE("absorbed tail matches its heat-equation derivative") {
  // d/dy psi = pN(t, y, x).
  const double t = 0.6, x = 0.8, h = 1e-5;
  for (double y : {0.1, 0.5, 1.4}) {
    const double fd = (absorbed_tail(t, y + h, x) - absorbed_tail(t, y - h, x)) / (2 * h);
    CHECK(std::abs(fd - neumann_kernel(t, y, x)) < 1e-7);
  }
}

TEST_CASE("expected scaled tail of driftless particles") {
  CHECK(std::abs(g_term(1e6, 0.5, 0) - 2 * heat_kernel(0.5, 0)) <= 1e-3);
  CHECK(g_term(4, 0.5, 0) == Approx(2 * (bm_cdf(0.5, 0.5) - bm_tail(0.5, 0.5))));
  // Same value through sqrt(K) int_0^{1/sqrt K} pN(t, y, x) dy.
  const double K = 16, t = 0.3, x = 0.4;
  const double via_pn = std::sqrt(K) * oracle::finite([&](double y) { return neumann_kernel(t, y, x); }, 0, 1 / std::sqrt(K));
  CHECK(g_term(K, t, x) == Approx(via_pn).epsilon(1e-10));
  CHECK(g_term(100, 0.5, 50) < 1e-300);
  CHECK_THROWS_AS(g_term(0.5, 0.5, 0), DomainError);
  CHECK_THROWS_AS(g_term(4, 0, 0), DomainError);
}

TEST_CASE("heat time integral closed form") {
  for (double t : {0.01, 0.1, 0.5, 1.0, 2.0}) {
    for (double x = 0.0; x <= 3.0; x += 0.25) {
      const double direct = oracle::finite([&](double s) { return heat_kernel(t - s, x); }, 0.0, t);
      CHECK(std::abs(direct - heat_time_integral(t, x)) <= 1e-6);
      // Also 2 int_{-inf}^{-|x|} Phi(t, y) dy.
      const double cdf_form = 2 * oracle::half_line([&](double y) { return bm_cdf(t, -y); }, x);
      CHECK(std::abs(direct - cdf_form) <= 1e-6);
      const double moment = oracle::finite([&](double s) { return s * heat_kernel(s, x); }, 0.0, t);
      CHECK(std::abs(moment - heat_time_moment(t, x)) <= 1e-9);
    }
  }
  CHECK(heat_time_integral(0, 1) == 0.0);
  CHECK(heat_time_integral(1, -0.7) == heat_time_integral(1, 0.7));
  CHECK_THROWS_AS(heat_time_integral(-1, 0), DomainError);
}

TEST_CASE("absorption-phase density") {
  CHECK(density_u1(0.5, 0) == Approx(2.0).epsilon(1e-14));
  CHECK(density_u1(0.5, 40) < 1e-300);
  for (double x = 0; x < 5; x += 0.1) CHECK(density_u1(0.3, x) >= 0.0);
  const double mass = oracle::half_line([](double y) { return density_u1(0.5, y); }, 0.0);
  CHECK(mass == Approx(2.2567583).epsilon(1e-7));
  CHECK(mass == Approx(kFourOverSqrtPi).epsilon(1e-10));
  CHECK_THROWS_AS(density_u1(0, 1), DomainError);
}

TEST_CASE("absorption-phase tail profile") {
  CHECK(tail_absorption_phase(0.5, 0) == Approx(2.2567583).epsilon(1e-7));
  CHECK(tail_absorption_phase(0.5, 30) < 1e-100);
  // Small-time divergence at the origin: 2 p(t,0) dominates.
  const double t = 0.01;
  CHECK(tail_absorption_phase(t, 0) == Approx(2 / std::sqrt(2 * std::numbers::pi * t) + 4 * t / std::sqrt(2 * std::numbers::pi * t)));
  CHECK(std::abs(tail_absorption_phase(t, 0) / (2 / std::sqrt(0.02 * std::numbers::pi)) - 1) < 0.03);
  for (double tt : {0.1, 0.3, 0.5}) {
    for (double x : {0.0, 0.5, 1.0, 2.0}) {
      const double tail = oracle::half_line([&](double y) { return density_u1(tt, y); }, x);
      CHECK(std::abs(tail_absorption_phase(tt, x) - tail) <= 1e-6);
    }
  }
  CHECK_THROWS_AS(tail_absorption_phase(0.6, 0), DomainError);
  CHECK_THROWS_AS(tail_absorption_phase(0, 0), DomainError);
}

TEST_CASE("Lambda") {
  CHECK(lambda_lhs(1, -50) == 0.0);
  CHECK(lambda_lhs(1, -8) < 1e-9);
  CHECK(lambda_lhs(1, 0.2) > lambda_lhs(1, 0.1));
  // Large z: kernel mass sits where U*(1/2, y) has vanished.
  CHECK(std::abs(lambda_lhs(0.5, 40) - kFourOverSqrtPi) < 1e-8);
  // Independent quadrature of the defining integral.
  for (auto [t, z] : {std::pair{0.05, 0.0}, {0.3, 0.4}, {1.0, -0.5}, {1.5, 1.2}}) {
    const double ref = oracle::half_line(
        [&](double y) { return heat_kernel(t, z - y) * (tail_absorption_phase(0.5, 0) - tail_absorption_phase(0.5, y)); }, 0.0);
    CHECK(std::abs(lambda_lhs(t, z) - ref) < 1e-8);
  }
  CHECK_THROWS_AS(lambda_lhs(0, 0), DomainError);
}

TEST_CASE("confinement series") {
  CHECK(confinement_prob(0, 0.5, 1, 3) == 1.0);
  CHECK(confinement_prob(1, 0.5, 1, 5) == Approx(0.0091578).epsilon(1e-6));
  CHECK(confinement_prob(1, 0.5, 1, 5) == Approx(4 / std::numbers::pi * std::exp(-std::numbers::pi * std::numbers::pi / 2)).epsilon(1e-12));
  CHECK(confinement_prob(1, 1e-9, 1) < 1e-8);
  for (double t : {0.5, 1.0, 3.0}) {
    for (int n = 3; n < 10; ++n) CHECK(std::abs(confinement_prob(t, 0.3, 1, n + 1) - confinement_prob(t, 0.3, 1, n)) < 1e-12);
  }
  // Truncation error is below the first omitted term.
  const double t = 0.01;
  CHECK(std::abs(confinement_prob(t, 0.4, 1, 4) - confinement_prob(t, 0.4, 1, 60)) <= confinement_truncation_bound(t, 0.4, 1, 4));
  CHECK_THROWS_AS(confinement_prob(1, 0, 1), DomainError);
  CHECK_THROWS_AS(confinement_prob(1, 1, 1), DomainError);
  CHECK_THROWS_AS(confinement_prob(1, 0.5, 1, 0), DomainError);
}

TEST_CASE("confinement series against a small Monte Carlo") {
  const auto mc = oracle::two_barrier_survival(0.2, 0.5, 1.0, 1e-4, 4000, 7);
  const double series = confinement_prob(0.2, 0.5, 1.0);
  CHECK(std::abs(mc.mean - series) <= 4 * mc.stderr_mean + 1e-3);
}

