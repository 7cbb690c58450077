#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include <varsamp/kernels.hpp>

using namespace varsamp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// de Boor-Cox recursion for the central B-spline.
double bspline_oracle(int n, double x) {
  if (n == 1) return (x > -0.5 && x <= 0.5) ? 1.0 : 0.0;
  const double h = 0.5 * n;
  return ((h + x) * bspline_oracle(n - 1, x + 0.5) + (h - x) * bspline_oracle(n - 1, x - 0.5)) / (n - 1);
}

std::vector<double> unit_grid(int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(static_cast<double>(i) / n);
  return g;
}

Kernel scaled(const Kernel& k, double s) {
  Kernel out = k;
  out.id = "scaled";
  out.fn = [k, s](double x) { return s * k(x); };
  out.antiderivative = nullptr;
  out.l1_norm_hint.reset();
  return out;
}

}  // namespace

TEST_CASE("B-spline values", "[kernels]") {
  CHECK_THAT(bspline_eval(2, 0.0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(bspline_eval(3, 0.0), WithinAbs(0.75, 1e-15));
  CHECK(bspline_eval(1, 0.25) == 1.0);
  CHECK(bspline_eval(1, 0.5) == 1.0);
  CHECK(bspline_eval(1, -0.5) == 0.0);
  for (int n = 1; n <= 6; ++n) {
    CHECK(bspline_eval(n, 0.5 * n + 0.1) == 0.0);
    CHECK(bspline_eval(n, -0.5 * n - 0.1) == 0.0);
    CHECK(bspline_eval(n, 0.5 * n + 7.0) == 0.0);
  }
  CHECK_THROWS_AS(bspline_eval(0, 0.0), std::invalid_argument);
}

TEST_CASE("B-spline matches the de Boor-Cox recursion", "[kernels]") {
  for (int n = 1; n <= 7; ++n)
    for (double x = -4.0; x <= 4.0; x += 0.0137)
      CHECK_THAT(bspline_eval(n, x), WithinAbs(bspline_oracle(n, x), 1e-13));
}

TEST_CASE("B-spline derivative", "[kernels]") {
  CHECK_THAT(bspline_derivative_eval(2, 0.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(bspline_derivative_eval(3, 0.5), WithinAbs(-1.0, 1e-15));
  CHECK(bspline_derivative_eval(4, 2.5) == 0.0);
  CHECK_THROWS_AS(bspline_derivative_eval(1, 0.0), std::domain_error);
  const double h = 1e-5;
  for (int n = 2; n <= 5; ++n) {
    for (double x = -3.1; x <= 3.1; x += 0.0731) {
      // Stay clear of knots, where one-sided derivatives differ.
      const double frac = x + 0.5 * n - std::floor(x + 0.5 * n);
      if (frac < 1e-3 || frac > 1 - 1e-3) continue;
      const double fd = (bspline_eval(n, x + h) - bspline_eval(n, x - h)) / (2 * h);
      CHECK_THAT(bspline_derivative_eval(n, x), WithinAbs(fd, 1e-7));
    }
  }
}

TEST_CASE("B-spline primitive matches quadrature", "[kernels]") {
  for (int n = 1; n <= 5; ++n) {
    const auto k = bspline_kernel(n);
    for (double x = -3.0; x <= 3.0; x += 0.25) {
      const double lo = -0.5 * n;
      const double q = x <= lo ? 0.0 : adaptive_quadrature(k.fn, lo, x, 1e-14, k.breakpoints).value;
      CHECK_THAT(bspline_antiderivative(n, x), WithinAbs(q, 1e-13));
    }
  }
}

TEST_CASE("Fejer kernel values, primitive and envelope", "[kernels]") {
  const double pi = std::numbers::pi;
  CHECK(fejer_eval(0.0) == 0.5);
  CHECK_THAT(fejer_eval(2.0), WithinAbs(0.0, 1e-16));
  CHECK_THAT(fejer_eval(1.0), WithinAbs(2.0 / (pi * pi), 1e-15));
  CHECK_THAT(fejer_eval(1.0), WithinAbs(0.2026424, 1e-7));
  const auto k = fejer_kernel();
  for (double x = 1.0; x <= 1000.0; x *= 1.07) CHECK(fejer_eval(x) <= k.envelope()(x) * (1 + 1e-14));
  for (double x = -9.0; x <= 9.0; x += 0.61) {
    const double lo = std::min(0.0, x), hi = std::max(0.0, x);
    const double integral = lo == hi ? 0.0 : adaptive_quadrature(fejer_eval, lo, hi, 1e-14).value;
    CHECK_THAT(fejer_antiderivative(x), WithinAbs(x >= 0 ? integral : -integral, 1e-13));
  }
  CHECK_THAT(fejer_antiderivative(1e6) - fejer_antiderivative(-1e6), WithinAbs(1.0, 1e-6));
}

TEST_CASE("Bochner-Riesz kernel against the standard library", "[kernels]") {
  const double pi = std::numbers::pi;
  for (int g = 1; g <= 5; ++g) {
    const double c = std::pow(2.0, g) * std::tgamma(g + 1.0) / std::sqrt(2 * pi);
    for (double x = 0.05; x <= 40.0; x += 0.173) {
      const double ref = c * std::pow(x, -0.5 - g) * std::cyl_bessel_j(0.5 + g, x);
      CHECK_THAT(bochner_riesz_eval(g, x), WithinAbs(ref, 1e-12));
      CHECK(bochner_riesz_eval(g, -x) == bochner_riesz_eval(g, x));
    }
  }
  CHECK_THAT(bochner_riesz_eval(1, 0.0), WithinRel(1.0 / (2.0 * std::sqrt(pi) * std::tgamma(2.5)), 1e-12));
  CHECK_THAT(bochner_riesz_eval(1, pi), WithinRel(2.0 / (pi * pi * pi), 1e-12));
}

TEST_CASE("Bochner-Riesz gamma restrictions", "[kernels]") {
  CHECK_THROWS_AS(bochner_riesz_eval(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(bochner_riesz_eval(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(bochner_riesz_eval(1.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(bochner_riesz_kernel(6.0), std::invalid_argument);
}

TEST_CASE("Bochner-Riesz envelope bounds the kernel beyond the fit range", "[kernels]") {
  for (int g = 1; g <= 3; ++g) {
    const auto k = bochner_riesz_kernel(g);
    for (double x = k.envelope().valid_from; x <= 3000.0; x += 0.37) CHECK(std::abs(k(x)) <= k.envelope()(x));
  }
}

TEST_CASE("averaged B-spline equals the next B-spline", "[kernels]") {
  CHECK_THAT(average(bspline_kernel(2), 1)(0.0), WithinAbs(0.75, 1e-15));
  CHECK_THAT(average(bspline_kernel(1), 1)(0.0), WithinAbs(1.0, 1e-15));
  for (int n = 1; n <= 4; ++n) {
    const AveragedKernel q(bspline_kernel(n), 1, EvaluationMode::quadrature);
    const double R = 0.5 * (n + 1) + 1.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = -R + 2 * R * i / 999.0;
      CHECK_THAT(q(t), WithinAbs(bspline_eval(n + 1, t), 1e-9));
    }
  }
}

TEST_CASE("analytic and quadrature averaging agree", "[kernels]") {
  for (const auto& base : {bspline_kernel(2), bspline_kernel(3), fejer_kernel()}) {
    for (int m = 1; m <= 3; ++m) {
      const AveragedKernel a(base, m, EvaluationMode::analytic);
      const AveragedKernel q(base, m, EvaluationMode::quadrature);
      for (double t = -6.0; t <= 6.0; t += 0.137) {
        CHECK_THAT(a(t), WithinAbs(q(t), 1e-12));
        CHECK_THAT(a(-t), WithinAbs(a(t), 1e-13));
      }
    }
  }
  CHECK_THROWS_AS(AveragedKernel(bochner_riesz_kernel(2), 2, EvaluationMode::analytic), std::invalid_argument);
  CHECK_THROWS_AS(AveragedKernel(bspline_kernel(2), 0), std::invalid_argument);
}

TEST_CASE("averaged kernel derivative", "[kernels]") {
  const AveragedKernel a(bspline_kernel(2), 1);
  CHECK_THAT(averaged_derivative_eval(a, 0.5), WithinAbs(-1.0, 1e-15));
  CHECK_THAT(averaged_derivative_eval(a, 0.0), WithinAbs(0.0, 1e-15));
  CHECK(averaged_derivative_eval(AveragedKernel(bspline_kernel(3), 2), 2.6) == 0.0);
  const double h = 1e-4;
  for (const auto& base : {bspline_kernel(3), fejer_kernel(), bochner_riesz_kernel(2)}) {
    for (int m = 1; m <= 3; ++m) {
      const AveragedKernel q(base, m, EvaluationMode::quadrature);
      for (double t = -3.03; t <= 3.03; t += 0.29) {
        const double fd = (q(t + h) - q(t - h)) / (2 * h);
        CHECK_THAT(q.derivative(t), WithinAbs(fd, 1e-7));
      }
    }
  }
}

TEST_CASE("averaged kernel support and grid cache", "[kernels]") {
  const AveragedKernel a(bspline_kernel(3), 2);
  CHECK(a.radius() == 2.5);
  CHECK(a(2.5001) == 0.0);
  const auto k = a.as_kernel();
  CHECK(k.id == "avg:2:bspline:3");
  CHECK(k.radius() == 2.5);
  const auto cached = a.with_grid_cache(1e-3);
  REQUIRE(cached.cached());
  CHECK(cached.cache_error_bound() > 0.0);
  for (double t = -3.0; t <= 3.0; t += 0.01234) CHECK(std::abs(cached(t) - a(t)) <= cached.cache_error_bound() + 1e-15);
}

TEST_CASE("partition of unity", "[kernels]") {
  const auto grid = unit_grid(64);
  for (int n = 1; n <= 6; ++n) {
    const auto rep = check_partition_of_unity(bspline_kernel(n), grid, 1e-10);
    CHECK(rep.pass);
    CHECK(rep.max_deviation <= 1e-10);
  }
  const auto fejer = check_partition_of_unity(fejer_kernel(), grid, 1e-6, 1e-6);
  CHECK(fejer.pass);
  CHECK(fejer.max_deviation <= 1e-6);

  const auto half = check_partition_of_unity(scaled(bspline_kernel(2), 0.5), grid, 1e-10);
  CHECK_FALSE(half.pass);
  CHECK_THAT(half.max_deviation, WithinAbs(0.5, 1e-12));
}

TEST_CASE("absolute moment", "[kernels]") {
  CHECK_THAT(absolute_moment_sup(bspline_kernel(2), unit_grid(100)), WithinAbs(1.0, 1e-10));
  CHECK_THAT(absolute_moment_sup(bspline_kernel(4), unit_grid(100)), WithinAbs(1.0, 1e-10));
  const auto br = bochner_riesz_kernel(2);
  const double coarse = absolute_moment_sup(br, unit_grid(50));
  const double fine = absolute_moment_sup(br, unit_grid(100));
  CHECK(std::isfinite(coarse));
  CHECK(coarse > 1.0);
  CHECK_THAT(fine, WithinAbs(coarse, 1e-4));
}

TEST_CASE("L1 norms", "[kernels]") {
  for (int n = 1; n <= 5; ++n) CHECK_THAT(l1_norm(bspline_kernel(n)).value, WithinAbs(1.0, 1e-8));
  const auto fejer = l1_norm(fejer_kernel(), 1e-4);
  CHECK_THAT(fejer.value, WithinAbs(1.0, 1e-4));
  CHECK(fejer.tail_bound <= 1e-4);

  const auto br = bochner_riesz_kernel(3);
  const auto base = l1_norm(br);
  for (int m = 1; m <= 3; ++m) {
    const auto avg = l1_norm(AveragedKernel(br, m).as_kernel());
    CHECK(avg.value <= base.upper() + 1e-8);
  }
}

TEST_CASE("Fourier transform at multiples of 2 pi", "[kernels]") {
  const auto m2 = bspline_kernel(2);
  CHECK(fourier_check(m2, 0).deviation <= 1e-8);
  CHECK(fourier_check(m2, 1).deviation <= 1e-8);
  CHECK(fourier_check(m2, 3).deviation <= 1e-8);
  for (int n = 2; n <= 5; ++n)
    for (int kk = -3; kk <= 3; ++kk) CHECK(fourier_check(bspline_kernel(n), kk).deviation <= 1e-8);
  CHECK_THROWS_AS(fourier_check(m2, 6), std::invalid_argument);

  // Transform of M_2 is sinc^2(v / 2pi).
  for (double v : {0.3, 1.0, 2.5}) {
    const double s = sinc(v / (2 * std::numbers::pi));
    CHECK_THAT(fourier_transform(m2, v).value.real(), WithinAbs(s * s, 1e-12));
  }
}

TEST_CASE("averaged Fourier identity", "[kernels]") {
  const double pi = std::numbers::pi;
  CHECK(averaged_fourier_identity_check(bspline_kernel(2), 1, 1.0) <= 1e-6);
  CHECK(averaged_fourier_identity_check(bspline_kernel(2), 2, pi) <= 1e-6);
  CHECK(std::abs(fourier_transform(AveragedKernel(bspline_kernel(2), 2).as_kernel(), pi).value) <= 1e-6);
  CHECK(averaged_fourier_identity_check(fejer_kernel(), 1, 0.5, 1e-4) <= 1e-4);
  CHECK_THROWS_AS(averaged_fourier_identity_check(bspline_kernel(2), 1, 0.0), std::invalid_argument);
}

TEST_CASE("averaging keeps bandlimited kernels bandlimited", "[kernels]") {
  // The Fejer transform vanishes for |v| >= pi, the Bochner-Riesz one for |v| >= 1.
  for (int m = 1; m <= 2; ++m) {
    const auto fejer = AveragedKernel(fejer_kernel(), m).as_kernel();
    for (double v : {3.5, 4.0, 5.0}) {
      const auto ft = fourier_transform(fejer, v, 1e-4);
      CHECK(std::abs(ft.value) <= ft.tail_bound + 1e-6);
    }
    const auto br = AveragedKernel(bochner_riesz_kernel(3), m).as_kernel();
    for (double v : {1.5, 2.0}) {
      const auto ft = fourier_transform(br, v, 1e-5);
      CHECK(std::abs(ft.value) <= ft.tail_bound + 1e-6);
    }
  }
}

TEST_CASE("lattice sums", "[kernels]") {
  const auto s = lattice_sums(bspline_kernel(3), 0.3, 3);
  CHECK_THAT(s.sum, WithinAbs(1.0, 1e-15));
  CHECK_THAT(s.abs_sum, WithinAbs(1.0, 1e-15));
}
