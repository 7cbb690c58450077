#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <vector>

#include <varsamp/variation.hpp>

using namespace varsamp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Partition-sum variation of S_bar f on a uniform grid, with no shared code
// beyond the operator itself.
double operator_variation_oracle(const Signal& f, const AveragedKernel& ak, double w, const Interval& I,
                                 std::size_t points) {
  const SamplingOperators ops(f, ak, w, I);
  double total = 0.0;
  double prev = ops.averaged(I.lo);
  for (std::size_t i = 1; i < points; ++i) {
    const double t = I.lo + I.length() * static_cast<double>(i) / static_cast<double>(points - 1);
    const double cur = ops.averaged(t);
    total += std::abs(cur - prev);
    prev = cur;
  }
  return total;
}

bool nondecreasing(const std::vector<TracePoint>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i].value < trace[i - 1].value - 1e-12) return false;
  return true;
}

}  // namespace

TEST_CASE("constant signals have zero variation", "[variation]") {
  const auto c = constant_signal(1.5);
  const AveragedKernel ak(bspline_kernel(2), 1);
  const auto win = required_window(c, ak, 4);
  CHECK(variation_of_operator_output(c, ak, 4, win).value == 0.0);
  CHECK_THAT(variation_of_difference(c, ak, 4, win).value, WithinAbs(0.0, 1e-12));
  const auto d = detracting_check(c, bspline_kernel(3), 2, 4);
  CHECK(d.pass);
  CHECK(d.lhs == 0.0);
  CHECK_THAT(kantorovich_l1_error(c, bspline_kernel(2), 4).value, WithinAbs(0.0, 1e-12));
}

TEST_CASE("operator output variation of the hat", "[variation]") {
  const auto f = hat(1);
  const AveragedKernel ak(bspline_kernel(2), 1);
  const auto est = variation_of_operator_output(f, ak, 8, required_window(f, ak, 8));
  CHECK(est.value <= 2.0 + 1e-9);
  CHECK(est.tail_bound == 0.0);
  // S_bar f is unimodal with peak S_bar f(0) = 1 - 1/(4 * 8) for this kernel.
  CHECK_THAT(est.value, WithinAbs(2.0 * (1.0 - 1.0 / 32.0), 1e-10));
}

TEST_CASE("integral and partition-sum variation agree", "[variation]") {
  for (const auto& f : catalog()) {
    for (const auto& k : {bspline_kernel(2), bspline_kernel(3)}) {
      for (int m = 1; m <= 3; ++m) {
        const double w = 4.0;
        const AveragedKernel ak(k, m);
        const auto win = required_window(f, ak, w);
        const auto est = variation_of_operator_output(f, ak, w, win);
        const double oracle = operator_variation_oracle(f, ak, w, win, 100000);
        CHECK_THAT(oracle, WithinRel(est.value, 1e-3));
        CHECK(oracle <= est.upper() + 1e-9);
      }
    }
  }
}

TEST_CASE("window smaller than the required margin is rejected", "[variation]") {
  const auto f = hat(1);
  const AveragedKernel ak(bspline_kernel(2), 2);
  try {
    variation_of_operator_output(f, ak, 4, {-1.5, 1.5});
    FAIL("expected WindowTooSmall");
  } catch (const WindowTooSmall& e) {
    CHECK_THAT(e.required().hi, WithinAbs(1.0 + (1.0 + 1.0) / 4 + 1.0, 1e-15));
    CHECK(std::string(e.what()).find("must contain") != std::string::npos);
  }
}

TEST_CASE("difference variation shrinks for AC signals", "[variation]") {
  const AveragedKernel ak(bspline_kernel(2), 1);
  for (const auto& f : ac_catalog()) {
    const auto win = required_window(f, ak, 2);
    double prev = std::numeric_limits<double>::infinity();
    for (double w : {2.0, 4.0, 8.0, 16.0, 32.0}) {
      const auto est = variation_of_difference(f, ak, w, win);
      CHECK(est.value < prev);
      CHECK(nondecreasing(est.refinement_trace));
      CHECK(est.value == est.refinement_trace.back().value);
      CHECK(est.tail_bound >= 0.0);
      prev = est.value;
    }
  }
}

TEST_CASE("jumps survive in the difference", "[variation]") {
  for (const auto& f : {heaviside(), staircase3()}) {
    double jump = 0.0;
    for (const auto& j : f.discontinuities) jump += std::abs(j.magnitude);
    for (int m = 1; m <= 3; ++m) {
      const AveragedKernel ak(bspline_kernel(2), m);
      for (double w : {2.0, 8.0, 32.0}) {
        const auto est = variation_of_difference(f, ak, w, required_window(f, ak, w));
        CHECK(est.value >= jump - 0.01);
        CHECK(nondecreasing(est.refinement_trace));
      }
    }
  }
}

TEST_CASE("refinement respects the point cap", "[variation]") {
  RefinementOptions opts;
  opts.initial_points = 5;
  opts.cap = 33;
  opts.rel_tol = 1e-15;
  const auto est = refine_partition_variation([](double t) { return std::sin(23 * t) + t * t; }, {0.0, 1.0}, {}, opts);
  CHECK(est.capped);
  CHECK(est.partition_points == 33);
  CHECK(nondecreasing(est.refinement_trace));
}

TEST_CASE("detracting check reports stated and corrected bounds", "[variation]") {
  // m = 1: the bound holds.
  const auto h = detracting_check(heaviside(), bspline_kernel(3), 1, 8);
  CHECK(h.pass);
  CHECK(h.lhs <= 1.0 + 1e-6);
  CHECK(h.rhs == 1.0);

  // hat with M_2, m = 2, w = 4: S_bar f(0) = 7/8, so V[S_bar f] = 7/4.
  const auto d = detracting_check(hat(1), bspline_kernel(2), 2, 4);
  CHECK_THAT(d.lhs, WithinAbs(1.75, 1e-10));
  CHECK(d.rhs == 1.0);
  CHECK(d.corrected_rhs == 2.0);
  CHECK(d.lhs <= d.corrected_rhs);
  const AveragedKernel ak(bspline_kernel(2), 2);
  CHECK_THAT(averaged_sampling_series(hat(1), ak, 4, 0.0), WithinAbs(0.875, 1e-15));
}

TEST_CASE("detracting check uses the full norm of the kernel", "[variation]") {
  for (const auto& f : catalog())
    for (int m = 1; m <= 3; ++m)
      for (double w : {1.0, 4.0}) {
        const auto d = detracting_check(f, bspline_kernel(3), m, w);
        CHECK(d.corrected_pass);
      }
}

TEST_CASE("detracting check with a decaying kernel tightens its window", "[variation]") {
  const auto d = detracting_check(hat(1), fejer_kernel(), 1, 4);
  CHECK(d.pass);
  CHECK(d.estimate.tail_bound <= 1e-3);
  CHECK(d.lhs < 2.0);
}

TEST_CASE("Kantorovich L1 error", "[variation]") {
  double prev = std::numeric_limits<double>::infinity();
  for (double w : {2.0, 4.0, 8.0, 16.0}) {
    const auto e = kantorovich_l1_error(hat(1), bspline_kernel(2), w);
    // For the hat, K_w f' - f' is +-1 on two cells of width 1/(2w) per kink pair.
    CHECK_THAT(e.value, WithinAbs(2.0 / w, 1e-9));
    CHECK(e.value < prev);
    prev = e.value;
  }
  const auto e2 = kantorovich_l1_error(witch(), bspline_kernel(3), 2);
  const auto e16 = kantorovich_l1_error(witch(), bspline_kernel(3), 16);
  CHECK(e16.value < e2.value / 4);
  CHECK(e2.tail_bound > 0.0);
  CHECK_THROWS_AS(kantorovich_l1_error(heaviside(), bspline_kernel(2), 4), std::domain_error);
}

TEST_CASE("convergence study rows", "[variation]") {
  const std::vector<double> ws{2, 4, 8, 16, 32};
  const auto rows = convergence_study(hat(1), bspline_kernel(2), 1, ws);
  REQUIRE(rows.size() == ws.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].w == ws[i]);
    CHECK(rows[i].bound == 2.0);
    if (i) CHECK(rows[i].v_diff.value < rows[i - 1].v_diff.value);
    CHECK(rows[i].v_op.value <= rows[i].bound + 1e-9);
  }
  const auto jumps = convergence_study(heaviside(), bspline_kernel(2), 1, ws);
  for (const auto& r : jumps) CHECK(r.v_diff.value >= 0.99);

  const std::vector<double> bad{4, 2};
  CHECK_THROWS_AS(convergence_study(hat(1), bspline_kernel(2), 1, bad), std::invalid_argument);
}

TEST_CASE("parallel map keeps slot order", "[variation]") {
  for (unsigned threads : {1u, 2u, 4u, 7u}) {
    const auto out = parallel_map<int>(100, [](std::size_t i) { return static_cast<int>(i * i); }, threads);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
  }
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 3) throw std::runtime_error("x"); }, 4),
                  std::runtime_error);
}
