#include <catch_amalgamated.hpp>

#include <varsamp/registry.hpp>

using namespace varsamp;

TEST_CASE("kernel ids", "[registry]") {
  CHECK(parse_kernel("bspline:3").kernel().id == "bspline:3");
  CHECK(parse_kernel("fejer").kernel().id == "fejer");
  CHECK(parse_kernel("bochner-riesz:2").kernel().id == "bochner-riesz:2");
  const auto avg = parse_kernel("avg:2:bspline:3");
  CHECK(avg.averaged());
  CHECK(avg.m == 2);
  CHECK(avg.base.id == "bspline:3");
  CHECK(avg.kernel().id == "avg:2:bspline:3");
  CHECK(avg.kernel()(0.0) == AveragedKernel(bspline_kernel(3), 2)(0.0));

  for (const char* bad : {"", "spline:3", "bspline:x", "bspline:0", "bochner-riesz:1.5", "bochner-riesz:9",
                          "avg:0:fejer", "avg:fejer", "avg:1:avg:1:fejer", "fejer2"})
    CHECK_THROWS_AS(parse_kernel(bad), UnknownId);
}

TEST_CASE("signal ids", "[registry]") {
  CHECK(parse_signal("hat:1").id == "hat:1");
  CHECK(parse_signal("hat:0.5").essential_window.hi == 0.5);
  CHECK(parse_signal("const:2").left_value == 2.0);
  for (const char* id : {"witch", "bump", "heaviside", "staircase3", "ramp_clip"}) CHECK(parse_signal(id).id == id);
  for (const char* bad : {"", "hat:", "hat:-1", "const:x", "sine"}) CHECK_THROWS_AS(parse_signal(bad), UnknownId);
}
