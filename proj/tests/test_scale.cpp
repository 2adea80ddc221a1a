#include <doctest.h>

#include <cmath>

#include "gtt/errors.hpp"
#include "gtt/scale.hpp"

using namespace gtt;

namespace {
const CpuDescriptor kRef{"reference", 2.4, 4.8};
}

TEST_CASE("two hours per frame at 30 fps") {
  const WorkloadMeasurement m{7200.0, kRef};
  CHECK(required_parallelism(m, {30.0}) == 216000);
  const auto est = extrapolate(m, {30.0}, 0.5, kRef);
  CHECK(est.n_processors == 216000);
  CHECK(est.peak_tflops == doctest::Approx(1036.8).epsilon(1e-12));
  CHECK(est.sustained_tflops == doctest::Approx(518.4).epsilon(1e-12));
  CHECK(est.efficiency == 0.5);
  REQUIRE(est.inputs);
  CHECK(est.inputs->measurement.seconds_per_frame == 7200.0);
  CHECK(est.inputs->target.frames_per_second == 30.0);
}

TEST_CASE("doubling the frame rate doubles the processors") {
  CHECK(required_parallelism({7200.0, kRef}, {60.0}) == 432000);
}

TEST_CASE("a frame that already runs at the target needs one processor") {
  CHECK(required_parallelism({1.0 / 30.0, kRef}, {30.0}) == 1);
  CHECK(required_parallelism({0.001, kRef}, {30.0}) == 1);
  CHECK(required_parallelism({0.1, kRef}, {30.0}) == 3);
  CHECK(required_parallelism({0.1001, kRef}, {30.0}) == 4);
}

TEST_CASE("non-positive inputs are rejected") {
  CHECK_THROWS_AS(required_parallelism({0.0, kRef}, {30.0}), InvalidArgument);
  CHECK_THROWS_AS(required_parallelism({-1.0, kRef}, {30.0}), InvalidArgument);
  CHECK_THROWS_AS(required_parallelism({1.0, kRef}, {0.0}), InvalidArgument);
  CHECK_THROWS_AS(required_parallelism({NAN, kRef}, {30.0}), InvalidArgument);
  CHECK_THROWS_AS(extrapolate({1.0, kRef}, {30.0}, 0.0, kRef), InvalidArgument);
  CHECK_THROWS_AS(extrapolate({1.0, kRef}, {30.0}, 1.5, kRef), InvalidArgument);
  CHECK_THROWS_AS(extrapolate({1.0, kRef}, {30.0}, 0.5, {"x", 2.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(turing_scale(0, kRef, 0.5), InvalidArgument);
  CHECK(extrapolate({1.0, kRef}, {30.0}, 1.0, kRef).sustained_tflops ==
        extrapolate({1.0, kRef}, {30.0}, 1.0, kRef).peak_tflops);
}

TEST_CASE("processors grow monotonically with frame time and frame rate") {
  std::uint64_t prev = 0;
  for (double spf = 0.01; spf < 5000.0; spf *= 1.37) {
    const auto n = required_parallelism({spf, kRef}, {24.0});
    CHECK(n >= prev);
    CHECK(double(n) >= spf * 24.0 * (1.0 - 1e-9));
    CHECK(double(n) < spf * 24.0 + 1.0);
    prev = n;
  }
  prev = 0;
  for (double fps = 1.0; fps <= 120.0; fps += 7.0) {
    const auto n = required_parallelism({3.3, kRef}, {fps});
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("threshold verdict compares sustained rates") {
  const auto req = extrapolate({7200.0, kRef}, {30.0}, 0.5, kRef);
  const auto bgl = passes_threshold({367.0, 280.6}, req);
  CHECK_FALSE(bgl.pass);
  CHECK(bgl.margin_tflops == doctest::Approx(280.6 - 518.4));
  const auto big = passes_threshold({3000.0, 1500.0}, req);
  CHECK(big.pass);
  CHECK(passes_threshold({1036.8, 518.4}, req).pass);
}
