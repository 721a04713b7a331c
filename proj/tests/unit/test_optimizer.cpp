#include <doctest.h>

#include <string>
#include <vector>

#include "lkstopo/config.hpp"
#include "lkstopo/optimizer.hpp"

using namespace lkstopo;

namespace {

const char* kTiny = R"(version: 1
name: tiny
dimension: 2
analysis:
  extents: [16, 14]
design:
  extents: [6, 6]
  motion:
    pivot: [2.5, 2.5]
    position: [8, 7]
    rotation: {period: 60}
objective:
  kind: pressure_on_boundary
  region: {type: faces}
  window: [0, 24]
constraint:
  v_max: 0.3
run:
  steps: 24
optimization:
  max_steps: 6
)";

// Objective history that changes by 1% per step, so only the cadence fires.
std::vector<double> drifting(int n) {
  std::vector<double> J;
  double v = 1.0;
  for (int i = 0; i < n; ++i, v *= 1.01) J.push_back(v);
  return J;
}

std::vector<int> events(BetaSchedule& s, const std::vector<double>& J) {
  std::vector<int> out;
  for (int k = 0; k < static_cast<int>(J.size()); ++k) {
    const std::vector<double> past(J.begin(), J.begin() + k);
    if (s.advance(k, past)) out.push_back(k);
  }
  return out;
}

}  // namespace

TEST_CASE("relative change criterion") {
  const double J = -0.3;
  CHECK(relative_change_converged(J * (1.0 + 5e-7), J, 1e-6));
  CHECK_FALSE(relative_change_converged(J * (1.0 + 2e-6), J, 1e-6));
  CHECK(relative_change_converged(J, J, 0.0));
}

TEST_CASE("beta doubles on the fixed cadence") {
  ContinuationSettings s;
  s.every = 80;
  BetaSchedule b(s, 1.0);
  CHECK(events(b, drifting(400)) == std::vector<int>{80, 160, 240, 320});
  CHECK(b.beta() == 16.0);
  CHECK_FALSE(b.at_cap());
}

TEST_CASE("hold delays the first doubling") {
  ContinuationSettings s;
  s.every = 20;
  s.hold = 30;
  BetaSchedule b(s, 1.0);
  CHECK(events(b, drifting(75)) == std::vector<int>{30, 50, 70});
}

TEST_CASE("stalled objective triggers an early doubling") {
  ContinuationSettings s;
  s.every = 80;
  s.fluctuation_window = 5;
  s.fluctuation_tol = 1e-4;
  BetaSchedule b(s, 1.0);
  const std::vector<double> flat(20, -0.25);
  CHECK(events(b, flat) == std::vector<int>{6, 12, 18});
  CHECK(b.beta() == 8.0);
}

TEST_CASE("beta stops at the cap") {
  ContinuationSettings s;
  s.every = 2;
  s.beta_max = 8.0;
  BetaSchedule b(s, 3.0);
  CHECK(events(b, drifting(20)) == std::vector<int>{2, 4});
  CHECK(b.beta() == 8.0);
  CHECK(b.at_cap());
}

TEST_CASE("short optimization run") {
  const CaseConfig c = parse_config(kTiny);
  std::vector<double> first_design;
  int seen = 0;
  OptimizationCallbacks cb;
  cb.on_step = [&](const StepRecord&) { ++seen; };
  cb.on_design = [&](int k, const DesignField& d) {
    if (k == 0) first_design.assign(d.projected().begin(), d.projected().end());
  };
  const OptimizationResult r = optimize(c, cb);
  REQUIRE(r.history.size() == 6);
  CHECK(seen == 6);
  CHECK_FALSE(r.converged);
  CHECK(r.stop_reason == "max_steps");
  for (int k = 0; k < 6; ++k) {
    CHECK(r.history[k].step == k);
    CHECK(r.history[k].v_max == 0.3);
    CHECK(r.history[k].G == doctest::Approx(r.history[k].volume / 0.3 - 1.0));
  }
  // Uniform 0.5 start, then the update must reduce the objective.
  CHECK(r.history[0].volume == doctest::Approx(0.5));
  CHECK(r.history.back().J < r.history[0].J);
  CHECK(r.history.back().G < r.history[0].G);

  // The recorded objective is the plain forward measurement of that design.
  CHECK(measure_design(c, first_design, 0) == doctest::Approx(r.history[0].J).epsilon(1e-12));
  CHECK(r.physical == physical_field(c, r.raw, r.history.back().beta));

  const OptimizationResult again = optimize(c);
  REQUIRE(again.history.size() == r.history.size());
  for (std::size_t k = 0; k < r.history.size(); ++k) {
    CHECK(again.history[k].J == r.history[k].J);
    CHECK(again.history[k].G == r.history[k].G);
  }
  CHECK(again.raw == r.raw);
}

TEST_CASE("continuation and schedule events are recorded") {
  const std::string text = std::string(kTiny) +
                           "projection: {enabled: true, beta: 1, beta_max: 4, every: 2}\n";
  CaseConfig c = parse_config(text);
  c.constraint.schedule = {{0, 0.6}, {3, 0.3}};
  const OptimizationResult r = optimize(c);
  REQUIRE(r.history.size() == 6);
  CHECK(r.history[2].event == "beta");
  CHECK(r.history[3].event == "vmax");
  CHECK(r.history[4].event == "beta");
  CHECK(r.history[4].beta == 4.0);
  CHECK(r.history[1].v_max == 0.6);
  CHECK(r.history[5].v_max == 0.3);
}

TEST_CASE("unoptimized disc measured after warm-up") {
  const CaseConfig c = parse_config(kTiny);
  const std::vector<double> solid(36, 1.0);
  const double cold = measure_design(c, solid, 0);
  const double warm = measure_design(c, solid, 2);
  CHECK(cold < 0.0);
  CHECK(warm < 0.0);
  CHECK(measure_design(c, solid, 2) == warm);
}
