#include <doctest.h>

#include <cmath>
#include <exception>
#include <numbers>
#include <string>

#include "lkstopo/config.hpp"

using namespace lkstopo;

namespace {

const char* kTiny = R"(version: 1
name: tiny
dimension: 2
analysis:
  extents: [16, 12]
design:
  extents: [6, 6]
  motion:
    pivot: [2.5, 2.5]
    position: [8, 6]
    rotation: {period: 200}
objective:
  kind: pressure_on_boundary
  region: {type: faces}
  window: [0, 20]
constraint:
  v_max: 0.3
run:
  steps: 20
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto p = text.find(from);
  REQUIRE(p != std::string::npos);
  return text.replace(p, from.size(), to);
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

CaseConfig shipped(const std::string& name) {
  return load_config(std::string(LKSTOPO_SOURCE_DIR) + "/cases/" + name + ".cfg");
}

}  // namespace

TEST_CASE("minimal case takes the documented defaults") {
  const CaseConfig c = parse_config(kTiny);
  CHECK(c.name == "tiny");
  CHECK(c.analysis.extents[0] == 16);
  CHECK(c.analysis.dx == 1.0);
  CHECK(c.A == 0.25);
  CHECK(c.brinkman.kappa_max == 1000.0);
  CHECK(c.brinkman.q == doctest::Approx(0.1));
  CHECK(c.kernel == KernelForm::Standard);
  CHECK(c.filter.radius == doctest::Approx(2.4));
  CHECK(c.projection.beta == 1.0);
  CHECK(c.projection.eta == 0.5);
  CHECK(c.continuation.beta_max == 1024.0);
  CHECK(c.continuation.every == 80);
  CHECK(c.initial.background == 0.5);
  CHECK(c.optimization.tolerance == 1e-6);
  CHECK(c.optimization.move == doctest::Approx(0.2));
  CHECK(c.run.restart == RestartPolicy::Cold);
  CHECK(c.boundary == BoundarySpec::all_walls());
  CHECK(c.motion.rotation.rate == doctest::Approx(2 * std::numbers::pi / 200));
}

TEST_CASE("shipped rotor case") {
  const CaseConfig c = shipped("rotor2d");
  CHECK(c.analysis.extents[0] == 150);
  CHECK(c.analysis.extents[1] == 150);
  CHECK(c.design.extents[0] == 100);
  CHECK(c.design.extents[1] == 100);
  CHECK(c.constraint.v_max == 0.25);
  CHECK(c.run.steps == 3000);
  CHECK(c.motion.rotation.rate == doctest::Approx(2 * std::numbers::pi / 3000));
  CHECK(c.motion.pivot[0] == 50.0);
  CHECK(c.motion.translation.offset[0] == 75.0);
}

TEST_CASE("shipped gallery parses and validates") {
  for (const char* name : {"rotor2d", "rotor2d_small", "pump2d", "pump2d_small", "rotor3d",
                           "rotor3d_small"}) {
    CAPTURE(std::string(name));
    const CaseConfig c = shipped(name);
    CHECK_NOTHROW(c.validate());
    CHECK(c.initial.background == 0.5);
  }
  const CaseConfig pump = shipped("pump2d");
  REQUIRE(pump.solid.size() == 1);
  CHECK(pump.solid[0].lo[0] == 20.0);
  CHECK(pump.solid[0].hi[1] == 180.0);
  CHECK(pump.reference.has_value());
  CHECK(pump.run.restart == RestartPolicy::Warm);
  const CaseConfig r3 = shipped("rotor3d");
  CHECK(r3.constraint.at(0) == 1.0);
  CHECK(r3.constraint.at(39) == 1.0);
  CHECK(r3.constraint.at(40) == doctest::Approx(0.4));
  CHECK(r3.constraint.at(400) == doctest::Approx(0.4));
}

TEST_CASE("describe output parses back to the same case") {
  for (const char* name : {"rotor2d", "pump2d_small", "rotor3d"}) {
    CAPTURE(std::string(name));
    const CaseConfig c = shipped(name);
    const std::string text = describe(c);
    const CaseConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(describe(back) == text);
  }
  const CaseConfig tiny = parse_config(kTiny);
  CHECK(parse_config(describe(tiny)) == tiny);
}

TEST_CASE("errors name the field and line") {
  const std::string missing = error_of(replace(kTiny, "  extents: [16, 12]\n", "  A: 0.2\n"));
  CHECK(missing.find("analysis.extents") != std::string::npos);
  CHECK(missing.find("line 5") != std::string::npos);

  const std::string unknown = error_of(std::string(kTiny) + "foo: 1\n");
  CHECK(unknown.find("unknown key 'foo'") != std::string::npos);
  CHECK(unknown.find("line 20") != std::string::npos);

  const std::string nested = error_of(replace(kTiny, "  v_max: 0.3", "  v_max: 0.3\n  vmax: 0.2"));
  CHECK(nested.find("constraint.vmax") != std::string::npos);

  CHECK(error_of(replace(kTiny, "version: 1", "version: 7")).find("version") != std::string::npos);
  CHECK(error_of("analysis: [1, 2\n").find("line") != std::string::npos);
  CHECK_FALSE(error_of(replace(kTiny, "v_max: 0.3", "v_max: 1.5")).empty());
  CHECK_FALSE(error_of(replace(kTiny, "window: [0, 20]", "window: [0, 40]")).empty());
  CHECK_FALSE(error_of(replace(kTiny, "  steps: 20", "  steps: 20\n  restart: sometimes")).empty());
  CHECK_FALSE(error_of(replace(kTiny, "  extents: [16, 12]",
                               "  extents: [16, 12]\n  A: 0.8")).empty());
  CHECK_FALSE(error_of("").empty());
}

TEST_CASE("boundary and objective variants") {
  std::string text = replace(kTiny, "constraint:",
                             "boundary:\n  default: wall\n  x_min: {type: velocity, velocity: [0.05, 0]}\n"
                             "  x_max: {type: pressure, density: 1.0}\nconstraint:");
  CaseConfig c = parse_config(text);
  CHECK(c.boundary.faces[kXMin].type == BoundaryType::VelocityInlet);
  CHECK(c.boundary.faces[kXMin].velocity[0] == 0.05);
  CHECK(c.boundary.faces[kXMax].type == BoundaryType::PressureOutlet);
  CHECK(c.boundary.faces[kYMin].type == BoundaryType::Wall);
  CHECK(parse_config(describe(c)) == c);

  const std::string periodic_one_side =
      replace(kTiny, "constraint:", "boundary:\n  x_min: {type: periodic}\nconstraint:");
  CHECK_FALSE(error_of(periodic_one_side).empty());

  text = replace(kTiny, "  kind: pressure_on_boundary\n  region: {type: faces}",
                 "  kind: directed_flow_in_region\n  region: {type: box, lo: [2, 2], hi: [3, 9]}\n"
                 "  direction: [0, 1]");
  c = parse_config(text);
  CHECK(c.objective.kind == ObjectiveKind::DirectedFlowInRegion);
  CHECK(c.objective.region.hi[1] == 9);
  const std::string not_unit = replace(text, "direction: [0, 1]", "direction: [0, 2]");
  CHECK_FALSE(error_of(not_unit).empty());
}

TEST_CASE("field rasterization") {
  FieldSpec f;
  f.background = 0.1;
  ShapeSpec e;
  e.type = ShapeSpec::Type::Ellipse;
  e.center = {5, 5, 0};
  e.radii = {3, 1.5, 0};
  e.value = 0.9;
  f.shapes.push_back(e);
  const UniformGrid g = UniformGrid::make(std::vector<int>{11, 11});
  const auto v = f.rasterize(g);
  CHECK(v[g.index({5, 5, 0})] == 0.9);
  CHECK(v[g.index({8, 5, 0})] == 0.9);
  CHECK(v[g.index({5, 7, 0})] == 0.1);
  CHECK(v[g.index({0, 0, 0})] == 0.1);
}

TEST_CASE("constraint schedule validation") {
  ConstraintSpec s;
  s.v_max = 0.4;
  s.schedule = {{0, 1.0}, {10, 0.4}};
  CHECK_NOTHROW(s.validate());
  CHECK(s.at(5) == 1.0);
  CHECK(s.at(10) == 0.4);
  s.schedule = {{0, 0.4}, {10, 0.6}};
  CHECK_THROWS(s.validate());
}

TEST_CASE("cases are found by name") {
  CHECK(find_case("rotor2d_small").filename() == "rotor2d_small.cfg");
  CHECK_THROWS_AS(find_case("no_such_case"), ConfigError);
}
