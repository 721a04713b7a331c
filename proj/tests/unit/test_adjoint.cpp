#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lkstopo/adjoint.hpp"
#include "lkstopo/objectives.hpp"
#include "lkstopo/optimizer.hpp"
#include "micro_case.hpp"

using namespace lkstopo;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> U(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = U(rng);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

FlowSetup stepped_setup(int dim, bool periodic) {
  FlowSetup s;
  const int n = dim == 2 ? 5 : 4;
  s.grid = UniformGrid::make(std::vector<int>(dim, n));
  if (periodic) {
    for (int f = 0; f < 2 * dim; ++f) s.boundary.faces[f].type = BoundaryType::Periodic;
  } else {
    s.boundary = BoundarySpec::all_walls();
    s.boundary.faces[kXMax] = {BoundaryType::PressureOutlet, {}, 1.0};
    s.boundary.faces[kYMin] = {BoundaryType::VelocityInlet, {0.01, 0.02, 0.0}, 1.0};
  }
  MotionSpec m;
  m.dim = dim;
  m.pivot = {1, 1, 1};
  m.translation.offset = {2.2, 1.9, 2.1};
  m.rotation = RotationLaw::with_period(60.0, 0.5);
  s.design = DesignBody{UniformGrid::make(std::vector<int>(dim, 3)), m};
  return s;
}

}  // namespace

TEST_CASE("adjoint equilibrium") {
  const auto& m = LatticeModel::d2q9();
  for (int i = 0; i < 9; ++i) {
    CHECK(adjoint_equilibrium(1.0, {0, 0, 0}, i, m) == 1.0);
    CHECK(adjoint_equilibrium(0.0, {0, 0, 0}, i, m) == 0.0);
  }
}

TEST_CASE("adjoint step is the transpose of the linearized forward step") {
  for (int dim : {2, 3}) {
    for (bool periodic : {true, false}) {
      CAPTURE(dim);
      CAPTURE(periodic);
      FlowSolver solver(stepped_setup(dim, periodic));
      std::mt19937 rng(17 + dim);
      std::vector<double> gamma = random_vector(solver.design_map()->design().size(), rng);
      for (auto& g : gamma) g = 0.5 + 0.5 * g;
      solver.set_design(gamma);
      const std::size_t n = solver.grid().size();
      FlowState base = solver.initial_state();
      for (auto& r : base.rho) r += 0.01 * random_vector(1, rng)[0];
      base.u = random_vector(dim * n, rng, 0.05);

      Snapshot snap;
      solver.build_snapshot(7, snap);
      const std::vector<double> v_rho = random_vector(n, rng);
      const std::vector<double> v_u = random_vector(dim * n, rng);
      const double h = 1e-4;
      FlowState plus = base, minus = base, out_p, out_m;
      for (std::size_t i = 0; i < n; ++i) {
        plus.rho[i] += h * v_rho[i];
        minus.rho[i] -= h * v_rho[i];
      }
      for (std::size_t i = 0; i < dim * n; ++i) {
        plus.u[i] += h * v_u[i];
        minus.u[i] -= h * v_u[i];
      }
      solver.step(plus, out_p, snap);
      solver.step(minus, out_m, snap);

      AdjointState w(dim, n);
      w.rho = random_vector(n, rng);
      w.u = random_vector(dim * n, rng);
      double lhs = 0.0;
      for (std::size_t i = 0; i < n; ++i) lhs += w.rho[i] * (out_p.rho[i] - out_m.rho[i]) / (2 * h);
      for (std::size_t i = 0; i < dim * n; ++i) lhs += w.u[i] * (out_p.u[i] - out_m.u[i]) / (2 * h);

      AdjointState back;
      adjoint_step(solver, base.u, snap, w, back);
      const double rhs = dot(back.rho, v_rho) + dot(back.u, v_u);
      CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_CASE("adjoint step maps zero to zero") {
  FlowSolver solver(stepped_setup(2, false));
  solver.set_design(std::vector<double>(9, 0.5));
  const std::size_t n = solver.grid().size();
  Snapshot snap;
  solver.build_snapshot(1, snap);
  AdjointState zero(2, n), out;
  adjoint_step(solver, std::vector<double>(2 * n, 0.01), snap, zero, out);
  CHECK(out.is_zero());
}

TEST_CASE("stiff penalization annihilates the adjoint velocity") {
  FlowSetup s = stepped_setup(2, true);
  FlowSolver solver(s);
  solver.set_design(std::vector<double>(9, 0.5));
  const std::size_t n = solver.grid().size();
  Snapshot snap;
  solver.build_snapshot(1, snap);
  std::fill(snap.kappa.begin(), snap.kappa.end(), 1e14);
  AdjointState w(2, n);
  std::fill(w.u.begin(), w.u.end(), 1.0);
  std::vector<double> bstar;
  AdjointState out;
  adjoint_step(solver, std::vector<double>(2 * n, 0.0), snap, w, out, &bstar);
  for (double b : bstar) CHECK(std::abs(b) < 1e-13);
}

TEST_CASE("micro pipeline gradients match central differences") {
  for (auto kind : {ObjectiveKind::PressureOnBoundary, ObjectiveKind::DirectedFlowInRegion}) {
    CAPTURE(static_cast<int>(kind));
    const auto c = testing::micro_case(kind);
    const auto checks = testing::micro_directional(c, 4, 21);
    for (const auto& r : checks) {
      CAPTURE(r.adjoint);
      CAPTURE(r.fd);
      CHECK(r.relative < 1e-4);
    }
  }
}

TEST_CASE("micro pipeline gradient in 3D") {
  const auto c = testing::micro_case(ObjectiveKind::DirectedFlowInRegion, 3);
  for (const auto& r : testing::micro_directional(c, 2, 5)) {
    CAPTURE(r.adjoint);
    CAPTURE(r.fd);
    CHECK(r.relative < 1e-4);
  }
}

TEST_CASE("sensitivity vanishes without penalization or sources") {
  auto c = testing::micro_case(ObjectiveKind::PressureOnBoundary);
  const std::vector<double> raw(c.setup.design->grid.size(), 0.5);

  SUBCASE("kappa_max = 0") {
    c.setup.brinkman.kappa_max = 0.0;
    for (double g : testing::micro_gradient(c, raw)) CHECK(g == 0.0);
  }
  SUBCASE("window after the run") {
    c.objective.window_begin = 50.0;
    c.objective.window_end = 60.0;
    for (double g : testing::micro_gradient(c, raw)) CHECK(g == 0.0);
  }
}

TEST_CASE("adjoint is linear in the objective sources") {
  auto a = testing::micro_case(ObjectiveKind::DirectedFlowInRegion);
  auto b = a;
  b.objective.direction = {-1.0, 0.0, 0.0};
  std::vector<double> raw(a.setup.design->grid.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = 0.3 + 0.4 * ((i * 7) % 11) / 10.0;
  const auto ga = testing::micro_gradient(a, raw);
  const auto gb = testing::micro_gradient(b, raw);
  for (std::size_t i = 0; i < ga.size(); ++i) CHECK(std::abs(ga[i] + gb[i]) <= 1e-14 * std::abs(ga[i]) + 1e-300);
}

TEST_CASE("volume sensitivity") {
  const auto s = volume_sensitivity(10000, 0.25);
  CHECK(s[0] == doctest::Approx(1.0 / 2500.0));
  CHECK(volume_sensitivity(10000, 0.5)[3] == doctest::Approx(0.5 * s[3]));
  std::vector<double> g(50, 0.2);
  const double g0 = eval_G(g, 0.3);
  const double h = 1e-4;
  g[11] += h;
  CHECK(std::abs((eval_G(g, 0.3) - g0) / h - volume_sensitivity(50, 0.3)[11]) < 1e-10);
  CHECK_THROWS(volume_sensitivity(0, 0.3));
}

TEST_CASE("warm restart carries the adjoint") {
  const auto c = testing::micro_case(ObjectiveKind::PressureOnBoundary);
  FlowSolver solver(c.setup);
  solver.set_design(std::vector<double>(c.setup.design->grid.size(), 0.6));
  Objective obj(c.objective, c.setup.grid, 1.0, 0, c.steps);
  const Evaluation cold = evaluate(solver, solver.initial_state(), obj, c.steps, {});
  CHECK_FALSE(cold.carry.is_zero());
  const Evaluation warm = evaluate(solver, cold.forward.final_state, obj, c.steps, {}, &cold.carry);
  CHECK(warm.sensitivity != cold.sensitivity);
}
