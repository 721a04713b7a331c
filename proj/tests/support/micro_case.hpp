#pragma once

// Small moving-body problem shared by the adjoint unit tests and the
// acceptance binary: full pipeline raw design -> filter -> projection ->
// forward -> objective, with the adjoint gradient checked by central
// differences along random directions.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lkstopo/adjoint.hpp"
#include "lkstopo/design_field.hpp"
#include "lkstopo/forward.hpp"
#include "lkstopo/objectives.hpp"
#include "lkstopo/optimizer.hpp"

namespace lkstopo::testing {

struct MicroCase {
  FlowSetup setup;
  ObjectiveSpec objective;
  FilterSettings filter{true, 1.5};
  ProjectionSettings projection{true, 2.0, 0.5};
  int steps = 10;
};

inline MicroCase micro_case(ObjectiveKind kind, int dim = 2) {
  MicroCase c;
  const int n = dim == 2 ? 12 : 8;
  const int nd = dim == 2 ? 6 : 4;
  c.setup.grid = UniformGrid::make(std::vector<int>(dim, n));
  c.setup.boundary = BoundarySpec::all_walls();
  MotionSpec m;
  m.dim = dim;
  m.axis = 2;
  m.pivot = {0.5 * (nd - 1), 0.5 * (nd - 1), 0.5 * (nd - 1)};
  m.translation.offset = {0.5 * (n - 1), 0.5 * (n - 1), 0.5 * (n - 1)};
  m.translation.amplitude = {0.3, 0.0, 0.0};
  m.translation.period = 25.0;
  m.rotation = RotationLaw::with_period(150.0, 0.2);
  c.setup.design = DesignBody{UniformGrid::make(std::vector<int>(dim, nd)), m};
  c.objective.kind = kind;
  c.objective.window_begin = 2.0;
  c.objective.window_end = c.steps;
  if (kind == ObjectiveKind::DirectedFlowInRegion) {
    c.objective.region.type = RegionSpec::Type::Box;
    c.objective.region.lo = {1, 1, 1};
    c.objective.region.hi = {n - 2, 2, n - 2};
    c.objective.direction = {1.0, 0.0, 0.0};
  }
  return c;
}

inline double micro_objective(const MicroCase& c, const std::vector<double>& raw) {
  DesignField field(c.setup.design->grid, c.filter, c.projection);
  field.set_raw(raw);
  FlowSolver solver(c.setup);
  solver.set_design(field.projected());
  Objective obj(c.objective, c.setup.grid, solver.dt(), 0, c.steps);
  return solver.run(solver.initial_state(), c.steps, &obj, nullptr).objective;
}

inline std::vector<double> micro_gradient(const MicroCase& c, const std::vector<double>& raw) {
  DesignField field(c.setup.design->grid, c.filter, c.projection);
  field.set_raw(raw);
  FlowSolver solver(c.setup);
  solver.set_design(field.projected());
  Objective obj(c.objective, c.setup.grid, solver.dt(), 0, c.steps);
  const Evaluation ev = evaluate(solver, solver.initial_state(), obj, c.steps,
                                 {true, HistoryPrecision::Double, 1});
  return field.chain_rule(ev.sensitivity);
}

struct DirectionalCheck {
  double adjoint = 0.0;
  double fd = 0.0;
  double relative = 0.0;
};

/// Adjoint vs central-difference directional derivatives along `count`
/// random unit directions.
inline std::vector<DirectionalCheck> micro_directional(const MicroCase& c, int count,
                                                       unsigned seed, double h = 1e-5) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.25, 0.75);
  std::normal_distribution<double> N(0.0, 1.0);
  const std::size_t nd = c.setup.design->grid.size();
  std::vector<double> raw(nd);
  for (auto& v : raw) v = U(rng);
  const auto grad = micro_gradient(c, raw);
  std::vector<DirectionalCheck> out;
  for (int k = 0; k < count; ++k) {
    std::vector<double> dir(nd);
    double norm = 0.0;
    for (auto& v : dir) {
      v = N(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    DirectionalCheck r;
    auto rp = raw, rm = raw;
    for (std::size_t i = 0; i < nd; ++i) {
      dir[i] /= norm;
      r.adjoint += grad[i] * dir[i];
      rp[i] += h * dir[i];
      rm[i] -= h * dir[i];
    }
    r.fd = (micro_objective(c, rp) - micro_objective(c, rm)) / (2.0 * h);
    r.relative = std::abs(r.adjoint - r.fd) / std::max(std::abs(r.fd), 1e-300);
    out.push_back(r);
  }
  return out;
}

}  // namespace lkstopo::testing
