#include "lkstopo/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lkstopo/lattice.hpp"

namespace lkstopo {

namespace {
constexpr double kTimeEps = 1e-9;
}

std::string_view to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::PressureOnBoundary ? "pressure_on_boundary"
                                                   : "directed_flow_in_region";
}

ObjectiveKind objective_kind_from_string(std::string_view name) {
  if (name == "pressure_on_boundary") return ObjectiveKind::PressureOnBoundary;
  if (name == "directed_flow_in_region") return ObjectiveKind::DirectedFlowInRegion;
  throw std::invalid_argument("unknown objective kind '" + std::string(name) + "'");
}

std::vector<std::size_t> resolve_region(const UniformGrid& grid,
                                        const RegionSpec& region) {
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Index3 c = grid.coords(i);
    bool inside = false;
    switch (region.type) {
      case RegionSpec::Type::Faces: {
        for (int a = 0; a < grid.dim && !inside; ++a) {
          const bool lo = c[a] == 0;
          const bool hi = c[a] == grid.extents[a] - 1;
          if (region.faces.empty()) {
            inside = lo || hi;
          } else {
            for (int f : region.faces) {
              if ((f == 2 * a && lo) || (f == 2 * a + 1 && hi)) inside = true;
            }
          }
        }
        break;
      }
      case RegionSpec::Type::Box: {
        inside = true;
        for (int a = 0; a < grid.dim; ++a) {
          if (c[a] < region.lo[a] || c[a] > region.hi[a]) inside = false;
        }
        break;
      }
      case RegionSpec::Type::Cylinder: {
        const Vec3 x = grid.position(c);
        double r2 = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
          if (a == region.axis) continue;
          r2 += (x[a] - region.center[a]) * (x[a] - region.center[a]);
        }
        const double s = x[region.axis];
        inside = r2 <= region.radius * region.radius && s >= region.axial_lo &&
                 s <= region.axial_hi;
        break;
      }
    }
    if (inside) nodes.push_back(i);
  }
  if (nodes.empty()) throw std::invalid_argument("objective region contains no nodes");
  return nodes;
}

void ObjectiveSpec::validate(int dim) const {
  if (!(window_end > window_begin) || window_begin < 0.0) {
    throw std::invalid_argument("objective window must satisfy 0 <= begin < end");
  }
  if (kind == ObjectiveKind::DirectedFlowInRegion) {
    double n2 = 0.0;
    for (int a = 0; a < dim; ++a) n2 += direction[a] * direction[a];
    for (int a = dim; a < 3; ++a) {
      if (direction[a] != 0.0) throw std::invalid_argument("objective direction has extra components");
    }
    if (std::abs(n2 - 1.0) > 1e-9) throw std::invalid_argument("objective direction must be a unit vector");
  }
  if (region.type == RegionSpec::Type::Cylinder && (region.axis < 0 || region.axis >= dim)) {
    throw std::invalid_argument("cylinder axis out of range");
  }
}

bool in_window(int step, double dt, double begin, double end) {
  const double t = step * dt;
  return t >= begin - kTimeEps * dt && t <= end + kTimeEps * dt;
}

int window_step_count(int first_step, int last_step, double dt, double begin,
                      double end) {
  int count = 0;
  for (int n = first_step; n <= last_step; ++n) {
    if (in_window(n, dt, begin, end)) ++count;
  }
  return count;
}

double eval_J1(std::span<const std::vector<double>> rho_history,
               std::span<const std::size_t> nodes, double dt, double begin,
               double end) {
  if (nodes.empty()) throw std::invalid_argument("J1 region is empty");
  double sum = 0.0;
  int steps = 0;
  for (std::size_t n = 0; n < rho_history.size(); ++n) {
    if (!in_window(static_cast<int>(n), dt, begin, end)) continue;
    ++steps;
    for (std::size_t i : nodes) sum += rho_history[n][i] / 3.0;
  }
  if (steps == 0) throw std::invalid_argument("J1 window contains no steps");
  return -sum / (static_cast<double>(nodes.size()) * steps);
}

double eval_J2(std::span<const std::vector<double>> u_history, int dim,
               std::span<const std::size_t> nodes, const Vec3& direction,
               double dt, double begin, double end) {
  if (nodes.empty()) throw std::invalid_argument("J2 region is empty");
  double sum = 0.0;
  int steps = 0;
  for (std::size_t n = 0; n < u_history.size(); ++n) {
    if (!in_window(static_cast<int>(n), dt, begin, end)) continue;
    ++steps;
    const std::size_t nn = u_history[n].size() / dim;
    for (std::size_t i : nodes) {
      for (int a = 0; a < dim; ++a) sum += direction[a] * u_history[n][a * nn + i];
    }
  }
  if (steps == 0) throw std::invalid_argument("J2 window contains no steps");
  return -sum / (static_cast<double>(nodes.size()) * steps);
}

double eval_G(std::span<const double> gamma, double v_max) {
  if (gamma.empty()) throw std::invalid_argument("empty design field");
  if (!(v_max > 0.0 && v_max <= 1.0)) throw std::invalid_argument("V_max must lie in (0, 1]");
  double s = 0.0;
  for (double g : gamma) s += g;
  return s / (v_max * static_cast<double>(gamma.size())) - 1.0;
}

Objective::Objective(const ObjectiveSpec& spec, const UniformGrid& grid, double dt,
                     int first_step, int last_step)
    : spec_(spec), dim_(grid.dim), dt_(dt) {
  spec_.validate(grid.dim);
  nodes_ = resolve_region(grid, spec_.region);
  window_steps_ =
      window_step_count(first_step, last_step, dt, spec_.window_begin, spec_.window_end);
  if (window_steps_ > 0) {
    scale_ = -1.0 / (static_cast<double>(nodes_.size()) * window_steps_);
  }
}

bool Objective::active(int step) const {
  return window_steps_ > 0 && in_window(step, dt_, spec_.window_begin, spec_.window_end);
}

void Objective::accumulate(int step, const FlowState& state) {
  if (!active(step)) return;
  double s = 0.0;
  if (spec_.kind == ObjectiveKind::PressureOnBoundary) {
    for (std::size_t i : nodes_) s += state.rho[i] / 3.0;
  } else {
    for (std::size_t i : nodes_) {
      for (int a = 0; a < dim_; ++a) s += spec_.direction[a] * state.u[a * state.nodes + i];
    }
  }
  sum_ += scale_ * s;
}

double Objective::rho_source(int step) const {
  if (!active(step) || spec_.kind != ObjectiveKind::PressureOnBoundary) return 0.0;
  return scale_ / 3.0;
}

Vec3 Objective::u_source(int step) const {
  Vec3 v{};
  if (!active(step) || spec_.kind != ObjectiveKind::DirectedFlowInRegion) return v;
  for (int a = 0; a < dim_; ++a) v[a] = scale_ * spec_.direction[a];
  return v;
}

std::vector<double> Objective::population_sources(int step,
                                                  const LatticeModel& model) const {
  std::vector<double> out(model.q(), 0.0);
  const double r = rho_source(step);
  const Vec3 v = u_source(step);
  for (int i = 0; i < model.q(); ++i) {
    double s = r;
    for (int a = 0; a < model.dimension(); ++a) s += model.c(i)[a] * v[a];
    out[i] = s;
  }
  return out;
}

}  // namespace lkstopo
