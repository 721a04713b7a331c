#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "lkstopo/grid.hpp"

namespace lkstopo {

enum class ObjectiveKind { PressureOnBoundary, DirectedFlowInRegion };

std::string_view to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(std::string_view name);

/// Node set an objective integrates over.
struct RegionSpec {
  enum class Type { Faces, Box, Cylinder };
  Type type = Type::Faces;
  std::vector<int> faces;  // Faces: empty means every face of the grid
  Index3 lo{};             // Box: inclusive node-index bounds
  Index3 hi{};
  Vec3 center{};           // Cylinder: axis through center, along `axis`
  double radius = 0.0;
  int axis = 2;
  double axial_lo = 0.0;   // Cylinder: extent along the axis
  double axial_hi = 0.0;

  bool operator==(const RegionSpec&) const = default;
};

/// Sorted node indices inside the region. Cylinder nodes are those whose
/// centres fall inside it. Throws when the region is empty.
std::vector<std::size_t> resolve_region(const UniformGrid& grid,
                                        const RegionSpec& region);

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::PressureOnBoundary;
  RegionSpec region;
  Vec3 direction{0.0, 1.0, 0.0};  // unit vector, DirectedFlowInRegion only
  double window_begin = 0.0;      // I = [begin, end], in time units
  double window_end = 0.0;

  void validate(int dim) const;
  bool operator==(const ObjectiveSpec&) const = default;
};

/// Steps n (time n * dt) inside [begin, end], endpoints included.
bool in_window(int step, double dt, double begin, double end);
int window_step_count(int first_step, int last_step, double dt, double begin,
                      double end);

/// J1 = -(time and space average of rho / 3 on the node set). rho_history[n]
/// is the density field at time n * dt.
double eval_J1(std::span<const std::vector<double>> rho_history,
               std::span<const std::size_t> nodes, double dt, double begin,
               double end);

/// J2 = -(time and space average of n . u over the node set). u_history[n]
/// holds component-major velocity at time n * dt.
double eval_J2(std::span<const std::vector<double>> u_history, int dim,
               std::span<const std::size_t> nodes, const Vec3& direction,
               double dt, double begin, double end);

/// G = mean(gamma) / v_max - 1 (design grid is uniform, so dOmega cancels).
double eval_G(std::span<const double> gamma, double v_max);

/// Objective evaluated online during a forward run, and the source of the
/// adjoint forcing. Quadrature: node sums times time-step sums, endpoints of
/// the window included.
class Objective {
 public:
  Objective(const ObjectiveSpec& spec, const UniformGrid& grid, double dt,
            int first_step, int last_step);

  const ObjectiveSpec& spec() const { return spec_; }
  std::span<const std::size_t> nodes() const { return nodes_; }
  int window_steps() const { return window_steps_; }
  bool active(int step) const;

  void reset() { sum_ = 0.0; }
  void accumulate(int step, const FlowState& state);
  double value() const { return sum_; }

  /// dJ/drho and dJ/du at a region node for the given step (zero outside
  /// the window). Identical for every node of the region.
  double rho_source(int step) const;
  Vec3 u_source(int step) const;

  /// Per-population dJ/df_i = dJ/drho + c_i . dJ/du at a region node.
  std::vector<double> population_sources(int step,
                                         const LatticeModel& model) const;

 private:
  ObjectiveSpec spec_;
  int dim_;
  double dt_;
  std::vector<std::size_t> nodes_;
  int window_steps_ = 0;
  double scale_ = 0.0;  // -1 / (|region| * window_steps)
  double sum_ = 0.0;
};

}  // namespace lkstopo
