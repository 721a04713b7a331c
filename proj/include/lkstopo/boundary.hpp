#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lkstopo/grid.hpp"

namespace lkstopo {

enum class BoundaryType { Periodic, Wall, VelocityInlet, PressureOutlet };

std::string_view to_string(BoundaryType type);
BoundaryType boundary_type_from_string(std::string_view name);

/// Condition on one grid face. Wall prescribes u = 0, VelocityInlet
/// u = velocity, PressureOutlet rho = density plus the tangential components
/// of `velocity`; the normal velocity on a pressure face evolves freely.
struct FaceCondition {
  BoundaryType type = BoundaryType::Wall;
  Vec3 velocity{};
  double density = 1.0;

  bool operator==(const FaceCondition&) const = default;
};

/// Faces in the order x-, x+, y-, y+, z-, z+.
enum Face : int { kXMin = 0, kXMax, kYMin, kYMax, kZMin, kZMax };
std::string_view face_name(int face);
int face_from_name(std::string_view name);

struct BoundarySpec {
  std::array<FaceCondition, 6> faces;

  static BoundarySpec all_walls();
  std::array<bool, 3> periodic_axes() const;
  /// Throws when periodic faces are unpaired.
  void validate(int dim) const;

  bool operator==(const BoundarySpec&) const = default;
};

/// Macroscopic values overwritten on one boundary node.
struct NodeConstraint {
  std::size_t node = 0;
  bool fix_rho = false;
  double rho = 1.0;
  std::uint8_t u_mask = 0;  // bit a set: component a prescribed
  Vec3 u{};
};

/// Resolves face conditions into per-node constraints. A node on several
/// faces takes a velocity condition if any of its faces has one (the last in
/// face order wins); otherwise pressure faces fix rho and every component not
/// normal to one of them.
std::vector<NodeConstraint> resolve_boundary(const UniformGrid& grid,
                                             const BoundarySpec& spec);

/// Overwrites the constrained values in place.
void apply_boundaries(std::span<const NodeConstraint> constraints,
                      FlowState& state);

}  // namespace lkstopo
