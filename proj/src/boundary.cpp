#include "lkstopo/boundary.hpp"

#include <stdexcept>

namespace lkstopo {

namespace {
constexpr std::array<std::string_view, 6> kFaceNames = {"x_min", "x_max", "y_min",
                                                        "y_max", "z_min", "z_max"};
}

std::string_view to_string(BoundaryType type) {
  switch (type) {
    case BoundaryType::Periodic: return "periodic";
    case BoundaryType::Wall: return "wall";
    case BoundaryType::VelocityInlet: return "velocity";
    case BoundaryType::PressureOutlet: return "pressure";
  }
  return "?";
}

BoundaryType boundary_type_from_string(std::string_view name) {
  if (name == "periodic") return BoundaryType::Periodic;
  if (name == "wall") return BoundaryType::Wall;
  if (name == "velocity") return BoundaryType::VelocityInlet;
  if (name == "pressure") return BoundaryType::PressureOutlet;
  throw std::invalid_argument("unknown boundary type '" + std::string(name) + "'");
}

std::string_view face_name(int face) { return kFaceNames.at(face); }

int face_from_name(std::string_view name) {
  for (int f = 0; f < 6; ++f) {
    if (kFaceNames[f] == name) return f;
  }
  throw std::invalid_argument("unknown face '" + std::string(name) + "'");
}

BoundarySpec BoundarySpec::all_walls() { return {}; }

std::array<bool, 3> BoundarySpec::periodic_axes() const {
  std::array<bool, 3> p{};
  for (int a = 0; a < 3; ++a) {
    p[a] = faces[2 * a].type == BoundaryType::Periodic &&
           faces[2 * a + 1].type == BoundaryType::Periodic;
  }
  return p;
}

void BoundarySpec::validate(int dim) const {
  for (int a = 0; a < dim; ++a) {
    const bool lo = faces[2 * a].type == BoundaryType::Periodic;
    const bool hi = faces[2 * a + 1].type == BoundaryType::Periodic;
    if (lo != hi) {
      throw std::invalid_argument("periodic face " + std::string(face_name(2 * a)) +
                                  " must be paired with its opposite face");
    }
  }
}

std::vector<NodeConstraint> resolve_boundary(const UniformGrid& grid,
                                             const BoundarySpec& spec) {
  spec.validate(grid.dim);
  std::vector<NodeConstraint> out;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const Index3 c = grid.coords(node);
    const FaceCondition* velocity_face = nullptr;
    bool pressure = false;
    NodeConstraint nc;
    nc.node = node;
    std::uint8_t normal_mask = 0;
    for (int a = 0; a < grid.dim; ++a) {
      for (int side = 0; side < 2; ++side) {
        const bool on_face = side == 0 ? c[a] == 0 : c[a] == grid.extents[a] - 1;
        if (!on_face) continue;
        const FaceCondition& fc = spec.faces[2 * a + side];
        switch (fc.type) {
          case BoundaryType::Periodic: break;
          case BoundaryType::Wall:
          case BoundaryType::VelocityInlet: velocity_face = &fc; break;
          case BoundaryType::PressureOutlet:
            if (!pressure) {
              nc.fix_rho = true;
              nc.rho = fc.density;
              nc.u = fc.velocity;
            }
            pressure = true;
            normal_mask |= static_cast<std::uint8_t>(1u << a);
            break;
        }
      }
    }
    if (velocity_face) {
      nc.fix_rho = false;
      nc.u_mask = static_cast<std::uint8_t>((1u << grid.dim) - 1u);
      nc.u = velocity_face->type == BoundaryType::Wall ? Vec3{} : velocity_face->velocity;
      out.push_back(nc);
    } else if (pressure) {
      nc.u_mask = static_cast<std::uint8_t>(((1u << grid.dim) - 1u) & ~normal_mask);
      out.push_back(nc);
    }
  }
  return out;
}

void apply_boundaries(std::span<const NodeConstraint> constraints, FlowState& state) {
  for (const auto& nc : constraints) {
    if (nc.fix_rho) state.rho[nc.node] = nc.rho;
    for (int a = 0; a < state.dim; ++a) {
      if (nc.u_mask & (1u << a)) state.u[a * state.nodes + nc.node] = nc.u[a];
    }
  }
}

}  // namespace lkstopo
