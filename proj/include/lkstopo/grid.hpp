#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "lkstopo/lattice.hpp"

namespace lkstopo {

using Index3 = std::array<int, 3>;

/// Uniform node grid. Unused axes have extent 1. Node coordinates are
/// origin + index * dx.
struct UniformGrid {
  int dim = 2;
  Index3 extents{1, 1, 1};
  double dx = 1.0;
  Vec3 origin{0.0, 0.0, 0.0};

  static UniformGrid make(std::span<const int> extents, double dx = 1.0);

  std::size_t size() const {
    return static_cast<std::size_t>(extents[0]) * extents[1] * extents[2];
  }
  std::size_t index(const Index3& c) const {
    return static_cast<std::size_t>(c[0]) +
           static_cast<std::size_t>(extents[0]) *
               (static_cast<std::size_t>(c[1]) +
                static_cast<std::size_t>(extents[1]) * c[2]);
  }
  Index3 coords(std::size_t idx) const;
  Vec3 position(const Index3& c) const;
  bool contains(const Index3& c) const;

  bool operator==(const UniformGrid&) const = default;
};

/// Macroscopic flow state on the analysis grid. Velocity is stored
/// component-major: u[a * n + node].
struct FlowState {
  int dim = 2;
  std::size_t nodes = 0;
  std::vector<double> rho;
  std::vector<double> u;

  FlowState() = default;
  FlowState(int dim, std::size_t nodes, double rho0 = 1.0);

  std::span<double> velocity(int a) { return {u.data() + a * nodes, nodes}; }
  std::span<const double> velocity(int a) const {
    return {u.data() + a * nodes, nodes};
  }
  Vec3 velocity_at(std::size_t node) const;
};

struct StencilEntry {
  int coord = 0;
  double coef = 0.0;
};

/// One-dimensional operators along a grid axis: the streaming source map
/// (clamped at non-periodic faces, wrapped otherwise), its inverse, and the
/// first-difference stencil with its exact transpose.
class AxisOperators {
 public:
  AxisOperators() = default;
  AxisOperators(int extent, bool periodic);

  int extent() const { return n_; }
  bool periodic() const { return periodic_; }

  /// Coordinate the population with velocity component c arrives from.
  int source(int coord, int c) const { return source_[c + 1][coord]; }
  /// All coordinates whose source for component c is `coord`.
  std::span<const int> sinks(int coord, int c) const;

  /// Lattice-scaled difference (du = dx * du/dx) taps at `coord`.
  std::span<const StencilEntry> diff(int coord) const;
  /// Taps of the transposed difference operator at `coord`.
  std::span<const StencilEntry> diff_transpose(int coord) const;

 private:
  int n_ = 1;
  bool periodic_ = false;
  std::array<std::vector<int>, 3> source_;
  std::array<std::vector<int>, 3> sink_offsets_;
  std::array<std::vector<int>, 3> sinks_;
  std::vector<int> diff_offsets_;
  std::vector<StencilEntry> diff_;
  std::vector<int> difft_offsets_;
  std::vector<StencilEntry> difft_;
};

/// Axis operators for every axis of a grid.
class GridOperators {
 public:
  GridOperators() = default;
  GridOperators(const UniformGrid& grid, std::array<bool, 3> periodic);

  const UniformGrid& grid() const { return grid_; }
  const AxisOperators& axis(int a) const { return axes_[a]; }

 private:
  UniformGrid grid_;
  std::array<AxisOperators, 3> axes_;
};

/// du_a/dx_b at `node` (physical units): second-order central differences in
/// the interior and at periodic faces, first-order one-sided at other faces.
Mat3 velocity_gradient(const FlowState& state, const GridOperators& ops,
                       std::size_t node);

}  // namespace lkstopo
