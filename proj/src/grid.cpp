#include "lkstopo/grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace lkstopo {

UniformGrid UniformGrid::make(std::span<const int> extents, double dx) {
  if (extents.size() < 2 || extents.size() > 3) {
    throw std::invalid_argument("grid needs 2 or 3 extents");
  }
  UniformGrid g;
  g.dim = static_cast<int>(extents.size());
  for (std::size_t a = 0; a < extents.size(); ++a) {
    if (extents[a] < 1) throw std::invalid_argument("grid extent must be >= 1");
    g.extents[a] = extents[a];
  }
  if (dx <= 0.0) throw std::invalid_argument("grid spacing must be positive");
  g.dx = dx;
  return g;
}

Index3 UniformGrid::coords(std::size_t idx) const {
  Index3 c;
  c[0] = static_cast<int>(idx % extents[0]);
  idx /= extents[0];
  c[1] = static_cast<int>(idx % extents[1]);
  c[2] = static_cast<int>(idx / extents[1]);
  return c;
}

Vec3 UniformGrid::position(const Index3& c) const {
  return {origin[0] + c[0] * dx, origin[1] + c[1] * dx, origin[2] + c[2] * dx};
}

bool UniformGrid::contains(const Index3& c) const {
  for (int a = 0; a < 3; ++a) {
    if (c[a] < 0 || c[a] >= extents[a]) return false;
  }
  return true;
}

FlowState::FlowState(int dim_, std::size_t nodes_, double rho0)
    : dim(dim_), nodes(nodes_), rho(nodes_, rho0), u(dim_ * nodes_, 0.0) {}

Vec3 FlowState::velocity_at(std::size_t node) const {
  Vec3 v{};
  for (int a = 0; a < dim; ++a) v[a] = u[a * nodes + node];
  return v;
}

namespace {

// Builds a CSR-like list from per-coordinate vectors.
template <class T>
void flatten(const std::vector<std::vector<T>>& rows, std::vector<int>& offsets,
             std::vector<T>& data) {
  offsets.assign(rows.size() + 1, 0);
  data.clear();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    offsets[i + 1] = offsets[i] + static_cast<int>(rows[i].size());
    data.insert(data.end(), rows[i].begin(), rows[i].end());
  }
}

}  // namespace

AxisOperators::AxisOperators(int extent, bool periodic)
    : n_(extent), periodic_(periodic) {
  if (periodic && extent < 3) {
    throw std::invalid_argument("periodic axis needs at least 3 nodes");
  }
  for (int c = -1; c <= 1; ++c) {
    auto& src = source_[c + 1];
    src.resize(n_);
    std::vector<std::vector<int>> inv(n_);
    for (int x = 0; x < n_; ++x) {
      int s = x - c;
      if (periodic_) {
        s = ((s % n_) + n_) % n_;
      } else {
        s = std::clamp(s, 0, n_ - 1);
      }
      src[x] = s;
      inv[s].push_back(x);
    }
    flatten(inv, sink_offsets_[c + 1], sinks_[c + 1]);
  }

  std::vector<std::vector<StencilEntry>> rows(n_);
  if (n_ > 1) {
    for (int x = 0; x < n_; ++x) {
      if (periodic_) {
        rows[x] = {{(x - 1 + n_) % n_, -0.5}, {(x + 1) % n_, 0.5}};
      } else if (x == 0) {
        rows[x] = {{0, -1.0}, {1, 1.0}};
      } else if (x == n_ - 1) {
        rows[x] = {{n_ - 2, -1.0}, {n_ - 1, 1.0}};
      } else {
        rows[x] = {{x - 1, -0.5}, {x + 1, 0.5}};
      }
    }
  }
  std::vector<std::vector<StencilEntry>> cols(n_);
  for (int x = 0; x < n_; ++x) {
    for (const auto& e : rows[x]) cols[e.coord].push_back({x, e.coef});
  }
  flatten(rows, diff_offsets_, diff_);
  flatten(cols, difft_offsets_, difft_);
}

std::span<const int> AxisOperators::sinks(int coord, int c) const {
  const auto& off = sink_offsets_[c + 1];
  return {sinks_[c + 1].data() + off[coord],
          static_cast<std::size_t>(off[coord + 1] - off[coord])};
}

std::span<const StencilEntry> AxisOperators::diff(int coord) const {
  return {diff_.data() + diff_offsets_[coord],
          static_cast<std::size_t>(diff_offsets_[coord + 1] -
                                   diff_offsets_[coord])};
}

std::span<const StencilEntry> AxisOperators::diff_transpose(int coord) const {
  return {difft_.data() + difft_offsets_[coord],
          static_cast<std::size_t>(difft_offsets_[coord + 1] -
                                   difft_offsets_[coord])};
}

GridOperators::GridOperators(const UniformGrid& grid,
                             std::array<bool, 3> periodic)
    : grid_(grid) {
  for (int a = 0; a < 3; ++a) {
    axes_[a] = AxisOperators(grid.extents[a], a < grid.dim && periodic[a]);
  }
}

Mat3 velocity_gradient(const FlowState& state, const GridOperators& ops,
                       std::size_t node) {
  const auto& grid = ops.grid();
  const Index3 c = grid.coords(node);
  Mat3 g{};
  for (int b = 0; b < grid.dim; ++b) {
    for (const auto& e : ops.axis(b).diff(c[b])) {
      Index3 nb = c;
      nb[b] = e.coord;
      const std::size_t j = grid.index(nb);
      for (int a = 0; a < state.dim; ++a) {
        g[a][b] += e.coef * state.u[a * state.nodes + j] / grid.dx;
      }
    }
  }
  return g;
}

}  // namespace lkstopo
