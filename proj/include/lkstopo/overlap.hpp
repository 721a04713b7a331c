#pragma once

#include <array>
#include <span>
#include <vector>

#include "lkstopo/grid.hpp"
#include "lkstopo/motion.hpp"

namespace lkstopo {

/// Standard: (1 + cos(pi r / 2dx)) / 4dx. AsPrinted: (1 - cos(pi r / 2)) / 4dx,
/// kept only for replication studies; it is not a partition of unity.
enum class KernelForm { Standard, AsPrinted };

/// One-dimensional smoothing kernel with support |r| <= 2 dx.
double kernel_w(double r, double dx, KernelForm form = KernelForm::Standard);

/// Design-grid nodes moved to time t, each with its 4^d analysis-node
/// neighbourhood and tensor-product kernel weights (already multiplied by dx
/// per axis, so the product is W * dx^d).
struct Placement {
  double t = 0.0;
  std::vector<Index3> base;                     // first neighbour per axis
  std::vector<std::array<double, 12>> weights;  // [axis * 4 + k]
  std::vector<Vec3> velocity;                   // u_ref at each design node
  std::size_t clipped = 0;  // moved points outside the kernel-safe interior
};

/// Transfers between a moving design grid and the fixed analysis grid.
///
/// map_to_analysis scatters design values into each moved point's 4^d
/// analysis neighbourhood; map_to_design gathers the same weights. The two are
/// exact transposes under the shared Placement, with contributions that fall
/// outside a non-periodic analysis grid dropped on both sides. Scatter runs
/// serially in design-node order so sums are reproducible; gather writes only
/// its own design node and is safe to run in parallel.
class OverlapMap {
 public:
  OverlapMap() = default;
  OverlapMap(const UniformGrid& analysis, std::array<bool, 3> periodic,
             const UniformGrid& design, KernelForm form = KernelForm::Standard);

  const UniformGrid& analysis() const { return analysis_; }
  const UniformGrid& design() const { return design_; }

  void place(const MotionSpec& motion, double t, Placement& out) const;

  /// out += sum_xi W v(xi) dx^d. `values` has `components` component-major
  /// blocks of design size; `out` has the same blocks of analysis size.
  void scatter(const Placement& p, std::span<const double> values,
               std::span<double> out, int components = 1) const;
  /// out(xi) = sum_x W v(x) dx^d for `components` component-major blocks.
  void gather(const Placement& p, std::span<const double> field,
              std::span<double> out, int components = 1) const;

  std::vector<double> map_to_analysis(std::span<const double> values,
                                      const MotionSpec& motion, double t) const;
  std::vector<double> map_to_design(std::span<const double> field,
                                    const MotionSpec& motion, double t) const;

 private:
  // Visits the analysis nodes touched by design node k with their weights.
  template <class F>
  void for_each_target(const Placement& p, std::size_t k, F&& f) const;

  UniformGrid analysis_;
  UniformGrid design_;
  std::array<bool, 3> periodic_{};
  KernelForm form_ = KernelForm::Standard;
};

}  // namespace lkstopo
