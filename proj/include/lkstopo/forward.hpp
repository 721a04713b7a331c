#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lkstopo/boundary.hpp"
#include "lkstopo/design_field.hpp"
#include "lkstopo/grid.hpp"
#include "lkstopo/motion.hpp"
#include "lkstopo/overlap.hpp"

namespace lkstopo {

class Objective;

/// The moving body whose pseudo-density is optimized.
struct DesignBody {
  UniformGrid grid;
  MotionSpec motion;
};

/// A body with a prescribed pseudo-density (not a design variable).
struct PrescribedBody {
  UniformGrid grid;
  MotionSpec motion;
  std::vector<double> gamma;
};

struct FlowSetup {
  UniformGrid grid;
  BoundarySpec boundary;
  double A = 0.25;
  BrinkmanParams brinkman;
  KernelForm kernel = KernelForm::Standard;
  std::optional<DesignBody> design;
  std::vector<PrescribedBody> bodies;
  /// Optional analysis-grid solid indicator in [0, 1]; scaled by kappa_max.
  std::vector<double> solid_mask;
};

/// Penalization data at one time level.
struct Snapshot {
  int step = -1;
  std::vector<double> kappa;      // total kappa per analysis node
  std::vector<double> kappa_u;    // sum over bodies of kappa_b * u_S,b (dim blocks)
  std::vector<double> design_us;  // u_S of the design body alone (dim blocks)
  Placement design_placement;
  std::size_t clipped = 0;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int step, std::size_t node, double speed);
  int step() const { return step_; }
  std::size_t node() const { return node_; }
  double speed() const { return speed_; }

 private:
  int step_;
  std::size_t node_;
  double speed_;
};

enum class HistoryPrecision { Float, Double };

struct HistoryOptions {
  bool enabled = true;
  HistoryPrecision precision = HistoryPrecision::Float;
  int checkpoint_stride = 1;  // 1: every step stored; k > 1: recompute segments

  bool operator==(const HistoryOptions&) const = default;
};

class FlowSolver;

/// Velocity history of one forward run, read back in reverse by the adjoint.
/// With a checkpoint stride k > 1 only full states at multiples of k are
/// kept and segments are recomputed on demand.
class ForwardHistory {
 public:
  ForwardHistory() = default;
  ForwardHistory(const FlowSolver& solver, HistoryOptions options, int total_steps);

  int total_steps() const { return total_steps_; }
  void record(int step, const FlowState& state);
  /// Velocity (component-major) after step n. Reverse-order access is the
  /// efficient pattern.
  std::span<const double> velocity(int step);
  std::size_t bytes() const;

 private:
  void load_segment(int first);

  const FlowSolver* solver_ = nullptr;
  HistoryOptions options_;
  int total_steps_ = 0;
  std::size_t block_ = 0;
  std::vector<float> u32_;
  std::vector<double> u64_;
  std::vector<FlowState> checkpoints_;
  int segment_first_ = -1;
  std::vector<double> segment_;
  std::vector<double> scratch_;
};

struct ForwardResult {
  FlowState final_state;
  double objective = 0.0;
  double peak_speed = 0.0;
  std::size_t max_clipped = 0;
  int steps = 0;
};

/// Lattice kinetic scheme on the analysis grid with volume-penalized moving
/// bodies. One step: snapshot at t_n, pull of streamed equilibria from the
/// previous level, penalization, boundary overwrite.
class FlowSolver {
 public:
  explicit FlowSolver(FlowSetup setup);

  const FlowSetup& setup() const { return setup_; }
  const UniformGrid& grid() const { return setup_.grid; }
  const LatticeModel& lattice() const { return *model_; }
  const GridOperators& operators() const { return ops_; }
  const OverlapMap* design_map() const;
  std::span<const NodeConstraint> constraints() const { return constraints_; }
  double dt() const { return setup_.grid.dx; }

  /// Sets the physical pseudo-density of the design body.
  void set_design(std::span<const double> gamma);
  std::span<const double> design_gamma() const { return design_gamma_; }
  std::span<const double> design_kappa() const { return design_kappa_; }

  void build_snapshot(int step, Snapshot& out) const;

  /// Advances prev (time level n-1) to next (level n = snap.step).
  void step(const FlowState& prev, FlowState& next, const Snapshot& snap) const;

  /// Rest state rho = 1, u = 0 with boundary values applied.
  FlowState initial_state() const;

  /// Runs steps 1..total_steps from `init` (level 0). The objective, when
  /// given, is reset and accumulated over every level in its window,
  /// including level 0.
  ForwardResult run(const FlowState& init, int total_steps, Objective* objective,
                    ForwardHistory* history) const;

  /// Re-runs steps first+1..last from `state` and hands each level to `sink`.
  template <class Sink>
  void replay(FlowState state, int first, int last, Sink&& sink) const {
    Snapshot snap;
    FlowState next;
    for (int n = first + 1; n <= last; ++n) {
      build_snapshot(n, snap);
      step(state, next, snap);
      std::swap(state, next);
      sink(n, state);
    }
  }

 private:
  struct BodyCache {
    OverlapMap map;
    MotionSpec motion;
    std::vector<double> kappa_ref;
    std::vector<double> kappa;    // static bodies: cached analysis kappa
    std::vector<double> kappa_u;  // static bodies: cached kappa * u_S
    bool is_static = false;
  };

  void scatter_body(const OverlapMap& map, const MotionSpec& motion,
                    std::span<const double> kappa_ref, double t, Placement& p,
                    std::vector<double>& kappa, std::vector<double>& us) const;

  FlowSetup setup_;
  const LatticeModel* model_;
  GridOperators ops_;
  std::vector<NodeConstraint> constraints_;
  std::vector<double> mask_kappa_;
  std::vector<BodyCache> bodies_;
  std::optional<OverlapMap> design_map_;
  std::vector<double> design_gamma_;
  std::vector<double> design_kappa_;
};

}  // namespace lkstopo
