#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lkstopo/adjoint.hpp"
#include "lkstopo/config.hpp"
#include "lkstopo/design_field.hpp"
#include "lkstopo/forward.hpp"
#include "lkstopo/mma.hpp"

namespace lkstopo {

/// |J - J_prev| / |J_prev| <= tol.
bool relative_change_converged(double J, double J_prev, double tol);

/// Decides when the projection steepness doubles: first at step `hold` (or
/// `every` when hold is 0), then every `every` steps after the last event,
/// and earlier whenever the last `window` relative objective changes since
/// the last event all fall below `tol`.
class BetaSchedule {
 public:
  BetaSchedule(const ContinuationSettings& settings, double beta0);

  double beta() const { return beta_; }
  bool at_cap() const { return beta_ >= settings_.beta_max; }
  /// Called at the start of optimization step k with the objective history
  /// of steps < k. Returns true when beta was doubled.
  bool advance(int k, const std::vector<double>& objective_history);

 private:
  ContinuationSettings settings_;
  double beta_;
  int last_event_ = 0;
};

struct StepRecord {
  int step = 0;
  double J = 0.0;
  double G = 0.0;
  double beta = 1.0;
  double v_max = 1.0;
  double volume = 0.0;
  std::string event;
  double seconds = 0.0;  // wall time, kept out of the deterministic log
};

struct Evaluation {
  double J = 0.0;
  std::vector<double> sensitivity;  // w.r.t. the physical field
  ForwardResult forward;
  AdjointState carry;
};

/// One forward run plus adjoint sweep for the physical field already set on
/// `solver`.
Evaluation evaluate(const FlowSolver& solver, const FlowState& init, Objective& objective,
                    int steps, const HistoryOptions& history,
                    const AdjointState* terminal = nullptr);

struct OptimizationCallbacks {
  std::function<void(const StepRecord&)> on_step;
  /// Called after every evaluated step with the design that produced it.
  std::function<void(int, const DesignField&)> on_design;
};

struct OptimizationResult {
  std::vector<double> raw;
  std::vector<double> physical;
  std::vector<StepRecord> history;
  bool converged = false;
  std::string stop_reason;
};

/// Density-based loop: initialize, forward, objective and constraint,
/// adjoint, chain rule, MMA update, continuation; repeated until the
/// convergence criterion and feasibility hold with beta at its cap, or the
/// step budget runs out.
OptimizationResult optimize(const CaseConfig& config,
                            const OptimizationCallbacks& callbacks = {});

/// Objective of a fixed physical design measured after `warmup_periods`
/// cold-started runs of run.steps each (the measured run is the next one).
double measure_design(const CaseConfig& config, std::span<const double> physical,
                      int warmup_periods);

/// Projected field obtained from a raw design under the config's filter and
/// projection at the given beta.
std::vector<double> physical_field(const CaseConfig& config, std::span<const double> raw,
                                   double beta);

}  // namespace lkstopo
