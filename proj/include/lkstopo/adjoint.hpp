#pragma once

#include <span>
#include <vector>

#include "lkstopo/forward.hpp"
#include "lkstopo/objectives.hpp"

namespace lkstopo {

/// Adjoint variables conjugate to the macroscopic state (rho, u) at one time
/// level. Velocity part is component-major.
struct AdjointState {
  int dim = 2;
  std::size_t nodes = 0;
  std::vector<double> rho;
  std::vector<double> u;

  AdjointState() = default;
  AdjointState(int dim, std::size_t nodes);
  bool is_zero() const;
};

/// Weighted moments of the streamed adjoint populations at one node:
/// rho_t = sum w_i F_i, u_t = sum w_i c_i F_i, s_t = sum w_i c_i c_i F_i.
struct AdjointMoments {
  double rho_t = 0.0;
  Vec3 u_t{};
  Mat3 s_t{};
};

/// Adjoint equilibrium f~_i = rho_t' + 3 c_i . V for an adjoint density and
/// velocity conjugate, the quantity streamed backward by the sweep.
double adjoint_equilibrium(double rho_adj, const Vec3& v_adj, int i,
                           const LatticeModel& model);

/// Pulls the adjoint at level n back through forward step n to level n-1,
/// without objective sources. `u_prev` is the forward velocity at level n-1
/// and `snap` the penalization snapshot of level n. When `velocity_star` is
/// given it receives the adjoint of the pre-penalization velocity, the
/// factor that multiplies d u / d kappa.
void adjoint_step(const FlowSolver& solver, std::span<const double> u_prev,
                  const Snapshot& snap, const AdjointState& in, AdjointState& out,
                  std::vector<double>* velocity_star = nullptr);

struct AdjointResult {
  /// dJ / d gamma on the design grid (physical pseudo-density).
  std::vector<double> sensitivity;
  /// Adjoint propagated to level 0 without its own source, reusable as the
  /// terminal value of a warm-started follow-up run.
  AdjointState carry;
};

/// Backward sweep over levels total_steps..1 of a recorded forward run. The
/// terminal adjoint is zero unless `terminal` is given. The result is with
/// respect to the projected field; DesignField::chain_rule maps it to the raw
/// variables.
AdjointResult run_adjoint(const FlowSolver& solver, ForwardHistory& history,
                          const Objective& objective,
                          const AdjointState* terminal = nullptr);

/// dG / d gamma: 1 / (v_max * N) at every design node.
std::vector<double> volume_sensitivity(std::size_t design_nodes, double v_max);

}  // namespace lkstopo
