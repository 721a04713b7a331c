#include "lkstopo/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lkstopo/objectives.hpp"

namespace lkstopo {

bool relative_change_converged(double J, double J_prev, double tol) {
  if (J_prev == 0.0) return J == 0.0;
  return std::abs(J - J_prev) / std::abs(J_prev) <= tol;
}

BetaSchedule::BetaSchedule(const ContinuationSettings& settings, double beta0)
    : settings_(settings), beta_(beta0) {}

bool BetaSchedule::advance(int k, const std::vector<double>& J) {
  if (at_cap() || k < settings_.hold || k == 0) return false;
  bool fire = false;
  if (last_event_ == 0) {
    const int first = settings_.hold > 0 ? settings_.hold : settings_.every;
    fire = k >= first;
  } else {
    fire = k - last_event_ >= settings_.every;
  }
  const int w = settings_.fluctuation_window;
  const int since = std::max(last_event_, settings_.hold);
  if (!fire && k - since > w && static_cast<int>(J.size()) >= k) {
    fire = true;
    for (int j = k - w; j < k; ++j) {
      if (!relative_change_converged(J[j], J[j - 1], settings_.fluctuation_tol)) {
        fire = false;
        break;
      }
    }
  }
  if (!fire) return false;
  beta_ = std::min(2.0 * beta_, settings_.beta_max);
  last_event_ = k;
  return true;
}

Evaluation evaluate(const FlowSolver& solver, const FlowState& init, Objective& objective,
                    int steps, const HistoryOptions& history_options,
                    const AdjointState* terminal) {
  Evaluation ev;
  ForwardHistory history(solver, history_options, steps);
  ev.forward = solver.run(init, steps, &objective, &history);
  ev.J = ev.forward.objective;
  AdjointResult adj = run_adjoint(solver, history, objective, terminal);
  ev.sensitivity = std::move(adj.sensitivity);
  ev.carry = std::move(adj.carry);
  return ev;
}

std::vector<double> physical_field(const CaseConfig& config, std::span<const double> raw,
                                   double beta) {
  DesignField field(config.design, config.filter, config.projection);
  field.set_beta(beta);
  field.set_raw(raw);
  const auto p = field.projected();
  return {p.begin(), p.end()};
}

OptimizationResult optimize(const CaseConfig& config, const OptimizationCallbacks& cb) {
  config.validate();
  DesignField design(config.design, config.filter, config.projection);
  design.set_raw(config.initial.rasterize(config.design));
  BetaSchedule beta(config.continuation, config.projection.beta);

  FlowSolver solver(config.flow_setup());
  const int steps = config.run.steps;
  Objective objective(config.objective, config.analysis, solver.dt(), 0, steps);
  MmaSettings ms;
  ms.move = config.optimization.move;
  Mma mma(design.size(), 1, ms);

  const bool warm = config.run.restart == RestartPolicy::Warm;
  FlowState state = solver.initial_state();
  AdjointState carry;

  OptimizationResult res;
  std::vector<double> J_hist;
  double scale = 0.0;
  double prev_vmax = config.constraint.at(0);

  for (int k = 0; k < std::max(config.optimization.max_steps, 1); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    StepRecord rec;
    rec.step = k;
    if (config.projection.enabled && beta.advance(k, J_hist)) {
      design.set_beta(beta.beta());
      rec.event = "beta";
    }
    const double v_max = config.constraint.at(k);
    if (v_max != prev_vmax) rec.event += rec.event.empty() ? "vmax" : "+vmax";
    prev_vmax = v_max;

    solver.set_design(design.projected());
    Evaluation ev = evaluate(solver, state, objective, steps, config.run.history,
                             warm ? &carry : nullptr);
    if (warm) {
      state = std::move(ev.forward.final_state);
      carry = std::move(ev.carry);
    }
    const auto phys = design.projected();
    rec.J = ev.J;
    rec.G = eval_G(phys, v_max);
    rec.beta = design.beta();
    rec.v_max = v_max;
    double vol = 0.0;
    for (double g : phys) vol += g;
    rec.volume = vol / static_cast<double>(phys.size());
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.history.push_back(rec);
    if (cb.on_step) cb.on_step(rec);
    if (cb.on_design) cb.on_design(k, design);

    const bool criterion = !J_hist.empty() &&
                           relative_change_converged(rec.J, J_hist.back(),
                                                     config.optimization.tolerance);
    J_hist.push_back(rec.J);
    const bool beta_done = !config.projection.enabled || beta.at_cap();
    if (criterion && rec.G <= config.optimization.feasibility_tol && beta_done) {
      res.converged = true;
      res.stop_reason = "converged";
      break;
    }
    if (k + 1 >= config.optimization.max_steps) {
      res.stop_reason = "max_steps";
      break;
    }

    std::vector<double> dJ = design.chain_rule(ev.sensitivity);
    std::vector<double> dG = design.chain_rule(volume_sensitivity(design.size(), v_max));
    if (k == 0) {
      // Objective scaling is fixed once so the MMA subproblem sees the same
      // problem across steps; relative to the constraint gradient so the
      // multiplier stays well below the infeasibility penalty.
      double gmax = 0.0, cmax = 0.0;
      for (double v : dJ) gmax = std::max(gmax, std::abs(v));
      for (double v : dG) cmax = std::max(cmax, std::abs(v));
      scale = gmax > 0.0 ? config.optimization.objective_scale * cmax / gmax : 1.0;
    }
    for (double& v : dJ) v *= scale;
    const auto raw = design.raw();
    std::vector<double> next = mma.update(raw, rec.J * scale, dJ, rec.G, dG);
    design.set_raw(next);
  }

  const auto raw = design.raw();
  const auto phys = design.projected();
  res.raw.assign(raw.begin(), raw.end());
  res.physical.assign(phys.begin(), phys.end());
  return res;
}

double measure_design(const CaseConfig& config, std::span<const double> physical,
                      int warmup_periods) {
  FlowSolver solver(config.flow_setup());
  solver.set_design(physical);
  const int steps = config.run.steps;
  FlowState state = solver.initial_state();
  for (int p = 0; p < warmup_periods; ++p) {
    state = solver.run(state, steps, nullptr, nullptr).final_state;
  }
  Objective objective(config.objective, config.analysis, solver.dt(), 0, steps);
  return solver.run(state, steps, &objective, nullptr).objective;
}

}  // namespace lkstopo
