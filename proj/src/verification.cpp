#include "lkstopo/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "lkstopo/adjoint.hpp"
#include "lkstopo/objectives.hpp"
#include "lkstopo/output.hpp"

namespace lkstopo {

std::string VerificationReport::to_text() const {
  std::string s = "scenario = " + scenario + "\n";
  s += std::string("pass = ") + (pass ? "true" : "false") + "\n";
  for (const auto& [k, v] : metrics) s += k + " = " + format_number(v, 9) + "\n";
  for (const auto& [k, v] : thresholds) s += "threshold." + k + " = " + format_number(v, 9) + "\n";
  for (const auto& n : notes) s += "note = " + n + "\n";
  return s;
}

std::string VerificationReport::to_csv() const {
  std::string s = "coordinate,computed,reference\n";
  for (const auto& p : samples) {
    s += format_number(p.coordinate, 9) + "," + format_number(p.computed, 12) + "," +
         format_number(p.reference, 12) + "\n";
  }
  return s;
}

ErrorNorms compare(const std::vector<double>& c, const std::vector<double>& r) {
  if (c.size() != r.size() || c.empty()) throw std::invalid_argument("compare: size mismatch");
  double diff2 = 0.0, ref2 = 0.0, c2 = 0.0, dot = 0.0;
  ErrorNorms e;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double d = c[i] - r[i];
    diff2 += d * d;
    ref2 += r[i] * r[i];
    c2 += c[i] * c[i];
    dot += c[i] * r[i];
    if (r[i] != 0.0) e.max_relative = std::max(e.max_relative, std::abs(d) / std::abs(r[i]));
  }
  e.l2_relative = ref2 > 0.0 ? std::sqrt(diff2 / ref2) : std::sqrt(diff2);
  e.cosine = (c2 > 0.0 && ref2 > 0.0) ? dot / std::sqrt(c2 * ref2) : 0.0;
  return e;
}

double couette_profile(double r, double r1, double r2, double u_d) {
  const double d = r2 * r2 - r1 * r1;
  return -u_d * r1 * r / d + u_d * r1 * r2 * r2 / (d * r);
}

VerificationReport taylor_couette(const TaylorCouetteOptions& o) {
  if (o.scale <= 0.0) throw std::invalid_argument("scale must be > 0");
  const int n = static_cast<int>(std::lround(200.0 * o.scale)) + 1;
  const double c = 0.5 * (n - 1);
  const double r1 = 45.0 * o.scale;
  const double r2 = 70.0 * o.scale;
  const double margin = o.margin * o.scale;

  FlowSetup setup;
  const int ext[2] = {n, n};
  setup.grid = UniformGrid::make(ext);
  setup.boundary = BoundarySpec::all_walls();
  setup.A = o.A;
  setup.brinkman = {o.kappa_max, o.q};

  // Inner disc on its own grid, rotating about its centre.
  const int half = static_cast<int>(std::ceil(r1)) + 4;
  PrescribedBody inner;
  const int mext[2] = {2 * half + 1, 2 * half + 1};
  inner.grid = UniformGrid::make(mext);
  inner.motion = MotionSpec::stationary(2, {double(half), double(half), 0.0}, {c, c, 0.0});
  const double period = o.revolution * o.scale;
  const double u_d = 2.0 * std::numbers::pi * r1 / period;
  inner.motion.rotation.rate = u_d / r1;
  inner.gamma.resize(inner.grid.size());
  for (std::size_t k = 0; k < inner.grid.size(); ++k) {
    const auto q = inner.grid.coords(k);
    inner.gamma[k] = std::hypot(q[0] - half, q[1] - half) <= r1 ? 1.0 : 0.0;
  }

  // Outer cylinder: everything beyond r2, fixed in place.
  PrescribedBody outer;
  outer.grid = setup.grid;
  outer.motion = MotionSpec::stationary(2, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
  outer.gamma.resize(outer.grid.size());
  for (std::size_t k = 0; k < outer.grid.size(); ++k) {
    const auto q = outer.grid.coords(k);
    outer.gamma[k] = std::hypot(q[0] - c, q[1] - c) >= r2 ? 1.0 : 0.0;
  }
  setup.bodies = {std::move(inner), std::move(outer)};

  FlowSolver solver(setup);
  // The rasterized disc makes the flow periodic in the rotation period
  // rather than steady: compare whole revolutions and report the profile
  // averaged over the last one.
  const int window = static_cast<int>(std::lround(period));
  if (window < 1) throw std::invalid_argument("rotation period below one step");

  FlowState state = solver.initial_state();
  FlowState next;
  Snapshot snap;
  std::vector<double> saved = state.u;
  std::vector<double> mean(state.nodes, 0.0);
  double change = 0.0;
  int n_done = 0;
  bool steady = false;
  while (n_done < o.max_steps) {
    if (n_done % window == 0) std::fill(mean.begin(), mean.end(), 0.0);
    ++n_done;
    solver.build_snapshot(n_done, snap);
    solver.step(state, next, snap);
    std::swap(state, next);
    for (std::size_t i = 0; i < state.nodes; ++i) {
      mean[i] += std::hypot(state.u[i], state.u[state.nodes + i]) / window;
    }
    if (n_done % window == 0) {
      change = 0.0;
      for (std::size_t i = 0; i < saved.size(); ++i) {
        change = std::max(change, std::abs(state.u[i] - saved[i]));
      }
      saved = state.u;
      if (change < o.steady_tol) {
        steady = true;
        break;
      }
    }
  }

  VerificationReport rep;
  rep.scenario = "taylor-couette";
  std::vector<double> computed, reference;
  const int j = static_cast<int>(std::lround(c));
  for (int i = 0; i < n; ++i) {
    const double r = i - c;
    if (r < r1 + margin - 1e-9 || r > r2 - margin + 1e-9) continue;
    const double speed = mean[setup.grid.index({i, j, 0})];
    const double ref = couette_profile(r, r1, r2, u_d);
    rep.samples.push_back({r, speed, ref});
    computed.push_back(speed);
    reference.push_back(ref);
  }
  const ErrorNorms e = compare(computed, reference);
  double max_abs = 0.0;
  for (std::size_t i = 0; i < computed.size(); ++i) {
    max_abs = std::max(max_abs, std::abs(computed[i] - reference[i]));
  }
  rep.metrics["scale"] = o.scale;
  rep.metrics["wall_speed"] = u_d;
  rep.metrics["steps"] = n_done;
  rep.metrics["steady_change"] = change;
  rep.metrics["max_relative_error"] = e.max_relative;
  rep.metrics["l2_relative_error"] = e.l2_relative;
  rep.metrics["max_error_over_wall_speed"] = max_abs / u_d;
  rep.metrics["samples"] = static_cast<double>(computed.size());
  rep.thresholds["max_relative_error"] = o.threshold;
  rep.thresholds["steady_change"] = o.steady_tol;
  if (!steady) rep.notes.push_back("step budget exhausted before steady state");
  rep.pass = steady && e.max_relative < o.threshold;
  return rep;
}

namespace {

struct FdaCase {
  FlowSetup setup;
  ObjectiveSpec objective;
  int steps = 0;
  std::vector<double> gamma;
  int design_n = 0;
};

FdaCase make_fda_case(const SensitivityOptions& o) {
  FdaCase fc;
  const int na = static_cast<int>(std::lround(150.0 * o.scale));
  const int nd = static_cast<int>(std::lround(100.0 * o.scale));
  fc.design_n = nd;
  fc.steps = static_cast<int>(std::lround(3000.0 * o.scale));

  const int aext[2] = {na, na};
  fc.setup.grid = UniformGrid::make(aext);
  fc.setup.boundary = BoundarySpec::all_walls();
  fc.setup.A = o.A;
  fc.setup.brinkman = {o.kappa_max, o.q};

  DesignBody body;
  const int dext[2] = {nd, nd};
  body.grid = UniformGrid::make(dext);
  const double pivot = 50.0 * o.scale;
  const double centre = 75.0 * o.scale;
  body.motion = MotionSpec::stationary(2, {pivot, pivot, 0.0}, {centre, centre, 0.0});
  body.motion.rotation = RotationLaw::with_period(static_cast<double>(fc.steps));
  fc.setup.design = body;

  const double a = o.semi_major * o.scale;
  const double b = o.semi_minor * o.scale;
  fc.gamma.resize(body.grid.size());
  for (std::size_t k = 0; k < body.grid.size(); ++k) {
    const auto q = body.grid.coords(k);
    const double x = (q[0] - pivot) / a;
    const double y = (q[1] - pivot) / b;
    fc.gamma[k] = x * x + y * y <= 1.0 ? o.gamma_in : o.gamma_out;
  }

  fc.objective.kind = ObjectiveKind::PressureOnBoundary;
  fc.objective.region.type = RegionSpec::Type::Faces;
  fc.objective.window_begin = 0.0;
  fc.objective.window_end = static_cast<double>(fc.steps);
  return fc;
}

double objective_of(FlowSolver& solver, Objective& objective, int steps,
                    std::span<const double> gamma) {
  solver.set_design(gamma);
  return solver.run(solver.initial_state(), steps, &objective, nullptr).objective;
}

}  // namespace

VerificationReport sensitivity_fda(const SensitivityOptions& o) {
  if (o.scale <= 0.0) throw std::invalid_argument("scale must be > 0");
  if (o.fd_step <= 0.0) throw std::invalid_argument("fd_step must be > 0");
  FdaCase fc = make_fda_case(o);
  FlowSolver solver(fc.setup);
  Objective objective(fc.objective, fc.setup.grid, solver.dt(), 0, fc.steps);

  solver.set_design(fc.gamma);
  HistoryOptions ho;
  ho.precision = HistoryPrecision::Double;
  ForwardHistory history(solver, ho, fc.steps);
  const ForwardResult fwd = solver.run(solver.initial_state(), fc.steps, &objective, &history);
  const AdjointResult adj = run_adjoint(solver, history, objective);

  const int nd = fc.design_n;
  const int row = nd / 2;
  const int stride = std::max(1, o.probe_stride);
  std::vector<int> probes;
  for (int i = 0; i < nd; i += stride) probes.push_back(i);

  const UniformGrid& dg = fc.setup.design->grid;
  std::vector<double> ad, fd, fd_half;
  std::vector<double> g = fc.gamma;
  int done = 0;
  for (int i : probes) {
    const std::size_t k = dg.index({i, row, 0});
    const double g0 = g[k];
    auto central = [&](double h) {
      g[k] = g0 + h;
      const double jp = objective_of(solver, objective, fc.steps, g);
      g[k] = g0 - h;
      const double jm = objective_of(solver, objective, fc.steps, g);
      g[k] = g0;
      return (jp - jm) / (2.0 * h);
    };
    ad.push_back(adj.sensitivity[k]);
    fd.push_back(central(o.fd_step));
    fd_half.push_back(central(0.5 * o.fd_step));
    if (o.progress) o.progress(++done, static_cast<int>(probes.size()));
  }

  VerificationReport rep;
  rep.scenario = "sensitivity";
  for (std::size_t p = 0; p < probes.size(); ++p) {
    rep.samples.push_back({static_cast<double>(probes[p]), ad[p], fd[p]});
  }
  const ErrorNorms e = compare(ad, fd);
  const ErrorNorms e_half = compare(ad, fd_half);
  double gap = 0.0, change = 0.0;
  for (std::size_t p = 0; p < ad.size(); ++p) {
    gap += (ad[p] - fd[p]) * (ad[p] - fd[p]);
    change += (fd[p] - fd_half[p]) * (fd[p] - fd_half[p]);
  }
  gap = std::sqrt(gap);
  change = std::sqrt(change);

  rep.metrics["scale"] = o.scale;
  rep.metrics["fd_step"] = o.fd_step;
  rep.metrics["objective"] = fwd.objective;
  rep.metrics["probes"] = static_cast<double>(probes.size());
  rep.metrics["l2_relative_error"] = e.l2_relative;
  rep.metrics["max_relative_error"] = e.max_relative;
  rep.metrics["cosine"] = e.cosine;
  rep.metrics["l2_relative_error_half_step"] = e_half.l2_relative;
  rep.metrics["adjoint_fd_gap"] = gap;
  rep.metrics["fd_step_halving_change"] = change;
  rep.metrics["max_clipped"] = static_cast<double>(fwd.max_clipped);
  rep.thresholds["l2_relative_error"] = o.l2_threshold;
  rep.thresholds["cosine"] = o.cosine_threshold;

  // Halving the step must not move the differences by more than the gap.
  const bool fd_resolved = change <= std::max(gap, 1e-3 * std::sqrt(std::inner_product(
                                                        fd.begin(), fd.end(), fd.begin(), 0.0)));
  rep.metrics["fd_resolved"] = fd_resolved ? 1.0 : 0.0;
  rep.pass = e.l2_relative < o.l2_threshold && e.cosine > o.cosine_threshold && fd_resolved;
  return rep;
}

}  // namespace lkstopo
