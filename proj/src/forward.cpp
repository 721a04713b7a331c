#include "lkstopo/forward.hpp"

#include <cmath>
#include <string>

#include "lkstopo/objectives.hpp"

namespace lkstopo {

namespace {

constexpr double kMaxSpeed = 0.5;

template <class L>
inline void equilibria(double A, double rho, const double* uy, const double (&G)[3][3],
                       double* feq, std::size_t n, std::size_t y) {
  constexpr int D = L::kDim;
  double S[3][3];
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) S[a][b] = G[a][b] + G[b][a];
  }
  double uu = 0.0;
  for (int a = 0; a < D; ++a) uu += uy[a] * uy[a];
#pragma GCC unroll 16
  for (int i = 0; i < L::kQ; ++i) {
    double cu = 0.0;
    double csc = 0.0;
    for (int a = 0; a < D; ++a) {
      cu += L::c[i][a] * uy[a];
      for (int b = 0; b < D; ++b) csc += L::c[i][a] * L::c[i][b] * S[a][b];
    }
    feq[i * n + y] = L::w[i] * (rho + 3.0 * cu + 4.5 * cu * cu - 1.5 * uu + A * csc);
  }
}

template <class L>
void step_kernel(const GridOperators& ops, double A, const FlowState& prev,
                 FlowState& next, const Snapshot& snap,
                 std::span<const NodeConstraint> constraints, double dt) {
  constexpr int D = L::kDim;
  constexpr int Q = L::kQ;
  const UniformGrid& g = ops.grid();
  const std::size_t n = g.size();
  const int nx = g.extents[0], ny = g.extents[1], nz = g.extents[2];
  const std::ptrdiff_t stride[3] = {1, nx, static_cast<std::ptrdiff_t>(nx) * ny};

  thread_local std::vector<double> feq;
  feq.resize(Q * n);

  const double* u = prev.u.data();
  const double* rho = prev.rho.data();

  // Interior nodes use direct offsets; faces go through the axis operators.
  auto interior = [&](int a, int c) { return c >= 1 && c <= g.extents[a] - 2; };

#pragma omp parallel for collapse(2) schedule(static)
  for (int z = 0; z < nz; ++z) {
    for (int yy = 0; yy < ny; ++yy) {
      const bool line_inner = interior(1, yy) && (D < 3 || interior(2, z));
      for (int x = 0; x < nx; ++x) {
        const std::size_t y = static_cast<std::size_t>(x) + stride[1] * yy + stride[2] * z;
        double uy[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < D; ++a) uy[a] = u[a * n + y];
        double G[3][3] = {};
        if (line_inner && interior(0, x)) {
          for (int b = 0; b < D; ++b) {
            for (int a = 0; a < D; ++a) {
              G[a][b] = -0.5 * u[a * n + y - stride[b]] + 0.5 * u[a * n + y + stride[b]];
            }
          }
        } else {
          const int c[3] = {x, yy, z};
          for (int b = 0; b < D; ++b) {
            for (const auto& e : ops.axis(b).diff(c[b])) {
              const std::size_t j = y + (e.coord - c[b]) * stride[b];
              for (int a = 0; a < D; ++a) G[a][b] += e.coef * u[a * n + j];
            }
          }
        }
        equilibria<L>(A, rho[y], uy, G, feq.data(), n, y);
      }
    }
  }

  next.dim = D;
  next.nodes = n;
  next.rho.resize(n);
  next.u.resize(D * n);

  std::ptrdiff_t offset[Q];
  for (int i = 0; i < Q; ++i) {
    offset[i] = 0;
    for (int a = 0; a < D; ++a) offset[i] += L::c[i][a] * stride[a];
  }

#pragma omp parallel for collapse(2) schedule(static)
  for (int z = 0; z < nz; ++z) {
    for (int yy = 0; yy < ny; ++yy) {
      const bool line_inner = interior(1, yy) && (D < 3 || interior(2, z));
      for (int x = 0; x < nx; ++x) {
        const std::size_t y = static_cast<std::size_t>(x) + stride[1] * yy + stride[2] * z;
        const bool inner = line_inner && interior(0, x);
        const int c[3] = {x, yy, z};
        double r = 0.0;
        double m[3] = {0.0, 0.0, 0.0};
#pragma GCC unroll 16
        for (int i = 0; i < Q; ++i) {
          std::size_t src;
          if (inner) {
            src = y - offset[i];
          } else {
            src = 0;
            for (int a = 0; a < D; ++a) {
              src += static_cast<std::size_t>(ops.axis(a).source(c[a], L::c[i][a])) * stride[a];
            }
          }
          const double f = feq[i * n + src];
          r += f;
          for (int a = 0; a < D; ++a) m[a] += L::c[i][a] * f;
        }
        const double inv = 1.0 / (1.0 + dt * snap.kappa[y]);
        next.rho[y] = r;
        for (int a = 0; a < D; ++a) {
          next.u[a * n + y] = (m[a] + dt * snap.kappa_u[a * n + y]) * inv;
        }
      }
    }
  }

  apply_boundaries(constraints, next);
}

}  // namespace

DivergenceError::DivergenceError(int step, std::size_t node, double speed)
    : std::runtime_error("flow diverged at step " + std::to_string(step) +
                         ": |u| = " + std::to_string(speed) + " at node " +
                         std::to_string(node)),
      step_(step),
      node_(node),
      speed_(speed) {}

FlowSolver::FlowSolver(FlowSetup setup)
    : setup_(std::move(setup)), model_(&LatticeModel::for_dimension(setup_.grid.dim)) {
  setup_.boundary.validate(setup_.grid.dim);
  setup_.brinkman.validate();
  viscosity_of_A(setup_.A, setup_.grid.dx);
  const auto periodic = setup_.boundary.periodic_axes();
  ops_ = GridOperators(setup_.grid, periodic);
  constraints_ = resolve_boundary(setup_.grid, setup_.boundary);

  const std::size_t n = setup_.grid.size();
  mask_kappa_.assign(n, 0.0);
  if (!setup_.solid_mask.empty()) {
    if (setup_.solid_mask.size() != n) {
      throw std::invalid_argument("solid mask size does not match the analysis grid");
    }
    for (std::size_t i = 0; i < n; ++i) {
      mask_kappa_[i] = setup_.brinkman.kappa_max * setup_.solid_mask[i];
    }
  }

  for (const auto& body : setup_.bodies) {
    if (body.grid.dim != setup_.grid.dim || body.grid.dx != setup_.grid.dx) {
      throw std::invalid_argument("body grid must share dimension and spacing with the analysis grid");
    }
    if (body.gamma.size() != body.grid.size()) {
      throw std::invalid_argument("body pseudo-density size does not match its grid");
    }
    BodyCache bc;
    bc.map = OverlapMap(setup_.grid, periodic, body.grid, setup_.kernel);
    bc.motion = body.motion;
    bc.kappa_ref.resize(body.gamma.size());
    for (std::size_t k = 0; k < body.gamma.size(); ++k) {
      bc.kappa_ref[k] = brinkman(body.gamma[k], setup_.brinkman);
    }
    bc.is_static = body.motion.is_static();
    if (bc.is_static) {
      Placement p;
      std::vector<double> us;
      scatter_body(bc.map, bc.motion, bc.kappa_ref, 0.0, p, bc.kappa, us);
      bc.kappa_u.assign(setup_.grid.dim * n, 0.0);
      for (int a = 0; a < setup_.grid.dim; ++a) {
        for (std::size_t i = 0; i < n; ++i) {
          bc.kappa_u[a * n + i] = bc.kappa[i] * us[a * n + i];
        }
      }
    }
    bodies_.push_back(std::move(bc));
  }

  if (setup_.design) {
    const auto& d = *setup_.design;
    if (d.grid.dim != setup_.grid.dim || d.grid.dx != setup_.grid.dx) {
      throw std::invalid_argument("design grid must share dimension and spacing with the analysis grid");
    }
    design_map_.emplace(setup_.grid, periodic, d.grid, setup_.kernel);
    design_gamma_.assign(d.grid.size(), 0.0);
    design_kappa_.assign(d.grid.size(), 0.0);
  }
}

const OverlapMap* FlowSolver::design_map() const {
  return design_map_ ? &*design_map_ : nullptr;
}

void FlowSolver::set_design(std::span<const double> gamma) {
  if (!design_map_) throw std::logic_error("flow setup has no design body");
  if (gamma.size() != design_gamma_.size()) {
    throw std::invalid_argument("design field size does not match the design grid");
  }
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    design_gamma_[k] = gamma[k];
    design_kappa_[k] = brinkman(gamma[k], setup_.brinkman);
  }
}

void FlowSolver::scatter_body(const OverlapMap& map, const MotionSpec& motion,
                              std::span<const double> kappa_ref, double t,
                              Placement& p, std::vector<double>& kappa,
                              std::vector<double>& us) const {
  const int d = setup_.grid.dim;
  const std::size_t n = setup_.grid.size();
  const std::size_t nd = kappa_ref.size();
  map.place(motion, t, p);
  // kappa_ref and u_ref scattered together in one pass.
  thread_local std::vector<double> vref;
  thread_local std::vector<double> both;
  vref.resize((d + 1) * nd);
  std::copy(kappa_ref.begin(), kappa_ref.end(), vref.begin());
  for (std::size_t k = 0; k < nd; ++k) {
    for (int a = 0; a < d; ++a) vref[(a + 1) * nd + k] = p.velocity[k][a];
  }
  both.assign((d + 1) * n, 0.0);
  map.scatter(p, vref, both, d + 1);
  kappa.assign(both.begin(), both.begin() + n);
  us.assign(both.begin() + n, both.end());
}

void FlowSolver::build_snapshot(int step, Snapshot& out) const {
  const int d = setup_.grid.dim;
  const std::size_t n = setup_.grid.size();
  const double t = step * dt();
  out.step = step;
  out.kappa = mask_kappa_;
  out.kappa_u.assign(d * n, 0.0);
  out.clipped = 0;

  thread_local std::vector<double> kb;
  thread_local std::vector<double> ub;
  thread_local Placement pb;
  auto accumulate = [&](const std::vector<double>& k, const std::vector<double>& us) {
    for (std::size_t i = 0; i < n; ++i) out.kappa[i] += k[i];
    for (int a = 0; a < d; ++a) {
      for (std::size_t i = 0; i < n; ++i) {
        out.kappa_u[a * n + i] += k[i] * us[a * n + i];
      }
    }
  };

  for (const auto& bc : bodies_) {
    if (bc.is_static) {
      for (std::size_t i = 0; i < n; ++i) out.kappa[i] += bc.kappa[i];
      for (std::size_t i = 0; i < d * n; ++i) out.kappa_u[i] += bc.kappa_u[i];
      continue;
    }
    scatter_body(bc.map, bc.motion, bc.kappa_ref, t, pb, kb, ub);
    out.clipped += pb.clipped;
    accumulate(kb, ub);
  }

  if (design_map_) {
    scatter_body(*design_map_, setup_.design->motion, design_kappa_, t,
                 out.design_placement, kb, out.design_us);
    out.clipped += out.design_placement.clipped;
    accumulate(kb, out.design_us);
  } else {
    out.design_us.clear();
  }
}

void FlowSolver::step(const FlowState& prev, FlowState& next, const Snapshot& snap) const {
  if (model_->kind() == LatticeKind::D2Q9) {
    step_kernel<D2Q9>(ops_, setup_.A, prev, next, snap, constraints_, dt());
  } else {
    step_kernel<D3Q15>(ops_, setup_.A, prev, next, snap, constraints_, dt());
  }
}

FlowState FlowSolver::initial_state() const {
  FlowState s(setup_.grid.dim, setup_.grid.size(), 1.0);
  apply_boundaries(constraints_, s);
  return s;
}

ForwardResult FlowSolver::run(const FlowState& init, int total_steps,
                              Objective* objective, ForwardHistory* history) const {
  if (init.nodes != setup_.grid.size() || init.dim != setup_.grid.dim) {
    throw std::invalid_argument("initial state does not match the analysis grid");
  }
  ForwardResult res;
  FlowState state = init;
  FlowState next;
  Snapshot snap;
  if (objective) {
    objective->reset();
    objective->accumulate(0, state);
  }
  if (history) history->record(0, state);
  const std::size_t n = state.nodes;
  const int d = state.dim;
  for (int step = 1; step <= total_steps; ++step) {
    build_snapshot(step, snap);
    res.max_clipped = std::max(res.max_clipped, snap.clipped);
    this->step(state, next, snap);
    std::swap(state, next);

    double peak = 0.0;
    std::size_t peak_node = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) s += state.u[a * n + i] * state.u[a * n + i];
      if (!(s <= peak)) {
        peak = s;
        peak_node = i;
        if (std::isnan(s)) break;
      }
    }
    const double speed = std::sqrt(peak);
    if (!(speed <= kMaxSpeed)) throw DivergenceError(step, peak_node, speed);
    res.peak_speed = std::max(res.peak_speed, speed);

    if (objective) objective->accumulate(step, state);
    if (history) history->record(step, state);
  }
  res.final_state = std::move(state);
  res.objective = objective ? objective->value() : 0.0;
  res.steps = total_steps;
  return res;
}

ForwardHistory::ForwardHistory(const FlowSolver& solver, HistoryOptions options,
                               int total_steps)
    : solver_(&solver), options_(options), total_steps_(total_steps) {
  if (options_.checkpoint_stride < 1) {
    throw std::invalid_argument("checkpoint stride must be >= 1");
  }
  block_ = static_cast<std::size_t>(solver.grid().dim) * solver.grid().size();
  const std::size_t levels = static_cast<std::size_t>(total_steps) + 1;
  if (options_.checkpoint_stride == 1) {
    if (options_.precision == HistoryPrecision::Float) {
      u32_.assign(levels * block_, 0.0f);
    } else {
      u64_.assign(levels * block_, 0.0);
    }
  }
}

void ForwardHistory::record(int step, const FlowState& state) {
  if (step < 0 || step > total_steps_) throw std::out_of_range("history step out of range");
  const std::size_t off = static_cast<std::size_t>(step) * block_;
  if (options_.checkpoint_stride == 1) {
    if (options_.precision == HistoryPrecision::Float) {
      for (std::size_t i = 0; i < block_; ++i) u32_[off + i] = static_cast<float>(state.u[i]);
    } else {
      std::copy(state.u.begin(), state.u.end(), u64_.begin() + off);
    }
    return;
  }
  if (step % options_.checkpoint_stride == 0) {
    const std::size_t slot = step / options_.checkpoint_stride;
    if (checkpoints_.size() <= slot) checkpoints_.resize(slot + 1);
    checkpoints_[slot] = state;
  }
  if (step == segment_first_) segment_first_ = -1;
}

void ForwardHistory::load_segment(int first) {
  const int k = options_.checkpoint_stride;
  const std::size_t slot = first / k;
  if (slot >= checkpoints_.size() || checkpoints_[slot].nodes == 0) {
    throw std::out_of_range("missing history checkpoint at step " + std::to_string(first));
  }
  const int last = std::min(first + k - 1, total_steps_);
  segment_.assign(static_cast<std::size_t>(last - first + 1) * block_, 0.0);
  const FlowState& cp = checkpoints_[slot];
  std::copy(cp.u.begin(), cp.u.end(), segment_.begin());
  solver_->replay(cp, first, last, [&](int n, const FlowState& s) {
    std::copy(s.u.begin(), s.u.end(),
              segment_.begin() + static_cast<std::size_t>(n - first) * block_);
  });
  segment_first_ = first;
}

std::span<const double> ForwardHistory::velocity(int step) {
  if (step < 0 || step > total_steps_) throw std::out_of_range("history step out of range");
  const std::size_t off = static_cast<std::size_t>(step) * block_;
  if (options_.checkpoint_stride == 1) {
    if (options_.precision == HistoryPrecision::Double) {
      return {u64_.data() + off, block_};
    }
    scratch_.resize(block_);
    for (std::size_t i = 0; i < block_; ++i) scratch_[i] = u32_[off + i];
    return scratch_;
  }
  const int k = options_.checkpoint_stride;
  const int first = (step / k) * k;
  if (segment_first_ != first) load_segment(first);
  return {segment_.data() + static_cast<std::size_t>(step - first) * block_, block_};
}

std::size_t ForwardHistory::bytes() const {
  std::size_t b = u32_.size() * sizeof(float) + u64_.size() * sizeof(double) +
                  segment_.size() * sizeof(double);
  for (const auto& c : checkpoints_) b += (c.rho.size() + c.u.size()) * sizeof(double);
  return b;
}

}  // namespace lkstopo
