#include "lkstopo/adjoint.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lkstopo {

namespace {

// State derivatives at level n -> level n-1. `in` holds dJ/d(rho, u) at level
// n (sources included); the constrained boundary components are dropped, the
// Brinkman division is transposed, then streaming and the equilibrium map.
template <class L>
void adjoint_kernel(const FlowSolver& solver, std::span<const double> u_prev,
                    const Snapshot& snap, const AdjointState& in, AdjointState& out,
                    std::vector<double>* velocity_star) {
  constexpr int D = L::kDim;
  constexpr int Q = L::kQ;
  const GridOperators& ops = solver.operators();
  const UniformGrid& g = ops.grid();
  const std::size_t n = g.size();
  const double dt = solver.dt();
  const double A = solver.setup().A;
  const std::size_t stride[3] = {1, static_cast<std::size_t>(g.extents[0]),
                                 static_cast<std::size_t>(g.extents[0]) * g.extents[1]};

  thread_local std::vector<double> a_star;
  thread_local std::vector<double> b_star;
  thread_local std::vector<double> s_t;  // D*D blocks
  a_star.assign(in.rho.begin(), in.rho.end());
  b_star.assign(in.u.begin(), in.u.end());
  for (const auto& nc : solver.constraints()) {
    if (nc.fix_rho) a_star[nc.node] = 0.0;
    for (int a = 0; a < D; ++a) {
      if (nc.u_mask & (1u << a)) b_star[a * n + nc.node] = 0.0;
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    const double inv = 1.0 / (1.0 + dt * snap.kappa[x]);
    for (int a = 0; a < D; ++a) b_star[a * n + x] *= inv;
  }
  if (velocity_star) velocity_star->assign(b_star.begin(), b_star.end());

  out.dim = D;
  out.nodes = n;
  out.rho.resize(n);
  out.u.resize(D * n);
  s_t.resize(D * D * n);

#pragma omp parallel for schedule(static)
  for (std::size_t y = 0; y < n; ++y) {
    const Index3 c = g.coords(y);
    double rho_t = 0.0;
    double u_t[3] = {0.0, 0.0, 0.0};
    double s[3][3] = {};
    for (int i = 0; i < Q; ++i) {
      const auto sx = ops.axis(0).sinks(c[0], L::c[i][0]);
      const auto sy = ops.axis(1).sinks(c[1], L::c[i][1]);
      const auto sz = ops.axis(2).sinks(c[2], L::c[i][2]);
      double F = 0.0;
      for (int z : sz) {
        for (int yy : sy) {
          for (int xx : sx) {
            const std::size_t x = xx + yy * stride[1] + z * stride[2];
            double f = a_star[x];
            for (int a = 0; a < D; ++a) f += L::c[i][a] * b_star[a * n + x];
            F += f;
          }
        }
      }
      const double wf = L::w[i] * F;
      rho_t += wf;
      for (int a = 0; a < D; ++a) {
        u_t[a] += L::c[i][a] * wf;
        for (int b = 0; b < D; ++b) s[a][b] += L::c[i][a] * L::c[i][b] * wf;
      }
    }
    out.rho[y] = rho_t;
    for (int a = 0; a < D; ++a) {
      double v = u_t[a] - rho_t * u_prev[a * n + y];
      for (int b = 0; b < D; ++b) {
        v += 3.0 * s[a][b] * u_prev[b * n + y];
        s_t[(a * D + b) * n + y] = s[a][b];
      }
      out.u[a * n + y] = 3.0 * v;
    }
  }

  // Transposed gradient stencil: sum_b 2A D_b^T s_t[a][b].
  if (A != 0.0) {
#pragma omp parallel for schedule(static)
    for (std::size_t z = 0; z < n; ++z) {
      const Index3 c = g.coords(z);
      for (int b = 0; b < D; ++b) {
        for (const auto& e : ops.axis(b).diff_transpose(c[b])) {
          const std::size_t y = z + (e.coord - c[b]) * static_cast<std::ptrdiff_t>(stride[b]);
          for (int a = 0; a < D; ++a) {
            out.u[a * n + z] += 2.0 * A * e.coef * s_t[(a * D + b) * n + y];
          }
        }
      }
    }
  }
}

void check_finite(const AdjointState& s, int step) {
  for (double v : s.rho) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("adjoint diverged at step " + std::to_string(step));
    }
  }
  for (double v : s.u) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("adjoint diverged at step " + std::to_string(step));
    }
  }
}

void add_sources(const Objective& objective, int step, AdjointState& s) {
  const double r = objective.rho_source(step);
  const Vec3 v = objective.u_source(step);
  if (r != 0.0) {
    for (std::size_t i : objective.nodes()) s.rho[i] += r;
  }
  for (int a = 0; a < s.dim; ++a) {
    if (v[a] == 0.0) continue;
    for (std::size_t i : objective.nodes()) s.u[a * s.nodes + i] += v[a];
  }
}

}  // namespace

AdjointState::AdjointState(int dim_, std::size_t nodes_)
    : dim(dim_), nodes(nodes_), rho(nodes_, 0.0), u(dim_ * nodes_, 0.0) {}

bool AdjointState::is_zero() const {
  for (double v : rho) {
    if (v != 0.0) return false;
  }
  for (double v : u) {
    if (v != 0.0) return false;
  }
  return true;
}

double adjoint_equilibrium(double rho_adj, const Vec3& v_adj, int i,
                           const LatticeModel& model) {
  double f = rho_adj;
  for (int a = 0; a < model.dimension(); ++a) f += 3.0 * model.c(i)[a] * v_adj[a];
  return f;
}

void adjoint_step(const FlowSolver& solver, std::span<const double> u_prev,
                  const Snapshot& snap, const AdjointState& in, AdjointState& out,
                  std::vector<double>* velocity_star) {
  const std::size_t n = solver.grid().size();
  const int d = solver.grid().dim;
  if (in.nodes != n || in.dim != d || u_prev.size() != d * n) {
    throw std::invalid_argument("adjoint state does not match the analysis grid");
  }
  if (solver.lattice().kind() == LatticeKind::D2Q9) {
    adjoint_kernel<D2Q9>(solver, u_prev, snap, in, out, velocity_star);
  } else {
    adjoint_kernel<D3Q15>(solver, u_prev, snap, in, out, velocity_star);
  }
}

AdjointResult run_adjoint(const FlowSolver& solver, ForwardHistory& history,
                          const Objective& objective, const AdjointState* terminal) {
  const OverlapMap* map = solver.design_map();
  if (!map) throw std::logic_error("adjoint sweep needs a design body");
  const int d = solver.grid().dim;
  const std::size_t n = solver.grid().size();
  const std::size_t nd = map->design().size();
  const int N = history.total_steps();
  const double dt = solver.dt();

  AdjointState lam(d, n);
  if (terminal && !terminal->rho.empty()) {
    if (terminal->nodes != n || terminal->dim != d) {
      throw std::invalid_argument("terminal adjoint does not match the analysis grid");
    }
    lam = *terminal;
  }
  add_sources(objective, N, lam);

  std::vector<double> accum(nd, 0.0);
  const auto uN = history.velocity(N);
  std::vector<double> u_cur(uN.begin(), uN.end());
  std::vector<double> u_prev;
  std::vector<double> b_star;
  std::vector<double> q(n, 0.0);
  std::vector<double> qd(nd, 0.0);
  Snapshot snap;
  AdjointState next;

  for (int step = N; step >= 1; --step) {
    const auto up = history.velocity(step - 1);
    u_prev.assign(up.begin(), up.end());
    solver.build_snapshot(step, snap);
    adjoint_step(solver, u_prev, snap, lam, next, &b_star);

    // d u / d kappa_design = dt (u_S,design - u) / (1 + dt kappa); b_star
    // already carries the 1 / (1 + dt kappa) factor.
    for (std::size_t x = 0; x < n; ++x) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) {
        s += b_star[a * n + x] * (snap.design_us[a * n + x] - u_cur[a * n + x]);
      }
      q[x] = dt * s;
    }
    map->gather(snap.design_placement, q, qd, 1);
    for (std::size_t k = 0; k < nd; ++k) accum[k] += qd[k];

    std::swap(lam, next);
    check_finite(lam, step - 1);
    add_sources(objective, step - 1, lam);
    std::swap(u_cur, u_prev);
  }

  AdjointResult res;
  res.sensitivity.resize(nd);
  const auto kappa_gamma = solver.design_gamma();
  for (std::size_t k = 0; k < nd; ++k) {
    res.sensitivity[k] = brinkman_derivative(kappa_gamma[k], solver.setup().brinkman) * accum[k];
  }
  // The carried adjoint excludes the level-0 source, which belongs to this run.
  const double r0 = objective.rho_source(0);
  const Vec3 v0 = objective.u_source(0);
  for (std::size_t i : objective.nodes()) {
    lam.rho[i] -= r0;
    for (int a = 0; a < d; ++a) lam.u[a * n + i] -= v0[a];
  }
  res.carry = std::move(lam);
  return res;
}

std::vector<double> volume_sensitivity(std::size_t design_nodes, double v_max) {
  if (design_nodes == 0) throw std::invalid_argument("empty design field");
  if (!(v_max > 0.0 && v_max <= 1.0)) throw std::invalid_argument("V_max must lie in (0, 1]");
  return std::vector<double>(design_nodes, 1.0 / (v_max * static_cast<double>(design_nodes)));
}

}  // namespace lkstopo
