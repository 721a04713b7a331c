#include "lkstopo/mma.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace lkstopo {

namespace {

using Arr = Eigen::ArrayXd;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct Subproblem {
  int m;
  Arr low, upp, alfa, beta, p0, q0;
  Mat P, Q;  // m x n
  double a0;
  Arr a, b, c, d;
};

struct Primal {
  Arr x, y, lam, xsi, eta, mu, s;
  double z = 1.0, zet = 1.0;
};

// Residual norm and max-norm of the perturbed KKT system.
std::pair<double, double> residual(const Subproblem& sp, const Primal& v, double epsi) {
  const Arr ux1 = sp.upp - v.x;
  const Arr xl1 = v.x - sp.low;
  const Arr plam = sp.p0 + (sp.P.transpose() * v.lam.matrix()).array();
  const Arr qlam = sp.q0 + (sp.Q.transpose() * v.lam.matrix()).array();
  const Arr gvec = (sp.P * ux1.inverse().matrix() + sp.Q * xl1.inverse().matrix()).array();
  const Arr rex = plam / ux1.square() - qlam / xl1.square() - v.xsi + v.eta;
  const Arr rey = sp.c + sp.d * v.y - v.mu - v.lam;
  const double rez = sp.a0 - v.zet - (sp.a * v.lam).sum();
  const Arr relam = gvec - sp.a * v.z - v.y + v.s - sp.b;
  const Arr rexsi = v.xsi * (v.x - sp.alfa) - epsi;
  const Arr reeta = v.eta * (sp.beta - v.x) - epsi;
  const Arr remu = v.mu * v.y - epsi;
  const double rezet = v.zet * v.z - epsi;
  const Arr res = v.lam * v.s - epsi;
  double sq = rex.square().sum() + rey.square().sum() + rez * rez + relam.square().sum() +
              rexsi.square().sum() + reeta.square().sum() + remu.square().sum() +
              rezet * rezet + res.square().sum();
  double mx = std::max({rex.abs().maxCoeff(), rey.abs().maxCoeff(), std::abs(rez),
                        relam.abs().maxCoeff(), rexsi.abs().maxCoeff(),
                        reeta.abs().maxCoeff(), remu.abs().maxCoeff(), std::abs(rezet),
                        res.abs().maxCoeff()});
  return {std::sqrt(sq), mx};
}

// Primal-dual Newton iteration on the subproblem. A barrier level that stalls
// above its target (round-off once the asymptotes are close) keeps the last
// iterate; returns false only for a non-finite point.
bool subsolve(const Subproblem& sp, double epsimin, int max_newton, Arr& x_out) {
  const int m = sp.m;
  const Eigen::Index n = sp.low.size();
  Primal v;
  v.x = 0.5 * (sp.alfa + sp.beta);
  v.y = Arr::Ones(m);
  v.lam = Arr::Ones(m);
  v.xsi = (1.0 / (v.x - sp.alfa)).max(1.0);
  v.eta = (1.0 / (sp.beta - v.x)).max(1.0);
  v.mu = (0.5 * sp.c).max(1.0);
  v.s = Arr::Ones(m);

  double epsi = 1.0;
  while (epsi > epsimin) {
    auto [resnorm, resmax] = residual(sp, v, epsi);
    int it = 0;
    while (resmax > 0.9 * epsi && it < max_newton) {
      ++it;
      const Arr ux1 = sp.upp - v.x;
      const Arr xl1 = v.x - sp.low;
      const Arr ux2 = ux1.square();
      const Arr xl2 = xl1.square();
      const Arr plam = sp.p0 + (sp.P.transpose() * v.lam.matrix()).array();
      const Arr qlam = sp.q0 + (sp.Q.transpose() * v.lam.matrix()).array();
      const Arr gvec = (sp.P * ux1.inverse().matrix() + sp.Q * xl1.inverse().matrix()).array();
      const Mat GG = sp.P * ux2.inverse().matrix().asDiagonal() -
                     sp.Q * xl2.inverse().matrix().asDiagonal();
      const Arr dpsidx = plam / ux2 - qlam / xl2;
      const Arr delx = dpsidx - epsi / (v.x - sp.alfa) + epsi / (sp.beta - v.x);
      const Arr dely = sp.c + sp.d * v.y - v.lam - epsi / v.y;
      const double delz = sp.a0 - (sp.a * v.lam).sum() - epsi / v.z;
      const Arr dellam = gvec - sp.a * v.z - v.y - sp.b + epsi / v.lam;
      const Arr diagx = 2.0 * (plam / (ux1 * ux2) + qlam / (xl1 * xl2)) +
                        v.xsi / (v.x - sp.alfa) + v.eta / (sp.beta - v.x);
      const Arr diagxinv = diagx.inverse();
      const Arr diagy = sp.d + v.mu / v.y;
      const Arr diagyinv = diagy.inverse();
      const Arr diaglamyi = v.s / v.lam + diagyinv;

      Arr dx, dlam;
      double dz;
      if (m < n) {
        Vec blam = (dellam + dely / diagy).matrix() - GG * (delx / diagx).matrix();
        Mat AA(m + 1, m + 1);
        AA.topLeftCorner(m, m) = Mat(diaglamyi.matrix().asDiagonal()) +
                                 GG * diagxinv.matrix().asDiagonal() * GG.transpose();
        AA.topRightCorner(m, 1) = sp.a.matrix();
        AA.bottomLeftCorner(1, m) = sp.a.matrix().transpose();
        AA(m, m) = -v.zet / v.z;
        Vec bb(m + 1);
        bb.head(m) = blam;
        bb(m) = delz;
        const Vec sol = AA.partialPivLu().solve(bb);
        dlam = sol.head(m).array();
        dz = sol(m);
        dx = -delx / diagx - (GG.transpose() * dlam.matrix()).array() / diagx;
      } else {
        const Arr diaglamyiinv = diaglamyi.inverse();
        const Arr dellamyi = dellam + dely / diagy;
        Mat Axx = Mat(diagx.matrix().asDiagonal()) +
                  GG.transpose() * diaglamyiinv.matrix().asDiagonal() * GG;
        const double azz = v.zet / v.z + (sp.a * (sp.a / diaglamyi)).sum();
        const Vec axz = -(GG.transpose() * (sp.a / diaglamyi).matrix());
        const Vec bx = delx.matrix() + GG.transpose() * (dellamyi / diaglamyi).matrix();
        const double bz = delz - (sp.a * (dellamyi / diaglamyi)).sum();
        Mat AA(n + 1, n + 1);
        AA.topLeftCorner(n, n) = Axx;
        AA.topRightCorner(n, 1) = axz;
        AA.bottomLeftCorner(1, n) = axz.transpose();
        AA(n, n) = azz;
        Vec bb(n + 1);
        bb.head(n) = -bx;
        bb(n) = -bz;
        const Vec sol = AA.partialPivLu().solve(bb);
        dx = sol.head(n).array();
        dz = sol(n);
        dlam = (GG * dx.matrix()).array() / diaglamyi - dz * (sp.a / diaglamyi) +
               dellamyi / diaglamyi;
      }
      const Arr dy = -dely / diagy + dlam / diagy;
      const Arr dxsi = -v.xsi + epsi / (v.x - sp.alfa) - (v.xsi * dx) / (v.x - sp.alfa);
      const Arr deta = -v.eta + epsi / (sp.beta - v.x) + (v.eta * dx) / (sp.beta - v.x);
      const Arr dmu = -v.mu + epsi / v.y - (v.mu * dy) / v.y;
      const double dzet = -v.zet + epsi / v.z - v.zet * dz / v.z;
      const Arr ds = -v.s + epsi / v.lam - (v.s * dlam) / v.lam;

      double stm = 1.0;
      auto upd = [&](const Arr& val, const Arr& d) {
        stm = std::max(stm, (-1.01 * d / val).maxCoeff());
      };
      upd(v.y, dy);
      upd(Arr::Constant(1, v.z), Arr::Constant(1, dz));
      upd(v.lam, dlam);
      upd(v.xsi, dxsi);
      upd(v.eta, deta);
      upd(v.mu, dmu);
      upd(Arr::Constant(1, v.zet), Arr::Constant(1, dzet));
      upd(v.s, ds);
      stm = std::max(stm, (-1.01 * dx / (v.x - sp.alfa)).maxCoeff());
      stm = std::max(stm, (1.01 * dx / (sp.beta - v.x)).maxCoeff());
      double steg = 1.0 / stm;

      const Primal old = v;
      double resnew = 2.0 * resnorm;
      double resmaxnew = resmax;
      int itto = 0;
      while (resnew > resnorm && itto < 50) {
        ++itto;
        v.x = old.x + steg * dx;
        v.y = old.y + steg * dy;
        v.z = old.z + steg * dz;
        v.lam = old.lam + steg * dlam;
        v.xsi = old.xsi + steg * dxsi;
        v.eta = old.eta + steg * deta;
        v.mu = old.mu + steg * dmu;
        v.zet = old.zet + steg * dzet;
        v.s = old.s + steg * ds;
        std::tie(resnew, resmaxnew) = residual(sp, v, epsi);
        steg *= 0.5;
      }
      resnorm = resnew;
      resmax = resmaxnew;
    }
    epsi *= 0.1;
  }
  x_out = v.x;
  return x_out.allFinite();
}

}  // namespace

Mma::Mma(std::size_t n, int m, MmaSettings settings)
    : n_(n), m_(m), settings_(settings) {
  if (n == 0) throw std::invalid_argument("MMA needs at least one variable");
  if (m < 0) throw std::invalid_argument("MMA constraint count must be >= 0");
}

std::vector<double> Mma::update(std::span<const double> x, double f0,
                                std::span<const double> df0dx,
                                std::span<const double> fval,
                                std::span<const std::vector<double>> dfdx,
                                std::span<const double> xmin,
                                std::span<const double> xmax) {
  (void)f0;
  if (x.size() != n_ || df0dx.size() != n_ || xmin.size() != n_ || xmax.size() != n_) {
    throw std::invalid_argument("MMA input size mismatch");
  }
  if (fval.size() != static_cast<std::size_t>(m_) ||
      dfdx.size() != static_cast<std::size_t>(m_)) {
    throw std::invalid_argument("MMA constraint count mismatch");
  }
  for (std::size_t j = 0; j < n_; ++j) {
    if (!std::isfinite(df0dx[j])) throw std::invalid_argument("non-finite objective sensitivity");
  }
  for (const auto& row : dfdx) {
    if (row.size() != n_) throw std::invalid_argument("MMA constraint gradient size mismatch");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite constraint sensitivity");
    }
  }

  ++iter_;
  const auto n = static_cast<Eigen::Index>(n_);
  // An unconstrained problem gets one inactive dummy constraint.
  const int m = std::max(m_, 1);
  const MmaSettings& st = settings_;

  const Arr xval = Eigen::Map<const Arr>(x.data(), n);
  const Arr lo = Eigen::Map<const Arr>(xmin.data(), n);
  const Arr hi = Eigen::Map<const Arr>(xmax.data(), n);
  const Arr range = hi - lo;

  Arr low(n), upp(n);
  if (iter_ <= 2) {
    low = xval - st.asyinit * range;
    upp = xval + st.asyinit * range;
  } else {
    const Arr x1 = Eigen::Map<const Arr>(xold1_.data(), n);
    const Arr x2 = Eigen::Map<const Arr>(xold2_.data(), n);
    const Arr lw = Eigen::Map<const Arr>(low_.data(), n);
    const Arr up = Eigen::Map<const Arr>(upp_.data(), n);
    const Arr zzz = (xval - x1) * (x1 - x2);
    Arr factor = Arr::Ones(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (zzz[j] > 0.0) factor[j] = st.asyincr;
      else if (zzz[j] < 0.0) factor[j] = st.asydecr;
    }
    low = xval - factor * (x1 - lw);
    upp = xval + factor * (up - x1);
    low = low.max(xval - st.asymax * range).min(xval - st.asymin * range);
    upp = upp.min(xval + st.asymax * range).max(xval + st.asymin * range);
  }

  const Arr df0 = Eigen::Map<const Arr>(df0dx.data(), n);
  Arr fv = Arr::Constant(m, -1.0);
  Mat G = Mat::Zero(m, n);
  for (int i = 0; i < m_; ++i) {
    fv[i] = fval[i];
    G.row(i) = Eigen::Map<const Eigen::RowVectorXd>(dfdx[i].data(), n);
  }

  // A flat objective with every constraint satisfied leaves the current
  // point optimal for the subproblem; skip the barrier solve.
  const bool stationary = (df0 == 0.0).all() && (fv.head(m_) <= 0.0).all();

  auto solve_with_move = [&](double move, Arr& xnew) {
    Subproblem sp;
    sp.m = m;
    sp.low = low;
    sp.upp = upp;
    sp.alfa = (low + st.albefa * (xval - low)).max(xval - move * range).max(lo);
    sp.beta = (upp - st.albefa * (upp - xval)).min(xval + move * range).min(hi);
    const Arr xmamiinv = range.max(1e-5).inverse();
    const Arr ux1 = upp - xval;
    const Arr xl1 = xval - low;
    const Arr ux2 = ux1.square();
    const Arr xl2 = xl1.square();
    Arr p0 = df0.max(0.0);
    Arr q0 = (-df0).max(0.0);
    const Arr pq0 = 0.001 * (p0 + q0) + st.raa0 * xmamiinv;
    sp.p0 = (p0 + pq0) * ux2;
    sp.q0 = (q0 + pq0) * xl2;
    Mat P = G.cwiseMax(0.0);
    Mat Q = (-G).cwiseMax(0.0);
    const Mat PQ = 0.001 * (P + Q) + st.raa0 * Eigen::VectorXd::Ones(m) * xmamiinv.matrix().transpose();
    sp.P = (P + PQ) * ux2.matrix().asDiagonal();
    sp.Q = (Q + PQ) * xl2.matrix().asDiagonal();
    sp.b = (sp.P * ux1.inverse().matrix() + sp.Q * xl1.inverse().matrix()).array() - fv;
    sp.a0 = st.a0;
    sp.a = Arr::Constant(m, st.a);
    sp.c = Arr::Constant(m, st.c);
    sp.d = Arr::Constant(m, st.d);
    return subsolve(sp, st.epsimin, st.max_newton, xnew);
  };

  Arr xnew;
  if (stationary) {
    xnew = xval;
  } else if (!solve_with_move(st.move, xnew) && !solve_with_move(0.5 * st.move, xnew)) {
    throw MmaError("MMA subproblem did not converge at iteration " + std::to_string(iter_));
  }
  xnew = xnew.max(lo).min(hi);

  xold2_ = xold1_.empty() ? std::vector<double>(x.begin(), x.end()) : xold1_;
  xold1_.assign(x.begin(), x.end());
  low_.assign(low.data(), low.data() + n);
  upp_.assign(upp.data(), upp.data() + n);
  return {xnew.data(), xnew.data() + n};
}

std::vector<double> Mma::update(std::span<const double> x, double f0,
                                std::span<const double> df0dx, double g,
                                std::span<const double> dgdx) {
  if (m_ != 1) throw std::logic_error("single-constraint update on a multi-constraint MMA");
  const std::vector<double> lo(n_, 0.0);
  const std::vector<double> hi(n_, 1.0);
  const double fval[1] = {g};
  const std::vector<std::vector<double>> rows{{dgdx.begin(), dgdx.end()}};
  return update(x, f0, df0dx, fval, rows, lo, hi);
}

}  // namespace lkstopo
