#include "lkstopo/overlap.hpp"

#include <cmath>
#include <numbers>
#include <type_traits>

namespace lkstopo {

double kernel_w(double r, double dx, KernelForm form) {
  if (std::abs(r) > 2.0 * dx) return 0.0;
  if (form == KernelForm::AsPrinted) {
    return (1.0 - std::cos(std::numbers::pi * r / 2.0)) / (4.0 * dx);
  }
  return (1.0 + std::cos(std::numbers::pi * r / (2.0 * dx))) / (4.0 * dx);
}

OverlapMap::OverlapMap(const UniformGrid& analysis, std::array<bool, 3> periodic,
                       const UniformGrid& design, KernelForm form)
    : analysis_(analysis), design_(design), periodic_(periodic), form_(form) {}

void OverlapMap::place(const MotionSpec& motion, double t, Placement& out) const {
  const std::size_t n = design_.size();
  const int d = analysis_.dim;
  const double dx = analysis_.dx;
  out.t = t;
  out.base.resize(n);
  out.weights.resize(n);
  out.velocity.resize(n);
  out.clipped = 0;
  const Mat3 R = motion.rotation_matrix(t);
  const Mat3 dR = motion.rotation_derivative(t);
  const double omega = motion.rotation.angular_velocity(t);
  const Vec3 xg = motion.translation.position(t);
  const Vec3 ug = motion.translation.velocity_at(t);
  const double half_pi = 0.5 * std::numbers::pi;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 xi = design_.position(design_.coords(k));
    Vec3 x{}, v{};
    for (int a = 0; a < d; ++a) {
      x[a] = xg[a];
      v[a] = ug[a];
      for (int b = 0; b < d; ++b) {
        x[a] += R[a][b] * (xi[b] - motion.pivot[b]);
        v[a] += dR[a][b] * (xi[b] - motion.pivot[b]) * omega;
      }
    }
    out.velocity[k] = v;
    bool clipped = false;
    for (int a = 0; a < 3; ++a) {
      if (a >= d) {
        out.base[k][a] = 0;
        out.weights[k][a * 4] = 1.0;
        continue;
      }
      const double s = (x[a] - analysis_.origin[a]) / dx;
      const double fl = std::floor(s);
      const int b = static_cast<int>(fl) - 1;
      out.base[k][a] = b;
      if (form_ == KernelForm::Standard) {
        // Offsets -1-f, -f, 1-f, 2-f share one sine/cosine pair.
        const double f = s - fl;
        const double sn = std::sin(half_pi * f);
        const double cs = std::cos(half_pi * f);
        out.weights[k][a * 4 + 0] = 0.25 * (1.0 - sn);
        out.weights[k][a * 4 + 1] = 0.25 * (1.0 + cs);
        out.weights[k][a * 4 + 2] = 0.25 * (1.0 + sn);
        out.weights[k][a * 4 + 3] = 0.25 * (1.0 - cs);
      } else {
        for (int m = 0; m < 4; ++m) {
          out.weights[k][a * 4 + m] = kernel_w((b + m - s) * dx, dx, form_) * dx;
        }
      }
      if (!periodic_[a] && (s < 2.0 || s > analysis_.extents[a] - 3.0)) clipped = true;
    }
    if (clipped) ++out.clipped;
  }
}

template <class F>
void OverlapMap::for_each_target(const Placement& p, std::size_t k, F&& f) const {
  const int d = analysis_.dim;
  const Index3& base = p.base[k];
  const auto& w = p.weights[k];
  // Wrapped or dropped neighbour coordinates per axis (-1: outside).
  int idx[3][4];
  for (int a = 0; a < 3; ++a) {
    const int e = analysis_.extents[a];
    for (int m = 0; m < 4; ++m) {
      if (a >= d) {
        idx[a][m] = m == 0 ? 0 : -1;
        continue;
      }
      int c = base[a] + m;
      if (periodic_[a]) {
        c = ((c % e) + e) % e;
      } else if (c < 0 || c >= e) {
        c = -1;
      }
      idx[a][m] = c;
    }
  }
  const std::size_t sx = 1;
  const std::size_t sy = static_cast<std::size_t>(analysis_.extents[0]);
  const std::size_t sz = sy * analysis_.extents[1];
  for (int mz = 0; mz < 4; ++mz) {
    if (idx[2][mz] < 0) continue;
    const double wz = w[8 + mz];
    for (int my = 0; my < 4; ++my) {
      if (idx[1][my] < 0) continue;
      const double wyz = wz * w[4 + my];
      const std::size_t row = idx[2][mz] * sz + idx[1][my] * sy;
      for (int mx = 0; mx < 4; ++mx) {
        if (idx[0][mx] < 0) continue;
        const double wt = wyz * w[mx];
        if (wt != 0.0) f(row + idx[0][mx] * sx, wt);
      }
    }
  }
}

namespace {

template <int C>
void scatter_block(const double* vals, std::size_t nd, std::size_t k, double* out,
                   std::size_t na, std::size_t node, double wt) {
  for (int c = 0; c < C; ++c) out[c * na + node] += wt * vals[c * nd + k];
}

}  // namespace

void OverlapMap::scatter(const Placement& p, std::span<const double> values,
                         std::span<double> out, int components) const {
  const std::size_t nd = design_.size();
  const std::size_t na = analysis_.size();
  const double* v = values.data();
  double* o = out.data();
  auto run = [&](auto tag) {
    constexpr int C = decltype(tag)::value;
    for (std::size_t k = 0; k < nd; ++k) {
      bool any = false;
      for (int c = 0; c < C; ++c) any = any || v[c * nd + k] != 0.0;
      if (!any) continue;
      for_each_target(p, k, [&](std::size_t node, double wt) {
        scatter_block<C>(v, nd, k, o, na, node, wt);
      });
    }
  };
  switch (components) {
    case 1: run(std::integral_constant<int, 1>{}); break;
    case 2: run(std::integral_constant<int, 2>{}); break;
    case 3: run(std::integral_constant<int, 3>{}); break;
    case 4: run(std::integral_constant<int, 4>{}); break;
    default:
      for (std::size_t k = 0; k < nd; ++k) {
        for_each_target(p, k, [&](std::size_t node, double wt) {
          for (int c = 0; c < components; ++c) o[c * na + node] += wt * v[c * nd + k];
        });
      }
  }
}

void OverlapMap::gather(const Placement& p, std::span<const double> field,
                        std::span<double> out, int components) const {
  const std::size_t nd = design_.size();
  const std::size_t na = analysis_.size();
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < nd; ++k) {
    std::array<double, 3> acc{};
    for_each_target(p, k, [&](std::size_t node, double wt) {
      for (int c = 0; c < components; ++c) acc[c] += wt * field[c * na + node];
    });
    for (int c = 0; c < components; ++c) out[c * nd + k] = acc[c];
  }
}

std::vector<double> OverlapMap::map_to_analysis(std::span<const double> values,
                                                const MotionSpec& motion,
                                                double t) const {
  Placement p;
  place(motion, t, p);
  std::vector<double> out(analysis_.size(), 0.0);
  scatter(p, values, out);
  return out;
}

std::vector<double> OverlapMap::map_to_design(std::span<const double> field,
                                              const MotionSpec& motion,
                                              double t) const {
  Placement p;
  place(motion, t, p);
  std::vector<double> out(design_.size(), 0.0);
  gather(p, field, out);
  return out;
}

}  // namespace lkstopo
