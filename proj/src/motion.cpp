#include "lkstopo/motion.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lkstopo {

RotationLaw RotationLaw::with_period(double period, double phase) {
  if (period <= 0.0) throw std::invalid_argument("rotation period must be > 0");
  return {2.0 * std::numbers::pi / period, phase};
}

Vec3 TranslationLaw::position(double t) const {
  Vec3 x = offset;
  const double s =
      period > 0.0 ? std::sin(2.0 * std::numbers::pi * t / period + phase) : 0.0;
  for (int a = 0; a < 3; ++a) x[a] += amplitude[a] * s + velocity[a] * t;
  return x;
}

Vec3 TranslationLaw::velocity_at(double t) const {
  Vec3 v = velocity;
  if (period > 0.0) {
    const double k = 2.0 * std::numbers::pi / period;
    const double c = std::cos(k * t + phase);
    for (int a = 0; a < 3; ++a) v[a] += amplitude[a] * k * c;
  }
  return v;
}

MotionSpec MotionSpec::stationary(int dim, const Vec3& pivot, const Vec3& at) {
  MotionSpec m;
  m.dim = dim;
  m.pivot = pivot;
  m.translation.offset = at;
  return m;
}

bool MotionSpec::is_static() const {
  if (rotation.rate != 0.0) return false;
  for (int a = 0; a < 3; ++a) {
    if (translation.velocity[a] != 0.0) return false;
    if (translation.period > 0.0 && translation.amplitude[a] != 0.0) return false;
  }
  return true;
}

namespace {

// Plane (p, q) rotated for a rotation about `axis`.
void plane_axes(int axis, int& p, int& q) {
  switch (axis) {
    case 0: p = 1; q = 2; return;
    case 1: p = 2; q = 0; return;
    case 2: p = 0; q = 1; return;
    default: throw std::invalid_argument("rotation axis must be 0, 1 or 2");
  }
}

}  // namespace

Mat3 MotionSpec::rotation_matrix(double t) const {
  int p, q;
  plane_axes(axis, p, q);
  const double th = rotation.angle(t);
  Mat3 r{};
  r[axis][axis] = 1.0;
  r[p][p] = std::cos(th);
  r[p][q] = -std::sin(th);
  r[q][p] = std::sin(th);
  r[q][q] = std::cos(th);
  return r;
}

Mat3 MotionSpec::rotation_derivative(double t) const {
  int p, q;
  plane_axes(axis, p, q);
  const double th = rotation.angle(t);
  Mat3 r{};
  r[p][p] = -std::sin(th);
  r[p][q] = -std::cos(th);
  r[q][p] = std::cos(th);
  r[q][q] = -std::sin(th);
  return r;
}

Vec3 body_position(const Vec3& xi, double t, const MotionSpec& spec) {
  const Mat3 r = spec.rotation_matrix(t);
  const Vec3 g = spec.translation.position(t);
  Vec3 x{};
  for (int a = 0; a < spec.dim; ++a) {
    x[a] = g[a];
    for (int b = 0; b < spec.dim; ++b) x[a] += r[a][b] * (xi[b] - spec.pivot[b]);
  }
  return x;
}

Vec3 body_velocity(const Vec3& xi, double t, const MotionSpec& spec) {
  const Mat3 dr = spec.rotation_derivative(t);
  const double w = spec.rotation.angular_velocity(t);
  const Vec3 ug = spec.translation.velocity_at(t);
  Vec3 v{};
  for (int a = 0; a < spec.dim; ++a) {
    v[a] = ug[a];
    for (int b = 0; b < spec.dim; ++b) v[a] += dr[a][b] * (xi[b] - spec.pivot[b]) * w;
  }
  return v;
}

}  // namespace lkstopo
