#pragma once

#include "lkstopo/lattice.hpp"

namespace lkstopo {

/// theta(t) = phase + rate * t. A zero rate is a non-rotating body.
struct RotationLaw {
  double rate = 0.0;   // rad per unit time
  double phase = 0.0;  // rad

  static RotationLaw with_period(double period, double phase = 0.0);
  double angle(double t) const { return phase + rate * t; }
  double angular_velocity(double /*t*/) const { return rate; }

  bool operator==(const RotationLaw&) const = default;
};

/// x_G(t) = offset + amplitude * sin(2 pi t / period + phase) + velocity * t.
/// A non-positive period disables the sinusoid.
struct TranslationLaw {
  Vec3 offset{};
  Vec3 amplitude{};
  double period = 0.0;
  double phase = 0.0;
  Vec3 velocity{};

  Vec3 position(double t) const;
  Vec3 velocity_at(double t) const;

  bool operator==(const TranslationLaw&) const = default;
};

/// Prescribed rigid motion of a design grid. `pivot` is in design-grid
/// coordinates; rotation happens about a fixed coordinate axis (z in 2D).
struct MotionSpec {
  int dim = 2;
  Vec3 pivot{};
  RotationLaw rotation;
  int axis = 2;
  TranslationLaw translation;

  /// Body that sits still with design coordinate `pivot` at `at`.
  static MotionSpec stationary(int dim, const Vec3& pivot, const Vec3& at);

  bool is_static() const;
  /// Rotation matrix R(theta(t)).
  Mat3 rotation_matrix(double t) const;
  /// dR/dtheta at theta(t).
  Mat3 rotation_derivative(double t) const;

  bool operator==(const MotionSpec&) const = default;
};

/// x_ref = R(theta(t)) (xi - pivot) + x_G(t).
Vec3 body_position(const Vec3& xi, double t, const MotionSpec& spec);

/// u_ref = R'(theta(t)) (xi - pivot) omega(t) + u_G(t).
Vec3 body_velocity(const Vec3& xi, double t, const MotionSpec& spec);

}  // namespace lkstopo
