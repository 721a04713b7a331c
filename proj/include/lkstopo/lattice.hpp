#pragma once

#include <array>
#include <span>
#include <string_view>

namespace lkstopo {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

enum class LatticeKind { D2Q9, D3Q15 };

// Compile-time descriptors used by the solver kernels. Velocities are padded
// to three components so 2D and 3D kernels share one code path.
struct D2Q9 {
  static constexpr int kDim = 2;
  static constexpr int kQ = 9;
  static constexpr int c[kQ][3] = {{0, 0, 0},  {1, 0, 0},  {0, 1, 0},
                                   {-1, 0, 0}, {0, -1, 0}, {1, 1, 0},
                                   {-1, 1, 0}, {-1, -1, 0}, {1, -1, 0}};
  static constexpr double w[kQ] = {4.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0,
                                   1.0 / 9.0,  1.0 / 9.0,  1.0 / 36.0,
                                   1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0};
};

struct D3Q15 {
  static constexpr int kDim = 3;
  static constexpr int kQ = 15;
  static constexpr int c[kQ][3] = {
      {0, 0, 0},  {1, 0, 0},   {-1, 0, 0},  {0, 1, 0},   {0, -1, 0},
      {0, 0, 1},  {0, 0, -1},  {1, 1, 1},   {-1, -1, -1}, {1, 1, -1},
      {-1, -1, 1}, {1, -1, 1}, {-1, 1, -1}, {-1, 1, 1},  {1, -1, -1}};
  static constexpr double w[kQ] = {
      2.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0,
      1.0 / 9.0,  1.0 / 9.0,  1.0 / 72.0, 1.0 / 72.0, 1.0 / 72.0,
      1.0 / 72.0, 1.0 / 72.0, 1.0 / 72.0, 1.0 / 72.0, 1.0 / 72.0};
};

/// Runtime view of a discrete velocity set.
class LatticeModel {
 public:
  static constexpr int kMaxQ = 15;

  static const LatticeModel& d2q9();
  static const LatticeModel& d3q15();
  /// D2Q9 for d = 2, D3Q15 for d = 3; throws otherwise.
  static const LatticeModel& for_dimension(int d);

  LatticeKind kind() const { return kind_; }
  int dimension() const { return dim_; }
  int q() const { return q_; }
  const std::array<int, 3>& c(int i) const { return c_[i]; }
  double w(int i) const { return w_[i]; }
  std::string_view name() const;

 private:
  template <class L>
  static LatticeModel from_descriptor(LatticeKind kind);

  LatticeKind kind_{};
  int dim_ = 0;
  int q_ = 0;
  std::array<std::array<int, 3>, kMaxQ> c_{};
  std::array<double, kMaxQ> w_{};
};

struct Moments {
  double rho = 0.0;
  Vec3 u{};
  double pressure() const { return rho / 3.0; }
};

/// Density and momentum of one node's populations. f.size() must equal q().
Moments moments(std::span<const double> f, const LatticeModel& model);

/// LKS equilibrium f_i^eq including the velocity-gradient term scaled by A.
/// grad_u[a][b] holds du_a/dx_b in physical units; dx multiplies it back to
/// a lattice-scaled gradient.
double equilibrium(double rho, const Vec3& u, const Mat3& grad_u, double A,
                   double dx, int i, const LatticeModel& model);

/// Kinematic viscosity nu = (1/6 - 2A/9) dx. Throws std::domain_error when
/// A >= 3/4 (non-positive viscosity).
double viscosity_of_A(double A, double dx);

/// Inverse of viscosity_of_A.
double A_of_viscosity(double nu, double dx);

}  // namespace lkstopo
