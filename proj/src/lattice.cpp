#include "lkstopo/lattice.hpp"

#include <stdexcept>
#include <string>

namespace lkstopo {

template <class L>
LatticeModel LatticeModel::from_descriptor(LatticeKind kind) {
  LatticeModel m;
  m.kind_ = kind;
  m.dim_ = L::kDim;
  m.q_ = L::kQ;
  for (int i = 0; i < L::kQ; ++i) {
    m.c_[i] = {L::c[i][0], L::c[i][1], L::c[i][2]};
    m.w_[i] = L::w[i];
  }
  return m;
}

const LatticeModel& LatticeModel::d2q9() {
  static const LatticeModel model = from_descriptor<D2Q9>(LatticeKind::D2Q9);
  return model;
}

const LatticeModel& LatticeModel::d3q15() {
  static const LatticeModel model = from_descriptor<D3Q15>(LatticeKind::D3Q15);
  return model;
}

const LatticeModel& LatticeModel::for_dimension(int d) {
  if (d == 2) return d2q9();
  if (d == 3) return d3q15();
  throw std::invalid_argument("no lattice model for dimension " +
                              std::to_string(d));
}

std::string_view LatticeModel::name() const {
  return kind_ == LatticeKind::D2Q9 ? "D2Q9" : "D3Q15";
}

Moments moments(std::span<const double> f, const LatticeModel& model) {
  if (static_cast<int>(f.size()) != model.q()) {
    throw std::invalid_argument("population count does not match lattice");
  }
  Moments m;
  for (int i = 0; i < model.q(); ++i) {
    m.rho += f[i];
    for (int a = 0; a < 3; ++a) m.u[a] += model.c(i)[a] * f[i];
  }
  return m;
}

double equilibrium(double rho, const Vec3& u, const Mat3& grad_u, double A,
                   double dx, int i, const LatticeModel& model) {
  const auto& c = model.c(i);
  const int d = model.dimension();
  double cu = 0.0;
  double uu = 0.0;
  double strain = 0.0;
  for (int a = 0; a < d; ++a) {
    cu += c[a] * u[a];
    uu += u[a] * u[a];
    for (int b = 0; b < d; ++b) {
      strain += (grad_u[a][b] + grad_u[b][a]) * c[a] * c[b];
    }
  }
  return model.w(i) *
         (rho + 3.0 * cu + 4.5 * cu * cu - 1.5 * uu + dx * A * strain);
}

double viscosity_of_A(double A, double dx) {
  if (A >= 0.75) {
    throw std::domain_error("A = " + std::to_string(A) +
                            " gives non-positive viscosity (need A < 3/4)");
  }
  return (1.0 / 6.0 - 2.0 * A / 9.0) * dx;
}

double A_of_viscosity(double nu, double dx) {
  if (nu <= 0.0) throw std::domain_error("viscosity must be positive");
  return (1.0 / 6.0 - nu / dx) * 4.5;
}

}  // namespace lkstopo
