#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace lkstopo {

struct MmaSettings {
  double asyinit = 0.5;
  double asyincr = 1.2;
  double asydecr = 0.7;
  double move = 0.2;
  double asymin = 1e-4;  // closest asymptote distance, fraction of the box range
  double asymax = 10.0;
  double albefa = 0.1;
  double raa0 = 1e-5;
  double epsimin = 1e-7;
  double a0 = 1.0;
  double a = 0.0;  // a_i for every constraint
  double c = 1000.0;
  double d = 1.0;
  int max_newton = 200;  // Newton iterations per barrier level
};

class MmaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Method of moving asymptotes for
///   min f0(x)  s.t.  f_i(x) <= 0 (i < m),  xmin <= x <= xmax,
/// with the convex separable subproblem solved by a primal-dual interior
/// point method. When the subproblem yields a non-finite point the move limit
/// is halved for one retry; a second failure throws MmaError.
class Mma {
 public:
  Mma(std::size_t n, int m, MmaSettings settings = {});

  std::size_t size() const { return n_; }
  int constraints() const { return m_; }
  int iteration() const { return iter_; }
  const MmaSettings& settings() const { return settings_; }
  std::span<const double> lower_asymptotes() const { return low_; }
  std::span<const double> upper_asymptotes() const { return upp_; }

  /// One design update. dfdx holds m rows of length n.
  std::vector<double> update(std::span<const double> x, double f0,
                             std::span<const double> df0dx,
                             std::span<const double> fval,
                             std::span<const std::vector<double>> dfdx,
                             std::span<const double> xmin,
                             std::span<const double> xmax);

  /// Box [0, 1] with a single constraint.
  std::vector<double> update(std::span<const double> x, double f0,
                             std::span<const double> df0dx, double g,
                             std::span<const double> dgdx);

 private:
  std::size_t n_;
  int m_;
  MmaSettings settings_;
  int iter_ = 0;
  std::vector<double> low_;
  std::vector<double> upp_;
  std::vector<double> xold1_;
  std::vector<double> xold2_;
};

}  // namespace lkstopo
