#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "lkstopo/design_field.hpp"

using namespace lkstopo;

namespace {

std::vector<double> random_field(std::size_t n, unsigned seed, double lo = 0.0,
                                 double hi = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = U(rng);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Dense filter matrix built directly from the conic weights.
std::vector<std::vector<double>> dense_filter(int nx, int ny, double R) {
  const int n = nx * ny;
  std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = std::hypot(i % nx - j % nx, i / nx - j / nx);
      M[i][j] = std::max(0.0, R - d);
      sum += M[i][j];
    }
    for (int j = 0; j < n; ++j) M[i][j] /= sum;
  }
  return M;
}

}  // namespace

TEST_CASE("brinkman interpolation values") {
  const BrinkmanParams p{1000.0, 0.1};
  CHECK(brinkman(0.0, p) == 0.0);
  CHECK(brinkman(1.0, p) == doctest::Approx(1000.0));
  CHECK(brinkman(0.5, p) == doctest::Approx(1000.0 * 0.05 / 0.6));
  CHECK(brinkman_derivative(0.0, p) == doctest::Approx(1000.0 * 0.1 * 1.1 / 1.21));
  const double h = 1e-6;
  CHECK(brinkman_derivative(0.3, p) ==
        doctest::Approx((brinkman(0.3 + h, p) - brinkman(0.3 - h, p)) / (2 * h)).epsilon(1e-8));
  for (double g = 0.0; g <= 1.0; g += 0.05) CHECK(brinkman_derivative(g, p) > 0.0);
  CHECK_THROWS_AS(brinkman(1.1, p), std::domain_error);
  CHECK_THROWS_AS(brinkman(-0.01, p), std::domain_error);
  CHECK_NOTHROW(brinkman(1.0 + 1e-13, p));
}

TEST_CASE("brinkman is monotone") {
  const BrinkmanParams p{1000.0, 0.1};
  const auto a = random_field(500, 1);
  const auto b = random_field(500, 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) CHECK(brinkman(a[i], p) < brinkman(b[i], p));
    if (a[i] > b[i]) CHECK(brinkman(a[i], p) > brinkman(b[i], p));
  }
}

TEST_CASE("heaviside projection") {
  for (double beta : {1.0, 4.0, 64.0, 1024.0}) {
    CHECK(heaviside_project(0.5, beta, 0.5) == doctest::Approx(0.5));
    CHECK(heaviside_project(0.0, beta, 0.5) == doctest::Approx(0.0));
    CHECK(heaviside_project(1.0, beta, 0.5) == doctest::Approx(1.0));
    double prev = -1.0;
    for (double x = 0.0; x <= 1.0 + 1e-12; x += 0.01) {
      const double y = heaviside_project(x, beta, 0.5);
      CHECK(y >= prev);
      CHECK(y >= -1e-15);
      CHECK(y <= 1.0 + 1e-15);
      prev = y;
    }
  }
  CHECK(std::abs(heaviside_project(0.7, 512.0, 0.5) - 1.0) < 1e-9);
  // Small beta: close to the identity map.
  CHECK(heaviside_project_derivative(0.3, 1e-4, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
  const double h = 1e-6;
  CHECK(heaviside_project_derivative(0.37, 8.0, 0.5) ==
        doctest::Approx((heaviside_project(0.37 + h, 8.0, 0.5) -
                         heaviside_project(0.37 - h, 8.0, 0.5)) /
                        (2 * h))
            .epsilon(1e-8));
}

TEST_CASE("density filter") {
  const UniformGrid grid = UniformGrid::make(std::vector<int>{9, 8});
  const DensityFilter f(grid, 2.4);
  std::vector<double> out(grid.size());

  SUBCASE("uniform field is preserved") {
    std::vector<double> c(grid.size(), 0.37);
    f.apply(c, out);
    for (double v : out) CHECK(std::abs(v - 0.37) < 1e-15);
  }

  SUBCASE("interior spike spreads over 21 nodes") {
    std::vector<double> spike(grid.size(), 0.0);
    spike[grid.index({4, 4, 0})] = 1.0;
    f.apply(spike, out);
    int support = 0;
    for (double v : out) support += v > 0.0;
    CHECK(support == 21);
    std::vector<double> ones(grid.size(), 1.0), t(grid.size());
    f.apply_transpose(ones, t);
    CHECK(dot(out, ones) == doctest::Approx(t[grid.index({4, 4, 0})]));
  }

  SUBCASE("matches the dense matrix and its transpose") {
    const auto M = dense_filter(9, 8, 2.4);
    const auto x = random_field(grid.size(), 5);
    f.apply(x, out);
    std::vector<double> t(grid.size());
    f.apply_transpose(x, t);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double r = 0.0, rt = 0.0;
      for (std::size_t j = 0; j < grid.size(); ++j) {
        r += M[i][j] * x[j];
        rt += M[j][i] * x[j];
      }
      CHECK(std::abs(out[i] - r) < 1e-12);
      CHECK(std::abs(t[i] - rt) < 1e-12);
    }
  }

  SUBCASE("sub-spacing radius is the identity") {
    const DensityFilter id(grid, 0.9);
    const auto x = random_field(grid.size(), 6);
    id.apply(x, out);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(out[i] == x[i]);
  }
}

TEST_CASE("chain rule against finite differences") {
  const UniformGrid grid = UniformGrid::make(std::vector<int>{6, 6});
  DesignField field(grid, {true, 2.4}, {true, 4.0, 0.5});
  auto raw = random_field(grid.size(), 9, 0.2, 0.8);
  field.set_raw(raw);
  const auto weights = random_field(grid.size(), 10, -1.0, 1.0);
  auto J = [&](const std::vector<double>& r) {
    DesignField g(grid, {true, 2.4}, {true, 4.0, 0.5});
    g.set_raw(r);
    double s = 0.0;
    const auto p = g.projected();
    for (std::size_t i = 0; i < p.size(); ++i) s += weights[i] * p[i] * p[i];
    return s;
  };
  std::vector<double> dJdp(grid.size());
  const auto p = field.projected();
  for (std::size_t i = 0; i < p.size(); ++i) dJdp[i] = 2.0 * weights[i] * p[i];
  const auto grad = field.chain_rule(dJdp);
  const double h = 1e-6;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto rp = raw, rm = raw;
    rp[i] += h;
    rm[i] -= h;
    const double fd = (J(rp) - J(rm)) / (2 * h);
    CHECK(std::abs(grad[i] - fd) <= 1e-5 * std::max(1e-3, std::abs(fd)));
  }
  const auto zero = field.chain_rule(std::vector<double>(grid.size(), 0.0));
  for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("chain rule is the transpose of the linearized map") {
  const UniformGrid grid = UniformGrid::make(std::vector<int>{10, 10});
  DesignField field(grid, {true, 2.4}, {true, 8.0, 0.5});
  field.set_raw(random_field(grid.size(), 12));
  const auto M = dense_filter(10, 10, 2.4);
  const auto filtered = field.filtered();
  const auto v = random_field(grid.size(), 13, -1.0, 1.0);
  const auto got = field.chain_rule(v);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      s += M[i][j] * heaviside_project_derivative(filtered[i], 8.0, 0.5) * v[i];
    }
    CHECK(std::abs(got[j] - s) < 1e-12);
  }
}

TEST_CASE("design field defaults and validation") {
  const UniformGrid grid = UniformGrid::make(std::vector<int>{5, 5});
  DesignField field(grid, {}, {});
  for (double v : field.projected()) CHECK(v == doctest::Approx(0.5));
  CHECK_THROWS_AS(field.set_raw(std::vector<double>(3, 0.5)), std::invalid_argument);
  CHECK_THROWS_AS(field.set_raw(std::vector<double>(25, 1.5)), std::domain_error);
  CHECK_THROWS_AS(DesignField(grid, {}, {true, 0.0, 0.5}), std::invalid_argument);
  field.set_beta(16.0);
  CHECK(field.beta() == 16.0);
}
