#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "lkstopo/overlap.hpp"

using namespace lkstopo;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = U(rng);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

MotionSpec moving_2d() {
  MotionSpec m;
  m.dim = 2;
  m.pivot = {4.5, 3.5, 0};
  m.rotation = RotationLaw::with_period(400.0, 0.3);
  m.translation.offset = {12.2, 11.7, 0};
  m.translation.amplitude = {0.8, -1.3, 0};
  m.translation.period = 90.0;
  return m;
}

}  // namespace

TEST_CASE("kernel values") {
  CHECK(kernel_w(0.0, 1.0) == doctest::Approx(0.5));
  CHECK(kernel_w(0.0, 2.0) == doctest::Approx(0.25));
  CHECK(std::abs(kernel_w(2.0, 1.0)) < 1e-16);
  CHECK(std::abs(kernel_w(-2.0, 1.0)) < 1e-16);
  CHECK(kernel_w(2.5, 1.0) == 0.0);
  CHECK(kernel_w(0.7, 1.0) == doctest::Approx(kernel_w(-0.7, 1.0)));
  // The printed variant vanishes at the centre and so cannot interpolate.
  CHECK(kernel_w(0.0, 1.0, KernelForm::AsPrinted) == 0.0);
}

TEST_CASE("kernel first moment bound") {
  double worst = 0.0;
  for (double s = 0.0; s < 1.0; s += 1.0 / 512.0) {
    double m1 = 0.0;
    for (int k = -4; k <= 4; ++k) m1 += (k + s) * kernel_w(k + s, 1.0);
    worst = std::max(worst, std::abs(m1));
  }
  CHECK(worst > 0.02);
  CHECK(worst < 0.0212);
}

TEST_CASE("kernel partition of unity over a shift sweep") {
  for (double s = 0.0; s < 1.0; s += 1.0 / 64.0) {
    double sum = 0.0;
    double printed = 0.0;
    for (int k = -4; k <= 4; ++k) {
      sum += kernel_w(k + s, 1.0);
      printed += kernel_w(k + s, 1.0, KernelForm::AsPrinted);
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    if (s == 0.0) CHECK(std::abs(printed - 1.0) > 0.1);
  }
}

TEST_CASE("placement weights sum to one per axis") {
  const UniformGrid a = UniformGrid::make(std::vector<int>{24, 24});
  const UniformGrid d = UniformGrid::make(std::vector<int>{9, 7});
  const OverlapMap map(a, {false, false, false}, d);
  Placement p;
  map.place(moving_2d(), 37.0, p);
  for (std::size_t k = 0; k < d.size(); ++k) {
    for (int ax = 0; ax < 2; ++ax) {
      double s = 0.0;
      for (int m = 0; m < 4; ++m) s += p.weights[k][ax * 4 + m];
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
  CHECK(p.clipped == 0);
}

TEST_CASE("single design node scattered onto an analysis node") {
  for (int dim : {2, 3}) {
    const std::vector<int> ext(dim, 10);
    const UniformGrid a = UniformGrid::make(ext);
    const UniformGrid d = UniformGrid::make(std::vector<int>(dim, 1));
    const OverlapMap map(a, {false, false, false}, d);
    const MotionSpec m = MotionSpec::stationary(dim, {0, 0, 0}, {5, 5, dim == 3 ? 5.0 : 0.0});
    const std::vector<double> v{1000.0};
    const auto out = map.map_to_analysis(v, m, 0.0);
    const Index3 c{5, 5, dim == 3 ? 5 : 0};
    CHECK(out[a.index(c)] == doctest::Approx(1000.0 / std::pow(2.0, dim)));
    double sum = 0.0;
    for (double x : out) sum += x;
    CHECK(sum == doctest::Approx(1000.0).epsilon(1e-12));
  }
}

TEST_CASE("uniform block reproduces the constant in the interior") {
  const UniformGrid a = UniformGrid::make(std::vector<int>{40, 40});
  const UniformGrid d = UniformGrid::make(std::vector<int>{20, 20});
  const OverlapMap map(a, {false, false, false}, d);
  MotionSpec m = MotionSpec::stationary(2, {10, 10, 0}, {20.3, 19.6, 0});
  m.rotation.phase = 0.0;
  const std::vector<double> v(d.size(), 2.5);
  const auto out = map.map_to_analysis(v, m, 0.0);
  for (int y = 15; y <= 24; ++y)
    for (int x = 15; x <= 24; ++x) CHECK(std::abs(out[a.index({x, y, 0})] - 2.5) < 1e-10);

  // Support of the moved domain dilated by the kernel radius.
  for (std::size_t n = 0; n < a.size(); ++n) {
    const Index3 c = a.coords(n);
    const bool outside = c[0] < 20.3 - 10 - 2 || c[0] > 20.3 + 9 + 2 || c[1] < 19.6 - 10 - 2 ||
                         c[1] > 19.6 + 9 + 2;
    if (outside) CHECK(out[n] == 0.0);
  }
}

TEST_CASE("gather of constant and linear fields") {
  const UniformGrid a = UniformGrid::make(std::vector<int>{30, 30});
  const UniformGrid d = UniformGrid::make(std::vector<int>{9, 7});
  const OverlapMap map(a, {false, false, false}, d);
  const MotionSpec m = moving_2d();
  const double t = 51.0;
  std::vector<double> c(a.size(), 0.8), lin(a.size());
  const double slope = 0.3;
  for (std::size_t n = 0; n < a.size(); ++n) lin[n] = slope * a.coords(n)[0];
  const auto gc = map.map_to_design(c, m, t);
  const auto gl = map.map_to_design(lin, m, t);
  for (std::size_t k = 0; k < d.size(); ++k) {
    CHECK(std::abs(gc[k] - 0.8) < 1e-12);
    const Vec3 x = body_position(d.position(d.coords(k)), t, m);
    double dense = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
      const Vec3 y = a.position(a.coords(n));
      dense += kernel_w(y[0] - x[0], 1.0) * kernel_w(y[1] - x[1], 1.0) * lin[n];
    }
    CHECK(std::abs(gl[k] - dense) < 1e-12);
    // The cosine kernel's first moment is not exactly zero: at most 0.0211 dx.
    CHECK(std::abs(gl[k] - slope * x[0]) < 0.022 * slope);
  }
  const auto gz = map.map_to_design(std::vector<double>(a.size(), 0.0), m, t);
  for (double v : gz) CHECK(v == 0.0);
}

TEST_CASE("scatter and gather are mutual transposes") {
  for (bool periodic : {false, true}) {
    for (int dim : {2, 3}) {
      const UniformGrid a = UniformGrid::make(std::vector<int>(dim, dim == 2 ? 20 : 12));
      const UniformGrid d = UniformGrid::make(std::vector<int>(dim, dim == 2 ? 8 : 5));
      const OverlapMap map(a, {periodic, periodic, periodic}, d);
      MotionSpec m;
      m.dim = dim;
      m.axis = 1;
      m.pivot = {2, 2, 2};
      m.rotation = RotationLaw::with_period(100.0, 0.1);
      m.translation.offset = {dim == 2 ? 10.3 : 6.2, 6.6, 5.9};
      // Periodic runs place the body across the seam.
      if (periodic) m.translation.offset[0] = 0.7;
      const auto va = random_vector(d.size(), 1 + dim);
      const auto fb = random_vector(a.size(), 7 + dim);
      for (double t : {0.0, 13.0, 61.0}) {
        const auto sa = map.map_to_analysis(va, m, t);
        const auto gb = map.map_to_design(fb, m, t);
        CHECK(std::abs(dot(sa, fb) - dot(va, gb)) < 1e-12 * std::max(1.0, std::abs(dot(sa, fb))));
        if (periodic) {
          double s0 = 0.0, s1 = 0.0;
          for (double x : va) s0 += x;
          for (double x : sa) s1 += x;
          CHECK(std::abs(s0 - s1) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("mass transfer is conserved for interior supports") {
  const UniformGrid a = UniformGrid::make(std::vector<int>{30, 30});
  const UniformGrid d = UniformGrid::make(std::vector<int>{9, 7});
  const OverlapMap map(a, {false, false, false}, d);
  const auto v = random_vector(d.size(), 4);
  const auto out = map.map_to_analysis(v, moving_2d(), 20.0);
  double s0 = 0.0, s1 = 0.0;
  for (double x : v) s0 += x;
  for (double x : out) s1 += x;
  CHECK(std::abs(s0 - s1) < 1e-10);
}

TEST_CASE("map then unmap converges under refinement") {
  // Smooth field sampled on the design grid, scattered and gathered back.
  auto error_at = [](int n) {
    const double h = 1.0 / n;
    const UniformGrid a = UniformGrid::make(std::vector<int>{3 * n, 3 * n}, h);
    const UniformGrid d = UniformGrid::make(std::vector<int>{n, n}, h);
    const OverlapMap map(a, {false, false, false}, d);
    const MotionSpec m = MotionSpec::stationary(2, {0.5, 0.5, 0}, {1.5 + 0.3 * h, 1.5 - 0.2 * h, 0});
    std::vector<double> v(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
      const Vec3 x = d.position(d.coords(k));
      v[k] = std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]);
    }
    const auto back = map.map_to_design(map.map_to_analysis(v, m, 0.0), m, 0.0);
    double err = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      const Index3 c = d.coords(k);
      if (c[0] < n / 4 || c[0] > 3 * n / 4 || c[1] < n / 4 || c[1] > 3 * n / 4) continue;
      err = std::max(err, std::abs(back[k] - v[k]));
    }
    return err;
  };
  const double e1 = error_at(16);
  const double e2 = error_at(32);
  CHECK(e2 < e1);
  CHECK(e2 < 0.5 * e1);
}

TEST_CASE("clipping is reported near the grid edge") {
  const UniformGrid a = UniformGrid::make(std::vector<int>{12, 12});
  const UniformGrid d = UniformGrid::make(std::vector<int>{4, 4});
  const OverlapMap map(a, {false, false, false}, d);
  Placement p;
  map.place(MotionSpec::stationary(2, {0, 0, 0}, {0.5, 4, 0}), 0.0, p);
  CHECK(p.clipped > 0);
}
