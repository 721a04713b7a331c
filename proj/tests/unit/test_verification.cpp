#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lkstopo/verification.hpp"

using namespace lkstopo;

TEST_CASE("error norms") {
  const std::vector<double> r{1.0, -2.0, 2.0};
  const ErrorNorms same = compare(r, r);
  CHECK(same.l2_relative == 0.0);
  CHECK(same.max_relative == 0.0);
  CHECK(same.cosine == doctest::Approx(1.0));

  const std::vector<double> c{1.1, -2.0, 2.0};
  const ErrorNorms e = compare(c, r);
  CHECK(e.l2_relative == doctest::Approx(0.1 / 3.0));
  CHECK(e.max_relative == doctest::Approx(0.1));

  const std::vector<double> flipped{-1.0, 2.0, -2.0};
  CHECK(compare(flipped, r).cosine == doctest::Approx(-1.0));
  const std::vector<double> scaled{2.0, -4.0, 4.0};
  CHECK(compare(scaled, r).cosine == doctest::Approx(1.0));
  CHECK(compare(scaled, r).l2_relative == doctest::Approx(1.0));

  CHECK_THROWS(compare({1.0}, r));
  CHECK_THROWS(compare({}, {}));
}

TEST_CASE("couette profile meets both walls and the radial equation") {
  const double r1 = 45.0, r2 = 70.0, ud = 0.05;
  CHECK(couette_profile(r1, r1, r2, ud) == doctest::Approx(ud));
  CHECK(couette_profile(r2, r1, r2, ud) == doctest::Approx(0.0).epsilon(1e-15));
  // u'' + u'/r - u/r^2 = 0.
  const double h = 1e-3;
  for (double r : {47.0, 55.5, 68.0}) {
    const double u = couette_profile(r, r1, r2, ud);
    const double up = couette_profile(r + h, r1, r2, ud);
    const double um = couette_profile(r - h, r1, r2, ud);
    const double res = (up - 2 * u + um) / (h * h) + (up - um) / (2 * h * r) - u / (r * r);
    CHECK(std::abs(res) < 1e-7);
  }
}

TEST_CASE("coarse annulus runs to a steady profile") {
  TaylorCouetteOptions o;
  o.scale = 0.2;
  o.steady_tol = 1e-7;
  const VerificationReport rep = taylor_couette(o);
  CHECK(rep.scenario == "taylor-couette");
  CHECK(rep.metrics.at("steady_change") < o.steady_tol);
  CHECK(rep.metrics.at("samples") == static_cast<double>(rep.samples.size()));
  REQUIRE(rep.samples.size() >= 3);
  CHECK(rep.metrics.at("wall_speed") ==
        doctest::Approx(2 * std::numbers::pi * 9.0 / (o.revolution * o.scale)));
  // No faster than rigid rotation with the disc.
  const double omega = rep.metrics.at("wall_speed") / 9.0;
  for (const auto& s : rep.samples) {
    CHECK(s.computed >= 0.0);
    CHECK(s.computed <= omega * s.coordinate * (1.0 + 1e-3));
  }
  // Speed falls off towards the outer wall.
  CHECK(rep.samples.front().computed > rep.samples.back().computed);
  CHECK(rep.pass == (rep.metrics.at("max_relative_error") < o.threshold));
  const std::string text = rep.to_text();
  CHECK(text.find("scenario = taylor-couette\n") == 0);
  CHECK(text.find("threshold.max_relative_error = 0.05\n") != std::string::npos);
  CHECK(rep.to_csv().find("coordinate,computed,reference\n") == 0);
}

TEST_CASE("step budget exhaustion is reported") {
  TaylorCouetteOptions o;
  o.scale = 0.2;
  o.max_steps = 100;
  const VerificationReport rep = taylor_couette(o);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.notes.size() == 1);
  CHECK(rep.notes[0].find("budget") != std::string::npos);
}

TEST_CASE("coarse sensitivity comparison") {
  SensitivityOptions o;
  o.scale = 0.2;
  o.probe_stride = 3;
  int last = 0;
  o.progress = [&](int done, int) { last = done; };
  const VerificationReport rep = sensitivity_fda(o);
  CHECK(last == static_cast<int>(rep.samples.size()));
  CHECK(rep.metrics.at("cosine") > 0.999);
  CHECK(rep.metrics.at("l2_relative_error") < 0.01);
  CHECK(rep.pass);
}

TEST_CASE("invalid options") {
  TaylorCouetteOptions t;
  t.scale = 0.0;
  CHECK_THROWS(taylor_couette(t));
  SensitivityOptions s;
  s.fd_step = -1.0;
  CHECK_THROWS(sensitivity_fda(s));
}
