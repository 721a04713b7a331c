#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lkstopo/forward.hpp"

namespace lkstopo {

struct VerificationSample {
  double coordinate = 0.0;
  double computed = 0.0;
  double reference = 0.0;
};

struct VerificationReport {
  std::string scenario;
  std::vector<VerificationSample> samples;
  std::map<std::string, double> metrics;
  std::map<std::string, double> thresholds;
  std::vector<std::string> notes;
  bool pass = false;

  /// key = value lines, sorted by key.
  std::string to_text() const;
  /// coordinate,computed,reference rows with header.
  std::string to_csv() const;
};

struct ErrorNorms {
  double l2_relative = 0.0;   // ||c - r|| / ||r||
  double max_relative = 0.0;  // max |c - r| / |r| (samples with r != 0)
  double cosine = 0.0;        // <c, r> / (||c|| ||r||)
};
ErrorNorms compare(const std::vector<double>& computed, const std::vector<double>& reference);

struct TaylorCouetteOptions {
  double scale = 1.0;
  double revolution = 5600.0;  // steps per inner revolution at full scale; sets u_d
  double A = 0.25;
  double kappa_max = 1000.0;
  double q = 0.1;
  double margin = 4.0;          // gap margin in full-scale grid spacings
  double steady_tol = 1e-8;     // max |u(t) - u(t - one revolution)|
  int max_steps = 200000;
  double threshold = 0.05;      // max relative error allowed
};

/// Azimuthal Couette profile between a rotating inner and a fixed outer
/// cylinder: u(r1) = u_d, u(r2) = 0.
double couette_profile(double r, double r1, double r2, double u_d);

/// Inner disc rotating at u_d / r1 (u_d = 2 pi r1 / revolution) inside a fixed outer annulus, both
/// represented as penalized bodies; |u| along the horizontal midline of the
/// gap is compared with the analytic profile once the flow is steady.
VerificationReport taylor_couette(const TaylorCouetteOptions& options);

struct SensitivityOptions {
  double scale = 0.5;
  double fd_step = 1e-3;
  double semi_major = 30.0;  // full-scale grid spacings
  double semi_minor = 15.0;
  double gamma_in = 0.9;
  double gamma_out = 0.1;
  double A = 0.25;
  double kappa_max = 1000.0;
  double q = 0.1;
  int probe_stride = 1;  // every k-th node of the midline
  double cosine_threshold = 0.99;
  double l2_threshold = 0.05;
  std::function<void(int, int)> progress;  // (done, total) probes
};

/// Adjoint sensitivity of the wall-pressure objective for a rotating
/// elliptical body compared with central finite differences along the design
/// midline, including a step-halving check of the finite differences.
VerificationReport sensitivity_fda(const SensitivityOptions& options);

}  // namespace lkstopo
