#pragma once

#include <span>
#include <vector>

#include "lkstopo/grid.hpp"

namespace lkstopo {

struct BrinkmanParams {
  double kappa_max = 1000.0;
  double q = 0.1;

  void validate() const;
  bool operator==(const BrinkmanParams&) const = default;
};

/// kappa_ref = kappa_max * q * gamma / ((1 - gamma) + q).
double brinkman(double gamma, const BrinkmanParams& params);
/// d kappa_ref / d gamma = kappa_max * q * (1 + q) / ((1 - gamma) + q)^2.
double brinkman_derivative(double gamma, const BrinkmanParams& params);

double heaviside_project(double x, double beta, double eta);
double heaviside_project_derivative(double x, double beta, double eta);

/// Conic-weight density filter, w = max(0, R - |xi_j - xi|), renormalized
/// per row so design-domain truncation keeps uniform fields uniform.
class DensityFilter {
 public:
  DensityFilter() = default;
  DensityFilter(const UniformGrid& grid, double radius);

  double radius() const { return radius_; }
  void apply(std::span<const double> in, std::span<double> out) const;
  void apply_transpose(std::span<const double> in, std::span<double> out) const;

 private:
  double radius_ = 0.0;
  std::vector<int> offsets_;
  std::vector<int> cols_;
  std::vector<double> weights_;  // row-normalized
};

struct FilterSettings {
  bool enabled = true;
  double radius = 2.4;  // in grid spacings

  bool operator==(const FilterSettings&) const = default;
};

struct ProjectionSettings {
  bool enabled = true;
  double beta = 1.0;
  double eta = 0.5;

  bool operator==(const ProjectionSettings&) const = default;
};

/// Pseudo-density on the design grid: raw design variables, the filtered
/// field and the projected (physical) field. The derived fields are refreshed
/// on every mutation.
class DesignField {
 public:
  DesignField(const UniformGrid& grid, FilterSettings filter,
              ProjectionSettings projection, double initial = 0.5);

  const UniformGrid& grid() const { return grid_; }
  std::size_t size() const { return raw_.size(); }

  void set_raw(std::span<const double> raw);
  void set_beta(double beta);
  double beta() const { return projection_.beta; }
  const ProjectionSettings& projection() const { return projection_; }
  const FilterSettings& filter() const { return filter_settings_; }

  std::span<const double> raw() const { return raw_; }
  std::span<const double> filtered() const { return filtered_; }
  std::span<const double> projected() const { return projected_; }

  /// Pulls a sensitivity with respect to the projected field back to the raw
  /// design variables.
  std::vector<double> chain_rule(std::span<const double> d_projected) const;

 private:
  void refresh();

  UniformGrid grid_;
  FilterSettings filter_settings_;
  ProjectionSettings projection_;
  DensityFilter filter_;
  std::vector<double> raw_;
  std::vector<double> filtered_;
  std::vector<double> projected_;
};

}  // namespace lkstopo
