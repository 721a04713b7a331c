#include "lkstopo/design_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lkstopo {

namespace {

constexpr double kGammaSlack = 1e-12;

void check_gamma(double gamma) {
  if (!(gamma >= -kGammaSlack && gamma <= 1.0 + kGammaSlack)) {
    throw std::domain_error("pseudo-density " + std::to_string(gamma) +
                            " outside [0, 1]");
  }
}

}  // namespace

void BrinkmanParams::validate() const {
  if (!(kappa_max >= 0.0)) throw std::invalid_argument("kappa_max must be >= 0");
  if (!(q > 0.0)) throw std::invalid_argument("Brinkman q must be > 0");
}

double brinkman(double gamma, const BrinkmanParams& p) {
  check_gamma(gamma);
  return p.kappa_max * p.q * gamma / ((1.0 - gamma) + p.q);
}

double brinkman_derivative(double gamma, const BrinkmanParams& p) {
  check_gamma(gamma);
  const double den = (1.0 - gamma) + p.q;
  return p.kappa_max * p.q * (1.0 + p.q) / (den * den);
}

double heaviside_project(double x, double beta, double eta) {
  const double num = std::tanh(beta * eta) + std::tanh(beta * (x - eta));
  const double den = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
  return num / den;
}

double heaviside_project_derivative(double x, double beta, double eta) {
  const double th = std::tanh(beta * (x - eta));
  const double den = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
  return beta * (1.0 - th * th) / den;
}

DensityFilter::DensityFilter(const UniformGrid& grid, double radius)
    : radius_(radius) {
  if (radius <= 0.0) throw std::invalid_argument("filter radius must be > 0");
  const int reach = static_cast<int>(std::ceil(radius));
  const std::size_t n = grid.size();
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Index3 ci = grid.coords(i);
    const std::size_t row_begin = cols_.size();
    double sum = 0.0;
    Index3 lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = a < grid.dim ? std::max(0, ci[a] - reach) : 0;
      hi[a] = a < grid.dim ? std::min(grid.extents[a] - 1, ci[a] + reach) : 0;
    }
    for (int z = lo[2]; z <= hi[2]; ++z) {
      for (int y = lo[1]; y <= hi[1]; ++y) {
        for (int x = lo[0]; x <= hi[0]; ++x) {
          const double dxn = x - ci[0], dyn = y - ci[1], dzn = z - ci[2];
          const double dist = std::sqrt(dxn * dxn + dyn * dyn + dzn * dzn);
          const double w = radius - dist;
          if (w <= 0.0) continue;
          cols_.push_back(static_cast<int>(grid.index({x, y, z})));
          weights_.push_back(w);
          sum += w;
        }
      }
    }
    for (std::size_t k = row_begin; k < weights_.size(); ++k) weights_[k] /= sum;
    offsets_[i + 1] = static_cast<int>(cols_.size());
  }
}

void DensityFilter::apply(std::span<const double> in, std::span<double> out) const {
  const std::size_t n = offsets_.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) s += weights_[k] * in[cols_[k]];
    out[i] = s;
  }
}

void DensityFilter::apply_transpose(std::span<const double> in,
                                    std::span<double> out) const {
  const std::size_t n = offsets_.size() - 1;
  std::fill(out.begin(), out.begin() + n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      out[cols_[k]] += weights_[k] * in[i];
    }
  }
}

DesignField::DesignField(const UniformGrid& grid, FilterSettings filter,
                         ProjectionSettings projection, double initial)
    : grid_(grid),
      filter_settings_(filter),
      projection_(projection),
      raw_(grid.size(), initial),
      filtered_(grid.size()),
      projected_(grid.size()) {
  if (projection_.enabled && projection_.beta <= 0.0) {
    throw std::invalid_argument("projection beta must be > 0");
  }
  if (filter_settings_.enabled) {
    filter_ = DensityFilter(grid, filter_settings_.radius);
  }
  refresh();
}

void DesignField::set_raw(std::span<const double> raw) {
  if (raw.size() != raw_.size()) throw std::invalid_argument("design size mismatch");
  for (double g : raw) check_gamma(g);
  std::copy(raw.begin(), raw.end(), raw_.begin());
  refresh();
}

void DesignField::set_beta(double beta) {
  projection_.beta = beta;
  refresh();
}

void DesignField::refresh() {
  if (filter_settings_.enabled) {
    filter_.apply(raw_, filtered_);
  } else {
    filtered_ = raw_;
  }
  for (std::size_t i = 0; i < raw_.size(); ++i) {
    double g = projection_.enabled
                   ? heaviside_project(filtered_[i], projection_.beta, projection_.eta)
                   : filtered_[i];
    projected_[i] = std::clamp(g, 0.0, 1.0);
  }
}

std::vector<double> DesignField::chain_rule(std::span<const double> d_projected) const {
  std::vector<double> d_filtered(raw_.size());
  for (std::size_t i = 0; i < raw_.size(); ++i) {
    d_filtered[i] = projection_.enabled
                        ? d_projected[i] * heaviside_project_derivative(
                                               filtered_[i], projection_.beta,
                                               projection_.eta)
                        : d_projected[i];
  }
  if (!filter_settings_.enabled) return d_filtered;
  std::vector<double> d_raw(raw_.size());
  filter_.apply_transpose(d_filtered, d_raw);
  return d_raw;
}

}  // namespace lkstopo
