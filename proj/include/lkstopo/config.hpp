#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lkstopo/boundary.hpp"
#include "lkstopo/design_field.hpp"
#include "lkstopo/forward.hpp"
#include "lkstopo/grid.hpp"
#include "lkstopo/motion.hpp"
#include "lkstopo/objectives.hpp"
#include "lkstopo/overlap.hpp"

namespace lkstopo {

/// Parse or validation failure. line() is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

/// Geometric primitive used to paint pseudo-density fields. Coordinates are
/// in the owning grid's units.
struct ShapeSpec {
  enum class Type { Box, Ellipse, Annulus };
  Type type = Type::Box;
  Vec3 lo{};       // Box corners, inclusive
  Vec3 hi{};
  Vec3 center{};   // Ellipse / Annulus
  Vec3 radii{};    // Ellipse semi-axes
  double r_inner = 0.0;  // Annulus, in the plane normal to z
  double r_outer = 0.0;
  double value = 1.0;

  bool contains(const Vec3& x, int dim) const;
  bool operator==(const ShapeSpec&) const = default;
};

/// background everywhere, then each shape paints `value` on the nodes whose
/// centres it contains (later shapes win).
struct FieldSpec {
  double background = 0.5;
  std::vector<ShapeSpec> shapes;

  std::vector<double> rasterize(const UniformGrid& grid) const;
  bool operator==(const FieldSpec&) const = default;
};

struct ConstraintSpec {
  double v_max = 0.25;
  /// (optimization step, V_max) pairs; the last entry with step <= k applies.
  std::vector<std::pair<int, double>> schedule;

  double at(int step) const;
  void validate() const;
  bool operator==(const ConstraintSpec&) const = default;
};

struct ContinuationSettings {
  double beta_max = 1024.0;
  int hold = 0;     // steps at the initial beta before doubling may start
  int every = 80;   // doubling cadence after the hold
  double fluctuation_tol = 1e-4;
  int fluctuation_window = 5;

  bool operator==(const ContinuationSettings&) const = default;
};

enum class RestartPolicy { Cold, Warm };

struct RunSettings {
  int steps = 0;          // forward steps per evaluation
  double period = 0.0;    // motion period (time units), informational
  RestartPolicy restart = RestartPolicy::Cold;
  HistoryOptions history;
  int warmup_periods = 2;  // cold-start periods before a measured period

  bool operator==(const RunSettings&) const = default;
};

struct OptimizationSettings {
  int max_steps = 200;
  double tolerance = 1e-6;
  double feasibility_tol = 1e-6;
  double objective_scale = 1.0;  // target max |dJ| after normalization
  double move = 0.2;
  std::uint64_t seed = 0;

  bool operator==(const OptimizationSettings&) const = default;
};

struct OutputSettings {
  int design_stride = 0;  // gamma VTK every k optimization steps (0: final only)
  int flow_stride = 0;    // flow VTK every k forward steps in `simulate`

  bool operator==(const OutputSettings&) const = default;
};

struct CaseConfig {
  int version = 1;
  std::string name;
  std::string description;

  UniformGrid analysis;
  double A = 0.25;
  BrinkmanParams brinkman;
  KernelForm kernel = KernelForm::Standard;
  BoundarySpec boundary;
  std::vector<ShapeSpec> solid;  // analysis-side fixed solid (kappa_max)

  UniformGrid design;
  MotionSpec motion;
  FieldSpec initial;
  std::optional<FieldSpec> reference;

  FilterSettings filter;
  ProjectionSettings projection;
  ContinuationSettings continuation;

  ObjectiveSpec objective;
  ConstraintSpec constraint;
  RunSettings run;
  OptimizationSettings optimization;
  OutputSettings output;

  void validate() const;
  FlowSetup flow_setup() const;

  bool operator==(const CaseConfig&) const = default;
};

CaseConfig parse_config(std::string_view text);
CaseConfig load_config(const std::filesystem::path& path);
/// Fully resolved configuration text; parse_config(describe(c)) == c.
std::string describe(const CaseConfig& config);

/// Resolves a case name ("rotor2d") or path to a config file.
std::filesystem::path find_case(std::string_view name_or_path);

std::string_view to_string(KernelForm form);
std::string_view to_string(RestartPolicy policy);

}  // namespace lkstopo
