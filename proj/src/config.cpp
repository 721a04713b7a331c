#include "lkstopo/config.hpp"

#include "lkstopo/output.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#ifndef LKSTOPO_CASES_DIR
#define LKSTOPO_CASES_DIR "cases"
#endif

namespace lkstopo {

namespace {

constexpr int kSchemaVersion = 1;

int line_of(const YAML::Node& n) {
  const auto m = n.Mark();
  return m.line >= 0 ? m.line + 1 : 0;
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) {
  throw ConfigError(msg, line_of(n));
}

// A mapping whose keys are consumed one by one; leftovers are errors.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) fail(node_, "'" + path_ + "' must be a mapping");
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  YAML::Node get(const std::string& key) {
    used_.insert(key);
    return node_[key];
  }

  YAML::Node require(const std::string& key) {
    used_.insert(key);
    YAML::Node n = node_[key];
    if (!n) fail(node_, "missing required field '" + child(key) + "'");
    return n;
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      if (!used_.count(key)) fail(it->first, "unknown key '" + child(key) + "'");
    }
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

double as_double(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    fail(n, "'" + path + "' must be a number");
  }
}

int as_int(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<int>();
  } catch (const YAML::Exception&) {
    fail(n, "'" + path + "' must be an integer");
  }
}

bool as_bool(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    fail(n, "'" + path + "' must be true or false");
  }
}

std::string as_string(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(n, "'" + path + "' must be a string");
  return n.as<std::string>();
}

Vec3 as_vec(const YAML::Node& n, int dim, const std::string& path) {
  if (!n.IsSequence() || static_cast<int>(n.size()) != dim) {
    fail(n, "'" + path + "' must be a list of " + std::to_string(dim) + " numbers");
  }
  Vec3 v{};
  for (int a = 0; a < dim; ++a) v[a] = as_double(n[a], path);
  return v;
}

Index3 as_index(const YAML::Node& n, int dim, const std::string& path) {
  if (!n.IsSequence() || static_cast<int>(n.size()) != dim) {
    fail(n, "'" + path + "' must be a list of " + std::to_string(dim) + " integers");
  }
  Index3 v{0, 0, 0};
  for (int a = 0; a < dim; ++a) v[a] = as_int(n[a], path);
  return v;
}

int as_axis(const YAML::Node& n, int dim, const std::string& path) {
  const std::string s = as_string(n, path);
  int a = -1;
  if (s == "x") a = 0;
  if (s == "y") a = 1;
  if (s == "z") a = 2;
  if (a < 0 || (a >= dim && !(dim == 2 && a == 2))) fail(n, "'" + path + "' must be x, y or z");
  return a;
}

UniformGrid parse_grid(Section& s, int dim, double dx) {
  const std::string path = s.child("extents");
  const YAML::Node ext = s.require("extents");
  if (!ext.IsSequence() || static_cast<int>(ext.size()) != dim) {
    fail(ext, "'" + path + "' must list " + std::to_string(dim) + " node counts");
  }
  std::vector<int> e;
  for (const auto& v : ext) {
    const int k = as_int(v, path);
    if (k < 1) fail(v, "'" + path + "' entries must be >= 1");
    e.push_back(k);
  }
  UniformGrid g = UniformGrid::make(e, dx);
  if (s.has("origin")) g.origin = as_vec(s.get("origin"), dim, s.child("origin"));
  return g;
}

ShapeSpec parse_shape(const YAML::Node& n, int dim, const std::string& path) {
  Section s(n, path);
  ShapeSpec sh;
  const std::string type = as_string(s.require("type"), s.child("type"));
  if (type == "box") {
    sh.type = ShapeSpec::Type::Box;
    sh.lo = as_vec(s.require("lo"), dim, s.child("lo"));
    sh.hi = as_vec(s.require("hi"), dim, s.child("hi"));
  } else if (type == "ellipse") {
    sh.type = ShapeSpec::Type::Ellipse;
    sh.center = as_vec(s.require("center"), dim, s.child("center"));
    sh.radii = as_vec(s.require("radii"), dim, s.child("radii"));
  } else if (type == "annulus") {
    sh.type = ShapeSpec::Type::Annulus;
    sh.center = as_vec(s.require("center"), dim, s.child("center"));
    sh.r_inner = as_double(s.require("r_inner"), s.child("r_inner"));
    sh.r_outer = as_double(s.require("r_outer"), s.child("r_outer"));
  } else {
    fail(n, "unknown shape type '" + type + "' in '" + path + "'");
  }
  if (s.has("value")) sh.value = as_double(s.get("value"), s.child("value"));
  if (sh.value < 0.0 || sh.value > 1.0) fail(n, "'" + s.child("value") + "' must lie in [0, 1]");
  s.finish();
  return sh;
}

std::vector<ShapeSpec> parse_shapes(const YAML::Node& n, int dim, const std::string& path) {
  if (!n.IsSequence()) fail(n, "'" + path + "' must be a list of shapes");
  std::vector<ShapeSpec> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    out.push_back(parse_shape(n[i], dim, path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

FieldSpec parse_field(const YAML::Node& n, int dim, const std::string& path) {
  FieldSpec f;
  if (n.IsScalar()) {
    f.background = as_double(n, path);
  } else {
    Section s(n, path);
    if (s.has("background")) f.background = as_double(s.get("background"), s.child("background"));
    if (s.has("shapes")) f.shapes = parse_shapes(s.get("shapes"), dim, s.child("shapes"));
    s.finish();
  }
  if (f.background < 0.0 || f.background > 1.0) fail(n, "'" + path + "' background must lie in [0, 1]");
  return f;
}

MotionSpec parse_motion(const YAML::Node& n, int dim) {
  Section s(n, "design.motion");
  MotionSpec m;
  m.dim = dim;
  if (s.has("pivot")) m.pivot = as_vec(s.get("pivot"), dim, s.child("pivot"));
  if (s.has("position")) m.translation.offset = as_vec(s.get("position"), dim, s.child("position"));
  if (s.has("axis")) m.axis = as_axis(s.get("axis"), dim, s.child("axis"));
  if (dim == 2 && m.axis != 2) fail(s.get("axis"), "2D rotation must be about z");
  if (s.has("rotation")) {
    Section r(s.get("rotation"), s.child("rotation"));
    if (r.has("period") && r.has("rate")) fail(r.node(), "give either rotation.period or rotation.rate");
    double phase = 0.0;
    if (r.has("phase")) phase = as_double(r.get("phase"), r.child("phase"));
    if (r.has("period")) {
      const double p = as_double(r.get("period"), r.child("period"));
      if (!(p > 0.0)) fail(r.node(), "'" + r.child("period") + "' must be positive");
      m.rotation = RotationLaw::with_period(p, phase);
    } else {
      m.rotation.phase = phase;
      if (r.has("rate")) m.rotation.rate = as_double(r.get("rate"), r.child("rate"));
    }
    r.finish();
  }
  if (s.has("oscillation")) {
    Section o(s.get("oscillation"), s.child("oscillation"));
    m.translation.amplitude = as_vec(o.require("amplitude"), dim, o.child("amplitude"));
    m.translation.period = as_double(o.require("period"), o.child("period"));
    if (!(m.translation.period > 0.0)) fail(o.node(), "'" + o.child("period") + "' must be positive");
    if (o.has("phase")) m.translation.phase = as_double(o.get("phase"), o.child("phase"));
    o.finish();
  }
  if (s.has("velocity")) m.translation.velocity = as_vec(s.get("velocity"), dim, s.child("velocity"));
  s.finish();
  return m;
}

FaceCondition parse_face(const YAML::Node& n, int dim, const std::string& path) {
  FaceCondition fc;
  if (n.IsScalar()) {
    try {
      fc.type = boundary_type_from_string(n.as<std::string>());
    } catch (const std::invalid_argument& e) {
      fail(n, std::string(e.what()) + " in '" + path + "'");
    }
    return fc;
  }
  Section s(n, path);
  try {
    fc.type = boundary_type_from_string(as_string(s.require("type"), s.child("type")));
  } catch (const std::invalid_argument& e) {
    fail(n, std::string(e.what()) + " in '" + path + "'");
  }
  if (s.has("velocity")) fc.velocity = as_vec(s.get("velocity"), dim, s.child("velocity"));
  if (s.has("density")) fc.density = as_double(s.get("density"), s.child("density"));
  s.finish();
  return fc;
}

BoundarySpec parse_boundary(const YAML::Node& n, int dim) {
  Section s(n, "boundary");
  BoundarySpec b;
  FaceCondition def;
  if (s.has("default")) def = parse_face(s.get("default"), dim, "boundary.default");
  for (int f = 0; f < 2 * dim; ++f) b.faces[f] = def;
  for (int f = 0; f < 2 * dim; ++f) {
    const std::string key(face_name(f));
    if (s.has(key)) b.faces[f] = parse_face(s.get(key), dim, s.child(key));
  }
  s.finish();
  try {
    b.validate(dim);
  } catch (const std::invalid_argument& e) {
    fail(n, e.what());
  }
  return b;
}

RegionSpec parse_region(const YAML::Node& n, int dim) {
  Section s(n, "objective.region");
  RegionSpec r;
  const std::string type = as_string(s.require("type"), s.child("type"));
  if (type == "faces") {
    r.type = RegionSpec::Type::Faces;
    if (s.has("faces")) {
      const YAML::Node f = s.get("faces");
      if (!f.IsSequence()) fail(f, "'objective.region.faces' must be a list");
      for (const auto& e : f) {
        try {
          const int face = face_from_name(as_string(e, "objective.region.faces"));
          if (face >= 2 * dim) fail(e, "face does not exist in this dimension");
          r.faces.push_back(face);
        } catch (const std::invalid_argument& ex) {
          fail(e, ex.what());
        }
      }
      std::sort(r.faces.begin(), r.faces.end());
    }
  } else if (type == "box") {
    r.type = RegionSpec::Type::Box;
    r.lo = as_index(s.require("lo"), dim, s.child("lo"));
    r.hi = as_index(s.require("hi"), dim, s.child("hi"));
  } else if (type == "cylinder") {
    r.type = RegionSpec::Type::Cylinder;
    r.center = as_vec(s.require("center"), dim, s.child("center"));
    r.radius = as_double(s.require("radius"), s.child("radius"));
    if (s.has("axis")) r.axis = as_axis(s.get("axis"), dim, s.child("axis"));
    const YAML::Node range = s.require("range");
    const Vec3 rg = as_vec(range, 2, s.child("range"));
    r.axial_lo = rg[0];
    r.axial_hi = rg[1];
  } else {
    fail(n, "unknown region type '" + type + "'");
  }
  s.finish();
  return r;
}

HistoryOptions parse_history(const YAML::Node& n) {
  Section s(n, "run.history");
  HistoryOptions h;
  if (s.has("precision")) {
    const std::string p = as_string(s.get("precision"), s.child("precision"));
    if (p == "float") h.precision = HistoryPrecision::Float;
    else if (p == "double") h.precision = HistoryPrecision::Double;
    else fail(s.get("precision"), "'run.history.precision' must be float or double");
  }
  if (s.has("checkpoint_stride")) {
    h.checkpoint_stride = as_int(s.get("checkpoint_stride"), s.child("checkpoint_stride"));
    if (h.checkpoint_stride < 1) fail(s.get("checkpoint_stride"), "'run.history.checkpoint_stride' must be >= 1");
  }
  s.finish();
  return h;
}

CaseConfig parse_root(const YAML::Node& root) {
  Section s(root, "");
  CaseConfig c;
  c.version = as_int(s.require("version"), "version");
  if (c.version != kSchemaVersion) {
    fail(s.get("version"), "unsupported config version " + std::to_string(c.version));
  }
  if (s.has("name")) c.name = as_string(s.get("name"), "name");
  if (s.has("description")) c.description = as_string(s.get("description"), "description");
  int dim = 2;
  if (s.has("dimension")) {
    dim = as_int(s.get("dimension"), "dimension");
    if (dim != 2 && dim != 3) fail(s.get("dimension"), "'dimension' must be 2 or 3");
  }

  {
    Section a(s.require("analysis"), "analysis");
    double dx = 1.0;
    if (a.has("dx")) dx = as_double(a.get("dx"), "analysis.dx");
    if (!(dx > 0.0)) fail(a.node(), "'analysis.dx' must be positive");
    c.analysis = parse_grid(a, dim, dx);
    if (a.has("A")) c.A = as_double(a.get("A"), "analysis.A");
    if (a.has("kernel")) {
      const std::string k = as_string(a.get("kernel"), "analysis.kernel");
      if (k == "standard") c.kernel = KernelForm::Standard;
      else if (k == "as_printed") c.kernel = KernelForm::AsPrinted;
      else fail(a.get("kernel"), "'analysis.kernel' must be standard or as_printed");
    }
    if (a.has("solid")) c.solid = parse_shapes(a.get("solid"), dim, "analysis.solid");
    a.finish();
  }

  if (s.has("brinkman")) {
    Section b(s.get("brinkman"), "brinkman");
    if (b.has("kappa_max")) c.brinkman.kappa_max = as_double(b.get("kappa_max"), "brinkman.kappa_max");
    if (b.has("q")) c.brinkman.q = as_double(b.get("q"), "brinkman.q");
    b.finish();
  }

  if (s.has("boundary")) {
    c.boundary = parse_boundary(s.get("boundary"), dim);
  } else {
    c.boundary = BoundarySpec::all_walls();
  }

  {
    Section d(s.require("design"), "design");
    c.design = parse_grid(d, dim, c.analysis.dx);
    c.motion.dim = dim;
    if (d.has("motion")) c.motion = parse_motion(d.get("motion"), dim);
    if (d.has("initial")) c.initial = parse_field(d.get("initial"), dim, "design.initial");
    if (d.has("reference")) c.reference = parse_field(d.get("reference"), dim, "design.reference");
    d.finish();
  }

  if (s.has("filter")) {
    Section f(s.get("filter"), "filter");
    if (f.has("enabled")) c.filter.enabled = as_bool(f.get("enabled"), "filter.enabled");
    if (f.has("radius")) c.filter.radius = as_double(f.get("radius"), "filter.radius");
    f.finish();
  }

  if (s.has("projection")) {
    Section p(s.get("projection"), "projection");
    if (p.has("enabled")) c.projection.enabled = as_bool(p.get("enabled"), "projection.enabled");
    if (p.has("beta")) c.projection.beta = as_double(p.get("beta"), "projection.beta");
    if (p.has("eta")) c.projection.eta = as_double(p.get("eta"), "projection.eta");
    if (p.has("beta_max")) c.continuation.beta_max = as_double(p.get("beta_max"), "projection.beta_max");
    if (p.has("hold")) c.continuation.hold = as_int(p.get("hold"), "projection.hold");
    if (p.has("every")) c.continuation.every = as_int(p.get("every"), "projection.every");
    if (p.has("fluctuation_tol")) {
      c.continuation.fluctuation_tol = as_double(p.get("fluctuation_tol"), "projection.fluctuation_tol");
    }
    if (p.has("fluctuation_window")) {
      c.continuation.fluctuation_window = as_int(p.get("fluctuation_window"), "projection.fluctuation_window");
    }
    p.finish();
  }

  {
    Section o(s.require("objective"), "objective");
    try {
      c.objective.kind = objective_kind_from_string(as_string(o.require("kind"), "objective.kind"));
    } catch (const std::invalid_argument& e) {
      fail(o.get("kind"), e.what());
    }
    if (o.has("region")) {
      c.objective.region = parse_region(o.get("region"), dim);
    }
    if (o.has("direction")) c.objective.direction = as_vec(o.get("direction"), dim, "objective.direction");
    const Vec3 w = as_vec(o.require("window"), 2, "objective.window");
    c.objective.window_begin = w[0];
    c.objective.window_end = w[1];
    o.finish();
  }

  {
    Section k(s.require("constraint"), "constraint");
    c.constraint.v_max = as_double(k.require("v_max"), "constraint.v_max");
    if (k.has("schedule")) {
      const YAML::Node sch = k.get("schedule");
      if (!sch.IsSequence()) fail(sch, "'constraint.schedule' must be a list of [step, v_max]");
      for (const auto& e : sch) {
        const Vec3 v = as_vec(e, 2, "constraint.schedule");
        if (v[0] != std::floor(v[0])) fail(e, "'constraint.schedule' steps must be integers");
        c.constraint.schedule.emplace_back(static_cast<int>(v[0]), v[1]);
      }
    }
    k.finish();
  }

  {
    Section r(s.require("run"), "run");
    c.run.steps = as_int(r.require("steps"), "run.steps");
    if (r.has("period")) c.run.period = as_double(r.get("period"), "run.period");
    if (r.has("restart")) {
      const std::string p = as_string(r.get("restart"), "run.restart");
      if (p == "cold") c.run.restart = RestartPolicy::Cold;
      else if (p == "warm") c.run.restart = RestartPolicy::Warm;
      else fail(r.get("restart"), "'run.restart' must be cold or warm");
    }
    if (r.has("history")) c.run.history = parse_history(r.get("history"));
    if (r.has("warmup_periods")) c.run.warmup_periods = as_int(r.get("warmup_periods"), "run.warmup_periods");
    r.finish();
  }

  if (s.has("optimization")) {
    Section o(s.get("optimization"), "optimization");
    auto& op = c.optimization;
    if (o.has("max_steps")) op.max_steps = as_int(o.get("max_steps"), "optimization.max_steps");
    if (o.has("tolerance")) op.tolerance = as_double(o.get("tolerance"), "optimization.tolerance");
    if (o.has("feasibility_tol")) op.feasibility_tol = as_double(o.get("feasibility_tol"), "optimization.feasibility_tol");
    if (o.has("objective_scale")) op.objective_scale = as_double(o.get("objective_scale"), "optimization.objective_scale");
    if (o.has("move")) op.move = as_double(o.get("move"), "optimization.move");
    if (o.has("seed")) op.seed = static_cast<std::uint64_t>(as_int(o.get("seed"), "optimization.seed"));
    o.finish();
  }

  if (s.has("output")) {
    Section o(s.get("output"), "output");
    if (o.has("design_stride")) c.output.design_stride = as_int(o.get("design_stride"), "output.design_stride");
    if (o.has("flow_stride")) c.output.flow_stride = as_int(o.get("flow_stride"), "output.flow_stride");
    o.finish();
  }

  s.finish();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), 0);
  }
  return c;
}

// Shortest text that reads back to the same double.
std::string num(double v) { return format_number(v); }

void emit_vec(YAML::Emitter& e, const Vec3& v, int n) {
  e << YAML::Flow << YAML::BeginSeq;
  for (int a = 0; a < n; ++a) e << num(v[a]);
  e << YAML::EndSeq;
}

void emit_shapes(YAML::Emitter& e, const std::vector<ShapeSpec>& shapes, int dim) {
  e << YAML::BeginSeq;
  for (const auto& sh : shapes) {
    e << YAML::BeginMap;
    switch (sh.type) {
      case ShapeSpec::Type::Box:
        e << YAML::Key << "type" << YAML::Value << "box";
        e << YAML::Key << "lo" << YAML::Value;
        emit_vec(e, sh.lo, dim);
        e << YAML::Key << "hi" << YAML::Value;
        emit_vec(e, sh.hi, dim);
        break;
      case ShapeSpec::Type::Ellipse:
        e << YAML::Key << "type" << YAML::Value << "ellipse";
        e << YAML::Key << "center" << YAML::Value;
        emit_vec(e, sh.center, dim);
        e << YAML::Key << "radii" << YAML::Value;
        emit_vec(e, sh.radii, dim);
        break;
      case ShapeSpec::Type::Annulus:
        e << YAML::Key << "type" << YAML::Value << "annulus";
        e << YAML::Key << "center" << YAML::Value;
        emit_vec(e, sh.center, dim);
        e << YAML::Key << "r_inner" << YAML::Value << num(sh.r_inner);
        e << YAML::Key << "r_outer" << YAML::Value << num(sh.r_outer);
        break;
    }
    e << YAML::Key << "value" << YAML::Value << num(sh.value);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
}

void emit_field(YAML::Emitter& e, const FieldSpec& f, int dim) {
  e << YAML::BeginMap;
  e << YAML::Key << "background" << YAML::Value << num(f.background);
  e << YAML::Key << "shapes" << YAML::Value;
  emit_shapes(e, f.shapes, dim);
  e << YAML::EndMap;
}

void emit_extents(YAML::Emitter& e, const UniformGrid& g) {
  e << YAML::Key << "extents" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (int a = 0; a < g.dim; ++a) e << g.extents[a];
  e << YAML::EndSeq;
  e << YAML::Key << "origin" << YAML::Value;
  emit_vec(e, g.origin, g.dim);
}

const char* axis_name(int a) { return a == 0 ? "x" : (a == 1 ? "y" : "z"); }

}  // namespace

ConfigError::ConfigError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

bool ShapeSpec::contains(const Vec3& x, int dim) const {
  switch (type) {
    case Type::Box:
      for (int a = 0; a < dim; ++a) {
        if (x[a] < lo[a] || x[a] > hi[a]) return false;
      }
      return true;
    case Type::Ellipse: {
      double s = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double t = (x[a] - center[a]) / radii[a];
        s += t * t;
      }
      return s <= 1.0;
    }
    case Type::Annulus: {
      const double dx = x[0] - center[0];
      const double dy = x[1] - center[1];
      const double r = std::sqrt(dx * dx + dy * dy);
      return r >= r_inner && r <= r_outer;
    }
  }
  return false;
}

std::vector<double> FieldSpec::rasterize(const UniformGrid& grid) const {
  std::vector<double> out(grid.size(), background);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 x = grid.position(grid.coords(i));
    for (const auto& sh : shapes) {
      if (sh.contains(x, grid.dim)) out[i] = sh.value;
    }
  }
  return out;
}

double ConstraintSpec::at(int step) const {
  double v = v_max;
  for (const auto& [s, value] : schedule) {
    if (s <= step) v = value;
  }
  return v;
}

void ConstraintSpec::validate() const {
  if (!(v_max > 0.0 && v_max <= 1.0)) throw std::invalid_argument("constraint.v_max must lie in (0, 1]");
  int last_step = -1;
  double last_v = 1.0;
  for (const auto& [s, v] : schedule) {
    if (s <= last_step) throw std::invalid_argument("constraint.schedule steps must increase");
    if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("constraint.schedule values must lie in (0, 1]");
    if (v > last_v) throw std::invalid_argument("constraint.schedule must be non-increasing");
    last_step = s;
    last_v = v;
  }
}

void CaseConfig::validate() const {
  const int dim = analysis.dim;
  if (design.dim != dim || motion.dim != dim) throw std::invalid_argument("grid dimensions disagree");
  if (design.dx != analysis.dx) throw std::invalid_argument("design and analysis grids must share dx");
  viscosity_of_A(A, analysis.dx);
  brinkman.validate();
  boundary.validate(dim);
  objective.validate(dim);
  constraint.validate();
  if (run.steps < 1) throw std::invalid_argument("run.steps must be >= 1");
  if (run.period < 0.0) throw std::invalid_argument("run.period must be >= 0");
  if (run.warmup_periods < 0) throw std::invalid_argument("run.warmup_periods must be >= 0");
  if (objective.window_end > run.steps * analysis.dx + 1e-9) {
    throw std::invalid_argument("objective window extends past the run interval");
  }
  if (filter.enabled && !(filter.radius >= 1.0)) throw std::invalid_argument("filter.radius must be >= 1 (grid spacings)");
  if (projection.enabled && !(projection.beta >= 1.0)) throw std::invalid_argument("projection.beta must be >= 1");
  if (!(projection.eta > 0.0 && projection.eta < 1.0)) throw std::invalid_argument("projection.eta must lie in (0, 1)");
  if (continuation.beta_max < projection.beta) throw std::invalid_argument("projection.beta_max below the initial beta");
  if (continuation.every < 1 || continuation.hold < 0) throw std::invalid_argument("projection.every must be >= 1 and hold >= 0");
  if (continuation.fluctuation_window < 2) throw std::invalid_argument("projection.fluctuation_window must be >= 2");
  if (optimization.max_steps < 0) throw std::invalid_argument("optimization.max_steps must be >= 0");
  if (!(optimization.tolerance > 0.0)) throw std::invalid_argument("optimization.tolerance must be positive");
  if (!(optimization.move > 0.0 && optimization.move <= 1.0)) throw std::invalid_argument("optimization.move must lie in (0, 1]");
  if (!(optimization.objective_scale > 0.0)) throw std::invalid_argument("optimization.objective_scale must be positive");
  if (objective.region.type == RegionSpec::Type::Box) {
    for (int a = 0; a < dim; ++a) {
      if (objective.region.lo[a] < 0 || objective.region.hi[a] >= analysis.extents[a] ||
          objective.region.lo[a] > objective.region.hi[a]) {
        throw std::invalid_argument("objective.region box lies outside the analysis grid");
      }
    }
  }
  resolve_region(analysis, objective.region);
}

FlowSetup CaseConfig::flow_setup() const {
  FlowSetup s;
  s.grid = analysis;
  s.boundary = boundary;
  s.A = A;
  s.brinkman = brinkman;
  s.kernel = kernel;
  s.design = DesignBody{design, motion};
  if (!solid.empty()) {
    FieldSpec mask{0.0, solid};
    s.solid_mask = mask.rasterize(analysis);
  }
  return s;
}

CaseConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  if (!root || root.IsNull()) throw ConfigError("empty configuration");
  return parse_root(root);
}

CaseConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string describe(const CaseConfig& c) {
  const int dim = c.analysis.dim;
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "version" << YAML::Value << c.version;
  e << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << c.name;
  e << YAML::Key << "description" << YAML::Value << YAML::DoubleQuoted << c.description;
  e << YAML::Key << "dimension" << YAML::Value << dim;

  e << YAML::Key << "analysis" << YAML::Value << YAML::BeginMap;
  emit_extents(e, c.analysis);
  e << YAML::Key << "dx" << YAML::Value << num(c.analysis.dx);
  e << YAML::Key << "A" << YAML::Value << num(c.A);
  e << YAML::Key << "kernel" << YAML::Value << std::string(to_string(c.kernel));
  e << YAML::Key << "solid" << YAML::Value;
  emit_shapes(e, c.solid, dim);
  e << YAML::EndMap;

  e << YAML::Key << "brinkman" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kappa_max" << YAML::Value << num(c.brinkman.kappa_max);
  e << YAML::Key << "q" << YAML::Value << num(c.brinkman.q);
  e << YAML::EndMap;

  e << YAML::Key << "boundary" << YAML::Value << YAML::BeginMap;
  for (int f = 0; f < 2 * dim; ++f) {
    const auto& fc = c.boundary.faces[f];
    e << YAML::Key << std::string(face_name(f)) << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "type" << YAML::Value << std::string(to_string(fc.type));
    e << YAML::Key << "velocity" << YAML::Value;
    emit_vec(e, fc.velocity, dim);
    e << YAML::Key << "density" << YAML::Value << num(fc.density);
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  e << YAML::Key << "design" << YAML::Value << YAML::BeginMap;
  emit_extents(e, c.design);
  e << YAML::Key << "motion" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "pivot" << YAML::Value;
  emit_vec(e, c.motion.pivot, dim);
  e << YAML::Key << "position" << YAML::Value;
  emit_vec(e, c.motion.translation.offset, dim);
  e << YAML::Key << "axis" << YAML::Value << axis_name(c.motion.axis);
  e << YAML::Key << "rotation" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "rate" << YAML::Value << num(c.motion.rotation.rate);
  e << YAML::Key << "phase" << YAML::Value << num(c.motion.rotation.phase);
  e << YAML::EndMap;
  if (c.motion.translation.period > 0.0) {
    e << YAML::Key << "oscillation" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "amplitude" << YAML::Value;
    emit_vec(e, c.motion.translation.amplitude, dim);
    e << YAML::Key << "period" << YAML::Value << num(c.motion.translation.period);
    e << YAML::Key << "phase" << YAML::Value << num(c.motion.translation.phase);
    e << YAML::EndMap;
  }
  e << YAML::Key << "velocity" << YAML::Value;
  emit_vec(e, c.motion.translation.velocity, dim);
  e << YAML::EndMap;
  e << YAML::Key << "initial" << YAML::Value;
  emit_field(e, c.initial, dim);
  if (c.reference) {
    e << YAML::Key << "reference" << YAML::Value;
    emit_field(e, *c.reference, dim);
  }
  e << YAML::EndMap;

  e << YAML::Key << "filter" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "enabled" << YAML::Value << c.filter.enabled;
  e << YAML::Key << "radius" << YAML::Value << num(c.filter.radius);
  e << YAML::EndMap;

  e << YAML::Key << "projection" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "enabled" << YAML::Value << c.projection.enabled;
  e << YAML::Key << "beta" << YAML::Value << num(c.projection.beta);
  e << YAML::Key << "eta" << YAML::Value << num(c.projection.eta);
  e << YAML::Key << "beta_max" << YAML::Value << num(c.continuation.beta_max);
  e << YAML::Key << "hold" << YAML::Value << c.continuation.hold;
  e << YAML::Key << "every" << YAML::Value << c.continuation.every;
  e << YAML::Key << "fluctuation_tol" << YAML::Value << num(c.continuation.fluctuation_tol);
  e << YAML::Key << "fluctuation_window" << YAML::Value << c.continuation.fluctuation_window;
  e << YAML::EndMap;

  e << YAML::Key << "objective" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << std::string(to_string(c.objective.kind));
  e << YAML::Key << "region" << YAML::Value << YAML::BeginMap;
  const auto& r = c.objective.region;
  switch (r.type) {
    case RegionSpec::Type::Faces:
      e << YAML::Key << "type" << YAML::Value << "faces";
      if (!r.faces.empty()) {
        e << YAML::Key << "faces" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (int f : r.faces) e << std::string(face_name(f));
        e << YAML::EndSeq;
      }
      break;
    case RegionSpec::Type::Box:
      e << YAML::Key << "type" << YAML::Value << "box";
      e << YAML::Key << "lo" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (int a = 0; a < dim; ++a) e << r.lo[a];
      e << YAML::EndSeq;
      e << YAML::Key << "hi" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (int a = 0; a < dim; ++a) e << r.hi[a];
      e << YAML::EndSeq;
      break;
    case RegionSpec::Type::Cylinder:
      e << YAML::Key << "type" << YAML::Value << "cylinder";
      e << YAML::Key << "center" << YAML::Value;
      emit_vec(e, r.center, dim);
      e << YAML::Key << "radius" << YAML::Value << num(r.radius);
      e << YAML::Key << "axis" << YAML::Value << axis_name(r.axis);
      e << YAML::Key << "range" << YAML::Value << YAML::Flow << YAML::BeginSeq << num(r.axial_lo)
        << num(r.axial_hi) << YAML::EndSeq;
      break;
  }
  e << YAML::EndMap;
  e << YAML::Key << "direction" << YAML::Value;
  emit_vec(e, c.objective.direction, dim);
  e << YAML::Key << "window" << YAML::Value << YAML::Flow << YAML::BeginSeq
    << num(c.objective.window_begin) << num(c.objective.window_end) << YAML::EndSeq;
  e << YAML::EndMap;

  e << YAML::Key << "constraint" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "v_max" << YAML::Value << num(c.constraint.v_max);
  e << YAML::Key << "schedule" << YAML::Value << YAML::BeginSeq;
  for (const auto& [st, v] : c.constraint.schedule) {
    e << YAML::Flow << YAML::BeginSeq << st << num(v) << YAML::EndSeq;
  }
  e << YAML::EndSeq;
  e << YAML::EndMap;

  e << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "steps" << YAML::Value << c.run.steps;
  e << YAML::Key << "period" << YAML::Value << num(c.run.period);
  e << YAML::Key << "restart" << YAML::Value << std::string(to_string(c.run.restart));
  e << YAML::Key << "warmup_periods" << YAML::Value << c.run.warmup_periods;
  e << YAML::Key << "history" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "precision" << YAML::Value
    << (c.run.history.precision == HistoryPrecision::Float ? "float" : "double");
  e << YAML::Key << "checkpoint_stride" << YAML::Value << c.run.history.checkpoint_stride;
  e << YAML::EndMap;
  e << YAML::EndMap;

  e << YAML::Key << "optimization" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "max_steps" << YAML::Value << c.optimization.max_steps;
  e << YAML::Key << "tolerance" << YAML::Value << num(c.optimization.tolerance);
  e << YAML::Key << "feasibility_tol" << YAML::Value << num(c.optimization.feasibility_tol);
  e << YAML::Key << "objective_scale" << YAML::Value << num(c.optimization.objective_scale);
  e << YAML::Key << "move" << YAML::Value << num(c.optimization.move);
  e << YAML::Key << "seed" << YAML::Value << c.optimization.seed;
  e << YAML::EndMap;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "design_stride" << YAML::Value << c.output.design_stride;
  e << YAML::Key << "flow_stride" << YAML::Value << c.output.flow_stride;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::filesystem::path find_case(std::string_view name_or_path) {
  namespace fs = std::filesystem;
  const fs::path p(name_or_path);
  if (fs::exists(p)) return p;
  for (const fs::path& dir : {fs::path("cases"), fs::path(LKSTOPO_CASES_DIR)}) {
    for (const char* ext : {"", ".yaml", ".cfg"}) {
      const fs::path cand = dir / (std::string(name_or_path) + ext);
      if (fs::exists(cand) && fs::is_regular_file(cand)) return cand;
    }
  }
  throw ConfigError("case '" + std::string(name_or_path) + "' not found");
}

std::string_view to_string(KernelForm form) {
  return form == KernelForm::Standard ? "standard" : "as_printed";
}

std::string_view to_string(RestartPolicy policy) {
  return policy == RestartPolicy::Cold ? "cold" : "warm";
}

}  // namespace lkstopo
