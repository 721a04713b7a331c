#include "lkstopo/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "lkstopo/objectives.hpp"
#include "lkstopo/output.hpp"
#include "lkstopo/verification.hpp"

#ifdef LKSTOPO_HAVE_OPENMP
#include <omp.h>
#endif

namespace lkstopo {

namespace fs = std::filesystem;

int configure_threads(std::optional<int> requested) {
  if (!requested) {
    if (const char* env = std::getenv("LKSTOPO_THREADS"); env && *env) {
      try {
        requested = std::stoi(env);
      } catch (const std::exception&) {
        throw std::invalid_argument("LKSTOPO_THREADS must be an integer");
      }
    }
  }
  if (requested && *requested < 1) throw std::invalid_argument("thread count must be >= 1");
#ifdef LKSTOPO_HAVE_OPENMP
  if (requested) omp_set_num_threads(*requested);
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<std::string> history_header() {
  return {"step", "J", "G", "beta", "v_max", "volume", "event"};
}

std::vector<std::string> history_row(const StepRecord& r) {
  return {std::to_string(r.step), format_number(r.J),      format_number(r.G),
          format_number(r.beta),  format_number(r.v_max),  format_number(r.volume),
          r.event};
}

namespace {

void write_design(const fs::path& path, const DesignField& field) {
  const auto raw = field.raw();
  const auto phys = field.projected();
  const VtkField fields[] = {{"gamma", 1, {phys.begin(), phys.end()}},
                             {"gamma_raw", 1, {raw.begin(), raw.end()}}};
  write_vtk(path, field.grid(), fields, "design pseudo-density");
}

std::string step_name(const char* prefix, int step, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%05d%s", prefix, step, ext);
  return buf;
}

void write_flow(const fs::path& path, const UniformGrid& grid, const FlowState& s) {
  const VtkField fields[] = {{"rho", 1, s.rho}, {"velocity", s.dim, s.u}};
  write_vtk(path, grid, fields, "flow");
}

}  // namespace

OptimizationResult optimize_to_directory(const CaseConfig& config, const fs::path& dir,
                                         std::ostream* log) {
  fs::create_directories(dir);
  write_text(dir / "config.yaml", describe(config));
  CsvWriter history(dir / "history.csv", history_header());
  CsvWriter timing(dir / "timing.csv", {"step", "seconds"});

  OptimizationCallbacks cb;
  cb.on_step = [&](const StepRecord& r) {
    const auto row = history_row(r);
    history.row(row);
    const std::string t[] = {std::to_string(r.step), format_number(r.seconds, 6)};
    timing.row(t);
    if (log) {
      *log << "step " << r.step << "  J " << format_number(r.J, 8) << "  G "
           << format_number(r.G, 4) << "  beta " << r.beta << "  v_max " << r.v_max
           << (r.event.empty() ? "" : "  [" + r.event + "]") << "  ("
           << format_number(r.seconds, 3) << " s)\n";
    }
  };
  cb.on_design = [&](int k, const DesignField& field) {
    write_design(dir / "gamma_checkpoint.vtk", field);
    const int stride = config.output.design_stride;
    if (stride > 0 && k % stride == 0) write_design(dir / step_name("gamma", k, ".vtk"), field);
  };

  OptimizationResult res = optimize(config, cb);

  DesignField final_field(config.design, config.filter, config.projection);
  final_field.set_beta(res.history.empty() ? config.projection.beta : res.history.back().beta);
  final_field.set_raw(res.raw);
  write_design(dir / "gamma_final.vtk", final_field);

  std::ostringstream s;
  s << "case = " << config.name << "\n";
  s << "steps = " << res.history.size() << "\n";
  s << "converged = " << (res.converged ? "true" : "false") << "\n";
  s << "stop_reason = " << res.stop_reason << "\n";
  if (!res.history.empty()) {
    const auto& last = res.history.back();
    s << "J_final = " << format_number(last.J) << "\n";
    s << "G_final = " << format_number(last.G) << "\n";
    s << "beta_final = " << format_number(last.beta) << "\n";
    s << "v_max_final = " << format_number(last.v_max) << "\n";
    s << "volume_final = " << format_number(last.volume) << "\n";
  }
  write_text(dir / "summary.txt", s.str());
  return res;
}

double simulate_to_directory(const CaseConfig& config, std::span<const double> physical,
                             const fs::path& dir, std::ostream* log) {
  fs::create_directories(dir);
  write_text(dir / "config.yaml", describe(config));
  FlowSolver solver(config.flow_setup());
  solver.set_design(physical);
  const int steps = config.run.steps;
  const int periods = config.run.warmup_periods;
  const int stride = config.output.flow_stride;

  FlowState state = solver.initial_state();
  Objective objective(config.objective, config.analysis, solver.dt(), 0, steps);
  double J = 0.0;
  ForwardResult last;
  for (int p = 0; p <= periods; ++p) {
    const bool measured = p == periods;
    if (stride > 0) {
      Snapshot snap;
      FlowState next;
      if (measured) {
        objective.reset();
        objective.accumulate(0, state);
      }
      for (int n = 1; n <= steps; ++n) {
        solver.build_snapshot(n, snap);
        solver.step(state, next, snap);
        std::swap(state, next);
        if (measured) objective.accumulate(n, state);
        const int global = p * steps + n;
        if (global % stride == 0) write_flow(dir / step_name("flow", global, ".vtk"), config.analysis, state);
      }
      if (measured) J = objective.value();
    } else {
      last = solver.run(state, steps, measured ? &objective : nullptr, nullptr);
      state = std::move(last.final_state);
      if (measured) J = last.objective;
    }
    if (log) *log << "period " << p + 1 << "/" << periods + 1 << " done\n";
  }
  write_flow(dir / "flow_final.vtk", config.analysis, state);
  const VtkField g[] = {{"gamma", 1, {physical.begin(), physical.end()}}};
  write_vtk(dir / "gamma.vtk", config.design, g, "design pseudo-density");

  std::ostringstream s;
  s << "case = " << config.name << "\n";
  s << "objective = " << format_number(J) << "\n";
  s << "warmup_periods = " << periods << "\n";
  s << "steps_per_period = " << steps << "\n";
  write_text(dir / "summary.txt", s.str());
  return J;
}

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path default_dir(const std::string& what) { return fs::path("runs") / what; }

std::vector<double> load_design(const fs::path& path, const UniformGrid& grid) {
  const VtkData d = read_vtk(path);
  if (d.grid.extents != grid.extents) throw UsageError("design file does not match the design grid");
  const auto it = d.scalars.find("gamma");
  if (it == d.scalars.end()) throw UsageError("design file has no 'gamma' field");
  return it->second;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Topology optimization of flow devices with moving bodies"};
  app.require_subcommand(1);

  std::optional<int> threads;
  std::string output_dir;
  app.add_option("--threads", threads, "Thread count (overrides LKSTOPO_THREADS)");
  app.add_option("--output-dir", output_dir, "Run directory");

  auto* verify = app.add_subcommand("verify", "Run a verification scenario");
  verify->require_subcommand(1);
  double scale = 0.0;
  double fd_step = 1e-3;
  int probe_stride = 1;
  auto* tc = verify->add_subcommand("taylor-couette", "Rotating-cylinder analytic comparison");
  tc->add_option("--scale", scale, "Grid scale factor (1, 0.5, 0.25)")->check(CLI::PositiveNumber);
  auto* sens = verify->add_subcommand("sensitivity", "Adjoint versus finite differences");
  sens->add_option("--scale", scale, "Grid scale factor")->check(CLI::PositiveNumber);
  sens->add_option("--fd-step", fd_step, "Finite-difference step")->check(CLI::Range(1e-4, 1e-2));
  sens->add_option("--probe-stride", probe_stride, "Probe every k-th midline node")
      ->check(CLI::PositiveNumber);

  std::string case_name;
  std::optional<int> max_steps;
  std::optional<std::uint64_t> seed;
  auto* opt = app.add_subcommand("optimize", "Optimize a case");
  opt->add_option("case", case_name, "Case name or config file")->required();
  opt->add_option("--max-steps", max_steps, "Optimization step budget")->check(CLI::PositiveNumber);
  opt->add_option("--seed", seed, "Random seed");

  std::string design_file;
  bool use_reference = false;
  auto* sim = app.add_subcommand("simulate", "Simulate a case with a fixed design");
  sim->add_option("case", case_name, "Case name or config file")->required();
  sim->add_option("--design", design_file, "VTK file with a 'gamma' field");
  sim->add_flag("--reference", use_reference, "Use the case's reference shape");

  auto* desc = app.add_subcommand("describe", "Print the resolved configuration");
  desc->add_option("case", case_name, "Case name or config file")->required();

  for (auto* sub : {opt, sim, desc, tc, sens}) {
    sub->add_option("--threads", threads, "Thread count (overrides LKSTOPO_THREADS)");
    sub->add_option("--output-dir", output_dir, "Run directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const int nthreads = configure_threads(threads);
    auto load = [&]() {
      CaseConfig c = load_config(find_case(case_name));
      if (max_steps) c.optimization.max_steps = *max_steps;
      if (seed) c.optimization.seed = *seed;
      c.validate();
      return c;
    };

    if (tc->parsed() || sens->parsed()) {
      VerificationReport rep;
      fs::path dir;
      if (tc->parsed()) {
        TaylorCouetteOptions o;
        if (scale > 0.0) o.scale = scale;
        rep = taylor_couette(o);
        dir = output_dir.empty() ? default_dir("verify-taylor-couette") : fs::path(output_dir);
      } else {
        SensitivityOptions o;
        if (scale > 0.0) o.scale = scale;
        o.fd_step = fd_step;
        o.probe_stride = probe_stride;
        o.progress = [](int done, int total) {
          std::cerr << "probe " << done << "/" << total << "\n";
        };
        rep = sensitivity_fda(o);
        dir = output_dir.empty() ? default_dir("verify-sensitivity") : fs::path(output_dir);
      }
      rep.metrics["threads"] = nthreads;
      fs::create_directories(dir);
      write_text(dir / "report.txt", rep.to_text());
      write_text(dir / "samples.csv", rep.to_csv());
      std::cout << rep.to_text();
      return rep.pass ? 0 : 1;
    }

    if (desc->parsed()) {
      std::cout << describe(load());
      return 0;
    }

    if (opt->parsed()) {
      const CaseConfig c = load();
      const fs::path dir = output_dir.empty() ? default_dir(c.name + "-optimize") : fs::path(output_dir);
      std::cerr << "optimizing " << c.name << " with " << nthreads << " thread(s) into " << dir
                << "\n";
      const auto res = optimize_to_directory(c, dir, &std::cerr);
      std::cout << "stop_reason = " << res.stop_reason << "\n";
      std::cout << "run_directory = " << dir.string() << "\n";
      return 0;
    }

    if (sim->parsed()) {
      const CaseConfig c = load();
      if (!design_file.empty() && use_reference) {
        throw UsageError("--design and --reference are mutually exclusive");
      }
      std::vector<double> gamma;
      if (!design_file.empty()) {
        gamma = load_design(design_file, c.design);
      } else if (use_reference) {
        if (!c.reference) throw UsageError("case has no reference shape");
        gamma = c.reference->rasterize(c.design);
      } else {
        gamma = physical_field(c, c.initial.rasterize(c.design), c.projection.beta);
      }
      const fs::path dir = output_dir.empty() ? default_dir(c.name + "-simulate") : fs::path(output_dir);
      const double J = simulate_to_directory(c, gamma, dir, &std::cerr);
      std::cout << "objective = " << format_number(J) << "\n";
      std::cout << "run_directory = " << dir.string() << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace lkstopo
