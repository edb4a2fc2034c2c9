#include "foldopt/cli.hpp"

#include "foldopt/calibrate.hpp"
#include "foldopt/error.hpp"
#include "foldopt/fixtures.hpp"
#include "foldopt/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>

namespace foldopt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Built-in defaults, overridden by the config file, overridden by flags.
struct RunConfig {
  std::string out_dir = ".";
  unsigned threads = 1;
  bool trace = false;
  std::map<std::string, std::string> paths;
  double alpha = kDefaultAlpha;
  LmOptions lm;
  SimParams sim;
  SceneOptions scene{kDeskDuration, kDeskSettleTime};
  RegistrationOptions registration;
  double trace_interval = 0.01;

  RunConfig() { lm.max_iterations = 12; }

  std::string path(const std::string& key) const {
    const auto it = paths.find(key);
    return it == paths.end() ? std::string() : it->second;
  }
};

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw InputError("config: unknown key '" + k + "' in " + where);
  }
}

void load_config(const std::string& path, RunConfig& c) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw InputError("config " + path + ": " + e.what());
  }
  try {
    reject_unknown(j, {"out_dir", "threads", "trace", "paths", "alpha", "lm", "sim", "scene", "registration", "trace_interval"},
                   "the top level");
    take(j, "out_dir", c.out_dir);
    take(j, "threads", c.threads);
    take(j, "trace", c.trace);
    take(j, "alpha", c.alpha);
    take(j, "trace_interval", c.trace_interval);
    if (j.contains("paths")) {
      const json& p = j.at("paths");
      reject_unknown(p, {"mesh", "mask", "template", "plan", "card", "keypoints", "trajectory", "measurements", "contour"},
                     "paths");
      for (const auto& [k, v] : p.items()) c.paths[k] = v.get<std::string>();
    }
    if (j.contains("lm")) {
      const json& l = j.at("lm");
      reject_unknown(l, {"delta", "initial_damping", "max_iterations", "cost_improvement_tol", "step_norm_tol", "gradient_tol"},
                     "lm");
      take(l, "delta", c.lm.delta);
      take(l, "initial_damping", c.lm.initial_damping);
      take(l, "max_iterations", c.lm.max_iterations);
      take(l, "cost_improvement_tol", c.lm.cost_improvement_tol);
      take(l, "step_norm_tol", c.lm.step_norm_tol);
      take(l, "gradient_tol", c.lm.gradient_tol);
    }
    if (j.contains("sim")) {
      const json& s = j.at("sim");
      reject_unknown(s, {"shear_stiffness", "stretch_stiffness", "bend_stiffness", "friction_mu", "gravity", "timestep",
                         "damping", "table_height", "table_tilt", "table_enabled", "self_friction_mu", "areal_density",
                         "substeps"},
                     "sim");
      take(s, "shear_stiffness", c.sim.shear_stiffness);
      take(s, "stretch_stiffness", c.sim.stretch_stiffness);
      take(s, "bend_stiffness", c.sim.bend_stiffness);
      take(s, "friction_mu", c.sim.friction_mu);
      take(s, "gravity", c.sim.gravity);
      take(s, "timestep", c.sim.timestep);
      take(s, "damping", c.sim.damping);
      take(s, "table_height", c.sim.table_height);
      take(s, "table_tilt", c.sim.table_tilt);
      take(s, "table_enabled", c.sim.table_enabled);
      take(s, "self_friction_mu", c.sim.self_friction_mu);
      take(s, "areal_density", c.sim.areal_density);
      take(s, "substeps", c.sim.substeps);
    }
    if (j.contains("scene")) {
      const json& s = j.at("scene");
      reject_unknown(s, {"duration", "settle_time", "grasp_radius", "layer_gap"}, "scene");
      take(s, "duration", c.scene.duration);
      take(s, "settle_time", c.scene.settle_time);
      take(s, "grasp_radius", c.scene.grasp_radius);
      take(s, "layer_gap", c.scene.layer_gap);
    }
    if (j.contains("registration")) {
      const json& r = j.at("registration");
      reject_unknown(r, {"kappa", "beta", "split_cells", "merge_cells", "coarse_levels", "max_outer_iterations",
                         "max_inner_iterations", "tolerance", "prealign"},
                     "registration");
      take(r, "kappa", c.registration.kappa);
      take(r, "beta", c.registration.beta);
      take(r, "split_cells", c.registration.split_cells);
      take(r, "merge_cells", c.registration.merge_cells);
      take(r, "coarse_levels", c.registration.coarse_levels);
      take(r, "max_outer_iterations", c.registration.max_outer_iterations);
      take(r, "max_inner_iterations", c.registration.max_inner_iterations);
      take(r, "tolerance", c.registration.tolerance);
      take(r, "prealign", c.registration.prealign);
    }
  } catch (const json::exception& e) {
    throw InputError("config " + path + ": " + e.what());
  }
}

// A flag value applied over the config only when it was given.
struct Overrides {
  std::vector<std::function<void(RunConfig&)>> apply;

  template <class T>
  void add(CLI::App* app, const std::string& name, const std::string& help, std::function<void(RunConfig&, const T&)> set) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    apply.push_back([opt, value, set](RunConfig& c) {
      if (opt->count() > 0) set(c, *value);
    });
  }

  void path(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    add<std::string>(app, name, help, [key](RunConfig& c, const std::string& v) { c.paths[key] = v; });
  }
};

std::string required_path(const RunConfig& c, const std::string& key, const std::string& flag) {
  const std::string p = c.path(key);
  if (p.empty()) throw InputError("missing " + flag);
  if (!fs::exists(p)) throw InputError(flag + ": no such file " + p);
  return p;
}

void prepare_out_dir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw InputError("cannot create output directory " + c.out_dir + ": " + ec.message());
}

std::string out_path(const RunConfig& c, const std::string& name) { return (fs::path(c.out_dir) / name).string(); }

LmOptions lm_options(const RunConfig& c) {
  LmOptions o = c.lm;
  o.threads = c.threads;
  o.parallel_probes = c.threads != 1;
  o.validate();
  return o;
}

std::string sim_trace_header() { return "time,vertex,x,y,z\n"; }

// Simulates the grasp phases, appending CSV rows every `interval` seconds.
TriangleMesh traced_simulation(const TriangleMesh& mesh, const SimParams& params,
                               const std::vector<GraspConstraint>& constraints, double settle, double interval,
                               std::string* csv) {
  double next = 0.0;
  char buf[160];
  auto observer = [&](const ClothSimulator& sim) {
    if (!csv || sim.time() + 1e-9 < next) return;
    next += interval;
    const auto pos = sim.positions();
    for (std::size_t v = 0; v < pos.size(); ++v) {
      std::snprintf(buf, sizeof(buf), "%.6f,%zu,%.9g,%.9g,%.9g\n", sim.time(), v, pos[v].x(), pos[v].y(), pos[v].z());
      *csv += buf;
    }
  };
  return simulate_fold(mesh, params, constraints, settle, observer);
}

Contour template_arg(const std::string& name) {
  if (name == "towel" || name == "shirt" || name == "pants") return garment_template(parse_category(name));
  if (!fs::exists(name)) throw InputError("--template: not a built-in template or an existing file: " + name);
  return template_from_json(read_text(name));
}

// ---- calibrate -----------------------------------------------------------

int cmd_calibrate(const RunConfig& c, std::ostream& out) {
  const auto list = measurements_from_json(read_text(required_path(c, "measurements", "measurements file")));
  TriangleMesh mesh = c.path("mesh").empty() ? calibration_mesh() : load_obj(required_path(c, "mesh", "--mesh"));
  const std::size_t pick = calibration_pick_vertex(mesh);
  c.sim.validate();
  prepare_out_dir(c);

  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-26s %9s %9s %12s %8s\n", "garment", "stretch%", "angle", "stiffness", "mu");
  out << buf;
  double sum_f = 0.0, sum_a = 0.0;
  for (const NamedMeasurement& n : list) {
    MaterialCard card = calibrate_garment(n.garment, n.measurement, mesh, pick, c.sim);
    save_card(out_path(c, n.garment + ".card.json"), card);
    sum_f += card.shear_fraction;
    sum_a += card.friction_angle_deg;
    std::snprintf(buf, sizeof(buf), "%-26s %9.2f %9.2f %12.4g %8.3f%s\n", n.garment.c_str(), 100.0 * card.shear_fraction,
                  card.friction_angle_deg, card.stretch_stiffness, card.friction_mu,
                  card.shear_saturated || card.friction_saturated ? "  (saturated)" : "");
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "%-26s %9.2f %9.2f\n", "average", 100.0 * sum_f / list.size(), sum_a / list.size());
  out << buf;
  return kExitOk;
}

// ---- register ------------------------------------------------------------

int cmd_register(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Mask mask = load_pgm(required_path(c, "mask", "mask"));
  const std::string tname = c.path("template");
  if (tname.empty()) throw InputError("missing --template");
  const Contour tmpl = template_arg(tname);
  c.registration.validate();
  if (connected_components(mask) != 1) throw InputError("mask: expected a single connected garment region");

  const FittedContour fit = register_contour(tmpl, mask, c.registration);
  prepare_out_dir(c);
  write_text(out_path(c, "fitted_contour.json"), fitted_to_json(fit));
  write_text(out_path(c, "keypoints.json"), keypoints_to_json(fit.features));
  if (!fit.warning.empty()) err << "warning: " << fit.warning << '\n';
  char buf[200];
  std::snprintf(buf, sizeof(buf), "E_fit %.6g  E_stretch %.6g  E_bend %.6g  outer iterations %d%s\n", fit.energies.fit,
                fit.energies.stretch, fit.energies.bend, fit.outer_iterations, fit.converged ? "" : " (not converged)");
  out << buf;
  for (const auto& [id, p] : fit.features) {
    std::snprintf(buf, sizeof(buf), "  %-24s %10.5f %10.5f\n", id.c_str(), p.x(), p.y());
    out << buf;
  }
  return kExitOk;
}

// ---- meshgen -------------------------------------------------------------

void write_fixture(const RunConfig& c, GarmentCategory cat) {
  const Fixture f = make_fixture(cat);
  const fs::path dir = fs::path(c.out_dir) / f.name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create " + dir.string());
  write_text((dir / "contour.json").string(), contour_to_json(f.contour));
  write_text((dir / "template.json").string(), template_to_json(f.contour_template));
  save_pgm((dir / "mask.pgm").string(), f.mask);
  save_obj((dir / "mesh.obj").string(), desk_mesh(cat));
  write_text((dir / "plan.json").string(), plan_to_json(f.plan) + "\n");
  write_text((dir / "keypoints.json").string(), keypoints_to_json(f.keypoints));
}

int cmd_meshgen(const RunConfig& c, const std::string& fixture, double edge, bool single_sided, std::ostream& out) {
  if (!fixture.empty()) {
    std::vector<GarmentCategory> cats;
    if (fixture == "all")
      cats = {GarmentCategory::Towel, GarmentCategory::Shirt, GarmentCategory::Pants};
    else
      cats = {parse_category(fixture)};
    prepare_out_dir(c);
    for (GarmentCategory cat : cats) {
      write_fixture(c, cat);
      out << "wrote fixture " << to_string(cat) << '\n';
    }
    if (fixture == "all") write_text(out_path(c, "measurements.json"), measurements_to_json(garment_measurements()) + "\n");
    return kExitOk;
  }
  const Polygon2D contour = contour_from_json(read_text(required_path(c, "contour", "contour")));
  if (!(edge > 0.0)) throw InputError("--edge must be positive");
  TriangleMesh mesh = triangulate_contour(contour, edge);
  if (!single_sided) mesh = mirror_two_sided(mesh);
  mesh = place_on_table(mesh, c.sim.table_height);
  prepare_out_dir(c);
  save_obj(out_path(c, "mesh.obj"), mesh);
  out << "mesh.obj: " << mesh.vertex_count() << " vertices, " << mesh.triangle_count() << " triangles\n";
  return kExitOk;
}

// ---- optimize ------------------------------------------------------------

int cmd_optimize(const RunConfig& c, const std::string& category, std::ostream& out, std::ostream& err) {
  const TriangleMesh mesh = load_obj(required_path(c, "mesh", "--mesh"));
  const MaterialCard card = load_card(required_path(c, "card", "--card"));
  const Keypoints keypoints = keypoints_from_json(read_text(required_path(c, "keypoints", "--keypoints")));
  FoldPlan plan;
  if (!c.path("plan").empty()) {
    plan = load_plan(required_path(c, "plan", "--plan"));
    if (!category.empty() && parse_category(category) != plan.category)
      throw InputError("--category " + category + " does not match the plan's category " + to_string(plan.category));
  } else {
    if (category.empty()) throw InputError("missing --plan or --category");
    plan = builtin_plan(parse_category(category));
  }
  const SimParams params = card.apply(c.sim);
  if (!(c.alpha >= 0.0)) throw InputError("alpha must be non-negative");
  PlanRunOptions opts;
  opts.scene = c.scene;
  opts.scene.alpha = c.alpha;
  opts.lm = lm_options(c);
  instantiate(plan, keypoints, mesh, opts.scene.layer_gap);
  if (!(c.trace_interval > 0.0)) throw InputError("trace_interval must be positive");

  std::vector<std::string> log;
  std::map<std::size_t, int> counts;
  const auto observer = [&](std::size_t step, const Eigen::VectorXd&, const CostReport& r) {
    log.push_back(cost_record_json(static_cast<int>(step + 1), counts[step]++, r));
  };
  std::vector<StepOutcome> steps;
  try {
    steps = optimize_plan(mesh, params, plan, keypoints, opts, observer);
  } catch (const OptimizationFailure& e) {
    err << "error: optimization failed at " << e.what() << '\n';
    return kExitOptimization;
  }

  prepare_out_dir(c);
  std::vector<TrajectorySet> sets;
  char buf[256];
  for (const StepOutcome& s : steps) {
    const std::string stem = "step_" + std::to_string(s.step.index + 1);
    sets.push_back({s.result.trajectories, s.scene.duration});
    write_text(out_path(c, stem + ".trajectory.json"), trajectory_to_json(sets.back()));
    write_text(out_path(c, stem + ".trace.csv"), trace_to_csv(s.result.trace));
    save_obj(out_path(c, stem + ".final.obj"), s.result.final_mesh);
    if (c.trace) {
      std::string csv = sim_trace_header();
      traced_simulation(s.scene.mesh, s.scene.params, grasp_constraints(s.scene, s.result.trajectories),
                        s.scene.settle_time, c.trace_interval, &csv);
      write_text(out_path(c, stem + ".sim_trace.csv"), csv);
    }
    std::snprintf(buf, sizeof(buf),
                  "step %zu: %d arm(s)  C %.6g -> %.6g  D %.4g -> %.4g m  length %.4g m  iterations %zu  %s\n",
                  s.step.index + 1, s.step.arms(), s.result.initial_report.cost, s.result.report.cost,
                  s.result.initial_report.dissimilarity, s.result.report.dissimilarity, s.result.report.length,
                  s.result.trace.records.size() - 1, s.result.trace.stop_reason.c_str());
    out << buf;
  }
  write_text(out_path(c, "trajectories.json"), trajectories_to_json(sets));
  std::string jsonl;
  for (const std::string& line : log) jsonl += line + "\n";
  write_text(out_path(c, "run_log.jsonl"), jsonl);
  return kExitOk;
}

// ---- simulate ------------------------------------------------------------

int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  TriangleMesh state = load_obj(required_path(c, "mesh", "--mesh"));
  const auto steps = trajectories_from_json(read_text(required_path(c, "trajectory", "trajectory")));
  SimParams params = c.sim;
  if (!c.path("card").empty()) params = load_card(required_path(c, "card", "--card")).apply(c.sim);
  params.validate();
  if (!(c.trace_interval > 0.0)) throw InputError("trace_interval must be positive");

  std::vector<TriangleMesh> finals;
  std::string csv = sim_trace_header();
  for (std::size_t k = 0; k < steps.size(); ++k) {
    std::vector<GraspConstraint> constraints;
    for (const BezierTrajectory& t : steps[k].arms) {
      const std::size_t v = pick_grasp_vertex(state, xy(t.start()));
      GraspConstraint g;
      g.vertex_ids = grasp_neighborhood(state, v, c.scene.grasp_radius);
      g.trajectory = t;
      g.duration = steps[k].duration;
      for (std::size_t u : g.vertex_ids) g.offsets.push_back(state.vertices[u] - t.start());
      constraints.push_back(std::move(g));
    }
    try {
      state = traced_simulation(state, params, constraints, c.scene.settle_time, c.trace_interval, c.trace ? &csv : nullptr);
    } catch (const SimulationDiverged& e) {
      err << "error: step " << k + 1 << ": " << e.what() << '\n';
      return kExitOptimization;
    }
    finals.push_back(state);
  }
  prepare_out_dir(c);
  for (std::size_t k = 0; k < finals.size(); ++k)
    save_obj(out_path(c, "step_" + std::to_string(k + 1) + ".final.obj"), finals[k]);
  if (c.trace) write_text(out_path(c, "sim_trace.csv"), csv);
  out << "simulated " << finals.size() << " step(s); final mesh diagonal " << bounding_diagonal(state) << " m\n";
  return kExitOk;
}

// ---- export --------------------------------------------------------------

int cmd_export(const RunConfig& c, int samples, std::ostream& out) {
  const auto steps = trajectories_from_json(read_text(required_path(c, "trajectory", "trajectory")));
  if (samples < 2) throw InputError("--samples must be at least 2");
  std::string csv = "step,arm,time_s,x,y,z\n";
  char buf[200];
  double t0 = 0.0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    for (std::size_t a = 0; a < steps[k].arms.size(); ++a) {
      GraspConstraint g;
      g.trajectory = steps[k].arms[a];
      g.duration = steps[k].duration;
      for (int i = 0; i < samples; ++i) {
        const double t = steps[k].duration * i / (samples - 1);
        const Vec3 p = evaluate(g.trajectory, g.curve_parameter(t));
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%.6f,%.9g,%.9g,%.9g\n", k + 1, a, t0 + t, p.x(), p.y(), p.z());
        csv += buf;
      }
    }
    t0 += steps[k].duration;
  }
  prepare_out_dir(c);
  write_text(out_path(c, "waypoints.csv"), csv);
  out << "waypoints.csv: " << steps.size() << " step(s), " << samples << " samples per arm\n";
  return kExitOk;
}

// ---- plot ----------------------------------------------------------------

int cmd_plot(const RunConfig& c, const std::string& input, std::string kind, const std::string& format,
             std::ostream& out) {
  if (input.empty()) throw InputError("missing plot input");
  if (!fs::exists(input)) throw InputError("no such file " + input);
  if (format != "svg" && format != "csv") throw InputError("--format must be svg or csv");
  const fs::path p(input);
  if (kind == "auto") {
    const std::string name = p.filename().string();
    if (p.extension() == ".jsonl")
      kind = "runlog";
    else if (p.extension() == ".csv")
      kind = "trace";
    else if (p.extension() == ".json")
      kind = "trajectory";
    else
      throw InputError("cannot tell the input kind of " + name + "; pass --kind");
  }
  const std::string text = read_text(input);
  std::string result;
  if (kind == "trajectory") {
    const auto steps = trajectories_from_json(text);
    result = format == "svg" ? trajectory_svg(steps) : trajectory_csv(steps);
  } else if (kind == "trace") {
    const auto rows = trace_from_csv(text);
    result = format == "svg" ? trace_svg(rows) : trace_plot_csv(rows);
  } else if (kind == "runlog") {
    const auto rows = runlog_from_jsonl(text);
    result = format == "svg" ? runlog_svg(rows) : runlog_csv(rows);
  } else {
    throw InputError("unknown input kind '" + kind + "'");
  }
  prepare_out_dir(c);
  const std::string name = p.stem().string() + (format == "svg" ? ".svg" : ".plot.csv");
  write_text(out_path(c, name), result);
  out << name << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Garment folding trajectory optimizer"};
  app.name(args.empty() ? "foldopt" : args[0]);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration");
  Overrides ov;
  ov.add<std::string>(&app, "--out-dir", "Output directory", [](RunConfig& c, const std::string& v) { c.out_dir = v; });
  ov.add<unsigned>(&app, "--threads", "Worker threads for optimizer probes (0 = all cores)",
                   [](RunConfig& c, const unsigned& v) { c.threads = v; });
  bool trace_flag = false;
  CLI::Option* trace_opt = app.add_flag("--trace", trace_flag, "Write simulation traces as CSV");

  CLI::App* calibrate = app.add_subcommand("calibrate", "Calibrate stiffness and friction from measurements");
  ov.path(calibrate, "measurements", "measurements", "Measurements JSON");
  ov.path(calibrate, "--mesh", "mesh", "Calibration mesh (OBJ); defaults to the built-in square");

  CLI::App* reg = app.add_subcommand("register", "Register a contour template to a garment mask");
  ov.path(reg, "mask", "mask", "Binary PGM mask");
  ov.path(reg, "--template", "template", "towel, shirt, pants, or a template JSON file");
  ov.add<double>(reg, "--kappa", "Stretch weight", [](RunConfig& c, const double& v) { c.registration.kappa = v; });
  ov.add<double>(reg, "--beta", "Bend weight", [](RunConfig& c, const double& v) { c.registration.beta = v; });

  CLI::App* meshgen = app.add_subcommand("meshgen", "Triangulate a contour, or write the built-in fixtures");
  ov.path(meshgen, "contour", "contour", "Contour JSON");
  std::string fixture;
  double edge = 0.022;
  bool single_sided = false;
  meshgen->add_option("--fixture", fixture, "towel, shirt, pants or all");
  meshgen->add_option("--edge", edge, "Target edge length in meters");
  meshgen->add_flag("--single-sided", single_sided, "Skip the mirrored bottom layer");

  CLI::App* optimize = app.add_subcommand("optimize", "Optimize the trajectories of a fold plan");
  ov.path(optimize, "--mesh", "mesh", "Garment mesh (OBJ)");
  ov.path(optimize, "--card", "card", "Material card JSON");
  ov.path(optimize, "--keypoints", "keypoints", "Keypoints or fitted-contour JSON");
  ov.path(optimize, "--plan", "plan", "Plan JSON");
  std::string category;
  optimize->add_option("--category", category, "Built-in plan: towel, shirt or pants");
  ov.add<double>(optimize, "--alpha", "Dissimilarity weight", [](RunConfig& c, const double& v) { c.alpha = v; });
  ov.add<int>(optimize, "--iterations", "LM iteration cap", [](RunConfig& c, const int& v) { c.lm.max_iterations = v; });
  ov.add<double>(optimize, "--delta", "Probe step per meter of garment diagonal",
                 [](RunConfig& c, const double& v) { c.lm.delta = v; });
  ov.add<double>(optimize, "--duration", "Grasp phase duration in seconds",
                 [](RunConfig& c, const double& v) { c.scene.duration = v; });
  ov.add<double>(optimize, "--settle", "Settling time after release in seconds",
                 [](RunConfig& c, const double& v) { c.scene.settle_time = v; });

  CLI::App* simulate = app.add_subcommand("simulate", "Replay a trajectory file");
  ov.path(simulate, "trajectory", "trajectory", "Trajectory JSON");
  ov.path(simulate, "--mesh", "mesh", "Garment mesh (OBJ)");
  ov.path(simulate, "--card", "card", "Material card JSON");

  CLI::App* exp = app.add_subcommand("export", "Sample trajectories into timed waypoints");
  ov.path(exp, "trajectory", "trajectory", "Trajectory JSON");
  int samples = 50;
  exp->add_option("--samples", samples, "Waypoints per arm and step");

  CLI::App* plot = app.add_subcommand("plot", "Render a trajectory, LM trace or run log");
  std::string plot_input, kind = "auto", format = "svg";
  plot->add_option("input", plot_input, "Trajectory JSON, trace CSV or run log JSONL");
  plot->add_option("--kind", kind, "auto, trajectory, trace or runlog");
  plot->add_option("--format", format, "svg or csv");

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) load_config(config_path, cfg);
    for (const auto& f : ov.apply) f(cfg);
    if (trace_opt->count() > 0) cfg.trace = trace_flag;

    if (calibrate->parsed()) return cmd_calibrate(cfg, out);
    if (reg->parsed()) return cmd_register(cfg, out, err);
    if (meshgen->parsed()) return cmd_meshgen(cfg, fixture, edge, single_sided, out);
    if (optimize->parsed()) return cmd_optimize(cfg, category, out, err);
    if (simulate->parsed()) return cmd_simulate(cfg, out, err);
    if (exp->parsed()) return cmd_export(cfg, samples, out);
    if (plot->parsed()) return cmd_plot(cfg, plot_input, kind, format, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const RegistrationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitRegistration;
  } catch (const OptimizationFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitOptimization;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace foldopt::cli
