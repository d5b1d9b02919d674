// mirrorc: command-line front end for the coupling library.
//
// Exit status: 0 when every check passes, 1 when a check fails, 2 on invalid
// input or an unsupported combination.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mirror/harness.hpp"

namespace {

using nlohmann::json;

struct Flags {
  std::string config_path;
  std::string space, coupling, check, out, name;
  std::vector<double> t_grid;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  int threads = 1, dim = 1, m = 4, level = 2, horizon = 20;
  double dt = 0.05, eps = 0.05, laziness = 0.5, separation = 1.0, torus_b = 0.0, lambda = 1.0;
  bool no_subdivision = false;
  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* app, bool with_check) {
    opts["config"] = app->add_option("--config", config_path, "JSON experiment config");
    opts["space"] = app->add_option("--space", space,
                                    "euclidean|circle|torus|sphere|hyperbolic|cycle|eight|tree|gasket");
    opts["coupling"] = app->add_option("--coupling", coupling, "mirror|kc|eight|tree|independent");
    if (with_check)
      opts["check"] = app->add_option(
          "--check", check, "maximality|wasser|varadhan|nonuniqueness|bisector-equidistance");
    opts["t_grid"] = app->add_option("--t-grid,--t", t_grid, "time grid (comma separated)")->delimiter(',');
    opts["trials"] = app->add_option("--trials", trials);
    opts["seed"] = app->add_option("--seed", seed);
    opts["threads"] = app->add_option("--threads", threads, "workers (results do not depend on it)");
    opts["dim"] = app->add_option("--dim", dim);
    opts["m"] = app->add_option("--m", m, "chain resolution");
    opts["laziness"] = app->add_option("--laziness", laziness);
    opts["level"] = app->add_option("--level", level, "gasket level");
    opts["no_subdivision"] = app->add_flag("--no-subdivision", no_subdivision);
    opts["dt"] = app->add_option("--dt", dt);
    opts["eps"] = app->add_option("--eps", eps);
    opts["poisson_lambda"] = app->add_option("--poisson-lambda", lambda);
    opts["separation"] = app->add_option("--separation,--a", separation, "distance of the starting pair");
    opts["torus_b"] = app->add_option("--b", torus_b, "torus offset of x2 along the second axis");
    opts["horizon"] = app->add_option("--horizon", horizon);
    opts["out"] = app->add_option("--out", out, "output directory");
    opts["name"] = app->add_option("--name", name, "output file prefix");
  }

  bool given(const std::string& key) const {
    const auto it = opts.find(key);
    return it != opts.end() && it->second->count() > 0;
  }

  mirror::ExperimentConfig build(const std::string& mode) const {
    json j = {{"schema", mirror::kConfigSchema}};
    if (given("config")) {
      std::ifstream in(config_path);
      if (!in) throw mirror::ConfigError("cannot open config " + config_path);
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw mirror::ConfigError("config is not valid JSON: " + std::string(e.what()));
      }
    }
    j["mode"] = mode;
    if (given("space")) j["space"] = space;
    if (given("coupling")) j["coupling"] = coupling;
    if (given("check")) j["check"] = check;
    if (given("t_grid")) j["t_grid"] = t_grid;
    if (given("trials")) j["trials"] = trials;
    if (given("seed")) j["seed"] = seed;
    if (given("threads")) j["threads"] = threads;
    if (given("dim")) j["dim"] = dim;
    if (given("m")) j["m"] = m;
    if (given("laziness")) j["laziness"] = laziness;
    if (given("level")) j["level"] = level;
    if (given("no_subdivision")) j["axis_subdivision"] = !no_subdivision;
    if (given("dt")) j["dt"] = dt;
    if (given("eps")) j["eps"] = eps;
    if (given("poisson_lambda")) j["poisson_lambda"] = lambda;
    if (given("separation")) j["separation"] = separation;
    if (given("torus_b")) j["torus_b"] = torus_b;
    if (given("horizon")) j["horizon"] = horizon;
    if (given("out")) j["output_dir"] = out;
    if (given("name")) j["name"] = name;
    if (!j.contains("name")) j["name"] = mode;
    return mirror::ExperimentConfig::from_json(j);
  }
};

void print_file(const std::string& path) {
  std::ifstream in(path);
  std::cout << in.rdbuf();
}

int run(const mirror::ExperimentConfig& config) {
  const mirror::ResultManifest manifest = mirror::run_experiment(config);
  for (const auto& path : manifest.outputs)
    if (path.find("_manifest.json") == std::string::npos) print_file(path);
  for (const auto& c : manifest.checks)
    std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << '\n';
  std::cerr << "manifest: " << manifest.outputs.back() << " (" << manifest.input_hash << ")\n";
  return manifest.pass ? 0 : 1;
}

int report(const std::string& dir) {
  if (!std::filesystem::is_directory(dir)) throw mirror::ConfigError("no output directory " + dir);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().string().ends_with("_manifest.json")) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  bool all = true;
  std::cout << "name,mode,space,pass,wall_clock_s,input_hash\n";
  for (const auto& f : files) {
    std::ifstream in(f);
    json m;
    in >> m;
    const bool pass = m.value("pass", false);
    all = all && pass;
    std::cout << m["config"].value("name", "?") << ',' << m["config"].value("mode", "?") << ','
              << m["config"].value("space", "?") << ',' << (pass ? "pass" : "FAIL") << ','
              << m.value("wall_clock_s", 0.0) << ',' << m.value("input_hash", "") << '\n';
  }
  if (files.empty()) std::cerr << "no manifests in " << dir << '\n';
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Couplings of diffusions on spaces with a reflection structure"};
  app.require_subcommand(1);

  Flags sim, exact, verify;
  sim.attach(app.add_subcommand("simulate", "Monte Carlo survival curve P[T > t] of a coupling"), false);
  exact.attach(app.add_subcommand("exact", "heat kernel values or exact chain distributions"), false);
  verify.attach(app.add_subcommand("verify", "run one verification check, JSON report"), true);

  auto* bis = app.add_subcommand("bisector", "equidistant set of a flat-torus pair as JSON");
  double a = 1.0 / 3.0, b = 0.0;
  bis->add_option("--a", a)->required();
  bis->add_option("--b", b)->required();

  auto* rep = app.add_subcommand("report", "summarize manifests in an output directory");
  std::string rep_dir;
  rep->add_option("--dir", rep_dir, "directory (default: $MIRROR_OUTPUT_DIR or out)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("simulate")) return run(sim.build("simulate"));
    if (app.got_subcommand("exact")) return run(exact.build("exact"));
    if (app.got_subcommand("verify")) return run(verify.build("verify"));
    if (app.got_subcommand("bisector")) {
      const mirror::BisectorGeometry g = mirror::torus_bisector(a, b);
      json points = json::array(), segments = json::array();
      for (const auto& p : g.points) points.push_back({p(0), p(1)});
      for (const auto& s : g.segments) segments.push_back({s[0], s[1]});
      const json out = {
          {"case", g.kind == mirror::BisectorGeometry::Case::TwoCircles ? "TwoCircles"
                                                                        : "SingularNoReflection"},
          {"points", points},
          {"segments", segments},
          {"singular", g.singular}};
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    if (app.got_subcommand("report")) {
      if (rep_dir.empty()) {
        const char* env = std::getenv(mirror::kOutputDirEnv);
        rep_dir = env && *env ? env : "out";
      }
      return report(rep_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
