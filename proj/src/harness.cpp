#include "mirror/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace mirror {

namespace {

using nlohmann::json;

const std::set<std::string> kModes = {"simulate", "exact", "verify"};
const std::set<std::string> kSpaces = {"euclidean", "circle", "torus",  "sphere", "hyperbolic",
                                       "cycle",     "eight",  "tree",   "gasket"};
const std::set<std::string> kCouplings = {"mirror", "kc", "eight", "tree", "independent"};
const std::set<std::string> kChecks = {"maximality", "wasser", "varadhan", "nonuniqueness",
                                       "bisector-equidistance"};

// Salt separating the second component's streams from the first's.
constexpr std::uint64_t kSecondComponentSalt = 0x5deece66dULL;

template <class T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

double default_separation(const std::string& space) {
  if (space == "circle") return 0.5;
  if (space == "torus") return 1.0 / 3.0;
  if (space == "sphere") return M_PI / 2.0;
  return 1.0;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Runs body(k) for k = 0..n-1 on `threads` workers; each k is owned by
// exactly one worker, so results indexed by k do not depend on scheduling.
template <class Body>
void parallel_trials(std::int64_t n, int threads, Body&& body) {
  if (threads <= 1 || n < 2) {
    for (std::int64_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      try {
        for (;;) {
          const std::int64_t start = next.fetch_add(256);
          if (start >= n) break;
          for (std::int64_t k = start; k < std::min(n, start + 256); ++k) body(k);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Brownian path on an arbitrary increasing grid starting at 0.
Trajectory brownian_on_grid(const Space& space, const Point& x0, const std::vector<double>& times,
                            std::uint64_t seed, std::uint64_t stream) {
  Trajectory tr;
  tr.kind = Trajectory::Kind::Brownian;
  tr.seed = seed;
  tr.stream = stream;
  tr.times = times;
  CounterRng rng = seed_stream(seed, stream);
  Point x = x0;
  tr.positions.push_back(x);
  for (std::size_t k = 1; k < times.size(); ++k) {
    x = bm_increment(space, x, times[k] - times[k - 1], rng);
    tr.positions.push_back(x);
  }
  return tr;
}

std::vector<double> merged_grid(double dt, const std::vector<double>& t_grid) {
  std::vector<double> g{0.0};
  const double t_max = t_grid.back();
  const auto steps = static_cast<std::int64_t>(std::ceil(t_max / dt - 1e-9));
  for (std::int64_t k = 1; k <= steps; ++k) g.push_back(std::min(t_max, k * dt));
  for (double t : t_grid) g.push_back(t);
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  for (double t : g)
    if (out.empty() || t - out.back() > 1e-12 * std::max(1.0, t)) out.push_back(t);
    else out.back() = std::max(out.back(), t);  // snap near-duplicates onto the grid value
  return out;
}

bool flat_space(const std::string& s) { return s == "euclidean" || s == "circle" || s == "torus"; }

std::optional<double> exact_phi(const ExperimentConfig& c, const Space& space, const Point& x1,
                                const Point& x2, const FiniteChain* chain, double t) {
  if (chain) {
    const double r = std::round(t);
    if (std::abs(r - t) > 1e-12) return std::nullopt;
    return phi_exact_chain(*chain, static_cast<int>(r));
  }
  if (flat_space(c.space) || c.space == "sphere") return phi_exact(space, t, x1, x2);
  return std::nullopt;
}

CheckOutcome inequality_check(const TVCurve& survival, const std::vector<std::optional<double>>& phi) {
  CheckOutcome out{"coupling-inequality", true, json::object()};
  json rows = json::array();
  for (std::size_t k = 0; k < survival.t.size(); ++k) {
    if (!phi[k]) continue;
    const double slack = survival.value[k] - *phi[k];
    const bool ok = slack >= -3.0 * survival.se[k] - 1e-12;
    out.pass = out.pass && ok;
    rows.push_back({{"t", survival.t[k]}, {"survival", survival.value[k]}, {"phi", *phi[k]},
                    {"se", survival.se[k]}, {"pass", ok}});
  }
  out.detail["rows"] = rows;
  return out;
}

json maximality_json(const MaximalityReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"t", r.t}, {"survival", r.survival}, {"phi", r.phi},
                    {"residual", r.residual}, {"tolerance", r.tolerance}, {"pass", r.pass}});
  return {{"rows", rows}, {"max_abs_residual", rep.max_abs_residual}};
}

}  // namespace

// ------------------------------------------------------------------ config --

json ExperimentConfig::to_json() const {
  json j = {{"schema", schema},   {"mode", mode},   {"space", space},
            {"coupling", coupling}, {"check", check}, {"torus_b", torus_b},
            {"dim", dim},           {"t_grid", t_grid}, {"trials", trials},
            {"m", m},               {"laziness", laziness}, {"level", level},
            {"axis_subdivision", axis_subdivision}, {"dt", dt}, {"eps", eps},
            {"horizon", horizon},   {"output_dir", output_dir}, {"name", name},
            {"threads", threads}};
  j["separation"] = separation ? json(*separation) : json(nullptr);
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["poisson_lambda"] = poisson_lambda ? json(*poisson_lambda) : json(nullptr);
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  const std::set<std::string> known = {
      "schema", "mode", "space", "coupling", "check", "separation", "torus_b", "dim",
      "t_grid", "trials", "seed", "m", "laziness", "level", "axis_subdivision", "dt",
      "eps", "poisson_lambda", "horizon", "output_dir", "name", "threads"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config field '" + key + "'");
  if (!j.contains("schema")) throw ConfigError("config field 'schema' is required");
  c.schema = field<int>(j, "schema");
  auto opt = [&](const char* key, auto& target) {
    if (j.contains(key) && !j.at(key).is_null())
      target = field<std::decay_t<decltype(target)>>(j, key);
  };
  opt("mode", c.mode);
  opt("space", c.space);
  opt("coupling", c.coupling);
  opt("check", c.check);
  opt("torus_b", c.torus_b);
  opt("dim", c.dim);
  opt("t_grid", c.t_grid);
  opt("trials", c.trials);
  opt("m", c.m);
  opt("laziness", c.laziness);
  opt("level", c.level);
  opt("axis_subdivision", c.axis_subdivision);
  opt("dt", c.dt);
  opt("eps", c.eps);
  opt("horizon", c.horizon);
  opt("output_dir", c.output_dir);
  opt("name", c.name);
  opt("threads", c.threads);
  if (j.contains("separation") && !j.at("separation").is_null())
    c.separation = field<double>(j, "separation");
  if (j.contains("seed") && !j.at("seed").is_null()) c.seed = field<std::uint64_t>(j, "seed");
  if (j.contains("poisson_lambda") && !j.at("poisson_lambda").is_null())
    c.poisson_lambda = field<double>(j, "poisson_lambda");
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (schema != kConfigSchema)
    throw ConfigError("config schema " + std::to_string(schema) + " is not supported (expected " +
                      std::to_string(kConfigSchema) + ")");
  if (!kModes.count(mode)) throw ConfigError("mode must be simulate, exact or verify, got '" + mode + "'");
  if (!kSpaces.count(space)) throw ConfigError("unknown space '" + space + "'");
  if (!kCouplings.count(coupling)) throw ConfigError("unknown coupling '" + coupling + "'");
  if (mode == "verify" && !kChecks.count(check)) throw ConfigError("unknown check '" + check + "'");
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (horizon < 0) throw ConfigError("horizon must be >= 0");
  if (separation && !(*separation > 0.0)) throw ConfigError("separation must be positive");
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > 0.0)) throw ConfigError("t_grid entries must be positive");
    if (k > 0 && !(t_grid[k] > t_grid[k - 1])) throw ConfigError("t_grid must be strictly increasing");
  }
  const bool stochastic =
      mode == "simulate" || (mode == "verify" && check == "maximality" && !is_chain_space(space));
  if (stochastic) {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (!seed) throw ConfigError("seed is required for stochastic runs");
    if (t_grid.empty()) throw ConfigError("t_grid must not be empty");
  }
  if (mode == "exact" && t_grid.empty()) throw ConfigError("t_grid must not be empty");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

json ResultManifest::to_json() const {
  json checks_json = json::array();
  for (const auto& c : checks)
    checks_json.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return {{"config", config},   {"input_hash", input_hash}, {"checks", checks_json},
          {"outputs", outputs}, {"wall_clock_s", wall_clock_s}, {"pass", pass}};
}

std::string content_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("content_hash: SHA-1 failed");
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return os.str();
}

bool is_chain_space(const std::string& space) {
  return space == "cycle" || space == "eight" || space == "tree" || space == "gasket";
}

ChainRequest chain_request(const ExperimentConfig& c) {
  if (c.space == "cycle") return CycleSpec{c.m, c.laziness};
  if (c.space == "eight") return EightSpec{c.m};
  if (c.space == "tree") return TreeSpec{c.m};
  if (c.space == "gasket") return GasketSpec{c.level, c.axis_subdivision};
  throw CapabilityError("space '" + c.space + "' is not a chain");
}

Space make_space(const ExperimentConfig& c) {
  if (c.space == "euclidean") return Euclidean{c.dim};
  if (c.space == "circle") return Circle{};
  if (c.space == "torus") return FlatTorus{};
  if (c.space == "sphere") return Sphere2{};
  if (c.space == "hyperbolic") return Hyperbolic2{};
  return build_chain(chain_request(c)).space;
}

std::pair<Point, Point> starting_pair(const ExperimentConfig& c, const Space& space) {
  const double r = c.separation.value_or(default_separation(c.space));
  if (const auto* e = std::get_if<Euclidean>(&space)) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(e->dim), b = a;
    a(0) = -0.5 * r;
    b(0) = 0.5 * r;
    return {EuclideanPoint{a}, EuclideanPoint{b}};
  }
  if (std::holds_alternative<Circle>(space)) return {circle_point(0.0), circle_point(r)};
  if (std::holds_alternative<FlatTorus>(space)) return {torus_point(r, 0.0), torus_point(0.0, c.torus_b)};
  if (std::holds_alternative<Sphere2>(space)) {
    if (!(r < M_PI)) throw ConfigError("sphere separation must be below pi");
    return {sphere_point({std::cos(0.5 * r), -std::sin(0.5 * r), 0.0}),
            sphere_point({std::cos(0.5 * r), std::sin(0.5 * r), 0.0})};
  }
  if (std::holds_alternative<Hyperbolic2>(space))
    return {hyperbolic_point(-std::sinh(0.5 * r), 0.0), hyperbolic_point(std::sinh(0.5 * r), 0.0)};
  const FiniteChain chain = build_chain(chain_request(c));
  return {chain.states[static_cast<std::size_t>(chain.x1)],
          chain.states[static_cast<std::size_t>(chain.x2)]};
}

std::string output_directory(const ExperimentConfig& c) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return c.output_dir;
}

// -------------------------------------------------------------- simulate --

std::vector<double> simulate_coupling_times(const ExperimentConfig& c) {
  c.validate();
  if (c.t_grid.empty() || c.trials < 1 || !c.seed)
    throw ConfigError("simulation needs t_grid, trials >= 1 and a seed");
  const std::uint64_t seed = *c.seed;
  const double t_max = c.t_grid.back();
  std::vector<double> T(static_cast<std::size_t>(c.trials), kNever);

  if (is_chain_space(c.space)) {
    const FiniteChain chain = build_chain(chain_request(c));
    const int n = static_cast<int>(std::ceil(t_max - 1e-12));
    const ReflectionStructure rs =
        build_structure(chain.space, chain.states[static_cast<std::size_t>(chain.x1)],
                        chain.states[static_cast<std::size_t>(chain.x2)]);
    if (c.coupling == "kc") throw CapabilityError("kc coupling needs a Riemannian space, not " + c.space);
    if (c.coupling == "eight" && c.space != "eight")
      throw CapabilityError("eight coupling runs on the eight space only");
    if (c.coupling == "tree" && c.space != "tree")
      throw CapabilityError("tree coupling runs on the tree space only");
    parallel_trials(c.trials, c.threads, [&](std::int64_t k) {
      const auto trial = static_cast<std::uint64_t>(k);
      const Trajectory z1 = sample_chain(chain, chain.x1, n, seed, trial);
      CoupledTrajectory pair;
      if (c.coupling == "mirror") pair = mirror_run(rs, z1);
      else if (c.coupling == "eight") pair = counterexample_eight_run(z1);
      else if (c.coupling == "tree") pair = counterexample_tree_run(z1);
      else
        pair = independent_run(chain.space, z1,
                               sample_chain(chain, chain.x2, n, seed ^ kSecondComponentSalt, trial));
      T[static_cast<std::size_t>(k)] = pair.T;
    });
    return T;
  }

  const Space space = make_space(c);
  const auto [x1, x2] = starting_pair(c, space);
  if (c.coupling == "eight" || c.coupling == "tree")
    throw CapabilityError(c.coupling + " coupling runs on its graph chain only");
  if (c.coupling == "independent") return T;  // continuous components never meet
  if (c.coupling == "kc") {
    if (!std::holds_alternative<Euclidean>(space) && !std::holds_alternative<Sphere2>(space) &&
        !std::holds_alternative<Hyperbolic2>(space))
      throw CapabilityError("kc coupling needs Euclidean, sphere or hyperbolic space");
    KcOptions opt;
    opt.poisson_lambda = c.poisson_lambda;
    // With a Poisson clock the step count is random; run until the horizon.
    const auto steps = static_cast<std::int64_t>(std::ceil(t_max / (c.eps * c.eps) - 1e-9));
    parallel_trials(c.trials, c.threads, [&](std::int64_t k) {
      CounterRng rng = seed_stream(seed, static_cast<std::uint64_t>(k));
      const std::int64_t n = c.poisson_lambda ? 4 * steps + 64 : steps;
      T[static_cast<std::size_t>(k)] = kc_run(space, x1, x2, c.eps, n, rng, opt).T;
    });
    return T;
  }
  const ReflectionStructure rs = build_structure(space, x1, x2);
  if (flat_space(c.space)) {
    const std::vector<double> grid = merged_grid(c.dt, c.t_grid);
    parallel_trials(c.trials, c.threads, [&](std::int64_t k) {
      const Trajectory z1 = brownian_on_grid(space, x1, grid, seed, static_cast<std::uint64_t>(k));
      T[static_cast<std::size_t>(k)] = mirror_run(rs, z1).T;
    });
  } else {
    const auto steps = static_cast<int>(std::ceil(t_max / (c.eps * c.eps) - 1e-9));
    parallel_trials(c.trials, c.threads, [&](std::int64_t k) {
      const Trajectory z1 = sample_geodesic_walk(space, x1, c.eps, steps, seed, static_cast<std::uint64_t>(k));
      T[static_cast<std::size_t>(k)] = mirror_run(rs, z1).T;
    });
  }
  return T;
}

TVCurve simulate_survival(const ExperimentConfig& c) {
  const std::vector<double> T = simulate_coupling_times(c);
  TVCurve curve;
  curve.method = TVCurve::Method::McSurvival;
  const double n = static_cast<double>(T.size());
  for (double t : c.t_grid) {
    std::int64_t alive = 0;
    for (double tk : T) alive += tk > t + 1e-12 ? 1 : 0;
    const double p = static_cast<double>(alive) / n;
    curve.t.push_back(t);
    curve.value.push_back(p);
    curve.se.push_back(std::sqrt(p * (1.0 - p) / n));
  }
  return curve;
}

// ------------------------------------------------------------- pipelines --

namespace {

struct Context {
  const ExperimentConfig& config;
  std::filesystem::path dir;
  ResultManifest& manifest;

  std::filesystem::path out(const std::string& suffix) {
    const auto p = dir / (config.name + suffix);
    manifest.outputs.push_back(p.string());
    return p;
  }
};

void run_simulate(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const TVCurve curve = simulate_survival(c);
  std::ostringstream csv;
  csv << "t,survival_hat,se,n\n";
  for (std::size_t k = 0; k < curve.t.size(); ++k)
    csv << fmt(curve.t[k]) << ',' << fmt(curve.value[k]) << ',' << fmt(curve.se[k]) << ','
        << c.trials << '\n';
  write_text(ctx.out("_survival.csv"), csv.str());

  std::optional<FiniteChain> chain;
  Space space = Euclidean{1};
  Point x1, x2;
  if (is_chain_space(c.space)) {
    chain = build_chain(chain_request(c));
  } else {
    space = make_space(c);
    std::tie(x1, x2) = starting_pair(c, space);
  }
  std::vector<std::optional<double>> phi;
  bool any_phi = false;
  for (double t : curve.t) {
    phi.push_back(exact_phi(c, space, x1, x2, chain ? &*chain : nullptr, t));
    any_phi = any_phi || phi.back().has_value();
  }
  if (!any_phi) return;
  // Checks against a known phi use the binomial SE under that value, so an
  // all-coupled or all-alive sample is not judged with zero tolerance.
  TVCurve tested = curve;
  for (std::size_t k = 0; k < tested.t.size(); ++k)
    if (phi[k])
      tested.se[k] = std::max(tested.se[k],
                              std::sqrt(*phi[k] * (1.0 - *phi[k]) / static_cast<double>(c.trials)));
  ctx.manifest.checks.push_back(inequality_check(tested, phi));

  const bool mirror_exact_law =
      c.coupling == "mirror" && (flat_space(c.space) || (chain && chain->crossing_free));
  if (mirror_exact_law) {
    TVCurve exact;
    exact.method = TVCurve::Method::ExactKernel;
    TVCurve observed = curve;
    observed.t.clear();
    observed.value.clear();
    observed.se.clear();
    for (std::size_t k = 0; k < curve.t.size(); ++k) {
      if (!phi[k]) continue;
      exact.t.push_back(curve.t[k]);
      exact.value.push_back(*phi[k]);
      exact.se.push_back(0.0);
      observed.t.push_back(curve.t[k]);
      observed.value.push_back(curve.value[k]);
      observed.se.push_back(tested.se[k]);
    }
    const MaximalityReport rep = maximality_report(observed, exact);
    ctx.manifest.checks.push_back({"maximality", rep.pass, maximality_json(rep)});
  }
}

void run_exact(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  for (std::size_t k = 0; k < c.t_grid.size(); ++k) {
    const double t = c.t_grid[k];
    std::ostringstream csv;
    CheckOutcome check{"distribution-t" + fmt(t), true, json::object()};
    if (is_chain_space(c.space)) {
      const FiniteChain chain = build_chain(chain_request(c));
      const double r = std::round(t);
      if (std::abs(r - t) > 1e-12) throw ConfigError("chain t_grid entries must be integers");
      const Eigen::VectorXd mu = chain_distribution(chain, chain.x1, static_cast<int>(r));
      csv << "state,prob\n";
      for (Eigen::Index i = 0; i < mu.size(); ++i) csv << i << ',' << fmt(mu(i)) << '\n';
      check.detail = {{"sum", mu.sum()}};
      check.pass = std::abs(mu.sum() - 1.0) <= 1e-12;
    } else {
      const Space space = make_space(c);
      const auto [x1, x2] = starting_pair(c, space);
      csv << "y,density\n";
      const int n = 201;
      double lo = 0.0, hi = 1.0;
      if (std::holds_alternative<Euclidean>(space)) {
        lo = std::get<EuclideanPoint>(x1).x(0) - 6.0 * std::sqrt(t);
        hi = std::get<EuclideanPoint>(x1).x(0) + 6.0 * std::sqrt(t);
      } else if (std::holds_alternative<Sphere2>(space)) {
        hi = M_PI;
      } else if (std::holds_alternative<Hyperbolic2>(space)) {
        throw CapabilityError("exact: no heat kernel on the hyperbolic plane");
      }
      bool finite = true;
      for (int i = 0; i < n; ++i) {
        const double y = lo + (hi - lo) * i / (n - 1);
        Point p;
        if (std::holds_alternative<Euclidean>(space)) {
          EuclideanPoint e = std::get<EuclideanPoint>(x1);
          e.x(0) = y;
          p = e;
        } else if (std::holds_alternative<Circle>(space)) {
          p = circle_point(std::get<CirclePoint>(x1).angle + y);
        } else if (std::holds_alternative<FlatTorus>(space)) {
          const auto& q = std::get<TorusPoint>(x1).p;
          p = torus_point(q(0) + y, q(1));
        } else {
          // Great circle through x1 and x2, y = angle from x1.
          const Eigen::Vector3d a = std::get<SpherePoint>(x1).z;
          Eigen::Vector3d b = std::get<SpherePoint>(x2).z;
          b = (b - b.dot(a) * a).normalized();
          p = sphere_point(std::cos(y) * a + std::sin(y) * b);
        }
        const double dens = heat_kernel(space, t, x1, p);
        finite = finite && std::isfinite(dens) && dens >= 0.0;
        csv << fmt(y) << ',' << fmt(dens) << '\n';
      }
      check.pass = finite;
    }
    write_text(ctx.out("_exact_" + std::to_string(k) + ".csv"), csv.str());
    ctx.manifest.checks.push_back(check);
  }
}

json verify_maximality(const ExperimentConfig& c, bool& pass) {
  if (is_chain_space(c.space)) {
    const FiniteChain chain = build_chain(chain_request(c));
    const JointLaw law = staged_joint_law(chain, mirror_stages(chain), c.horizon);
    const MaximalityReport rep = maximality_report(survival_curve(law.survival), phi_curve(chain, c.horizon));
    pass = rep.pass;
    json residuals = json::array();
    for (const auto& r : rep.rows) residuals.push_back(r.residual);
    return {{"chain", chain.label}, {"residuals", residuals}, {"report", maximality_json(rep)},
            {"crossing_free", chain.crossing_free}};
  }
  ExperimentConfig sim = c;
  sim.coupling = "mirror";
  const TVCurve observed = simulate_survival(sim);
  const Space space = make_space(c);
  const auto [x1, x2] = starting_pair(c, space);
  TVCurve exact;
  exact.method = TVCurve::Method::ExactKernel;
  for (double t : c.t_grid) {
    const auto phi = exact_phi(c, space, x1, x2, nullptr, t);
    if (!phi) throw CapabilityError("maximality: no exact phi on " + c.space);
    exact.t.push_back(t);
    exact.value.push_back(*phi);
    exact.se.push_back(0.0);
  }
  const MaximalityReport rep = maximality_report(observed, exact);
  pass = rep.pass;
  json residuals = json::array();
  for (const auto& r : rep.rows) residuals.push_back(r.residual);
  return {{"residuals", residuals}, {"report", maximality_json(rep)}};
}

json verify_wasser(const ExperimentConfig& c, bool& pass) {
  const FiniteChain chain = build_chain(chain_request(c));
  json residuals = json::array(), rows = json::array();
  pass = true;
  for (int s = 0; s <= c.horizon; ++s)
    for (int t = 0; s + t <= c.horizon; ++t) {
      const WasserResult r = wasser_check(chain, s, t, 100, c.seed.value_or(1));
      pass = pass && r.pass;
      residuals.push_back(r.residual);
      rows.push_back({{"s", s}, {"t", t}, {"mirror", r.mirror_value}, {"target", r.target},
                      {"residual", r.residual}, {"worst_random_gap", r.worst_random_gap},
                      {"pass", r.pass}});
    }
  return {{"chain", chain.label}, {"residuals", residuals}, {"rows", rows}};
}

json verify_varadhan(const ExperimentConfig& c, bool& pass) {
  const Space space = make_space(c);
  const auto [x1, x2] = starting_pair(c, space);
  std::vector<double> ts(c.t_grid.rbegin(), c.t_grid.rend());
  if (ts.empty()) {
    const int last = std::holds_alternative<Sphere2>(space) ? 3 : 6;
    for (int k = 1; k <= last; ++k) ts.push_back(std::pow(10.0, -k));
  }
  const VaradhanReport rep = varadhan_check(space, x1, x2, ts);
  pass = rep.pass;
  json residuals = json::array(), rows = json::array();
  for (const auto& r : rep.rows) {
    residuals.push_back(r.deviation);
    rows.push_back({{"t", r.t}, {"value", r.value}, {"deviation", r.deviation}});
  }
  return {{"d2", rep.d2}, {"monotone", rep.monotone}, {"tolerance", rep.tolerance},
          {"residuals", residuals}, {"rows", rows}};
}

json verify_nonuniqueness(const ExperimentConfig& c, bool& pass) {
  if (c.space != "eight" && c.space != "tree")
    throw CapabilityError("nonuniqueness runs on the eight or tree chain");
  const FiniteChain chain = build_chain(chain_request(c));
  const StagedCoupling other = c.space == "eight" ? eight_stages(chain) : tree_stages(chain);
  const JointLaw mirror = staged_joint_law(chain, mirror_stages(chain), c.horizon);
  const JointLaw alt = staged_joint_law(chain, other, c.horizon);
  const double survival_gap = (mirror.survival - alt.survival).cwiseAbs().maxCoeff();
  const double joint_gap = max_joint_gap(mirror, alt);
  const double markov = std::max(markovian_contract_residual(chain, mirror_stages(chain), c.horizon),
                                 markovian_contract_residual(chain, other, c.horizon));
  const double marg = std::max(marginal_residual(chain, mirror, chain.x1, chain.x2),
                               marginal_residual(chain, alt, chain.x1, chain.x2));
  pass = survival_gap <= 1e-12 && joint_gap > 0.01 && markov <= 1e-14 && marg <= 1e-12;
  json residuals = json::array();
  for (Eigen::Index t = 0; t < mirror.survival.size(); ++t)
    residuals.push_back(mirror.survival(t) - alt.survival(t));
  return {{"chain", chain.label}, {"residuals", residuals}, {"survival_gap", survival_gap},
          {"joint_gap", joint_gap}, {"markov_residual", markov}, {"marginal_residual", marg}};
}

json verify_bisector(const ExperimentConfig& c, bool& pass) {
  const double a = c.separation.value_or(1.0 / 3.0);
  const double b = c.torus_b;
  const BisectorGeometry g = torus_bisector(a, b);
  const Space space = FlatTorus{};
  const Point x1 = torus_point(a, 0.0), x2 = torus_point(0.0, b);
  CounterRng rng = seed_stream(c.seed.value_or(0), 0);
  json residuals = json::array();
  double worst = 0.0;
  auto sample = [&](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
    double seg = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double u = c.seed ? rng.uniform() : k / 999.0;
      const Eigen::Vector2d z = p + u * (q - p);
      const Point zp = torus_point(z(0), z(1));
      seg = std::max(seg, std::abs(distance(space, zp, x1) - distance(space, zp, x2)));
    }
    worst = std::max(worst, seg);
    residuals.push_back(seg);
  };
  // TwoCircles segments run the full vertical loop q in [0, 1].
  for (const auto& s : g.segments)
    sample(g.points[static_cast<std::size_t>(s[0])], g.points[static_cast<std::size_t>(s[1])]);
  pass = worst <= 1e-12 && g.singular == (b != 0.0);
  json points = json::array();
  for (const auto& p : g.points) points.push_back({p(0), p(1)});
  return {{"case", g.kind == BisectorGeometry::Case::TwoCircles ? "TwoCircles" : "SingularNoReflection"},
          {"points", points}, {"singular", g.singular}, {"residuals", residuals},
          {"max_residual", worst}};
}

void run_verify(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  bool pass = false;
  json body;
  if (c.check == "maximality") body = verify_maximality(c, pass);
  else if (c.check == "wasser") body = verify_wasser(c, pass);
  else if (c.check == "varadhan") body = verify_varadhan(c, pass);
  else if (c.check == "nonuniqueness") body = verify_nonuniqueness(c, pass);
  else body = verify_bisector(c, pass);
  json report = {{"check", c.check}, {"params", c.to_json()}, {"pass", pass}};
  report["residuals"] = body["residuals"];
  body.erase("residuals");
  report["detail"] = body;
  write_text(ctx.out("_" + c.check + ".json"), report.dump(2) + "\n");
  ctx.manifest.checks.push_back({c.check, pass, report["detail"]});
}

}  // namespace

ResultManifest run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ResultManifest manifest;
  manifest.config = config.to_json();
  // Output location and worker count do not influence results.
  json hashed = manifest.config;
  hashed.erase("output_dir");
  hashed.erase("threads");
  manifest.input_hash = content_hash(hashed.dump());
  const std::filesystem::path dir = output_directory(config);
  std::filesystem::create_directories(dir);
  Context ctx{config, dir, manifest};
  const auto manifest_path = dir / (config.name + "_manifest.json");
  auto finish = [&] {
    manifest.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.pass = std::all_of(manifest.checks.begin(), manifest.checks.end(),
                                [](const CheckOutcome& o) { return o.pass; });
    manifest.outputs.push_back(manifest_path.string());
    write_text(manifest_path, manifest.to_json().dump(2) + "\n");
  };
  try {
    if (config.mode == "simulate") run_simulate(ctx);
    else if (config.mode == "exact") run_exact(ctx);
    else run_verify(ctx);
  } catch (const std::exception& e) {
    manifest.checks.push_back({"error", false, {{"message", e.what()}}});
    finish();
    throw;
  }
  finish();
  return manifest;
}

}  // namespace mirror
