// chc: verification driver for constant-principal-curvature hypersurfaces in
// the complex hyperbolic plane. Subcommands: verify, scan, jacobi-check,
// solve-system, classify. Reports are JSON with sorted keys (deterministic for
// a fixed config and seed); scans also emit CSV.
//
// Exit codes: 0 all checks pass / classified; 1 check failure / Unclassified;
// 2 usage, config or input parse error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chc/classifier.hpp"
#include "chc/hypersurfaces.hpp"
#include "chc/jacobi.hpp"

using json = nlohmann::json;
using namespace chc;

namespace {

struct RunConfig {
  double tol = 1e-5;
  int grid = 3;
  unsigned seed = 20250824;
  double ode_tol = 1e-12;
  std::string out;

  void apply_file(const std::string& path, const CLI::App& app) {
    std::ifstream is(path);
    if (!is) throw CLI::ValidationError("--config", "cannot open " + path);
    json j;
    try {
      is >> j;
    } catch (const json::exception& e) {
      throw CLI::ValidationError("--config", e.what());
    }
    // flags win over the file, the file wins over defaults
    if (j.contains("tol") && app.count("--tol") == 0) tol = j["tol"].get<double>();
    if (j.contains("grid") && app.count("--grid") == 0) grid = j["grid"].get<int>();
    if (j.contains("seed") && app.count("--seed") == 0) seed = j["seed"].get<unsigned>();
    if (j.contains("ode_tol") && app.count("--ode-tol") == 0)
      ode_tol = j["ode_tol"].get<double>();
    if (j.contains("out") && app.count("--out") == 0) out = j["out"].get<std::string>();
  }

  std::string out_path(const std::string& fallback_name) const {
    if (!out.empty()) return out;
    if (const char* dir = std::getenv("CHC_OUT_DIR"))
      return std::string(dir) + "/" + fallback_name;
    return {};
  }
};

struct Check {
  std::string name;
  json expected;
  json actual;
  double tolerance = 0;
  bool pass = false;
};

struct Report {
  std::string command;
  json params = json::object();
  std::vector<Check> checks;
  json extra = json::object();

  void add(const std::string& name, double expected, double actual, double tol) {
    checks.push_back({name, expected, actual, tol, std::abs(actual - expected) <= tol});
  }
  void add_bound(const std::string& name, double actual, double tol) {
    checks.push_back({name, 0.0, actual, tol, std::abs(actual) <= tol});
  }
  void add_match(const std::string& name, const std::string& expected,
                 const std::string& actual) {
    checks.push_back({name, expected, actual, 0.0, expected == actual});
  }

  bool overall() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  json to_json() const {
    json j;
    j["command"] = command;
    j["params"] = params;
    j["checks"] = json::array();
    for (const auto& c : checks)
      j["checks"].push_back({{"name", c.name},
                             {"expected", c.expected},
                             {"actual", c.actual},
                             {"tolerance", c.tolerance},
                             {"pass", c.pass}});
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    j["overall"] = overall() ? "pass" : "fail";
    return j;
  }
};

int emit(const Report& rep, const RunConfig& cfg, const std::string& fallback_name) {
  const std::string text = rep.to_json().dump(2) + "\n";
  std::cout << text;
  const std::string path = cfg.out_path(fallback_name);
  if (!path.empty()) {
    std::ofstream os(path);
    if (!os) {
      std::cerr << "error: cannot write " << path << "\n";
      return 2;
    }
    os << text;
  }
  return rep.overall() ? 0 : 1;
}

json vec_to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

// ---------------------------------------------------------------------------

int cmd_verify(const std::string& family, std::optional<double> radius, const RunConfig& cfg) {
  Report rep;
  rep.command = "verify";
  rep.params = {{"family", family}, {"grid", cfg.grid}};

  HypersurfacePatch patch;
  Vec3 oracle;
  std::string expected_family;
  std::optional<double> expected_radius;
  double oracle_tol = cfg.tol;

  if (family == "sphere") {
    const double r = radius.value_or(1.0);
    patch = geodesic_sphere(r);
    oracle = sphere_oracle(r);
    expected_family = "GeodesicSphere";
    expected_radius = r;
    rep.params["radius"] = r;
  } else if (family == "horosphere") {
    patch = horosphere();
    oracle = horosphere_oracle();
    expected_family = "Horosphere";
  } else if (family == "tube-ch1") {
    const double r = radius.value_or(1.0);
    patch = tube(CoreKind::CH1, r);
    oracle = tube_oracle(CoreKind::CH1, r);
    expected_family = "TubeCH1";
    expected_radius = r;
    rep.params["radius"] = r;
  } else if (family == "tube-rh2") {
    const double r = radius.value_or(1.0);
    patch = tube(CoreKind::RH2, r);
    oracle = tube_oracle(CoreKind::RH2, r);
    expected_family = "TubeRH2";
    expected_radius = r;
    rep.params["radius"] = r;
  } else if (family == "w3") {
    patch = ruled_W3();
    oracle = Vec3(-0.5, 0.0, 0.5);
    oracle_tol = std::max(oracle_tol, 1e-4);
    expected_family = "RuledW3";
  } else if (family == "w3-equidistant") {
    const double r = radius.value_or(0.8472979);
    const double l3 = 0.5 * std::tanh(r / 2);
    FamilyData f = family_data(l3);
    patch = displace_patch(ruled_W3(), -r);
    oracle = Vec3(f.lambda[0], f.lambda[2], f.lambda[1]);  // ascending
    oracle_tol = std::max(oracle_tol, 1e-4);
    expected_family = "WEquidistant";
    expected_radius = r;
    rep.params["radius"] = r;
  } else {
    std::cerr << "error: unknown family '" << family << "'\n";
    return 2;
  }

  patch.grid = {cfg.grid, cfg.grid, cfg.grid};

  Vec3 lo = Vec3::Constant(1e300), hi = Vec3::Constant(-1e300);
  double worst_bnorm = 0;
  for (const Vec3& u : patch.grid_nodes()) {
    ShapeOperatorResult so = shape_operator(patch, u);
    lo = lo.cwiseMin(so.data.lambdas);
    hi = hi.cwiseMax(so.data.lambdas);
    worst_bnorm = std::max(worst_bnorm, std::abs(so.data.b.squaredNorm() - 1));
  }
  rep.add_bound("constancy_spread", (hi - lo).maxCoeff(), 1e-5);
  rep.add_bound("b_unit_norm", worst_bnorm, 1e-8);

  ShapeOperatorResult so = shape_operator(patch, patch.center());
  rep.add_bound("oracle_match", (so.data.lambdas - oracle).cwiseAbs().maxCoeff(), oracle_tol);

  ClassificationResult cls = classify(so.data);
  rep.add_match("classified_family", expected_family, to_string(cls.family));
  if (expected_radius) {
    rep.add("classified_radius", std::abs(*expected_radius),
            cls.radius ? std::abs(*cls.radius) : -1.0, 1e-3);
  }

  rep.extra["principal_data"] = {{"lambda", vec_to_json(so.data.lambdas)},
                                 {"b", vec_to_json(so.data.b)},
                                 {"distinct_clusters",
                                  cluster_eigenvalues(so.data.lambdas).size()}};
  return emit(rep, cfg, "verify.json");
}

int cmd_scan(double l3_min, double l3_max, int n, const RunConfig& cfg) {
  if (!(l3_min < l3_max) || l3_min <= -0.5 || l3_max >= 0.5 || n < 2) {
    std::cerr << "error: scan interval must lie inside (-1/2, 1/2) with n >= 2\n";
    return 2;
  }
  Report rep;
  rep.command = "scan";
  rep.params = {{"lambda3_min", l3_min}, {"lambda3_max", l3_max}, {"n", n}};

  std::ostringstream csv;
  csv << "lambda3,lambda1,lambda2,b1sq,b2sq,x1,x2,x3,max_residual\n";
  double worst = 0;
  for (int k = 0; k < n; ++k) {
    const double l3 = l3_min + (l3_max - l3_min) * k / double(n - 1);
    FamilyData f = family_data(l3);
    const double res = detail::max_abs(residual_report(f.lambda, f.bsq));
    worst = std::max(worst, res);
    csv << l3 << ',' << f.lambda[0] << ',' << f.lambda[1] << ',' << f.bsq[0] << ','
        << f.bsq[1] << ',' << f.x[0] << ',' << f.x[1] << ',' << f.x[2] << ',' << res << '\n';
  }
  rep.add_bound("max_relation_residual", worst, 1e-10);
  rep.extra["rows"] = n;

  std::string csv_path = cfg.out_path("scan.csv");
  if (!csv_path.empty() && csv_path.size() > 5 && csv_path.ends_with(".json"))
    csv_path = csv_path.substr(0, csv_path.size() - 5) + ".csv";
  if (csv_path.empty()) csv_path = "scan.csv";
  {
    std::ofstream os(csv_path);
    if (!os) {
      std::cerr << "error: cannot write " << csv_path << "\n";
      return 2;
    }
    os << csv.str();
  }
  rep.extra["csv"] = csv_path;

  std::cout << rep.to_json().dump(2) << "\n";
  return rep.overall() ? 0 : 1;
}

int cmd_jacobi_check(std::optional<double> lambda3, const RunConfig& cfg) {
  Report rep;
  rep.command = "jacobi-check";

  OdeOptions ode;
  ode.rel_tol = cfg.ode_tol;
  ode.abs_tol = cfg.ode_tol / 10;

  // ODE vs closed form on synthetic principal data at the origin
  std::mt19937 rng(cfg.seed);
  std::uniform_real_distribution<double> U(-0.9, 0.9);
  AmbientPoint o;
  const Vec4 e1(0.5, 0, 0, 0), e2(0, 0.5, 0, 0), e3(0, 0, 0.5, 0);
  double worst_ode = 0;
  for (int k = 0; k < 50; ++k) {
    const double lam = U(rng), b1 = U(rng);
    const Vec4 v = b1 * e2 + std::sqrt(1 - b1 * b1) * e3;
    JacobiInput in{Tangent(o, v), Tangent(o, lam * v), Tangent(o, e1)};
    for (double t : {0.5, 1.0, 2.0}) {
      JacobiValue jv = jacobi_integrate(in, t, ode);
      Tangent cf = jacobi_closed_form(in, lam, t, ode);
      worst_ode = std::max(worst_ode, (jv.zeta.v - cf.v).cwiseAbs().maxCoeff());
    }
  }
  rep.add_bound("ode_vs_closed_form", worst_ode, 1e-8);

  if (lambda3) {
    rep.params["lambda3"] = *lambda3;
    DisplacementFrame fr = family_frame(*lambda3);
    DisplacementMatrices m = build_D(fr, fr.r);
    DCReport dc = verify_DC_identities(fr);
    rep.add("det_D", std::pow(1 / std::cosh(fr.r / 2), 3), m.D.determinant(), 1e-10);
    rep.add_bound("dc_identities", dc.max_abs(), 1e-9);
    rep.extra["frame"] = {{"r", fr.r},
                          {"lambda", vec_to_json(fr.lambda)},
                          {"b", vec_to_json(fr.b)},
                          {"det_D", m.D.determinant()}};
  } else {
    double worst_dc = 0;
    for (int k = 0; k < 20; ++k) {
      const double l3 = -0.47 + 0.94 * k / 19.0;
      if (std::abs(l3) < 1e-3) continue;
      worst_dc = std::max(worst_dc, verify_DC_identities(family_frame(l3)).max_abs());
    }
    rep.add_bound("dc_identities_grid", worst_dc, 1e-9);
  }
  return emit(rep, cfg, "jacobi-check.json");
}

int cmd_solve_system(double lambda3, const RunConfig& cfg) {
  Report rep;
  rep.command = "solve-system";
  rep.params = {{"lambda3", lambda3}, {"seed", cfg.seed}};

  FamilyData f;
  try {
    f = family_data(lambda3);
  } catch (const ClassifierError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  QuadraticSystem sys = build_system(CurvatureTriple(f.lambda));
  SolveOptions opt;
  opt.seed = cfg.seed;
  SolutionSet set = solve_system(sys, opt);

  json roots = json::array();
  double family_root_dist = 1e300;
  for (const auto& r : set.roots) {
    roots.push_back({{"x", vec_to_json(r.x)}, {"residual", r.residual}});
    family_root_dist = std::min(family_root_dist, (r.x - f.x).norm());
  }
  rep.extra["roots"] = roots;
  rep.extra["root_count"] = set.roots.size();
  rep.add_bound("contains_family_root", family_root_dist, 1e-7);
  rep.add_bound("root_count_bezout", set.roots.size() <= 8 ? 0.0 : 1.0, 0.5);
  return emit(rep, cfg, "solve-system.json");
}

int cmd_classify(const std::string& input, const RunConfig& cfg) {
  json j;
  {
    std::ifstream is(input);
    if (!is) {
      std::cerr << "error: cannot open " << input << "\n";
      return 2;
    }
    try {
      is >> j;
    } catch (const json::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  Vec3 lambda, b;
  try {
    if (!j.contains("lambda") || !j.contains("b") || j["lambda"].size() != 3 ||
        j["b"].size() != 3)
      throw std::runtime_error("expected {\"lambda\": [3 reals], \"b\": [3 reals]}");
    for (int i = 0; i < 3; ++i) {
      lambda[i] = j["lambda"][i].get<double>();
      b[i] = j["b"][i].get<double>();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  ClassificationResult cls = classify(lambda, b);
  Report rep;
  rep.command = "classify";
  rep.params = {{"input", input}, {"lambda", vec_to_json(lambda)}, {"b", vec_to_json(b)}};
  rep.add_match("classified", "classified",
                cls.family == Family::Unclassified ? "unclassified" : "classified");
  rep.extra["family"] = to_string(cls.family);
  if (cls.radius) rep.extra["radius"] = *cls.radius;
  rep.extra["residuals"] = json(cls.residuals);
  return emit(rep, cfg, "classify.json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification driver for constant-principal-curvature hypersurfaces in CH^2"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_file;
  app.add_option("--config", config_file, "JSON config file (flags take precedence)");

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--tol", cfg.tol, "base tolerance for checks");
    sub->add_option("--grid", cfg.grid, "per-axis grid size")->check(CLI::Range(2, 20));
    sub->add_option("--seed", cfg.seed, "seed for multistart / random suites");
    sub->add_option("--ode-tol", cfg.ode_tol, "relative tolerance of the ODE integrator");
    sub->add_option("--out,-o", cfg.out, "output file path");
  };

  std::string family;
  std::optional<double> radius;
  CLI::App* verify = app.add_subcommand("verify", "build a model family and verify it");
  verify->add_option("--family", family, "model family")
      ->required()
      ->check(CLI::IsMember(
          {"sphere", "horosphere", "tube-ch1", "tube-rh2", "w3", "w3-equidistant"}));
  verify->add_option("--radius", radius, "radius / displacement parameter");
  add_common(verify);

  double l3_min = -0.49, l3_max = 0.49;
  int scan_n = 99;
  CLI::App* scan = app.add_subcommand("scan", "scan the one-parameter family over lambda3");
  scan->add_option("--lambda3-min", l3_min, "lower end of the lambda3 interval");
  scan->add_option("--lambda3-max", l3_max, "upper end of the lambda3 interval");
  scan->add_option("--n", scan_n, "number of samples");
  add_common(scan);

  std::optional<double> jc_lambda3;
  CLI::App* jc = app.add_subcommand("jacobi-check", "Jacobi-field and D/C identity suite");
  jc->add_option("--lambda3", jc_lambda3, "detailed report for a single family frame");
  add_common(jc);

  double ss_lambda3 = 0.0;
  CLI::App* ss = app.add_subcommand("solve-system", "roots of the quadratic system");
  ss->add_option("--lambda3", ss_lambda3, "family parameter")->required();
  add_common(ss);

  std::string classify_input;
  CLI::App* cl = app.add_subcommand("classify", "classify principal data from a JSON file");
  cl->add_option("--input,-i", classify_input, "path to {\"lambda\": [...], \"b\": [...]}")
      ->required();
  add_common(cl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message / help
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (!config_file.empty()) {
      const CLI::App* sub = app.get_subcommands().front();
      cfg.apply_file(config_file, *sub);
    }
    if (verify->parsed()) return cmd_verify(family, radius, cfg);
    if (scan->parsed()) return cmd_scan(l3_min, l3_max, scan_n, cfg);
    if (jc->parsed()) return cmd_jacobi_check(jc_lambda3, cfg);
    if (ss->parsed()) return cmd_solve_system(ss_lambda3, cfg);
    if (cl->parsed()) return cmd_classify(classify_input, cfg);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
