// command-line front end: run scenarios, execute the verification suite,
// list the scenario catalog, and render reports from saved results.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "flowlab/io.hpp"

namespace fl = flowlab;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalAbort = 3;

struct NumericalAbort : fl::Error {
  using Error::Error;
};

std::map<std::string, double> parse_overrides(const std::vector<std::string>& kvs) {
  std::map<std::string, double> out;
  for (const std::string& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw fl::ConfigError("override must look like key=value: '" + kv + "'");
    try {
      size_t used = 0;
      double v = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing junk");
      out[kv.substr(0, eq)] = v;
    } catch (const std::exception&) {
      throw fl::ConfigError("override value is not a number: '" + kv + "'");
    }
  }
  return out;
}

// --- run: trajectory CSVs per built-in scenario --------------------------------------------

void run_shrinking_sphere(const fl::RunConfig& cfg, std::ostream& os) {
  double r0 = 1.0, t_b = 0.05;
  fl::SphereMcfTrajectory traj =
      fl::run_sphere_mcf([r0](double) { return r0; }, 0.0, t_b, 1e-5, 256, 500);
  if (traj.blown_up) throw NumericalAbort("sphere flow blew up");
  os << "t,r_num,r_exact,rel_err\n";
  fl::Immersion fam = traj.surface_family();
  for (double t : traj.times) {
    double r_num = fam.embed(1.0, 2.0, t).norm();
    double r_exact = std::sqrt(r0 * r0 - 4.0 * t);
    os << fl::fmt_double(t) << ',' << fl::fmt_double(r_num) << ',' << fl::fmt_double(r_exact)
       << ',' << fl::fmt_double(std::abs(r_num / r_exact - 1.0)) << '\n';
  }
}

void run_huisken(const fl::RunConfig& cfg, std::ostream& os, bool perturbed) {
  double tau0 = 0.25, t_b = perturbed ? 0.06 : 0.1, eps = perturbed ? 1e-2 : 0.0;
  fl::SphereMcfTrajectory traj = fl::run_sphere_mcf(
      [eps](double th) { return 1.0 + eps * fl::legendre_p(2, std::cos(th)); }, 0.0, t_b,
      2e-4, 96, 25);
  if (traj.blown_up) throw NumericalAbort("sphere flow blew up");
  fl::AmbientFamily amb = fl::flat_euclidean_ambient(3);
  amb.f = fl::gaussian_shrinker_potential(tau0);
  amb.has_f = true;
  fl::Immersion fam = traj.surface_family();
  fl::ParamGrid2 grid{fl::AxisRule::gauss_polar(16),
                      fl::AxisRule::periodic_uniform(0, 2 * fl::kPi, 8)};
  os << "t,tau,scaled_weighted_area\n";
  for (double t : traj.times) {
    double q = fl::huisken_quantity(fam, amb, grid, "shrinking", tau0 - t, t);
    os << fl::fmt_double(t) << ',' << fl::fmt_double(tau0 - t) << ',' << fl::fmt_double(q)
       << '\n';
  }
}

void run_bowl_harnack(const fl::RunConfig& cfg, std::ostream& os) {
  fl::AmbientFamily amb = fl::flat_euclidean_ambient(3);
  fl::ScalarField fbar = fl::linear_translator_potential(-1.0, 2);
  amb.f = fbar;
  amb.has_f = true;
  fl::Immersion imm = fl::bowl_surface(4.0);
  os << "t,sup_Z_ext\n";
  for (double t : {0.0, 0.1, 0.2, 0.3, 0.4}) {
    double sup = 0;
    for (double rho : {0.5, 1.0, 1.6})
      for (double ph : {0.3, 2.1}) {
        fl::InducedPackage pkg = fl::induced_package(imm, amb.g, amb.chart, rho, ph, t);
        fl::Vec V = -fl::tangential_gradient(amb, fbar, pkg, t);
        sup = std::max(sup, std::abs(fl::harnack_Z(imm, amb, rho, ph, t, V, true, 1e-3)));
      }
    os << fl::fmt_double(t) << ',' << fl::fmt_double(sup) << '\n';
  }
}

void run_warped(const fl::RunConfig& cfg, std::ostream& os) {
  fl::WarpedHeatPipeline pl = fl::make_warped_pipeline(2.0, 0.25, 0.15, 0.4, 0.03, 96, true);
  if (pl.rf->blown_up) throw NumericalAbort("warped flow blew up");
  fl::AmbientState st = fl::warped_half_state(pl);
  os << "t,action,heat_mass\n";
  for (size_t s = 0; s < pl.times.size(); s += 4)
    os << fl::fmt_double(pl.times[s]) << ','
       << fl::fmt_double(fl::action_I(st, pl.times[s]).value) << ','
       << fl::fmt_double(fl::pipeline_mass(pl, s)) << '\n';
}

int cmd_run(const std::string& config_path) {
  fl::RunConfig cfg = fl::load_run_config(config_path);
  for (const auto& [k, v] : cfg.overrides)
    if (fl::tolerance_table().find(k) == fl::tolerance_table().end() &&
        k.rfind("resolution.", 0) != 0)
      throw fl::ConfigError("unknown override key: '" + k + "'");
  fs::create_directories(cfg.output_dir);
  std::string path = cfg.output_dir + "/" + cfg.scenario + ".csv";
  std::ostringstream body;
  if (cfg.scenario == "shrinking-sphere") run_shrinking_sphere(cfg, body);
  else if (cfg.scenario == "huisken-shrinker") run_huisken(cfg, body, false);
  else if (cfg.scenario == "perturbed-sphere") run_huisken(cfg, body, true);
  else if (cfg.scenario == "bowl-translator" || cfg.scenario == "bowl-harnack")
    run_bowl_harnack(cfg, body);
  else if (cfg.scenario == "warped-interval-torus") run_warped(cfg, body);
  else throw fl::ConfigError("no run pipeline for scenario: '" + cfg.scenario + "'");
  fl::write_text(path, body.str());
  std::cout << "wrote " << path << "\n";
  return kExitOk;
}

// --- verify ------------------------------------------------------------------------------------

int cmd_verify(const std::vector<std::string>& only, const std::vector<std::string>& raw_over,
               const std::string& out_dir) {
  fl::VerifyOptions opt;
  opt.overrides = parse_overrides(raw_over);
  std::vector<fl::CheckReport> reports = fl::run_checks(only, opt);
  fs::create_directories(out_dir);
  fl::write_text(out_dir + "/results.json", fl::results_to_json(reports).dump(2) + "\n");
  fl::write_text(out_dir + "/report.md", fl::render_markdown(reports));
  bool all_ok = true;
  for (const fl::CheckReport& r : reports) {
    std::string tag = r.verdict == "pass" ? "PASS" :
                      r.verdict == "warn" ? "WARN" :
                      r.verdict == "not-checked" ? "SKIP" : "FAIL";
    std::cout << tag << "  " << r.check_id;
    if (r.residual_sup > 0) std::cout << "  sup=" << fl::fmt_double(r.residual_sup);
    if (std::isfinite(r.convergence_order))
      std::cout << "  order=" << fl::fmt_double(r.convergence_order);
    std::cout << "  (" << fl::fmt_double(r.runtime_s) << "s)\n";
    if (r.verdict == "fail") {
      all_ok = false;
      for (const auto& [k, v] : r.details) {
        auto tol = r.tolerances.find(k);
        if (tol != r.tolerances.end())
          std::cout << "      " << k << " = " << fl::fmt_double(v)
                    << "  (tol " << fl::fmt_double(tol->second) << ")\n";
      }
      if (!r.note.empty()) std::cout << "      " << r.note << "\n";
    }
  }
  std::cout << "results: " << out_dir << "/results.json\n";
  return all_ok ? kExitOk : kExitCheckFailure;
}

// --- list-scenarios / report ---------------------------------------------------------------

int cmd_list_scenarios() {
  for (const fl::ScenarioSpec& s : fl::scenario_catalog()) {
    std::cout << s.name << "  (ambient " << s.ambient_kind << ", surface " << s.surface_kind;
    if (s.potential_kind != "zero") std::cout << ", potential " << s.potential_kind;
    std::cout << ")\n";
  }
  return kExitOk;
}

int cmd_report(const std::string& results_path, bool as_csv) {
  std::vector<fl::CheckReport> reports = fl::load_results(results_path);
  std::cout << (as_csv ? fl::render_csv(reports) : fl::render_markdown(reports));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical verification lab for coupled geometric flows"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "run a scenario and write trajectory CSVs");
  run->add_option("config", config_path, "JSON config file")->required();

  std::vector<std::string> only, overrides;
  std::string out_dir = "out";
  bool all = false;
  CLI::App* verify = app.add_subcommand("verify", "execute the verification suite");
  verify->add_flag("--all", all, "run every check (default when --only is absent)");
  verify->add_option("--only", only, "run only the named checks")->delimiter(',');
  verify->add_option("--override", overrides, "tolerance/resolution override key=value");
  verify->add_option("--output", out_dir, "output directory");

  app.add_subcommand("list-scenarios", "print the scenario catalog");

  std::string results_path;
  bool report_csv = false;
  CLI::App* report = app.add_subcommand("report", "render a saved results file");
  report->add_option("results", results_path, "results.json from a verify run")->required();
  report->add_flag("--csv", report_csv, "emit CSV instead of markdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (verify->parsed()) {
      if (all && !only.empty())
        throw fl::ConfigError("--all and --only are mutually exclusive");
      return cmd_verify(only, overrides, out_dir);
    }
    if (report->parsed()) return cmd_report(results_path, report_csv);
    return cmd_list_scenarios();
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumericalAbort;
  } catch (const fl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}
