#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "fibershell/bench.hpp"

namespace {

std::string default_outdir(const std::string& scenario_name) {
  if (const char* env = std::getenv("FSHELL_OUT_DIR")) return std::string(env) + "/" + scenario_name;
  return "out/" + scenario_name;
}

fshell::Scenario resolve(const std::string& arg) {
  for (const std::string& n : fshell::builtin_scenario_names())
    if (n == arg) return fshell::builtin_scenario(n);
  return fshell::load_scenario_file(arg);
}

int cmd_run(const std::string& what, const std::string& mesh, int steps, int gauss,
            unsigned long long seed, bool seed_given, std::string out, double tol) {
  fshell::Scenario s = resolve(what);
  if (!mesh.empty()) {
    const size_t x = mesh.find('x');
    if (x == std::string::npos) throw fshell::FshellError("--mesh expects NxM");
    s.nel_u = std::stoi(mesh.substr(0, x));
    s.nel_v = std::stoi(mesh.substr(x + 1));
  }
  if (steps > 0) s.steps = steps;
  if (gauss > 0) s.gauss_u = s.gauss_v = gauss;
  if (seed_given) s.seed = seed;
  if (tol > 0) s.newton_tol = tol;
  if (out.empty()) out = default_outdir(s.name);

  const fshell::RunResult rr = fshell::run_scenario(s, out);
  std::cout << "scenario " << s.name << ": " << (rr.traj.completed ? "completed" : "FAILED")
            << " (" << rr.traj.steps.size() << " steps)\n";
  if (!rr.comparisons.empty())
    std::cout << "  max oracle relative error: " << rr.max_oracle_rel_error() << "\n";
  for (const std::string& n : rr.notes) std::cout << "  note: " << n << "\n";
  std::cout << "  outputs in " << out << "\n";
  return rr.traj.completed ? 0 : 1;
}

int cmd_verify() {
  using namespace fshell;
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, double err) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "  (rel err " << err << ")\n";
    if (!ok) ++failures;
  };

  {
    Scenario s = builtin_scenario("pure_shear");
    s.steps = 2;
    const RunResult rr = run_scenario(s);
    check("pure shear vs closed form", rr.traj.completed && rr.max_oracle_rel_error() < 1e-10,
          rr.max_oracle_rel_error());
  }
  {
    Scenario s = builtin_scenario("picture_frame");
    s.steps = 2;
    const RunResult rr = run_scenario(s);
    check("picture frame vs closed form", rr.traj.completed && rr.max_oracle_rel_error() < 1e-10,
          rr.max_oracle_rel_error());
  }
  {
    Scenario s = builtin_scenario("uniaxial");
    s.steps = 4;
    const RunResult rr = run_scenario(s);
    check("uniaxial vs bisection oracle", rr.traj.completed && rr.max_oracle_rel_error() < 1e-9,
          rr.max_oracle_rel_error());
  }
  {
    Scenario s = builtin_scenario("annulus");
    const RunResult rr = run_scenario(s);
    check("annulus vs closed form", rr.traj.completed && rr.max_oracle_rel_error() < 1e-10,
          rr.max_oracle_rel_error());
  }
  std::cout << (failures == 0 ? "verify: all checks passed\n" : "verify: FAILURES\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fibershell: isogeometric Kirchhoff-Love shells with in-plane fiber bending"};
  app.require_subcommand(1);

  std::string what, mesh, out;
  int steps = 0, gauss = 0;
  unsigned long long seed = 0;
  double tol = 0;

  CLI::App* run = app.add_subcommand("run", "run a scenario (built-in name or file path)");
  run->add_option("scenario", what, "scenario name or file")->required();
  run->add_option("--mesh", mesh, "element grid NxM");
  run->add_option("--steps", steps, "number of load steps");
  run->add_option("--gauss", gauss, "Gauss points per direction");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "imperfection seed");
  run->add_option("--out", out, "output directory");
  run->add_option("--tol", tol, "Newton relative tolerance");

  CLI::App* list = app.add_subcommand("list", "list built-in scenarios");
  CLI::App* verify = app.add_subcommand("verify", "run the quick oracle verification suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(what, mesh, steps, gauss, seed, seed_opt->count() > 0, out, tol);
    if (list->parsed()) {
      for (const std::string& n : fshell::builtin_scenario_names()) std::cout << n << "\n";
      return 0;
    }
    if (verify->parsed()) return cmd_verify();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
