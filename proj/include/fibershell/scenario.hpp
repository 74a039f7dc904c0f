#ifndef FIBERSHELL_SCENARIO_HPP
#define FIBERSHELL_SCENARIO_HPP

#include <map>
#include <string>
#include <vector>

#include "fibershell/solver.hpp"

namespace fshell {

// A benchmark run in the flat key-value text format. Sections: geometry,
// fibers, material, constraints, schedule, output. See scenarios/ for
// annotated examples of every key.
struct Scenario {
  std::string name;
  std::string units = "L0-eps0";

  // [geometry]
  std::string geometry = "rect";  // rect | quarter_annulus
  double lx = 1.0, ly = 1.0;
  double ri = 0.5, ro = 1.0;
  int degree_u = 2, degree_v = 2;
  int nel_u = 1, nel_v = 1;
  double rotate_deg = 0.0;  // in-plane rotation of the reference patch

  // [fibers] one entry per family: "constant x y z" or "circumferential"
  struct FiberSpec {
    std::string kind = "constant";
    Vec3 dir = Vec3::UnitX();
    bool operator==(const FiberSpec&) const = default;
  };
  std::vector<FiberSpec> fibers;

  // [material]
  std::string material = "simple";  // simple | woven
  double mu = 0.0;
  std::vector<double> eps_L, beta_n, beta_g, beta_tau;
  std::vector<double> eps_a;  // upper-triangle pairs, row-major
  std::string dilatation = "none";  // none | graded_log <scale>
  double dilatation_scale = 0.0;
  double woven_eps_L = 0.0, woven_beta_g1 = 0.0, woven_beta_g2 = 0.0;
  double woven_mu = 0.0, woven_alpha1 = 0.0, woven_eta = 0.0, woven_alpha2 = 0.0;
  bool tension_only = false;
  double stab_e = 0.0, stab_v = 0.0;

  // [constraints]
  struct FixSpec {
    std::string target;  // umin|umax|vmin|vmax|boundary|arcs|all
    std::string comps;   // subset of "xyz"
    bool operator==(const FixSpec&) const = default;
  };
  struct DriveSpec {
    std::string target;
    std::string comps;
    std::string kind;  // translate | stretch_xy | frame_phi | radial_scale | rotate_x
    std::vector<double> args;
    bool operator==(const DriveSpec&) const = default;
  };
  struct LoadLine {
    std::string kind;  // pressure | body | traction | moment_out | moment_in | corner
    std::string target;
    std::vector<double> args;
    int family = 0;
    bool live = false;
    bool operator==(const LoadLine&) const = default;
  };
  std::vector<FixSpec> fixes;
  std::vector<DriveSpec> drives;
  std::vector<LoadLine> loads;

  // [schedule]
  int steps = 1;
  double viscosity = 0.0;
  double imperfection_sigma = 0.0;
  unsigned long long seed = 0;
  bool planar = false;
  int gauss_u = 0, gauss_v = 0;
  double newton_tol = 1e-9;
  double newton_abs_tol = 1e-11;
  bool predictor_map = false;  // seed free nodes with the first drive's map

  // [output]
  std::vector<std::string> reaction_groups;  // constraint targets to report
  std::vector<std::string> resultant_edges;  // stress line integrals
  int fields_every = 0;                      // VTK snapshot period (0 = off)

  bool operator==(const Scenario&) const = default;

  Model to_model() const;
  NewtonSettings to_settings() const;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);
std::string serialize_scenario(const Scenario& s);

// registry of built-in benchmark scenarios
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

}  // namespace fshell

#endif
