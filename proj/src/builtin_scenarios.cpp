#include <cmath>

#include "fibershell/scenario.hpp"

namespace fshell {

namespace {

const double SQ2 = std::sqrt(0.5);

Scenario pure_shear() {
  Scenario s;
  s.name = "pure_shear";
  s.lx = s.ly = 1.0;
  s.nel_u = s.nel_v = 1;
  s.fibers = {{"constant", Vec3(SQ2, SQ2, 0)}, {"constant", Vec3(SQ2, -SQ2, 0)}};
  s.mu = 1.0;
  s.eps_L = {2.0, 2.0};
  s.eps_a = {1.0};
  s.drives = {{"boundary", "xy", "stretch_xy", {1.5}}};
  s.steps = 10;
  s.planar = true;
  s.predictor_map = true;
  s.newton_abs_tol = 1e-13;
  s.reaction_groups = {"boundary"};
  s.resultant_edges = {"umax", "vmax"};
  return s;
}

Scenario picture_frame() {
  Scenario s;
  s.name = "picture_frame";
  s.lx = s.ly = 1.0;
  s.nel_u = s.nel_v = 1;
  s.rotate_deg = 45.0;
  s.fibers = {{"constant", Vec3(1, 0, 0)}, {"constant", Vec3(0, 1, 0)}};
  s.mu = 0.0;
  s.eps_L = {0.0, 0.0};
  s.eps_a = {1.0};
  s.drives = {{"boundary", "xy", "frame_phi", {60.0}}};
  s.steps = 5;
  s.planar = true;
  s.predictor_map = true;
  s.newton_abs_tol = 1e-13;
  s.reaction_groups = {"boundary"};
  s.resultant_edges = {"vmin"};
  return s;
}

Scenario uniaxial() {
  Scenario s;
  s.name = "uniaxial";
  s.lx = 2.0;
  s.ly = 1.0;
  s.nel_u = s.nel_v = 1;
  const double n5 = 1.0 / std::sqrt(5.0);
  s.fibers = {{"constant", Vec3(2 * n5, n5, 0)}, {"constant", Vec3(2 * n5, -n5, 0)}};
  s.mu = 1.0;
  s.eps_L = {2.0, 2.0};
  s.eps_a = {1.0};
  s.fixes = {{"umin", "x"}, {"vmin", "y"}};
  s.drives = {{"umax", "x", "translate", {0.5, 0, 0}}};
  s.steps = 10;
  s.planar = true;
  s.newton_abs_tol = 1e-13;
  s.reaction_groups = {"umax"};
  s.resultant_edges = {"umax"};
  return s;
}

Scenario annulus() {
  Scenario s;
  s.name = "annulus";
  s.geometry = "quarter_annulus";
  s.ri = 0.5;
  s.ro = 1.0;
  s.nel_u = s.nel_v = 1;
  s.fibers = {{"circumferential", Vec3::UnitX()}};
  s.mu = 0.0;
  s.eps_L = {2.0};
  s.dilatation = "graded_log";
  s.dilatation_scale = 1.0;  // eps_L / 2
  s.fixes = {{"umin", "y"}, {"umax", "x"}};
  s.drives = {{"arcs", "xy", "radial_scale", {1.3}}};
  s.steps = 1;
  s.planar = true;
  s.predictor_map = true;
  s.gauss_u = 6;
  s.gauss_v = 6;
  s.newton_abs_tol = 1e-13;
  s.reaction_groups = {"umin"};
  s.resultant_edges = {"umin"};
  return s;
}

Scenario pure_bending() {
  Scenario s;
  s.name = "pure_bending";
  s.lx = 1.25;  // symmetric half of the 2.5 x 1 sheet
  s.ly = 1.0;
  s.nel_u = 8;
  s.nel_v = 4;
  s.fibers = {{"constant", Vec3(1, 0, 0)}};
  s.mu = 10.0;
  s.eps_L = {0.0};
  s.beta_n = {1.0};
  s.fixes = {{"umax", "xz"}, {"umax2", "z"}, {"all", "y"}};
  s.loads = {{"moment_out", "umin", {0.6}, 0, true}};
  s.steps = 12;
  s.newton_abs_tol = 1e-13;
  s.resultant_edges = {};
  return s;
}

Scenario bias_extension(int sample) {
  Scenario s;
  s.name = sample == 1 ? "bias_extension" : "bias_extension_unbalanced";
  s.units = "mm-N";
  s.lx = sample == 1 ? 115.0 : 150.0;
  s.ly = sample == 1 ? 230.0 : 450.0;
  s.nel_u = 16;
  s.nel_v = sample == 1 ? 32 : 48;
  s.fibers = {{"constant", Vec3(SQ2, SQ2, 0)}, {"constant", Vec3(-SQ2, SQ2, 0)}};
  s.material = "woven";
  s.woven_eps_L = 50.0;
  s.woven_beta_g1 = sample == 1 ? 4.8 : 80.0;
  s.woven_beta_g2 = sample == 1 ? 4.8 : 1600.0;  // r_b = 20 at beta_g2 = 1e3 beta_0
  s.woven_mu = 1.6e-3;
  s.woven_alpha1 = 305.0;
  s.woven_eta = 2.0e-3;
  s.woven_alpha2 = 5.4215;
  s.fixes = {{"vmin", "xy"}, {"vmax", "x"}};
  s.drives = {{"vmax", "y", "translate", {0, sample == 1 ? 40.0 : 100.0, 0}}};
  s.steps = sample == 1 ? 40 : 50;
  s.planar = true;
  s.reaction_groups = {"vmax"};
  s.fields_every = 10;
  return s;
}

Scenario torsion(bool compressible) {
  Scenario s;
  s.name = compressible ? "torsion_compressible" : "torsion";
  s.lx = 2.0;
  s.ly = 1.0;
  s.nel_u = 50;
  s.nel_v = 25;
  s.fibers = {{"constant", Vec3(SQ2, SQ2, 0)}, {"constant", Vec3(SQ2, -SQ2, 0)}};
  s.mu = 0.0;
  s.eps_L = {2000.0, 2000.0};
  s.eps_a = {1.0};
  s.beta_n = {1.0, 1.0};
  s.beta_g = {1.0, 1.0};
  s.beta_tau = {1.0, 1.0};
  s.tension_only = true;
  s.stab_e = compressible ? 5.0 : 500.0;
  s.stab_v = compressible ? 250.0 : 0.0;
  s.fixes = {{"umin", "xyz"}, {"umax", "x"}};
  s.drives = {{"umax", "yz", "rotate_x", {0.5, 0.0, 180.0}}};
  s.steps = 180;
  s.viscosity = 1.0;
  s.imperfection_sigma = 1.1e-3;
  s.seed = 1;
  s.reaction_groups = {"umin", "umax"};
  s.fields_every = 30;
  return s;
}

Scenario stab_patch() {
  Scenario s;
  s.name = "stab_patch";
  s.lx = s.ly = 1.0;
  s.nel_u = s.nel_v = 2;
  s.fibers = {{"constant", Vec3(1, 0, 0)}};
  s.mu = 1.0;
  s.eps_L = {100.0};
  s.tension_only = true;
  s.stab_e = 1.0;
  s.stab_v = 100.0;
  s.fixes = {{"umin", "x"}, {"vmin", "y"}};
  s.drives = {{"umax", "x", "translate", {-0.2, 0, 0}}};
  s.steps = 8;
  s.planar = true;
  s.reaction_groups = {"umax"};
  return s;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"pure_shear", "picture_frame", "uniaxial",
          "annulus",    "pure_bending",  "bias_extension",
          "bias_extension_unbalanced",   "torsion",
          "torsion_compressible",        "stab_patch"};
}

Scenario builtin_scenario(const std::string& name) {
  if (name == "pure_shear") return pure_shear();
  if (name == "picture_frame") return picture_frame();
  if (name == "uniaxial") return uniaxial();
  if (name == "annulus") return annulus();
  if (name == "pure_bending") return pure_bending();
  if (name == "bias_extension") return bias_extension(1);
  if (name == "bias_extension_unbalanced") return bias_extension(2);
  if (name == "torsion") return torsion(false);
  if (name == "torsion_compressible") return torsion(true);
  if (name == "stab_patch") return stab_patch();
  throw FshellError("unknown scenario '" + name + "' (see `fshell list`)");
}

}  // namespace fshell
