#include "fibershell/bench.hpp"

#include <cmath>
#include <filesystem>

namespace fshell {

namespace {

double control_parameter(const Scenario& s, double t) {
  if (s.name == "pure_shear") return 1.0 + t * (s.drives.at(0).args.at(0) - 1.0);
  if (s.name == "picture_frame") return 45.0 + t * (s.drives.at(0).args.at(0) - 45.0);
  if (s.name == "uniaxial") return t * s.drives.at(0).args.at(0);
  if (s.name == "annulus") return 1.0 + t * (s.drives.at(0).args.at(0) - 1.0);
  if (s.name == "pure_bending") return t * s.loads.at(0).args.at(0);
  if (s.name.rfind("bias_extension", 0) == 0) return t * s.drives.at(0).args.at(1);
  if (s.name.rfind("torsion", 0) == 0) return t * s.drives.at(0).args.at(2);
  return t;
}

void add_oracle_rows(RunResult& rr) {
  const Scenario& s = rr.scenario;
  char buf[64];
  for (size_t k = 0; k < rr.traj.steps.size(); ++k) {
    const double c = rr.observables[k].control;
    if (s.name == "pure_shear") {
      const auto ora = oracles::pure_shear(c, s.mu, s.eps_L.at(0), s.eps_a.at(0), s.lx);
      std::snprintf(buf, sizeof(buf), "Rx(lbar=%.4g)", c);
      rr.comparisons.push_back({buf, "closed-form", rr.observables[k].resultants.at(0).force[0], ora.Rx});
      std::snprintf(buf, sizeof(buf), "Ry(lbar=%.4g)", c);
      rr.comparisons.push_back({buf, "closed-form", rr.observables[k].resultants.at(1).force[1], ora.Ry});
    } else if (s.name == "picture_frame") {
      const double phi = c * M_PI / 180.0;
      const EdgeResultant& er = rr.observables[k].resultants.at(0);
      const double Rs = -er.force.dot(er.tangent_avg.normalized());
      std::snprintf(buf, sizeof(buf), "Rs(phi=%.4g)", c);
      rr.comparisons.push_back({buf, "closed-form", Rs, oracles::picture_frame(phi, s.eps_a.at(0), s.lx)});
    } else if (s.name == "uniaxial") {
      const auto ora = oracles::uniaxial(c, s.ly);
      std::snprintf(buf, sizeof(buf), "Rx(ux=%.4g)", c);
      rr.comparisons.push_back({buf, "derived", rr.observables[k].resultants.at(0).force[0], ora.Rx});
    } else if (s.name == "annulus") {
      const double R = oracles::annulus_reaction(c, s.eps_L.at(0), s.ri, s.ro);
      std::snprintf(buf, sizeof(buf), "R_hoop(lbar=%.4g)", c);
      rr.comparisons.push_back({buf, "closed-form", rr.observables[k].resultants.at(0).nu_sigma_nu, R});
    }
  }
}

}  // namespace

double RunResult::max_oracle_rel_error() const {
  double m = 0.0;
  for (const OracleComparison& c : comparisons) m = std::max(m, c.rel_error());
  return m;
}

RunResult run_scenario(const Scenario& s, const std::string& outdir) {
  RunResult rr;
  rr.scenario = s;
  Model model = s.to_model();
  NewtonSettings cfg = s.to_settings();

  std::vector<EdgeId> edges;
  for (const std::string& e : s.resultant_edges) {
    if (e == "umin") edges.push_back(EdgeId::UMin);
    else if (e == "umax") edges.push_back(EdgeId::UMax);
    else if (e == "vmin") edges.push_back(EdgeId::VMin);
    else if (e == "vmax") edges.push_back(EdgeId::VMax);
    else throw FshellError("unknown resultant edge '" + e + "'");
  }

  if (!outdir.empty()) std::filesystem::create_directories(outdir);

  VecX prev_x;
  auto on_step = [&](const StepRecord& rec, const Model& m, const Mesh& mesh) {
    StepObservables obs;
    obs.control = control_parameter(s, rec.t);
    SolveState st;
    st.x = rec.x;
    st.x_pre = prev_x.size() ? prev_x : rec.x;
    st.t = rec.t;
    for (EdgeId e : edges) {
      // edges along v integrate with the v-rule and vice versa
      const bool along_v = (e == EdgeId::UMin || e == EdgeId::UMax);
      int ng = along_v ? m.gauss_v : m.gauss_u;
      if (ng <= 0) ng = (along_v ? m.patch.V.degree : m.patch.U.degree) + 1;
      obs.resultants.push_back(edge_stress_resultant(m, st, e, ng));
    }
    if (!outdir.empty() && s.fields_every > 0 &&
        (rec.step % s.fields_every == 0 || rec.step == cfg.n_steps)) {
      write_fields_vtk(outdir + "/fields_step" + std::to_string(rec.step) + ".vtk",
                       sample_fields(m, mesh, st), m.families());
    }
    prev_x = rec.x;
    rr.observables.push_back(std::move(obs));
  };

  rr.traj = run_steps(model, cfg, on_step);
  if (!rr.traj.completed) rr.notes.push_back("run incomplete: " + rr.traj.failure);

  for (const Constraint& c : model.constraints) rr.reaction_names.push_back(c.name);
  add_oracle_rows(rr);

  if (!outdir.empty()) {
    std::vector<double> control;
    for (const StepObservables& o : rr.observables) control.push_back(o.control);
    write_reactions_csv(outdir + "/reactions.csv", s.units, rr.reaction_names, rr.traj.steps,
                        control);
    write_energies_csv(outdir + "/energies.csv", s.units, rr.traj.steps, control);
    write_report(outdir + "/report.txt", "scenario: " + s.name, rr.comparisons, rr.notes);
  }
  return rr;
}

}  // namespace fshell
