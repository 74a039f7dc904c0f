#include "fibershell/output.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>

namespace fshell {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw FshellError("cannot open output file: " + path);
  f << std::setprecision(17);
  return f;
}

}  // namespace

void write_reactions_csv(const std::string& path, const std::string& units,
                         const std::vector<std::string>& groups,
                         const std::vector<StepRecord>& steps,
                         const std::vector<double>& control) {
  std::ofstream f = open_out(path);
  f << "# units: " << units << "; reactions are constraint-group resultants\n";
  f << "step,t,control,newton_iters";
  for (const std::string& g : groups) f << "," << g << "_Rx," << g << "_Ry," << g << "_Rz";
  f << "\n";
  for (size_t k = 0; k < steps.size(); ++k) {
    const StepRecord& s = steps[k];
    f << s.step << "," << s.t << "," << (k < control.size() ? control[k] : s.t) << ","
      << s.newton_iterations;
    for (const Vec3& r : s.reactions) f << "," << r[0] << "," << r[1] << "," << r[2];
    f << "\n";
  }
}

void write_energies_csv(const std::string& path, const std::string& units,
                        const std::vector<StepRecord>& steps,
                        const std::vector<double>& control) {
  std::ofstream f = open_out(path);
  f << "# units: " << units << "; integrated strain energy parts\n";
  f << "step,t,control,matrix,stretch,bend_out,bend_in,torsion,angle,stabilization,total\n";
  for (size_t k = 0; k < steps.size(); ++k) {
    const StepRecord& s = steps[k];
    const EnergyParts& e = s.energy;
    f << s.step << "," << s.t << "," << (k < control.size() ? control[k] : s.t) << ","
      << e.matrix << "," << e.stretch << "," << e.bend_out << "," << e.bend_in << ","
      << e.torsion << "," << e.angle << "," << e.stabilization << "," << e.total() << "\n";
  }
}

void write_fields_vtk(const std::string& path, const std::vector<FieldSample>& fields,
                      int n_families) {
  std::ofstream f = open_out(path);
  const size_t n = fields.size();
  f << "# vtk DataFile Version 3.0\n";
  f << "fibershell quadrature-point fields\n";
  f << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << n << " double\n";
  for (const FieldSample& s : fields) f << s.x[0] << " " << s.x[1] << " " << s.x[2] << "\n";
  f << "CELLS " << n << " " << 2 * n << "\n";
  for (size_t i = 0; i < n; ++i) f << "1 " << i << "\n";
  f << "CELL_TYPES " << n << "\n";
  for (size_t i = 0; i < n; ++i) f << "1\n";

  f << "POINT_DATA " << n << "\n";
  auto scalar = [&](const std::string& name, auto getter) {
    f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (const FieldSample& s : fields) f << getter(s) << "\n";
  };
  scalar("theta_deg", [](const FieldSample& s) { return s.theta_deg; });
  scalar("kappa_band", [](const FieldSample& s) { return s.kappa_band; });
  scalar("H", [](const FieldSample& s) { return s.H; });
  scalar("J", [](const FieldSample& s) { return s.Jdet; });
  scalar("lambda1", [](const FieldSample& s) { return s.lambda1; });
  for (int i = 0; i < n_families; ++i) {
    scalar("Lambda_" + std::to_string(i + 1), [i](const FieldSample& s) { return s.Lambda[i]; });
    scalar("Kg_" + std::to_string(i + 1), [i](const FieldSample& s) { return s.Kg[i]; });
  }
  scalar("W_density", [](const FieldSample& s) { return s.energy_density.total(); });
  scalar("W_bend_in", [](const FieldSample& s) { return s.energy_density.bend_in; });
  scalar("W_bend_out", [](const FieldSample& s) { return s.energy_density.bend_out; });
  f << "VECTORS displacement double\n";
  for (const FieldSample& s : fields) {
    const Vec3 u = s.x - s.X;
    f << u[0] << " " << u[1] << " " << u[2] << "\n";
  }
}

void write_report(const std::string& path, const std::string& title,
                  const std::vector<OracleComparison>& comparisons,
                  const std::vector<std::string>& notes) {
  std::ofstream f = open_out(path);
  f << title << "\n";
  f << std::string(title.size(), '=') << "\n\n";
  if (!comparisons.empty()) {
    f << "oracle comparisons (value, reference, relative error, provenance):\n";
    for (const OracleComparison& c : comparisons) {
      char buf[256];
      std::snprintf(buf, sizeof(buf), "  %-28s % .12e  % .12e  %.3e  [%s]\n",
                    c.quantity.c_str(), c.value, c.reference, c.rel_error(),
                    c.provenance.c_str());
      f << buf;
    }
    f << "\n";
  }
  for (const std::string& n : notes) f << n << "\n";
}

}  // namespace fshell
