#ifndef FIBERSHELL_BENCH_HPP
#define FIBERSHELL_BENCH_HPP

#include "fibershell/oracles.hpp"
#include "fibershell/output.hpp"
#include "fibershell/scenario.hpp"

namespace fshell {

struct StepObservables {
  double control = 0.0;                  // scenario-specific control parameter
  std::vector<EdgeResultant> resultants; // per requested edge
};

struct RunResult {
  Scenario scenario;
  Trajectory traj;
  std::vector<StepObservables> observables;
  std::vector<std::string> reaction_names;
  std::vector<OracleComparison> comparisons;
  std::vector<std::string> notes;

  double max_oracle_rel_error() const;
};

// Execute a scenario; when outdir is nonempty, write reactions.csv,
// energies.csv, report.txt and periodic fields_step<k>.vtk there.
RunResult run_scenario(const Scenario& s, const std::string& outdir = "");

}  // namespace fshell

#endif
