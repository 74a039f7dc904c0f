#ifndef FIBERSHELL_OUTPUT_HPP
#define FIBERSHELL_OUTPUT_HPP

#include <string>
#include <vector>

#include "fibershell/solver.hpp"

namespace fshell {

struct OracleComparison {
  std::string quantity;
  std::string provenance;  // closed-form | derived
  double value = 0.0;
  double reference = 0.0;

  double rel_error() const {
    const double den = std::max(std::abs(reference), 1e-300);
    return std::abs(value - reference) / den;
  }
};

void write_reactions_csv(const std::string& path, const std::string& units,
                         const std::vector<std::string>& groups,
                         const std::vector<StepRecord>& steps,
                         const std::vector<double>& control);
void write_energies_csv(const std::string& path, const std::string& units,
                        const std::vector<StepRecord>& steps,
                        const std::vector<double>& control);

// Legacy ASCII VTK point cloud of the quadrature-point fields.
void write_fields_vtk(const std::string& path, const std::vector<FieldSample>& fields,
                      int n_families);

void write_report(const std::string& path, const std::string& title,
                  const std::vector<OracleComparison>& comparisons,
                  const std::vector<std::string>& notes);

}  // namespace fshell

#endif
