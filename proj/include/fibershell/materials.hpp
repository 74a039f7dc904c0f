#ifndef FIBERSHELL_MATERIALS_HPP
#define FIBERSHELL_MATERIALS_HPP

#include <functional>
#include <vector>

#include "fibershell/kinematics.hpp"
#include "fibershell/types.hpp"

namespace fshell {

// Named strain-energy contributions, tracked separately for reporting.
struct EnergyParts {
  double matrix = 0.0;
  double stretch = 0.0;
  double bend_out = 0.0;
  double bend_in = 0.0;
  double torsion = 0.0;
  double angle = 0.0;
  double stabilization = 0.0;

  double total() const {
    return matrix + stretch + bend_out + bend_in + torsion + angle + stabilization;
  }
  EnergyParts& operator+=(const EnergyParts& o) {
    matrix += o.matrix; stretch += o.stretch; bend_out += o.bend_out;
    bend_in += o.bend_in; torsion += o.torsion; angle += o.angle;
    stabilization += o.stabilization;
    return *this;
  }
};

// Stress/moment triples in Voigt order (11, 22, 12) plus the tangent blocks.
// The blocks store raw tensor components, e.g. C(2,1) = c^{1222}; the Voigt
// stacks of the element carry the (12+21) sums that make the sandwich exact.
struct MaterialResponse {
  Voigt3 tau = Voigt3::Zero();
  Voigt3 M0 = Voigt3::Zero();
  std::vector<Voigt3> Mbar0;

  Mat3 C = Mat3::Zero();
  Mat3 D = Mat3::Zero();
  Mat3 E = Mat3::Zero();
  Mat3 F = Mat3::Zero();
  std::vector<Mat3> Dbar, Ebar, Fbar, Gbar, Hbar;

  EnergyParts energy;

  explicit MaterialResponse(int n_families = 0) { resize(n_families); }
  void resize(int n_families) {
    Mbar0.assign(n_families, Voigt3::Zero());
    Dbar.assign(n_families, Mat3::Zero());
    Ebar.assign(n_families, Mat3::Zero());
    Fbar.assign(n_families, Mat3::Zero());
    Gbar.assign(n_families, Mat3::Zero());
    Hbar.assign(n_families, Mat3::Zero());
  }
  int families() const { return static_cast<int>(Mbar0.size()); }
  MaterialResponse& operator+=(const MaterialResponse& o);
};

// Surface dilatation energy U(J). K may be graded over the reference surface;
// the hook receives the reference position of the quadrature point.
struct DilatationSpec {
  bool active = false;
  std::function<double(const Vec3&)> modulus;  // K(X)
};

struct SimpleFabricParams {
  double mu = 0.0;
  DilatationSpec dilatation;
  std::vector<double> eps_L;     // per family
  std::vector<double> beta_n;
  std::vector<double> beta_g;
  std::vector<double> beta_tau;
  MatX eps_a;                    // pairwise, upper triangle used
  bool tension_only = false;     // eps_L drops out for lambda < 1

  int families() const { return static_cast<int>(eps_L.size()); }
};

struct WovenFabricParams {
  double eps_L = 0.0;   // shared by both families
  double beta_g1 = 0.0;
  double beta_g2 = 0.0;
  double mu = 0.0;      // yarn-yarn friction shear modulus
  double alpha1 = 0.0;
  double eta = 0.0;     // interlocking shear modulus
  double alpha2 = 0.0;
  bool tension_only = false;
};

struct StabilizationParams {
  double eps_e = 0.0;
  double eps_v = 0.0;
};

// lambda >= 1 keeps the tensile stiffness, lambda < 1 drops it (when active).
// branch > 0 forces the tensile side, branch < 0 the compressive one; the
// solver freezes branches per Newton solve to avoid switch chattering.
double tension_branch_switch(double lambda, double eps_L, bool tension_only, int branch = 0);

// Geometry inputs shared by the material models at one quadrature point.
struct MaterialPointState {
  const SurfaceConfig* ref;
  const SurfaceConfig* cur;
  const std::vector<FiberRef>* fibers_ref;
  const std::vector<FiberState>* fibers_cur;
  const DeformationInvariants* inv;
  Vec3 X = Vec3::Zero();            // reference position (for graded moduli)
  const signed char* branch = nullptr;  // per-family override, 0 = by stretch
};

MaterialResponse simple_fabric(const MaterialPointState& s, const SimpleFabricParams& p);
MaterialResponse woven_fabric(const MaterialPointState& s, const WovenFabricParams& p);

// Compression stabilization, added per family when lambda_i < 1 and the
// tensile branch is off. a_pre is the metric of the last accepted step.
MaterialResponse stabilize_compression(const MaterialPointState& s,
                                       const Mat2& a_pre,
                                       const StabilizationParams& p);

}  // namespace fshell

#endif
