#ifndef FIBERSHELL_ELEMENT_HPP
#define FIBERSHELL_ELEMENT_HPP

#include <array>
#include <vector>

#include "fibershell/materials.hpp"

namespace fshell {

// Discrete operators of one quadrature point in Voigt form. The stacks pack
// the (11, 22, 12) columns with the off-diagonal column carrying the 12+21 sum.
struct ShapeArrays {
  const BasisEval* basis = nullptr;
  MatX ddN_cov;                 // ne x 3, covariant-corrected N_{A;ab}
  MatX stackLa;                 // 3ne x 3
  MatX stackGn;                 // 3ne x 3
  std::vector<MatX> stackGa;    // per family, 3ne x 3
  std::vector<std::array<MatX, 2>> Cdir;  // per family, director-gradient operator C,a (3 x 3ne)

  int ne() const { return basis->size(); }
};

ShapeArrays shape_arrays(const BasisEval& basis, const SurfaceConfig& cur,
                         const std::vector<FiberState>& fibers);

struct InternalForces {
  VecX f_tau, f_M, f_Mbar;
  void init(int ndof) {
    f_tau = VecX::Zero(ndof);
    f_M = VecX::Zero(ndof);
    f_Mbar = VecX::Zero(ndof);
  }
  VecX total() const { return f_tau + f_M + f_Mbar; }
};

void add_internal_force(const ShapeArrays& sa, const MaterialResponse& resp, double wJ,
                        InternalForces& f);

void add_material_tangent(const ShapeArrays& sa, const MaterialResponse& resp, double wJ,
                          MatX& k);

// Test hooks that reproduce the published errata on their wrong side.
struct ElementDebug {
  bool wrong_a12_term = false;       // 2*a12*L1*L2^T instead of the symmetric pair
  bool drop_nu_variation = false;    // omit the nu-variation block of the m_tau tangent
};

void add_geometric_tangent(const ShapeArrays& sa, const MaterialResponse& resp,
                           const SurfaceConfig& cur, const std::vector<FiberState>& fibers,
                           double wJ, MatX& k, const ElementDebug& dbg = {});

// --- external loads ------------------------------------------------------

// Area loads at one quadrature point. Body force uses the reference measure,
// follower pressure the current one; both weights are passed in premultiplied.
void add_body_force(const BasisEval& basis, const Vec3& f0, double wA_ref, VecX& f_ext);
void add_pressure(const BasisEval& basis, const SurfaceConfig& cur, double p, double w_par,
                  VecX& f_ext, MatX& k_ext);

// State of one boundary quadrature point: the edge runs along parametric
// direction `dir` with orientation `sign` (+1/-1 for counterclockwise
// traversal), so a_xi = sign * a_dir and nu = tau x n points outward.
struct BoundaryPoint {
  const BasisEval* basis = nullptr;
  const SurfaceConfig* cur = nullptr;
  int dir = 0;
  double sign = 1.0;
  double w_par = 0.0;     // 1d quadrature weight in parametric units
  double ref_len = 0.0;   // |A_xi| of the reference configuration

  Vec3 a_xi() const { return sign * cur->a[dir]; }
  double cur_len() const { return cur->a[dir].norm(); }
  Vec3 tau() const { return a_xi().normalized(); }
  Vec3 nu() const { return tau().cross(cur->normal); }
};

void add_edge_traction(const BoundaryPoint& bp, const Vec3& t, bool live_measure,
                       VecX& f_ext, MatX& k_ext);
void add_edge_moment_out(const BoundaryPoint& bp, double m_tau, bool live_measure,
                         VecX& f_ext, MatX& k_ext, const ElementDebug& dbg = {});
void add_edge_moment_in(const BoundaryPoint& bp, const FiberState& fs, double m_bar,
                        bool live_measure, VecX& f_ext, MatX& k_ext);

// Corner twisting load at an interpolatory corner control point.
void add_corner_load(const BasisEval& basis, const SurfaceConfig& cur, int local_node,
                     double m_nu, VecX& f_ext, MatX& k_ext);

// Gauss-Legendre rule on [0,1].
struct GaussRule {
  std::vector<double> points, weights;
};
GaussRule gauss_rule_01(int n);

}  // namespace fshell

#endif
