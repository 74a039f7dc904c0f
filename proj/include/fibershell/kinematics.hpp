#ifndef FIBERSHELL_KINEMATICS_HPP
#define FIBERSHELL_KINEMATICS_HPP

#include <functional>
#include <vector>

#include "fibershell/nurbs.hpp"
#include "fibershell/types.hpp"

namespace fshell {

// Differential geometry of one configuration at a quadrature point.
struct SurfaceConfig {
  Vec3 a[2];        // covariant tangents a_alpha
  Vec3 dda[3];      // a_alpha,beta for (11, 22, 12)
  Mat2 metric;      // a_{alpha beta}
  Mat2 metric_inv;  // a^{alpha beta}
  Vec3 normal;      // unit n
  double jac;       // sqrt(det a_{alpha beta})
  double gamma[2][2][2];  // Christoffel symbols Gamma^g_{ab}, indexed [g][a][b]
  Mat2 curv;        // b_{alpha beta} = n . a_alpha,beta

  Vec3 dual(int alpha) const {
    return metric_inv(alpha, 0) * a[0] + metric_inv(alpha, 1) * a[1];
  }
  const Vec3& second(int alpha, int beta) const {
    return dda[(alpha == beta) ? alpha : 2];
  }
};

// a_alpha,beta of the dual vector a^alpha; needed when differentiating
// contravariant component fields on curved reference patches.
Vec3 dual_derivative(const SurfaceConfig& cfg, int alpha, int beta);

// Fiber direction field on the reference surface: unit direction L(X) and
// its spatial gradient dL/dX. The gradient is supplied analytically so that
// the in-plane bending terms see exact component derivatives.
struct FiberField {
  std::function<Vec3(const Vec3&)> direction;
  std::function<Mat3(const Vec3&)> gradient;
};

FiberField constant_fiber_field(const Vec3& dir);
FiberField circumferential_fiber_field();

// Reference data of one fiber family at one quadrature point.
struct FiberRef {
  Vec2 L;        // contravariant components L^alpha (unit w.r.t. A_{ab})
  Mat2 dL;       // parametric derivatives L^alpha,beta -> dL(alpha, beta)
  Vec2 c0_con;   // reference director components c0^alpha
  Vec2 c0_cov;   // c0_alpha
  Mat2 bbar0;    // reference in-plane curvature Bbar_{alpha beta}
};

FiberRef fiber_reference(const SurfaceConfig& ref, const FiberField& field, const Vec3& X);

// Current-configuration fiber frame and in-plane curvature machinery.
struct FiberState {
  double lambda = 1.0;  // fiber stretch
  Vec3 ell, c;          // unit tangent and in-plane director c = n x ell
  Vec2 ell_con, ell_cov;
  Vec2 c_con, c_cov;
  Mat2 Lhat;            // lambda^-1 L^alpha,beta
  Mat2 gamma_c, gamma_l; // fiber-split Christoffels c.a_{a,b} and ell.a_{a,b}
  Vec2 g;               // c^g Lhat_{g,a} + ell^g Gamma^c_{g a}; cbar,a = -g_a ell
  Mat2 bbar;            // in-plane curvature bbar_{alpha beta}
  Mat2 Lc, Cc, Nc;      // auxiliary coefficients, indexed (gamma, alpha)

  Vec3 cbar_d(int alpha) const { return -g[alpha] * ell; }
};

struct DeformationInvariants {
  std::vector<double> Lambda;  // squared fiber stretch per family
  std::vector<double> Kn;      // nominal change in normal curvature
  std::vector<double> Tg;      // nominal change in geodesic torsion
  std::vector<double> Kg;      // nominal change in geodesic curvature
  MatX gamma;                  // gamma_ij = a_{ab} L_i^a L_j^b
  MatX gamma0;
  double gamma_hat = 0.0;      // ell_1 . ell_2 (two-family models)
};

// Assemble the configuration from basis data and nodal positions
// x stacked as (x0,y0,z0, x1,y1,z1, ...) over the element's nodes.
SurfaceConfig surface_config(const BasisEval& basis, const VecX& x);

FiberState fiber_state(const SurfaceConfig& cur, const FiberRef& ref);

Mat2 inplane_curvature(const FiberState& fs, const SurfaceConfig& cur);

DeformationInvariants deformation_invariants(const SurfaceConfig& ref,
                                             const std::vector<FiberRef>& fibers_ref,
                                             const SurfaceConfig& cur,
                                             const std::vector<FiberState>& fibers_cur);

}  // namespace fshell

#endif
