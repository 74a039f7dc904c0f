#ifndef FIBERSHELL_ORACLES_HPP
#define FIBERSHELL_ORACLES_HPP

#include <utility>

namespace fshell::oracles {

// Closed-form boundary reactions of the pure shear test: a unit square driven
// to lbar x 1/lbar with two diagonal fiber families.
struct PureShearReactions {
  double Rx, Ry;
};
PureShearReactions pure_shear(double lbar, double mu, double eps_L, double eps_a, double L0);

// Tangential frame reaction of the picture frame test at frame angle phi (radians).
double picture_frame(double phi, double eps_a, double L0);

// Pure bending of a fiber-embedded sheet: axial stretch and mean curvature
// under a distributed edge moment. Valid for M^2 <= mu*beta_n/4.
struct PureBendingSolution {
  double H, lambda1;
};
PureBendingSolution pure_bending(double M_ext, double mu, double beta_n);
// Mean curvature consistent with the moment balance of the follower edge load.
double pure_bending_H_conjugate(double M_ext, double beta_n, double lambda1);

// Uniaxial tension oracle: homogeneous diag(l1, l2) state with the lateral
// stretch solved from tau22 = 0 by bisection; returns the edge resultant.
// Parameters fixed to mu = eps_a = eps0, eps_L = 2 eps0, families (2e1 +- e2)/sqrt5.
struct UniaxialSolution {
  double Rx, lambda2, tau22_residual;
};
UniaxialSolution uniaxial(double u_x, double L0 = 1.0, double eps0 = 1.0);

// Circumferential reaction of the graded annulus at expansion lbar,
// integrated across a radial cut.
double annulus_reaction(double lbar, double eps_L, double ri, double ro);

}  // namespace fshell::oracles

#endif
