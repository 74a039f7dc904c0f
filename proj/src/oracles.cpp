#include "fibershell/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace fshell::oracles {

PureShearReactions pure_shear(double lbar, double mu, double eps_L, double eps_a, double L0) {
  if (!(lbar > 0.0)) throw std::invalid_argument("pure_shear: lbar must be positive");
  const double l2 = lbar * lbar;
  const double l4 = l2 * l2;
  const double h = L0 / lbar;
  const double w = L0 * lbar;
  PureShearReactions r;
  r.Rx = h * (mu * (l2 - 1.0) + 0.25 * eps_L * (l4 - 2.0 * l2 + 1.0) + 0.25 * eps_a * (l4 - 1.0));
  r.Ry = w * (mu * (1.0 / l2 - 1.0) + 0.25 / l4 * eps_L * (l4 - 2.0 * l2 + 1.0) -
              0.25 / l4 * eps_a * (l4 - 1.0));
  return r;
}

double picture_frame(double phi, double eps_a, double L0) {
  return -eps_a * std::cos(2.0 * phi) * L0 / 2.0;
}

PureBendingSolution pure_bending(double M_ext, double mu, double beta_n) {
  const double bound = 0.25 * mu * beta_n;
  if (M_ext * M_ext > bound * (1.0 + 1e-12))
    throw std::domain_error("pure_bending: moment exceeds validity bound");
  PureBendingSolution s;
  const double disc = std::max(0.25 - M_ext * M_ext / (mu * beta_n), 0.0);
  s.lambda1 = std::sqrt(0.5 + std::sqrt(disc));
  const double l4 = s.lambda1 * s.lambda1 * s.lambda1 * s.lambda1;
  s.H = M_ext / (2.0 * beta_n * l4);
  return s;
}

double pure_bending_H_conjugate(double M_ext, double beta_n, double lambda1) {
  return M_ext / (2.0 * beta_n * lambda1 * lambda1 * lambda1);
}

namespace {

// stresses of the uniaxial configuration diag(l1, l2); mu = eps_a = eps0, eps_L = 2 eps0
double tau11(double l1, double l2, double eps0) {
  const double Lam = (4.0 * l1 * l1 + l2 * l2) / 5.0;
  const double g = (4.0 * l1 * l1 - l2 * l2) / 5.0;
  return eps0 * (1.0 - 1.0 / (l1 * l1)) + 0.5 * (2.0 * eps0) * (Lam - 1.0) * (4.0 / 5.0) * 2.0 +
         eps0 * (g - 3.0 / 5.0) * (4.0 / 5.0);
}

double tau22(double l1, double l2, double eps0) {
  const double Lam = (4.0 * l1 * l1 + l2 * l2) / 5.0;
  const double g = (4.0 * l1 * l1 - l2 * l2) / 5.0;
  return eps0 * (1.0 - 1.0 / (l2 * l2)) + 0.5 * (2.0 * eps0) * (Lam - 1.0) * (1.0 / 5.0) * 2.0 +
         eps0 * (g - 3.0 / 5.0) * (-1.0 / 5.0);
}

}  // namespace

UniaxialSolution uniaxial(double u_x, double L0, double eps0) {
  const double l1 = 1.0 + u_x / (2.0 * L0);
  double lo = 0.05, hi = 3.0;
  double flo = tau22(l1, lo, eps0), fhi = tau22(l1, hi, eps0);
  if (flo * fhi > 0.0) throw std::runtime_error("uniaxial oracle: bisection bracket failed");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = tau22(l1, mid, eps0);
    if (flo * fm <= 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
    if (hi - lo < 1e-16 * hi) break;
  }
  UniaxialSolution s;
  s.lambda2 = 0.5 * (lo + hi);
  s.tau22_residual = tau22(l1, s.lambda2, eps0);
  s.Rx = L0 * l1 * tau11(l1, s.lambda2, eps0);
  return s;
}

double annulus_reaction(double lbar, double eps_L, double ri, double ro) {
  return lbar * (lbar * lbar - 1.0) * 0.5 * eps_L * (ro * std::log(ro) - ri * std::log(ri));
}

}  // namespace fshell::oracles
