#include "fibershell/materials.hpp"

#include <cmath>

namespace fshell {

namespace {

// Voigt triple of a symmetric dyad built from contravariant components:
// (u^1 v^1, u^2 v^2, (u^1 v^2 + u^2 v^1)/2).
Voigt3 dyad_sym(const Vec2& u, const Vec2& v) {
  return Voigt3(u[0] * v[0], u[1] * v[1], 0.5 * (u[0] * v[1] + u[1] * v[0]));
}

// G^{abgd} = A^{ag} A^{bd} + A^{ad} A^{bg} packed as a 3x3 Voigt block.
Mat3 sym4(const Mat2& A) {
  const int ii[3] = {0, 1, 0};
  const int jj[3] = {0, 1, 1};
  Mat3 G;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const int a = ii[r], b = jj[r], g = ii[c], d = jj[c];
      G(r, c) = A(a, g) * A(b, d) + A(a, d) * A(b, g);
    }
  return G;
}

}  // namespace

MaterialResponse& MaterialResponse::operator+=(const MaterialResponse& o) {
  tau += o.tau;
  M0 += o.M0;
  C += o.C; D += o.D; E += o.E; F += o.F;
  for (int i = 0; i < families(); ++i) {
    Mbar0[i] += o.Mbar0[i];
    Dbar[i] += o.Dbar[i];
    Ebar[i] += o.Ebar[i];
    Fbar[i] += o.Fbar[i];
    Gbar[i] += o.Gbar[i];
    Hbar[i] += o.Hbar[i];
  }
  energy += o.energy;
  return *this;
}

double tension_branch_switch(double lambda, double eps_L, bool tension_only, int branch) {
  if (!tension_only) return eps_L;
  if (branch > 0) return eps_L;
  if (branch < 0) return 0.0;
  return lambda < 1.0 ? 0.0 : eps_L;
}

MaterialResponse simple_fabric(const MaterialPointState& s, const SimpleFabricParams& p) {
  const int nf = p.families();
  MaterialResponse r(nf);
  const DeformationInvariants& inv = *s.inv;
  const Mat2& a_inv = s.cur->metric_inv;
  const Mat2& A_inv = s.ref->metric_inv;
  const Voigt3 va(a_inv(0, 0), a_inv(1, 1), a_inv(0, 1));
  const Voigt3 vA(A_inv(0, 0), A_inv(1, 1), A_inv(0, 1));

  // matrix response
  const double J = s.cur->jac / s.ref->jac;
  if (!(J > 0.0)) throw FshellError("simple_fabric: non-positive surface stretch");
  const double I1 = (s.ref->metric_inv * s.cur->metric).trace();
  double Up = 0.0, Upp = 0.0;
  if (p.dilatation.active) {
    const double K = p.dilatation.modulus(s.X);
    Up = K * (J - 1.0);
    Upp = K;
    r.energy.matrix += 0.5 * K * (J - 1.0) * (J - 1.0);
  }
  r.energy.matrix += 0.5 * p.mu * (I1 - 2.0 - 2.0 * std::log(J));
  r.tau += J * Up * va + p.mu * (vA - va);
  r.C += -(J * Up - p.mu) * sym4(a_inv) + J * (Up + J * Upp) * va * va.transpose();

  for (int i = 0; i < nf; ++i) {
    const FiberRef& fr = (*s.fibers_ref)[i];
    const FiberState& fc = (*s.fibers_cur)[i];
    const Voigt3 vL = dyad_sym(fr.L, fr.L);

    const double eps = tension_branch_switch(fc.lambda, p.eps_L[i], p.tension_only,
                                              s.branch ? s.branch[i] : 0);
    const double Lm1 = inv.Lambda[i] - 1.0;
    r.energy.stretch += 0.125 * eps * Lm1 * Lm1;
    r.tau += 0.5 * eps * Lm1 * vL;
    r.C += eps * vL * vL.transpose();

    r.energy.bend_out += 0.5 * p.beta_n[i] * inv.Kn[i] * inv.Kn[i];
    r.M0 += p.beta_n[i] * inv.Kn[i] * vL;
    r.F += p.beta_n[i] * vL * vL.transpose();

    r.energy.bend_in += 0.5 * p.beta_g[i] * inv.Kg[i] * inv.Kg[i];
    r.Mbar0[i] = p.beta_g[i] * inv.Kg[i] * vL;
    r.Fbar[i] = p.beta_g[i] * vL * vL.transpose();

    const Voigt3 vcL = dyad_sym(fr.c0_con, fr.L);
    r.energy.torsion += 0.5 * p.beta_tau[i] * inv.Tg[i] * inv.Tg[i];
    r.M0 += p.beta_tau[i] * inv.Tg[i] * vcL;
    r.F += p.beta_tau[i] * vcL * vcL.transpose();
  }

  for (int i = 0; i < nf; ++i)
    for (int j = i + 1; j < nf; ++j) {
      const double eps = p.eps_a.size() ? p.eps_a(i, j) : 0.0;
      if (eps == 0.0) continue;
      const double dg = inv.gamma(i, j) - inv.gamma0(i, j);
      const Voigt3 vij = dyad_sym((*s.fibers_ref)[i].L, (*s.fibers_ref)[j].L);
      r.energy.angle += 0.25 * eps * dg * dg;
      r.tau += eps * dg * vij;
      r.C += 2.0 * eps * vij * vij.transpose();
    }
  return r;
}

MaterialResponse woven_fabric(const MaterialPointState& s, const WovenFabricParams& p) {
  if (s.fibers_ref->size() != 2) throw FshellError("woven_fabric: exactly two fiber families required");
  MaterialResponse r(2);
  const DeformationInvariants& inv = *s.inv;

  const double beta_g[2] = {p.beta_g1, p.beta_g2};
  for (int i = 0; i < 2; ++i) {
    const FiberRef& fr = (*s.fibers_ref)[i];
    const double lam = (*s.fibers_cur)[i].lambda;
    const Voigt3 vL = dyad_sym(fr.L, fr.L);

    const double eps = tension_branch_switch(lam, p.eps_L, p.tension_only,
                                              s.branch ? s.branch[i] : 0);
    r.energy.stretch += 0.5 * eps * (lam - 1.0) * (lam - 1.0);
    r.tau += eps * (lam - 1.0) / lam * vL;
    r.C += eps / (lam * lam * lam) * vL * vL.transpose();

    r.energy.bend_in += 0.5 * beta_g[i] * inv.Kg[i] * inv.Kg[i];
    r.Mbar0[i] = beta_g[i] * inv.Kg[i] * vL;
    r.Fbar[i] = beta_g[i] * vL * vL.transpose();
  }

  // shear response S(gh) = mu asinh(a1 gh) + eta sinh(a2 gh)
  const double gh = inv.gamma_hat;
  const double S = p.mu * std::asinh(p.alpha1 * gh) + p.eta * std::sinh(p.alpha2 * gh);
  const double Sp = p.mu * p.alpha1 / std::sqrt(p.alpha1 * p.alpha1 * gh * gh + 1.0) +
                    p.eta * p.alpha2 * std::cosh(p.alpha2 * gh);
  auto Wangle = [&](double g) {
    return 0.5 * p.mu * (g * std::asinh(p.alpha1 * g) -
                         std::sqrt(p.alpha1 * p.alpha1 * g * g + 1.0) / p.alpha1) +
           0.5 * p.eta / p.alpha2 * std::cosh(p.alpha2 * g);
  };
  // reference angle offset keeps W = 0 at the undeformed state
  r.energy.angle += Wangle(gh) - Wangle(inv.gamma0(0, 1));

  const Vec2& l1 = (*s.fibers_cur)[0].ell_con;
  const Vec2& l2 = (*s.fibers_cur)[1].ell_con;
  const Voigt3 v11 = dyad_sym(l1, l1);
  const Voigt3 v22 = dyad_sym(l2, l2);
  const Voigt3 v12 = dyad_sym(l1, l2);
  const Voigt3 l12 = v12 - 0.5 * gh * (v11 + v22);
  r.tau += S * l12;
  const Mat3 l12_4 = -0.5 * v12 * (v11 + v22).transpose() -
                     0.5 * (v11 + v22) * l12.transpose() +
                     0.5 * gh * (v11 * v11.transpose() + v22 * v22.transpose());
  r.C += 2.0 * S * l12_4 + 2.0 * Sp * l12 * l12.transpose();
  return r;
}

MaterialResponse stabilize_compression(const MaterialPointState& s,
                                       const Mat2& a_pre,
                                       const StabilizationParams& p) {
  const int nf = static_cast<int>(s.fibers_ref->size());
  MaterialResponse r(nf);
  for (int i = 0; i < nf; ++i) {
    const double lam = (*s.fibers_cur)[i].lambda;
    const int branch = s.branch ? s.branch[i] : 0;
    if (branch > 0 || (branch == 0 && lam >= 1.0)) continue;
    const Vec2& L = (*s.fibers_ref)[i].L;
    const Voigt3 vL = dyad_sym(L, L);

    r.energy.stabilization += 0.5 * p.eps_e * (lam - 1.0) * (lam - 1.0);
    r.tau += p.eps_e * (lam - 1.0) / lam * vL;
    r.C += p.eps_e / (lam * lam * lam) * vL * vL.transpose();

    if (p.eps_v > 0.0) {
      const double pre = L.transpose() * a_pre * L;
      if (!(pre > 0.0)) throw FshellError("stabilize_compression: previous-step metric not positive");
      const double lt2 = (*s.inv).Lambda[i] / pre;
      const double lt = std::sqrt(lt2);
      const Voigt3 vpre = vL / pre;  // ell_pre^{ab} = L^{ab} / (a_pre : L x L)
      r.energy.stabilization += 0.5 * p.eps_v * (lt - 1.0) * (lt - 1.0);
      r.tau += p.eps_v * (lt - 1.0) / lt * vpre;
      r.C += p.eps_v / (lt * lt * lt) * vpre * vpre.transpose();
    }
  }
  return r;
}

}  // namespace fshell
