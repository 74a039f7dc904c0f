#include "fibershell/element.hpp"

#include <cmath>

namespace fshell {

namespace {

const int PAIR_A[3] = {0, 1, 0};
const int PAIR_B[3] = {0, 1, 1};

// second parametric derivative N_{A,ab} from the (11,22,12) storage
inline double ddN_raw(const BasisEval& b, int a, int al, int be) {
  return b.ddN(a, (al == be) ? al : 2);
}

}  // namespace

ShapeArrays shape_arrays(const BasisEval& basis, const SurfaceConfig& cur,
                         const std::vector<FiberState>& fibers) {
  const int ne = basis.size();
  const int nf = static_cast<int>(fibers.size());
  ShapeArrays sa;
  sa.basis = &basis;

  sa.ddN_cov.resize(ne, 3);
  for (int a = 0; a < ne; ++a)
    for (int k = 0; k < 3; ++k) {
      const int al = PAIR_A[k], be = PAIR_B[k];
      sa.ddN_cov(a, k) = basis.ddN(a, k) - cur.gamma[0][al][be] * basis.dN(a, 0) -
                         cur.gamma[1][al][be] * basis.dN(a, 1);
    }

  sa.stackLa.resize(3 * ne, 3);
  sa.stackGn.resize(3 * ne, 3);
  for (int a = 0; a < ne; ++a) {
    sa.stackLa.block<3, 1>(3 * a, 0) = basis.dN(a, 0) * cur.a[0];
    sa.stackLa.block<3, 1>(3 * a, 1) = basis.dN(a, 1) * cur.a[1];
    sa.stackLa.block<3, 1>(3 * a, 2) = basis.dN(a, 0) * cur.a[1] + basis.dN(a, 1) * cur.a[0];
    sa.stackGn.block<3, 1>(3 * a, 0) = sa.ddN_cov(a, 0) * cur.normal;
    sa.stackGn.block<3, 1>(3 * a, 1) = sa.ddN_cov(a, 1) * cur.normal;
    sa.stackGn.block<3, 1>(3 * a, 2) = 2.0 * sa.ddN_cov(a, 2) * cur.normal;
  }

  sa.stackGa.resize(nf);
  sa.Cdir.resize(nf);
  for (int i = 0; i < nf; ++i) {
    const FiberState& fs = fibers[i];
    const Mat3 Tnn = cur.normal * cur.normal.transpose();
    const Mat3 Tcc = fs.c * fs.c.transpose();
    const Mat3 Tll = fs.ell * fs.ell.transpose();
    const Mat3 Tlc = fs.ell * fs.c.transpose();
    const Mat3 Tln = fs.ell * cur.normal.transpose();
    Mat3 W[2][2];
    for (int g = 0; g < 2; ++g)
      for (int al = 0; al < 2; ++al)
        W[g][al] = fs.Lc(g, al) * (Tnn + Tcc - Tll) - fs.Cc(g, al) * Tlc - fs.Nc(g, al) * Tln;

    for (int al = 0; al < 2; ++al) {
      MatX& C = sa.Cdir[i][al];
      C.resize(3, 3 * ne);
      for (int a = 0; a < ne; ++a) {
        Mat3 blk = basis.dN(a, 0) * W[0][al] + basis.dN(a, 1) * W[1][al];
        const double s = fs.ell_con[0] * ddN_raw(basis, a, 0, al) +
                         fs.ell_con[1] * ddN_raw(basis, a, 1, al);
        blk -= s * Tlc;
        C.block<3, 3>(0, 3 * a) = blk;
      }
    }

    MatX& G = sa.stackGa[i];
    G.resize(3 * ne, 3);
    for (int a = 0; a < ne; ++a)
      for (int k = 0; k < 3; ++k) {
        const int al = PAIR_A[k], be = PAIR_B[k];
        Vec3 v = -basis.dN(a, al) * fs.cbar_d(be) -
                 sa.Cdir[i][be].block<3, 3>(0, 3 * a).transpose() * cur.a[al];
        if (k == 2)
          v += -basis.dN(a, be) * fs.cbar_d(al) -
               sa.Cdir[i][al].block<3, 3>(0, 3 * a).transpose() * cur.a[be];
        G.block<3, 1>(3 * a, k) = v;
      }
  }
  return sa;
}

void add_internal_force(const ShapeArrays& sa, const MaterialResponse& resp, double wJ,
                        InternalForces& f) {
  f.f_tau += wJ * (sa.stackLa * resp.tau);
  f.f_M += wJ * (sa.stackGn * resp.M0);
  for (int i = 0; i < resp.families(); ++i) f.f_Mbar += wJ * (sa.stackGa[i] * resp.Mbar0[i]);
}

void add_material_tangent(const ShapeArrays& sa, const MaterialResponse& resp, double wJ,
                          MatX& k) {
  // sandwich products, skipping identically zero blocks
  auto sandwich = [&](const MatX& L, const Mat3& B, const MatX& R) {
    if (B.squaredNorm() == 0.0) return;
    const MatX T = L * (wJ * B);
    k.noalias() += T * R.transpose();
  };
  sandwich(sa.stackLa, resp.C, sa.stackLa);
  sandwich(sa.stackLa, resp.D, sa.stackGn);
  sandwich(sa.stackGn, resp.E, sa.stackLa);
  sandwich(sa.stackGn, resp.F, sa.stackGn);
  for (int i = 0; i < resp.families(); ++i) {
    const MatX& Ga = sa.stackGa[i];
    sandwich(sa.stackLa, resp.Dbar[i], Ga);
    sandwich(Ga, resp.Ebar[i], sa.stackLa);
    sandwich(Ga, resp.Fbar[i], Ga);
    sandwich(sa.stackGn, resp.Gbar[i], Ga);
    sandwich(Ga, resp.Hbar[i], sa.stackGn);
  }
}

void add_geometric_tangent(const ShapeArrays& sa, const MaterialResponse& resp,
                           const SurfaceConfig& cur, const std::vector<FiberState>& fibers,
                           double wJ, MatX& k, const ElementDebug& dbg) {
  const BasisEval& basis = *sa.basis;
  const int ne = sa.ne();
  const Voigt3& tau = resp.tau;
  const Voigt3& M0 = resp.M0;

  // in-plane stress part: tau^{ab} N,a^T N,b (expands over the 3x3 identity)
  for (int a = 0; a < ne; ++a)
    for (int b = 0; b < ne; ++b) {
      const double s = tau[0] * basis.dN(a, 0) * basis.dN(b, 0) +
                       tau[1] * basis.dN(a, 1) * basis.dN(b, 1) +
                       tau[2] * (basis.dN(a, 0) * basis.dN(b, 1) +
                                 basis.dN(a, 1) * basis.dN(b, 0));
      k.block<3, 3>(3 * a, 3 * b) += wJ * s * Mat3::Identity();
    }

  // out-of-plane moment part
  if (M0.squaredNorm() > 0.0) {
    const double bM = cur.curv(0, 0) * M0[0] + cur.curv(1, 1) * M0[1] + 2.0 * cur.curv(0, 1) * M0[2];
    const Mat3 nn = cur.normal * cur.normal.transpose();
    VecX gM(ne);  // M0 : N_{;ab} per node
    for (int a = 0; a < ne; ++a)
      gM[a] = M0[0] * sa.ddN_cov(a, 0) + M0[1] * sa.ddN_cov(a, 1) + 2.0 * M0[2] * sa.ddN_cov(a, 2);
    const Vec3 a1d = cur.dual(0), a2d = cur.dual(1);
    for (int a = 0; a < ne; ++a)
      for (int b = 0; b < ne; ++b) {
        double s = cur.metric_inv(0, 0) * basis.dN(a, 0) * basis.dN(b, 0) +
                   cur.metric_inv(1, 1) * basis.dN(a, 1) * basis.dN(b, 1);
        if (dbg.wrong_a12_term)
          s += 2.0 * cur.metric_inv(0, 1) * basis.dN(a, 0) * basis.dN(b, 1);
        else
          s += cur.metric_inv(0, 1) * (basis.dN(a, 0) * basis.dN(b, 1) +
                                       basis.dN(a, 1) * basis.dN(b, 0));
        Mat3 blk = -bM * s * nn;
        blk -= (basis.dN(a, 0) * gM[b]) * (cur.normal * a1d.transpose()) +
               (basis.dN(a, 1) * gM[b]) * (cur.normal * a2d.transpose());
        blk -= (gM[a] * basis.dN(b, 0)) * (a1d * cur.normal.transpose()) +
               (gM[a] * basis.dN(b, 1)) * (a2d * cur.normal.transpose());
        k.block<3, 3>(3 * a, 3 * b) += wJ * blk;
      }
  }

  // in-plane moment part per family
  for (int i = 0; i < resp.families(); ++i) {
    const Voigt3& Mb = resp.Mbar0[i];
    if (Mb.squaredNorm() == 0.0) continue;
    const FiberState& fs = fibers[i];
    const Mat2 Mmat = from_voigt(Mb);
    const Vec2 Mc = -(Mmat * fs.c_cov);    // Mbar_c^a = -Mbar^{ab} c_b
    const Vec2 Ml = -(Mmat * fs.ell_cov);

    // first group: Mbar^{ab} (N,a^T C,b + C,b^T N,a); hoist the beta sum
    MatX MC[2];
    for (int al = 0; al < 2; ++al)
      MC[al] = Mmat(al, 0) * sa.Cdir[i][0] + Mmat(al, 1) * sa.Cdir[i][1];
    for (int a = 0; a < ne; ++a)
      for (int b = 0; b < ne; ++b) {
        const Mat3 blk = basis.dN(a, 0) * MC[0].block<3, 3>(0, 3 * b) +
                         basis.dN(a, 1) * MC[1].block<3, 3>(0, 3 * b);
        k.block<3, 3>(3 * a, 3 * b) -= wJ * blk;
        k.block<3, 3>(3 * b, 3 * a) -= wJ * blk.transpose();
      }

    // P tensors
    const Mat3 Tcc = fs.c * fs.c.transpose();
    const Mat3 Tll = fs.ell * fs.ell.transpose();
    const Mat3 Tnn = cur.normal * cur.normal.transpose();
    const Mat3 Tlc = fs.ell * fs.c.transpose() + fs.c * fs.ell.transpose();
    const Mat3 Tln = fs.ell * cur.normal.transpose() + cur.normal * fs.ell.transpose();
    const Mat3 Tnc = cur.normal * fs.c.transpose() + fs.c * cur.normal.transpose();
    const double bl[2] = {cur.curv(0, 0) * fs.ell_con[0] + cur.curv(0, 1) * fs.ell_con[1],
                          cur.curv(1, 0) * fs.ell_con[0] + cur.curv(1, 1) * fs.ell_con[1]};
    const double Ml_bl = Ml[0] * bl[0] + Ml[1] * bl[1];
    Mat3 P[2][2];
    for (int g = 0; g < 2; ++g)
      for (int be = 0; be < 2; ++be) {
        double pcc = 0, pll = 0, pnn = 0, plc = 0, pln = 0, pnc = 0;
        for (int al = 0; al < 2; ++al) {
          pcc += 1.5 * Ml[al] * (fs.Lc(g, al) * fs.ell_con[be] + fs.Lc(be, al) * fs.ell_con[g]) +
                 Mc[al] * (fs.Cc(g, al) * fs.ell_con[be] + fs.Cc(be, al) * fs.ell_con[g]);
          pll += -Ml[al] * (fs.ell_con[g] * fs.Lc(be, al) + fs.ell_con[be] * fs.Lc(g, al));
          pnn += Ml[al] * fs.Cc(be, al) * fs.c_con[g] + Ml[al] * fs.Lc(be, al) * fs.ell_con[g] -
                 Ml[al] * fs.c_con[be] *
                     (cur.gamma[g][al][0] * fs.ell_con[0] + cur.gamma[g][al][1] * fs.ell_con[1]) -
                 Mc[al] * fs.Lc(be, al) * fs.c_con[g] - Mmat(g, al) * fs.Lc(be, al);
          plc += -Ml[al] * (fs.Cc(g, al) * fs.ell_con[be] + fs.ell_con[g] * fs.Cc(be, al)) +
                 Mc[al] * (fs.ell_con[g] * fs.Lc(be, al) + fs.ell_con[be] * fs.Lc(g, al));
          pln += -Ml[al] * (fs.Nc(g, al) * fs.ell_con[be] + fs.ell_con[g] * fs.Nc(be, al));
          pnc += Mc[al] * (fs.Nc(g, al) * fs.ell_con[be] + fs.ell_con[g] * fs.Nc(be, al));
        }
        pnc += -Ml_bl * (fs.ell_con[g] * fs.ell_con[be] + fs.c_con[g] * fs.c_con[be]);
        P[g][be] = pcc * Tcc + pll * Tll + pnn * Tnn + plc * Tlc + pln * Tln + pnc * Tnc;
      }
    for (int b = 0; b < ne; ++b) {
      const Mat3 Pb0 = P[0][0] * basis.dN(b, 0) + P[0][1] * basis.dN(b, 1);
      const Mat3 Pb1 = P[1][0] * basis.dN(b, 0) + P[1][1] * basis.dN(b, 1);
      for (int a = 0; a < ne; ++a)
        k.block<3, 3>(3 * a, 3 * b) -= wJ * (basis.dN(a, 0) * Pb0 + basis.dN(a, 1) * Pb1);
    }

    // Q tensors, contracted with the second parametric derivatives
    for (int b = 0; b < ne; ++b) {
      double sC = 0.0, sL = 0.0;  // sum_{ga} ell^g Mbar_*^a N_{b,ga}
      for (int g = 0; g < 2; ++g)
        for (int al = 0; al < 2; ++al) {
          const double nd = ddN_raw(basis, b, g, al);
          sC += fs.ell_con[g] * Mc[al] * nd;
          sL += fs.ell_con[g] * Ml[al] * nd;
        }
      Mat3 Q[2];
      for (int be = 0; be < 2; ++be)
        Q[be] = fs.ell_con[be] * sC * Tcc - fs.ell_con[be] * sL * Tlc +
                fs.c_con[be] * sL * Tnn;
      for (int a = 0; a < ne; ++a) {
        Mat3 blk = basis.dN(a, 0) * Q[0] + basis.dN(a, 1) * Q[1];
        k.block<3, 3>(3 * a, 3 * b) -= wJ * blk;
        k.block<3, 3>(3 * b, 3 * a) -= wJ * blk.transpose();
      }
    }
  }
}

// --- external loads ------------------------------------------------------

void add_body_force(const BasisEval& basis, const Vec3& f0, double wA_ref, VecX& f_ext) {
  for (int a = 0; a < basis.size(); ++a) f_ext.segment<3>(3 * a) += wA_ref * basis.N[a] * f0;
}

void add_pressure(const BasisEval& basis, const SurfaceConfig& cur, double p, double w_par,
                  VecX& f_ext, MatX& k_ext) {
  const double w = p * w_par * cur.jac;
  for (int a = 0; a < basis.size(); ++a) f_ext.segment<3>(3 * a) += w * basis.N[a] * cur.normal;
  const Mat3 B1 = cur.normal * cur.dual(0).transpose() - cur.dual(0) * cur.normal.transpose();
  const Mat3 B2 = cur.normal * cur.dual(1).transpose() - cur.dual(1) * cur.normal.transpose();
  for (int a = 0; a < basis.size(); ++a)
    for (int b = 0; b < basis.size(); ++b)
      k_ext.block<3, 3>(3 * a, 3 * b) +=
          w * basis.N[a] * (B1 * basis.dN(b, 0) + B2 * basis.dN(b, 1));
}

void add_edge_traction(const BoundaryPoint& bp, const Vec3& t, bool live_measure,
                       VecX& f_ext, MatX& k_ext) {
  const BasisEval& basis = *bp.basis;
  const double meas = bp.w_par * (live_measure ? bp.cur_len() : bp.ref_len);
  for (int a = 0; a < basis.size(); ++a) f_ext.segment<3>(3 * a) += meas * basis.N[a] * t;
  if (!live_measure) return;
  const Vec3 axi = bp.a_xi();
  const Mat3 B = t * axi.transpose() / axi.squaredNorm();
  for (int a = 0; a < basis.size(); ++a)
    for (int b = 0; b < basis.size(); ++b)
      k_ext.block<3, 3>(3 * a, 3 * b) +=
          meas * basis.N[a] * bp.sign * basis.dN(b, bp.dir) * B;
}

void add_edge_moment_out(const BoundaryPoint& bp, double m_tau, bool live_measure,
                         VecX& f_ext, MatX& k_ext, const ElementDebug& dbg) {
  const BasisEval& basis = *bp.basis;
  const SurfaceConfig& cur = *bp.cur;
  const double meas = bp.w_par * (live_measure ? bp.cur_len() : bp.ref_len);
  const Vec3 nu = bp.nu();
  const Vec3 tau = bp.tau();
  const Vec2 nu_con(nu.dot(cur.dual(0)), nu.dot(cur.dual(1)));
  const Vec2 tau_con(tau.dot(cur.dual(0)), tau.dot(cur.dual(1)));

  for (int a = 0; a < basis.size(); ++a) {
    const double s = basis.dN(a, 0) * nu_con[0] + basis.dN(a, 1) * nu_con[1];
    f_ext.segment<3>(3 * a) += -meas * m_tau * s * cur.normal;
  }

  const Vec3 ad[2] = {cur.dual(0), cur.dual(1)};
  for (int a = 0; a < basis.size(); ++a)
    for (int b = 0; b < basis.size(); ++b) {
      Mat3 blk = Mat3::Zero();
      for (int al = 0; al < 2; ++al)
        for (int be = 0; be < 2; ++be)
          blk += basis.dN(a, al) * basis.dN(b, be) *
                 (nu_con[al] * ad[be] * cur.normal.transpose() +
                  nu_con[be] * cur.normal * ad[al].transpose());
      k_ext.block<3, 3>(3 * a, 3 * b) += meas * m_tau * blk;
    }

  const Vec3 axi = bp.a_xi();
  if (live_measure) {
    const double il2 = 1.0 / axi.squaredNorm();
    for (int a = 0; a < basis.size(); ++a) {
      const double sa = basis.dN(a, 0) * nu_con[0] + basis.dN(a, 1) * nu_con[1];
      for (int b = 0; b < basis.size(); ++b) {
        const double dnb = bp.sign * basis.dN(b, bp.dir);
        k_ext.block<3, 3>(3 * a, 3 * b) -=
            meas * m_tau * il2 * sa * dnb * (cur.normal * axi.transpose());
      }
    }
  }
  // the nu-variation block is not a measure variation; it stays for
  // constant m_tau ds as well (finite differences arbitrate)
  if (!dbg.drop_nu_variation) {
    const double il = 1.0 / axi.norm();
    for (int a = 0; a < basis.size(); ++a) {
      const double ta = basis.dN(a, 0) * tau_con[0] + basis.dN(a, 1) * tau_con[1];
      for (int b = 0; b < basis.size(); ++b) {
        const double dnb = bp.sign * basis.dN(b, bp.dir);
        k_ext.block<3, 3>(3 * a, 3 * b) +=
            meas * m_tau * il * ta * dnb * (cur.normal * nu.transpose());
      }
    }
  }
}

void add_edge_moment_in(const BoundaryPoint& bp, const FiberState& fs, double m_bar,
                        bool live_measure, VecX& f_ext, MatX& k_ext) {
  const BasisEval& basis = *bp.basis;
  const SurfaceConfig& cur = *bp.cur;
  const double meas = bp.w_par * (live_measure ? bp.cur_len() : bp.ref_len);

  for (int a = 0; a < basis.size(); ++a) {
    const double s = basis.dN(a, 0) * fs.ell_con[0] + basis.dN(a, 1) * fs.ell_con[1];
    f_ext.segment<3>(3 * a) += meas * m_bar * s * fs.c;
  }

  const Mat3 Tnn = cur.normal * cur.normal.transpose();
  const Mat3 Tlc = fs.ell * fs.c.transpose() + fs.c * fs.ell.transpose();
  for (int a = 0; a < basis.size(); ++a)
    for (int b = 0; b < basis.size(); ++b) {
      Mat3 blk = Mat3::Zero();
      for (int al = 0; al < 2; ++al)
        for (int be = 0; be < 2; ++be)
          blk += basis.dN(a, al) * basis.dN(b, be) *
                 (fs.ell_con[al] * fs.c_con[be] * Tnn -
                  fs.ell_con[al] * fs.ell_con[be] * Tlc);
      k_ext.block<3, 3>(3 * a, 3 * b) += meas * m_bar * blk;
    }

  if (live_measure) {
    const Vec3 axi = bp.a_xi();
    const double il2 = 1.0 / axi.squaredNorm();
    for (int a = 0; a < basis.size(); ++a) {
      const double sa = basis.dN(a, 0) * fs.ell_con[0] + basis.dN(a, 1) * fs.ell_con[1];
      for (int b = 0; b < basis.size(); ++b) {
        const double dnb = bp.sign * basis.dN(b, bp.dir);
        k_ext.block<3, 3>(3 * a, 3 * b) +=
            meas * m_bar * il2 * sa * dnb * (fs.c * axi.transpose());
      }
    }
  }
}

void add_corner_load(const BasisEval& basis, const SurfaceConfig& cur, int local_node,
                     double m_nu, VecX& f_ext, MatX& k_ext) {
  f_ext.segment<3>(3 * local_node) += m_nu * cur.normal;
  for (int b = 0; b < basis.size(); ++b) {
    Mat3 blk = Mat3::Zero();
    for (int al = 0; al < 2; ++al)
      blk -= m_nu * basis.dN(b, al) * (cur.dual(al) * cur.normal.transpose());
    k_ext.block<3, 3>(3 * local_node, 3 * b) += blk;
  }
}

GaussRule gauss_rule_01(int n) {
  if (n < 1) throw FshellError("gauss_rule_01: need at least one point");
  GaussRule r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton on Legendre P_n from the Chebyshev initial guess
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.points[n - 1 - i] = 0.5 * (1.0 + x);
    r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace fshell
