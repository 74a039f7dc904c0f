#include "fibershell/kinematics.hpp"

#include <cmath>

namespace fshell {

SurfaceConfig surface_config(const BasisEval& basis, const VecX& x) {
  const int ne = basis.size();
  SurfaceConfig s;
  s.a[0].setZero();
  s.a[1].setZero();
  for (int k = 0; k < 3; ++k) s.dda[k].setZero();
  for (int a = 0; a < ne; ++a) {
    const Vec3 xa = x.segment<3>(3 * a);
    s.a[0] += basis.dN(a, 0) * xa;
    s.a[1] += basis.dN(a, 1) * xa;
    s.dda[0] += basis.ddN(a, 0) * xa;
    s.dda[1] += basis.ddN(a, 1) * xa;
    s.dda[2] += basis.ddN(a, 2) * xa;
  }
  s.metric(0, 0) = s.a[0].dot(s.a[0]);
  s.metric(1, 1) = s.a[1].dot(s.a[1]);
  s.metric(0, 1) = s.metric(1, 0) = s.a[0].dot(s.a[1]);
  const double det = s.metric(0, 0) * s.metric(1, 1) - s.metric(0, 1) * s.metric(0, 1);
  const Vec3 cr = s.a[0].cross(s.a[1]);
  const double crn = cr.norm();
  const double scale = std::sqrt(s.metric(0, 0) + s.metric(1, 1));
  if (!(crn > 1e-12 * scale * scale)) throw FshellError("surface_config: degenerate tangents");
  s.jac = std::sqrt(det);
  s.metric_inv(0, 0) = s.metric(1, 1) / det;
  s.metric_inv(1, 1) = s.metric(0, 0) / det;
  s.metric_inv(0, 1) = s.metric_inv(1, 0) = -s.metric(0, 1) / det;
  s.normal = cr / crn;

  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) {
      const Vec3& dab = s.second(al, be);
      s.curv(al, be) = s.normal.dot(dab);
      for (int g = 0; g < 2; ++g) s.gamma[g][al][be] = dab.dot(s.dual(g));
    }
  return s;
}

Vec3 dual_derivative(const SurfaceConfig& cfg, int alpha, int beta) {
  // a^a = A^{ag} a_g ;  d(A^{ag})/dxi^b = -A^{am} (d a_{mn}) A^{ng}
  Mat2 dmet;
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 2; ++n)
      dmet(m, n) = cfg.second(m, beta).dot(cfg.a[n]) + cfg.a[m].dot(cfg.second(n, beta));
  const Mat2 dinv = -cfg.metric_inv * dmet * cfg.metric_inv;
  Vec3 out = Vec3::Zero();
  for (int g = 0; g < 2; ++g)
    out += dinv(alpha, g) * cfg.a[g] + cfg.metric_inv(alpha, g) * cfg.second(g, beta);
  return out;
}

FiberField constant_fiber_field(const Vec3& dir) {
  const Vec3 d = dir.normalized();
  return FiberField{[d](const Vec3&) { return d; },
                    [](const Vec3&) { return Mat3::Zero(); }};
}

FiberField circumferential_fiber_field() {
  auto direction = [](const Vec3& x) {
    const double r = std::hypot(x[0], x[1]);
    return Vec3(-x[1] / r, x[0] / r, 0.0);
  };
  auto gradient = [](const Vec3& x) {
    const double r = std::hypot(x[0], x[1]);
    const double r3 = r * r * r;
    Mat3 g = Mat3::Zero();
    g(0, 0) = x[0] * x[1] / r3;
    g(0, 1) = -x[0] * x[0] / r3;
    g(1, 0) = x[1] * x[1] / r3;
    g(1, 1) = -x[0] * x[1] / r3;
    return g;
  };
  return FiberField{direction, gradient};
}

FiberRef fiber_reference(const SurfaceConfig& ref, const FiberField& field, const Vec3& X) {
  FiberRef fr;
  const Vec3 L3 = field.direction(X);
  const Mat3 dL3 = field.gradient(X);

  // raw in-plane components and their parametric derivatives:
  // l^a = L . a^a ;  l^a,b = (dL/dX a_b) . a^a + L . d(a^a)/dxi^b
  Vec2 l;
  Mat2 dl;
  for (int a = 0; a < 2; ++a) l[a] = L3.dot(ref.dual(a));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      dl(a, b) = (dL3 * ref.a[b]).dot(ref.dual(a)) + L3.dot(dual_derivative(ref, a, b));

  // normalize against the reference metric so that A : L x L = 1 holds even
  // when the supplied direction is not exactly tangent to the surface
  const double n2 = l.transpose() * ref.metric * l;
  if (!(n2 > 1e-20)) throw FshellError("fiber_reference: direction field normal to the surface");
  const double nrm = std::sqrt(n2);
  fr.L = l / nrm;
  for (int b = 0; b < 2; ++b) {
    Mat2 dmet;
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n)
        dmet(m, n) = ref.second(m, b).dot(ref.a[n]) + ref.a[m].dot(ref.second(n, b));
    const double dn2 = (l.transpose() * dmet * l)(0, 0) +
                       2.0 * (l.transpose() * ref.metric * dl.col(b))(0, 0);
    const double dnrm = 0.5 * dn2 / nrm;
    fr.dL.col(b) = dl.col(b) / nrm - l * (dnrm / n2);
  }

  const Vec3 Lt = fr.L[0] * ref.a[0] + fr.L[1] * ref.a[1];
  const Vec3 c0 = ref.normal.cross(Lt);
  for (int a = 0; a < 2; ++a) {
    fr.c0_con[a] = c0.dot(ref.dual(a));
    fr.c0_cov[a] = c0.dot(ref.a[a]);
  }
  FiberState fs0 = fiber_state(ref, fr);
  fr.bbar0 = fs0.bbar;
  return fr;
}

FiberState fiber_state(const SurfaceConfig& cur, const FiberRef& ref) {
  FiberState fs;
  const double lam2 = ref.L.transpose() * cur.metric * ref.L;
  if (!(lam2 > 1e-20)) throw FshellError("fiber_state: collapsed fiber (stretch ~ 0)");
  fs.lambda = std::sqrt(lam2);

  const Vec3 FL = ref.L[0] * cur.a[0] + ref.L[1] * cur.a[1];
  fs.ell = FL / fs.lambda;
  fs.c = cur.normal.cross(fs.ell);
  for (int a = 0; a < 2; ++a) {
    fs.ell_con[a] = ref.L[a] / fs.lambda;
    fs.ell_cov[a] = fs.ell.dot(cur.a[a]);
    fs.c_con[a] = fs.c.dot(cur.dual(a));
    fs.c_cov[a] = fs.c.dot(cur.a[a]);
  }
  fs.Lhat = ref.dL / fs.lambda;
  for (int g = 0; g < 2; ++g)
    for (int a = 0; a < 2; ++a) {
      fs.gamma_c(g, a) = fs.c.dot(cur.second(g, a));
      fs.gamma_l(g, a) = fs.ell.dot(cur.second(g, a));
    }

  // Lhat with lowered first index: Lhat_{g,a} = a_{gd} Lhat^d,a
  const Mat2 Lhat_low = cur.metric * fs.Lhat;
  for (int a = 0; a < 2; ++a) {
    fs.g[a] = fs.c_con[0] * Lhat_low(0, a) + fs.c_con[1] * Lhat_low(1, a) +
              fs.ell_con[0] * fs.gamma_c(0, a) + fs.ell_con[1] * fs.gamma_c(1, a);
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      fs.bbar(a, b) = 0.5 * (fs.g[a] * fs.ell_cov[b] + fs.g[b] * fs.ell_cov[a]);

  for (int g = 0; g < 2; ++g)
    for (int a = 0; a < 2; ++a) {
      fs.Lc(g, a) = -fs.ell_con[g] * fs.g[a];
      const double h = fs.ell_cov[0] * fs.Lhat(0, a) + fs.ell_cov[1] * fs.Lhat(1, a) +
                       fs.ell_con[0] * fs.gamma_l(0, a) + fs.ell_con[1] * fs.gamma_l(1, a);
      fs.Cc(g, a) = fs.Lhat(g, a) - fs.ell_con[g] * h;
      fs.Nc(g, a) = fs.c_con[g] * (fs.ell_con[0] * cur.curv(0, a) + fs.ell_con[1] * cur.curv(1, a));
    }
  return fs;
}

Mat2 inplane_curvature(const FiberState& fs, const SurfaceConfig& cur) {
  Mat2 b;
  for (int a = 0; a < 2; ++a)
    for (int be = 0; be < 2; ++be)
      b(a, be) = -0.5 * (fs.cbar_d(a).dot(cur.a[be]) + fs.cbar_d(be).dot(cur.a[a]));
  return b;
}

DeformationInvariants deformation_invariants(const SurfaceConfig& ref,
                                             const std::vector<FiberRef>& fibers_ref,
                                             const SurfaceConfig& cur,
                                             const std::vector<FiberState>& fibers_cur) {
  const int nf = static_cast<int>(fibers_ref.size());
  if (nf != static_cast<int>(fibers_cur.size()))
    throw FshellError("deformation_invariants: family count mismatch");
  DeformationInvariants inv;
  inv.Lambda.resize(nf);
  inv.Kn.resize(nf);
  inv.Tg.resize(nf);
  inv.Kg.resize(nf);
  inv.gamma.resize(nf, nf);
  inv.gamma0.resize(nf, nf);
  const Mat2 dK = cur.curv - ref.curv;
  for (int i = 0; i < nf; ++i) {
    const Vec2& L = fibers_ref[i].L;
    inv.Lambda[i] = L.transpose() * cur.metric * L;
    inv.Kn[i] = L.transpose() * dK * L;
    inv.Tg[i] = L.transpose() * dK * fibers_ref[i].c0_con;
    const Mat2 dB = fibers_cur[i].bbar - fibers_ref[i].bbar0;
    inv.Kg[i] = L.transpose() * dB * L;
    for (int j = 0; j < nf; ++j) {
      inv.gamma(i, j) = L.transpose() * cur.metric * fibers_ref[j].L;
      inv.gamma0(i, j) = L.transpose() * ref.metric * fibers_ref[j].L;
    }
  }
  if (nf == 2) inv.gamma_hat = fibers_cur[0].ell.dot(fibers_cur[1].ell);
  return inv;
}

}  // namespace fshell
