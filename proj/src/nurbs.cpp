#include "fibershell/nurbs.hpp"

#include <algorithm>
#include <cmath>

namespace fshell {

std::vector<int> KnotVector::span_indices() const {
  std::vector<int> spans;
  for (int k = degree; k < num_ctrl(); ++k) {
    if (knots[k + 1] > knots[k]) spans.push_back(k);
  }
  return spans;
}

int KnotVector::find_span(double u) const {
  const int n = num_ctrl();
  if (u < knots[degree] || u > knots[n]) throw FshellError("parametric point outside knot range");
  if (u >= knots[n]) return n - 1;  // right end maps into the last span
  int lo = degree, hi = n;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (u < knots[mid]) hi = mid; else lo = mid;
  }
  return lo;
}

void KnotVector::validate() const {
  if (degree < 1) throw FshellError("knot vector: degree must be >= 1");
  const int m = static_cast<int>(knots.size());
  if (m < 2 * (degree + 1)) throw FshellError("knot vector: too few knots");
  for (int i = 0; i + 1 < m; ++i)
    if (knots[i + 1] < knots[i]) throw FshellError("knot vector: not non-decreasing");
  for (int i = 0; i <= degree; ++i) {
    if (knots[i] != knots[0] || knots[m - 1 - i] != knots[m - 1])
      throw FshellError("knot vector: not clamped");
  }
  // interior multiplicity at most degree
  int run = 1;
  for (int i = degree + 1; i < m - degree - 1; ++i) {
    run = (knots[i] == knots[i - 1]) ? run + 1 : 1;
    if (run > degree) throw FshellError("knot vector: interior multiplicity exceeds degree");
  }
}

KnotVector open_knot_vector(int degree, int n_elements, double a, double b) {
  if (degree < 1 || n_elements < 1) throw FshellError("open_knot_vector: degree and element count must be >= 1");
  if (!(b > a)) throw FshellError("open_knot_vector: degenerate domain");
  KnotVector kv;
  kv.degree = degree;
  kv.knots.assign(degree + 1, a);
  for (int k = 1; k < n_elements; ++k)
    kv.knots.push_back(a + (b - a) * static_cast<double>(k) / n_elements);
  kv.knots.insert(kv.knots.end(), degree + 1, b);
  return kv;
}

MatX bspline_ders(const KnotVector& kv, int span, double u, int nders) {
  const int p = kv.degree;
  const auto& U = kv.knots;
  MatX ders = MatX::Zero(nders + 1, p + 1);

  // triangular table of knot differences and basis values
  MatX ndu(p + 1, p + 1);
  std::vector<double> left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - U[span + 1 - j];
    right[j] = U[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

  // derivatives from the difference table
  MatX a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= nders; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double fac = p;
  for (int k = 1; k <= nders; ++k) {
    for (int j = 0; j <= p; ++j) ders(k, j) *= fac;
    fac *= (p - k);
  }
  return ders;
}

void NurbsPatch::validate() const {
  U.validate();
  V.validate();
  if (static_cast<int>(ctrl.size()) != num_ctrl() || ctrl.size() != weights.size())
    throw FshellError("patch: control net size inconsistent with knot vectors");
  for (double w : weights)
    if (!(w > 0.0)) throw FshellError("patch: weights must be positive");
}

BasisEval eval_basis(const NurbsPatch& patch, double u, double v) {
  const int p = patch.U.degree, q = patch.V.degree;
  const int su = patch.U.find_span(u), sv = patch.V.find_span(v);
  const MatX du = bspline_ders(patch.U, su, u, 2);
  const MatX dv = bspline_ders(patch.V, sv, v, 2);

  const int ne = (p + 1) * (q + 1);
  BasisEval be;
  be.nodes.resize(ne);
  be.N.resize(ne);
  be.dN.resize(ne, 2);
  be.ddN.resize(ne, 3);

  // weighted sums W and its parametric derivatives
  double W = 0, Wu = 0, Wv = 0, Wuu = 0, Wvv = 0, Wuv = 0;
  int a = 0;
  for (int j = 0; j <= q; ++j) {
    for (int i = 0; i <= p; ++i, ++a) {
      const int gi = su - p + i, gj = sv - q + j;
      be.nodes[a] = patch.node(gi, gj);
      const double w = patch.weights[be.nodes[a]];
      W += du(0, i) * dv(0, j) * w;
      Wu += du(1, i) * dv(0, j) * w;
      Wv += du(0, i) * dv(1, j) * w;
      Wuu += du(2, i) * dv(0, j) * w;
      Wvv += du(0, i) * dv(2, j) * w;
      Wuv += du(1, i) * dv(1, j) * w;
    }
  }

  a = 0;
  for (int j = 0; j <= q; ++j) {
    for (int i = 0; i <= p; ++i, ++a) {
      const double w = patch.weights[be.nodes[a]];
      const double f = w * du(0, i) * dv(0, j);
      const double fu = w * du(1, i) * dv(0, j);
      const double fv = w * du(0, i) * dv(1, j);
      const double fuu = w * du(2, i) * dv(0, j);
      const double fvv = w * du(0, i) * dv(2, j);
      const double fuv = w * du(1, i) * dv(1, j);

      const double R = f / W;
      const double Ru = (fu - R * Wu) / W;
      const double Rv = (fv - R * Wv) / W;
      be.N[a] = R;
      be.dN(a, 0) = Ru;
      be.dN(a, 1) = Rv;
      // quotient rule expanded to second order
      be.ddN(a, 0) = (fuu - 2.0 * Ru * Wu - R * Wuu) / W;
      be.ddN(a, 1) = (fvv - 2.0 * Rv * Wv - R * Wvv) / W;
      be.ddN(a, 2) = (fuv - Ru * Wv - Rv * Wu - R * Wuv) / W;
    }
  }
  return be;
}

Vec3 NurbsPatch::point(double u, double v) const {
  const BasisEval be = eval_basis(*this, u, v);
  Vec3 x = Vec3::Zero();
  for (int a = 0; a < be.size(); ++a) x += be.N[a] * ctrl[be.nodes[a]];
  return x;
}

namespace {

// One Boehm insertion of knot ubar into a set of homogeneous control rows.
// rows[k] holds the k-th control "column" along the insertion direction.
void insert_one(KnotVector& kv, std::vector<std::vector<Eigen::Vector4d>>& rows, double ubar) {
  const int p = kv.degree;
  if (ubar <= kv.front() || ubar >= kv.back()) throw FshellError("insert_knots: knot outside open domain");
  const int k = kv.find_span(ubar);
  // multiplicity after insertion must stay <= p
  int mult = 0;
  for (double t : kv.knots)
    if (t == ubar) ++mult;
  if (mult >= p) throw FshellError("insert_knots: multiplicity would exceed degree");

  const int n = static_cast<int>(rows.size());
  std::vector<std::vector<Eigen::Vector4d>> out(n + 1);
  for (int i = 0; i <= k - p; ++i) out[i] = rows[i];
  for (int i = k - p + 1; i <= k; ++i) {
    const double denom = kv.knots[i + p] - kv.knots[i];
    const double alpha = (ubar - kv.knots[i]) / denom;
    out[i].resize(rows[i].size());
    for (size_t r = 0; r < rows[i].size(); ++r)
      out[i][r] = alpha * rows[i][r] + (1.0 - alpha) * rows[i - 1][r];
  }
  for (int i = k + 1; i <= n; ++i) out[i] = rows[i - 1];
  rows = std::move(out);
  kv.knots.insert(kv.knots.begin() + (k + 1), ubar);
}

}  // namespace

NurbsPatch insert_knots(const NurbsPatch& patch,
                        const std::vector<double>& new_u,
                        const std::vector<double>& new_v) {
  patch.validate();
  if (new_u.empty() && new_v.empty()) return patch;
  const int nu0 = patch.nu(), nv0 = patch.nv();

  // homogeneous coordinates, columns along u
  std::vector<std::vector<Eigen::Vector4d>> cols(nu0, std::vector<Eigen::Vector4d>(nv0));
  for (int j = 0; j < nv0; ++j)
    for (int i = 0; i < nu0; ++i) {
      const int n = patch.node(i, j);
      cols[i][j] << patch.weights[n] * patch.ctrl[n], patch.weights[n];
    }

  KnotVector U = patch.U;
  std::vector<double> su = new_u;
  std::sort(su.begin(), su.end());
  for (double ub : su) insert_one(U, cols, ub);
  const int nu1 = static_cast<int>(cols.size());

  // transpose to rows along v and insert there
  std::vector<std::vector<Eigen::Vector4d>> rows(nv0, std::vector<Eigen::Vector4d>(nu1));
  for (int j = 0; j < nv0; ++j)
    for (int i = 0; i < nu1; ++i) rows[j][i] = cols[i][j];
  KnotVector V = patch.V;
  std::vector<double> sv = new_v;
  std::sort(sv.begin(), sv.end());
  for (double vb : sv) insert_one(V, rows, vb);
  const int nv1 = static_cast<int>(rows.size());

  NurbsPatch out;
  out.U = U;
  out.V = V;
  out.ctrl.resize(nu1 * nv1);
  out.weights.resize(nu1 * nv1);
  for (int j = 0; j < nv1; ++j)
    for (int i = 0; i < nu1; ++i) {
      const Eigen::Vector4d& hw = rows[j][i];
      out.weights[out.node(i, j)] = hw[3];
      out.ctrl[out.node(i, j)] = hw.head<3>() / hw[3];
    }
  out.validate();
  return out;
}

NurbsPatch refine_uniform(const NurbsPatch& patch, int levels) {
  NurbsPatch out = patch;
  for (int l = 0; l < levels; ++l) {
    std::vector<double> mu, mv;
    for (int k : out.U.span_indices()) mu.push_back(0.5 * (out.U.knots[k] + out.U.knots[k + 1]));
    for (int k : out.V.span_indices()) mv.push_back(0.5 * (out.V.knots[k] + out.V.knots[k + 1]));
    out = insert_knots(out, mu, mv);
  }
  return out;
}

NurbsPatch build_rect_patch(double lx, double ly, int degree_u, int degree_v,
                            int nel_u, int nel_v) {
  if (!(lx > 0.0) || !(ly > 0.0)) throw FshellError("build_rect_patch: dimensions must be positive");
  NurbsPatch p;
  p.U = open_knot_vector(degree_u, nel_u);
  p.V = open_knot_vector(degree_v, nel_v);
  const int nu = p.U.num_ctrl(), nv = p.V.num_ctrl();
  p.ctrl.resize(nu * nv);
  p.weights.assign(nu * nv, 1.0);

  // Greville abscissae give a uniform-parameter flat sheet
  auto greville = [](const KnotVector& kv, int i) {
    double s = 0.0;
    for (int k = 1; k <= kv.degree; ++k) s += kv.knots[i + k];
    return s / kv.degree;
  };
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nu; ++i)
      p.ctrl[p.node(i, j)] = Vec3(lx * greville(p.U, i), ly * greville(p.V, j), 0.0);
  p.validate();
  return p;
}

NurbsPatch build_quarter_annulus(double ri, double ro, int nel_u, int nel_v) {
  if (!(ri > 0.0) || !(ro > ri)) throw FshellError("build_quarter_annulus: need 0 < Ri < Ro");
  NurbsPatch p;
  p.U = open_knot_vector(2, 1);
  p.V = open_knot_vector(2, 1);
  p.ctrl.resize(9);
  p.weights.resize(9);
  const double w45 = std::sqrt(0.5);
  const double rm = 0.5 * (ri + ro);
  const double radii[3] = {ri, rm, ro};
  for (int j = 0; j < 3; ++j) {
    const double r = radii[j];
    p.ctrl[p.node(0, j)] = Vec3(r, 0.0, 0.0);
    p.ctrl[p.node(1, j)] = Vec3(r, r, 0.0);
    p.ctrl[p.node(2, j)] = Vec3(0.0, r, 0.0);
    p.weights[p.node(0, j)] = 1.0;
    p.weights[p.node(1, j)] = w45;
    p.weights[p.node(2, j)] = 1.0;
  }
  // refine to the requested element counts
  std::vector<double> mu, mv;
  for (int k = 1; k < nel_u; ++k) mu.push_back(static_cast<double>(k) / nel_u);
  for (int k = 1; k < nel_v; ++k) mv.push_back(static_cast<double>(k) / nel_v);
  return insert_knots(p, mu, mv);
}

}  // namespace fshell
