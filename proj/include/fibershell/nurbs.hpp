#ifndef FIBERSHELL_NURBS_HPP
#define FIBERSHELL_NURBS_HPP

#include <array>
#include <vector>

#include "fibershell/types.hpp"

namespace fshell {

// Clamped (open) knot vector. First and last knots repeat degree+1 times.
struct KnotVector {
  int degree = 0;
  std::vector<double> knots;

  int num_ctrl() const { return static_cast<int>(knots.size()) - degree - 1; }
  double front() const { return knots.front(); }
  double back() const { return knots.back(); }

  // Indices k of nonzero spans [knots[k], knots[k+1]).
  std::vector<int> span_indices() const;
  int num_elements() const { return static_cast<int>(span_indices().size()); }
  int find_span(double u) const;

  void validate() const;
};

KnotVector open_knot_vector(int degree, int n_elements, double a = 0.0, double b = 1.0);

// Tensor-product NURBS surface. Control points are stored u-fastest:
// node(i,j) = j*nu + i.
struct NurbsPatch {
  KnotVector U, V;
  std::vector<Vec3> ctrl;
  std::vector<double> weights;

  int nu() const { return U.num_ctrl(); }
  int nv() const { return V.num_ctrl(); }
  int num_ctrl() const { return nu() * nv(); }
  int node(int i, int j) const { return j * nu() + i; }

  Vec3 point(double u, double v) const;
  void validate() const;
};

// Values and parametric derivatives (orders 1 and 2) of the n_e nonzero
// rational basis functions at one parametric point, with their global
// control-point indices. Second-derivative columns are ordered (11, 22, 12).
struct BasisEval {
  std::vector<int> nodes;
  VecX N;
  Eigen::Matrix<double, Eigen::Dynamic, 2> dN;
  Eigen::Matrix<double, Eigen::Dynamic, 3> ddN;

  int size() const { return static_cast<int>(nodes.size()); }
};

BasisEval eval_basis(const NurbsPatch& patch, double u, double v);

// B-spline basis values and derivatives up to order `nders` for the span
// containing u (Cox-de Boor recursion in triangular-table form). Row k of
// the result holds the k-th derivatives of the degree+1 nonzero functions.
MatX bspline_ders(const KnotVector& kv, int span, double u, int nders);

NurbsPatch insert_knots(const NurbsPatch& patch,
                        const std::vector<double>& new_u,
                        const std::vector<double>& new_v);

// Uniform h-refinement: subdivide every span of both knot vectors `levels` times.
NurbsPatch refine_uniform(const NurbsPatch& patch, int levels);

// Flat rectangle [0,Lx]x[0,Ly] in the e1-e2 plane, unit weights.
NurbsPatch build_rect_patch(double lx, double ly, int degree_u, int degree_v,
                            int nel_u, int nel_v);

// Quarter annulus in the first quadrant, exact circular arcs via the 3-point
// conic with middle weight cos(45deg). u runs along the angle, v along the radius.
NurbsPatch build_quarter_annulus(double ri, double ro, int nel_u, int nel_v);

}  // namespace fshell

#endif
