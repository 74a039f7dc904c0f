#include "fibershell/solver.hpp"

#include <Eigen/SparseLU>
#include <limits>
#include <algorithm>
#include <cmath>
#include <random>

namespace fshell {

std::vector<int> edge_nodes(const NurbsPatch& patch, EdgeId edge) {
  std::vector<int> nodes;
  const int nu = patch.nu(), nv = patch.nv();
  switch (edge) {
    case EdgeId::UMin: for (int j = 0; j < nv; ++j) nodes.push_back(patch.node(0, j)); break;
    case EdgeId::UMax: for (int j = 0; j < nv; ++j) nodes.push_back(patch.node(nu - 1, j)); break;
    case EdgeId::VMin: for (int i = 0; i < nu; ++i) nodes.push_back(patch.node(i, 0)); break;
    case EdgeId::VMax: for (int i = 0; i < nu; ++i) nodes.push_back(patch.node(i, nv - 1)); break;
  }
  return nodes;
}

Constraint fix_nodes(std::string name, std::vector<int> nodes, std::array<bool, 3> comp) {
  Constraint c;
  c.name = std::move(name);
  c.nodes = std::move(nodes);
  c.comp = comp;
  return c;
}

namespace {

struct EdgeGeom {
  int dir;       // parametric direction along the edge
  double sign;   // counterclockwise traversal
  double fixed;  // value of the other coordinate
  int fixed_dir;
};

EdgeGeom edge_geometry(const NurbsPatch& patch, EdgeId edge) {
  switch (edge) {
    case EdgeId::VMin: return {0, +1.0, patch.V.front(), 1};
    case EdgeId::UMax: return {1, +1.0, patch.U.back(), 0};
    case EdgeId::VMax: return {0, -1.0, patch.V.back(), 1};
    case EdgeId::UMin: return {1, -1.0, patch.U.front(), 0};
  }
  throw FshellError("edge_geometry: bad edge");
}

VecX gather(const VecX& x, const std::vector<int>& nodes) {
  VecX xe(3 * nodes.size());
  for (size_t a = 0; a < nodes.size(); ++a) xe.segment<3>(3 * a) = x.segment<3>(3 * nodes[a]);
  return xe;
}

Mat2 metric_of(const BasisEval& basis, const VecX& xe) {
  Vec3 a1 = Vec3::Zero(), a2 = Vec3::Zero();
  for (int a = 0; a < basis.size(); ++a) {
    a1 += basis.dN(a, 0) * xe.segment<3>(3 * a);
    a2 += basis.dN(a, 1) * xe.segment<3>(3 * a);
  }
  Mat2 m;
  m << a1.dot(a1), a1.dot(a2), a1.dot(a2), a2.dot(a2);
  return m;
}

MaterialResponse material_at(const Model& model, const QuadPoint& qp,
                             const SurfaceConfig& cur, const std::vector<FiberState>& fc,
                             const DeformationInvariants& inv, const Mat2& a_pre,
                             const signed char* branch = nullptr) {
  MaterialPointState s;
  s.ref = &qp.ref;
  s.cur = &cur;
  s.fibers_ref = &qp.fibers;
  s.fibers_cur = &fc;
  s.inv = &inv;
  s.X = qp.X;
  s.branch = branch;
  MaterialResponse r = model.custom_material
                           ? model.custom_material(s)
                           : (model.material == MaterialModel::Simple
                                  ? simple_fabric(s, model.simple)
                                  : woven_fabric(s, model.woven));
  if (model.use_stabilization) r += stabilize_compression(s, a_pre, model.stab);
  return r;
}

}  // namespace

Mesh build_mesh(const Model& model) {
  const NurbsPatch& patch = model.patch;
  patch.validate();
  const int p = patch.U.degree, q = patch.V.degree;
  const int ngu = model.gauss_u > 0 ? model.gauss_u : p + 1;
  const int ngv = model.gauss_v > 0 ? model.gauss_v : q + 1;
  const GaussRule gu = gauss_rule_01(ngu), gv = gauss_rule_01(ngv);

  Mesh mesh;
  mesh.n_nodes = patch.num_ctrl();
  VecX X0(3 * patch.num_ctrl());
  for (int n = 0; n < patch.num_ctrl(); ++n) X0.segment<3>(3 * n) = patch.ctrl[n];

  for (int kv : patch.V.span_indices()) {
    const double v0 = patch.V.knots[kv], v1 = patch.V.knots[kv + 1];
    for (int ku : patch.U.span_indices()) {
      const double u0 = patch.U.knots[ku], u1 = patch.U.knots[ku + 1];
      ElementData ed;
      for (int jv = 0; jv < ngv; ++jv)
        for (int ju = 0; ju < ngu; ++ju) {
          QuadPoint qp;
          const double u = u0 + (u1 - u0) * gu.points[ju];
          const double v = v0 + (v1 - v0) * gv.points[jv];
          qp.basis = eval_basis(patch, u, v);
          qp.w_par = gu.weights[ju] * gv.weights[jv] * (u1 - u0) * (v1 - v0);
          const VecX Xe = gather(X0, qp.basis.nodes);
          qp.ref = surface_config(qp.basis, Xe);
          qp.wA = qp.w_par * qp.ref.jac;
          qp.X.setZero();
          for (int a = 0; a < qp.basis.size(); ++a) qp.X += qp.basis.N[a] * Xe.segment<3>(3 * a);
          for (const FiberField& ff : model.fiber_fields)
            qp.fibers.push_back(fiber_reference(qp.ref, ff, qp.X));
          if (ed.nodes.empty()) ed.nodes = qp.basis.nodes;
          ed.qps.push_back(std::move(qp));
        }
      ed.mass = MatX::Zero(ed.qps[0].basis.size(), ed.qps[0].basis.size());
      for (const QuadPoint& qp : ed.qps)
        ed.mass += qp.wA * (qp.basis.N * qp.basis.N.transpose());
      mesh.qp_offset.push_back(mesh.total_qps);
      mesh.total_qps += static_cast<int>(ed.qps.size());
      mesh.elems.push_back(std::move(ed));
    }
  }

  // boundary quadrature for edge loads
  for (const BoundaryLoad& bl : model.loads.boundary) {
    const EdgeGeom eg = edge_geometry(patch, bl.edge);
    const KnotVector& kv = (eg.dir == 0) ? patch.U : patch.V;
    const int ng = (eg.dir == 0 ? ngu : ngv);
    const GaussRule g1 = gauss_rule_01(ng);
    std::vector<BoundaryQP> bqs;
    for (int span : kv.span_indices()) {
      const double s0 = kv.knots[span], s1 = kv.knots[span + 1];
      for (int jg = 0; jg < ng; ++jg) {
        BoundaryQP bq;
        const double s = s0 + (s1 - s0) * g1.points[jg];
        const double u = (eg.dir == 0) ? s : eg.fixed;
        const double v = (eg.dir == 0) ? eg.fixed : s;
        bq.basis = eval_basis(patch, u, v);
        bq.dir = eg.dir;
        bq.sign = eg.sign;
        bq.w_par = g1.weights[jg] * (s1 - s0);
        const VecX Xe = gather(X0, bq.basis.nodes);
        bq.ref = surface_config(bq.basis, Xe);
        bq.ref_len = bq.ref.a[eg.dir].norm();
        if (bl.type == BoundaryLoad::Type::MomentIn) {
          Vec3 X = Vec3::Zero();
          for (int a = 0; a < bq.basis.size(); ++a) X += bq.basis.N[a] * Xe.segment<3>(3 * a);
          for (const FiberField& ff : model.fiber_fields)
            bq.fibers.push_back(fiber_reference(bq.ref, ff, X));
        }
        bqs.push_back(std::move(bq));
      }
    }
    mesh.boundary.push_back(std::move(bqs));
  }

  // corner loads attach to the interpolatory corner control points
  for (const CornerLoad& cl : model.loads.corners) {
    const double u = cl.iu ? patch.U.back() : patch.U.front();
    const double v = cl.iv ? patch.V.back() : patch.V.front();
    const BasisEval be = eval_basis(patch, u, v);
    const int corner_node =
        patch.node(cl.iu ? patch.nu() - 1 : 0, cl.iv ? patch.nv() - 1 : 0);
    int local = -1;
    for (int a = 0; a < be.size(); ++a)
      if (be.nodes[a] == corner_node) local = a;
    // locate the owning element by matching node sets
    int elem = -1;
    for (size_t e = 0; e < mesh.elems.size(); ++e)
      if (mesh.elems[e].nodes == be.nodes) elem = static_cast<int>(e);
    if (elem < 0 || local < 0) throw FshellError("corner load: corner element not found");
    mesh.corner_elems.emplace_back(elem, local);
  }
  return mesh;
}

SolveState initial_state(const Model& model) {
  SolveState s;
  s.x.resize(3 * model.patch.num_ctrl());
  for (int n = 0; n < model.patch.num_ctrl(); ++n) s.x.segment<3>(3 * n) = model.patch.ctrl[n];
  s.x_pre = s.x;
  return s;
}

DofMap build_dof_map(const Model& model) {
  const int ndof = 3 * model.patch.num_ctrl();
  std::vector<bool> fixed(ndof, false);
  for (const Constraint& c : model.constraints)
    for (int n : c.nodes)
      for (int k = 0; k < 3; ++k)
        if (c.comp[k]) fixed[3 * n + k] = true;
  if (model.planar)
    for (int n = 0; n < model.patch.num_ctrl(); ++n) fixed[3 * n + 2] = true;

  DofMap dm;
  dm.free_of_dof.assign(ndof, -1);
  for (int d = 0; d < ndof; ++d)
    if (!fixed[d]) {
      dm.free_of_dof[d] = dm.n_free++;
      dm.dof_of_free.push_back(d);
    }
  return dm;
}

void apply_constraints(const Model& model, double t, VecX& x) {
  for (const Constraint& c : model.constraints)
    for (int n : c.nodes) {
      const Vec3 X = model.patch.ctrl[n];
      const Vec3 target = c.target ? c.target(X, t) : X;
      for (int k = 0; k < 3; ++k)
        if (c.comp[k]) x[3 * n + k] = target[k];
    }
}

Assembly assemble_global(const Model& model, const Mesh& mesh, const SolveState& state,
                         double load_factor, bool with_tangent,
                         const std::vector<signed char>* branches) {
  const int ndof = mesh.ndof();
  Assembly out;
  out.f_int = VecX::Zero(ndof);
  out.f_ext = VecX::Zero(ndof);
  // dense element blocks collected in a fixed order, scattered once at the end
  std::vector<std::pair<const std::vector<int>*, MatX>> kes;

  const double dt = state.dt();
  const bool viscous = model.viscosity > 0.0 && dt > 0.0;
  const int nf = model.families();

  for (size_t e = 0; e < mesh.elems.size(); ++e) {
    const ElementData& ed = mesh.elems[e];
    const int ne = static_cast<int>(ed.nodes.size());
    const VecX xe = gather(state.x, ed.nodes);
    InternalForces fi;
    fi.init(3 * ne);
    VecX fe = VecX::Zero(3 * ne);
    MatX k = MatX::Zero(3 * ne, 3 * ne);
    MatX k_ext = MatX::Zero(3 * ne, 3 * ne);

    VecX xpre_e;
    if (model.use_stabilization && model.stab.eps_v > 0.0) xpre_e = gather(state.x_pre, ed.nodes);

    for (size_t q = 0; q < ed.qps.size(); ++q) {
      const QuadPoint& qp = ed.qps[q];
      const SurfaceConfig cur = surface_config(qp.basis, xe);
      std::vector<FiberState> fc(nf);
      for (int i = 0; i < nf; ++i) fc[i] = fiber_state(cur, qp.fibers[i]);
      const DeformationInvariants inv = deformation_invariants(qp.ref, qp.fibers, cur, fc);
      Mat2 a_pre = qp.ref.metric;
      if (xpre_e.size()) a_pre = metric_of(qp.basis, xpre_e);
      const signed char* br =
          branches ? branches->data() + (mesh.qp_offset[e] + q) * nf : nullptr;
      const MaterialResponse resp = material_at(model, qp, cur, fc, inv, a_pre, br);

      const ShapeArrays sa = shape_arrays(qp.basis, cur, fc);
      add_internal_force(sa, resp, qp.wA, fi);
      if (with_tangent) {
        add_material_tangent(sa, resp, qp.wA, k);
        add_geometric_tangent(sa, resp, cur, fc, qp.wA, k, model.debug);
      }
      out.energy += [&] {
        EnergyParts e = resp.energy;
        const double w = qp.wA;
        e.matrix *= w; e.stretch *= w; e.bend_out *= w; e.bend_in *= w;
        e.torsion *= w; e.angle *= w; e.stabilization *= w;
        return e;
      }();

      if (!model.loads.body_force.isZero())
        add_body_force(qp.basis, load_factor * model.loads.body_force, qp.wA, fe);
      if (model.loads.pressure != 0.0)
        add_pressure(qp.basis, cur, load_factor * model.loads.pressure, qp.w_par, fe, k_ext);
    }

    if (viscous) {
      const double c = model.viscosity / dt;
      const VecX dxe = xe - gather(state.x_pre, ed.nodes);
      for (int a = 0; a < ne; ++a)
        for (int b = 0; b < ne; ++b) {
          fi.f_tau.segment<3>(3 * a) += c * ed.mass(a, b) * dxe.segment<3>(3 * b);
          if (with_tangent)
            k.block<3, 3>(3 * a, 3 * b) += c * ed.mass(a, b) * Mat3::Identity();
        }
    }

    const VecX fe_int = fi.total();
    for (int a = 0; a < ne; ++a) {
      out.f_int.segment<3>(3 * ed.nodes[a]) += fe_int.segment<3>(3 * a);
      out.f_ext.segment<3>(3 * ed.nodes[a]) += fe.segment<3>(3 * a);
    }
    if (with_tangent) kes.emplace_back(&ed.nodes, k - k_ext);
  }

  // boundary loads
  for (size_t l = 0; l < model.loads.boundary.size(); ++l) {
    const BoundaryLoad& bl = model.loads.boundary[l];
    for (const BoundaryQP& bq : mesh.boundary[l]) {
      const int ne = bq.basis.size();
      const VecX xe = gather(state.x, bq.basis.nodes);
      const SurfaceConfig cur = surface_config(bq.basis, xe);
      BoundaryPoint bp;
      bp.basis = &bq.basis;
      bp.cur = &cur;
      bp.dir = bq.dir;
      bp.sign = bq.sign;
      bp.w_par = bq.w_par;
      bp.ref_len = bq.ref_len;

      VecX fe = VecX::Zero(3 * ne);
      MatX k_ext = MatX::Zero(3 * ne, 3 * ne);
      switch (bl.type) {
        case BoundaryLoad::Type::Traction:
          add_edge_traction(bp, load_factor * bl.traction, bl.live_measure, fe, k_ext);
          break;
        case BoundaryLoad::Type::MomentOut:
          add_edge_moment_out(bp, load_factor * bl.magnitude, bl.live_measure, fe, k_ext,
                              model.debug);
          break;
        case BoundaryLoad::Type::MomentIn: {
          const FiberState fs = fiber_state(cur, bq.fibers[bl.family]);
          add_edge_moment_in(bp, fs, load_factor * bl.magnitude, bl.live_measure, fe, k_ext);
          break;
        }
      }
      for (int a = 0; a < ne; ++a)
        out.f_ext.segment<3>(3 * bq.basis.nodes[a]) += fe.segment<3>(3 * a);
      if (with_tangent) kes.emplace_back(&bq.basis.nodes, -k_ext);
    }
  }

  // corner loads
  for (size_t c = 0; c < model.loads.corners.size(); ++c) {
    const auto& [e, local] = mesh.corner_elems[c];
    const ElementData& ed = mesh.elems[e];
    const int ne = static_cast<int>(ed.nodes.size());
    // corner coincides with the element's quadrature basis? evaluate at the corner
    const CornerLoad& cl = model.loads.corners[c];
    const double u = cl.iu ? model.patch.U.back() : model.patch.U.front();
    const double v = cl.iv ? model.patch.V.back() : model.patch.V.front();
    const BasisEval be = eval_basis(model.patch, u, v);
    const VecX xe = gather(state.x, be.nodes);
    const SurfaceConfig cur = surface_config(be, xe);
    VecX fe = VecX::Zero(3 * ne);
    MatX k_ext = MatX::Zero(3 * ne, 3 * ne);
    add_corner_load(be, cur, local, load_factor * cl.m_nu, fe, k_ext);
    for (int a = 0; a < ne; ++a)
      out.f_ext.segment<3>(3 * be.nodes[a]) += fe.segment<3>(3 * a);
    if (with_tangent) kes.emplace_back(&mesh.elems[e].nodes, -k_ext);
  }

  if (with_tangent) {
    if (mesh.scatter.empty()) {
      std::vector<Eigen::Triplet<double>> trip;
      for (const auto& [nodes, ke] : kes)
        for (size_t a = 0; a < nodes->size(); ++a)
          for (size_t b = 0; b < nodes->size(); ++b)
            for (int ca = 0; ca < 3; ++ca)
              for (int cb = 0; cb < 3; ++cb)
                trip.emplace_back(3 * (*nodes)[a] + ca, 3 * (*nodes)[b] + cb,
                                  ke(3 * a + ca, 3 * b + cb));
      out.K.resize(ndof, ndof);
      out.K.setFromTriplets(trip.begin(), trip.end());
      out.K.makeCompressed();
      // cache the pattern and the value offsets of every contribution entry
      mesh.K_pattern = out.K;
      const int* outer = mesh.K_pattern.outerIndexPtr();
      const int* inner = mesh.K_pattern.innerIndexPtr();
      mesh.scatter.reserve(trip.size());
      for (const auto& [nodes, ke] : kes)
        for (size_t a = 0; a < nodes->size(); ++a)
          for (size_t b = 0; b < nodes->size(); ++b)
            for (int ca = 0; ca < 3; ++ca)
              for (int cb = 0; cb < 3; ++cb) {
                const int row = 3 * (*nodes)[a] + ca, col = 3 * (*nodes)[b] + cb;
                const int* lo = inner + outer[col];
                const int* hi = inner + outer[col + 1];
                const int* it = std::lower_bound(lo, hi, row);
                mesh.scatter.push_back(static_cast<int>(it - inner));
              }
    } else {
      out.K = mesh.K_pattern;
      double* vals = out.K.valuePtr();
      std::fill(vals, vals + out.K.nonZeros(), 0.0);
      size_t pos = 0;
      for (const auto& [nodes, ke] : kes)
        for (size_t a = 0; a < nodes->size(); ++a)
          for (size_t b = 0; b < nodes->size(); ++b)
            for (int ca = 0; ca < 3; ++ca)
              for (int cb = 0; cb < 3; ++cb)
                vals[mesh.scatter[pos++]] += ke(3 * a + ca, 3 * b + cb);
    }
  }
  return out;
}

std::vector<signed char> evaluate_branches(const Model& model, const Mesh& mesh,
                                           const SolveState& state) {
  const int nf = model.families();
  std::vector<signed char> br(static_cast<size_t>(mesh.total_qps) * nf, 1);
  for (size_t e = 0; e < mesh.elems.size(); ++e) {
    const ElementData& ed = mesh.elems[e];
    const VecX xe = gather(state.x, ed.nodes);
    for (size_t q = 0; q < ed.qps.size(); ++q) {
      const Mat2 a = metric_of(ed.qps[q].basis, xe);
      for (int i = 0; i < nf; ++i) {
        const double lam2 = ed.qps[q].fibers[i].L.transpose() * a * ed.qps[q].fibers[i].L;
        br[(mesh.qp_offset[e] + q) * nf + i] = lam2 >= 1.0 ? 1 : -1;
      }
    }
  }
  return br;
}

namespace {

// one Newton solve with frozen tensile branches
NewtonReport newton_frozen(const Model& model, const Mesh& mesh, const DofMap& dofs,
                           SolveState& state, double load_factor, const NewtonSettings& cfg,
                           const std::vector<signed char>* branches) {
  NewtonReport rep;
  apply_constraints(model, state.t, state.x);
  double ref_norm = -1.0;
  for (int iter = 0; iter <= cfg.max_iter; ++iter) {
    Assembly asmb;
    try {
      asmb = assemble_global(model, mesh, state, load_factor, true, branches);
    } catch (const FshellError&) {
      return rep;  // kinematically inadmissible iterate; the step gets halved
    }
    const VecX res = asmb.residual();
    VecX f_red(dofs.n_free);
    for (int i = 0; i < dofs.n_free; ++i) f_red[i] = res[dofs.dof_of_free[i]];
    const double norm = f_red.norm();
    rep.residual_history.push_back(norm);
    if (!std::isfinite(norm)) return rep;
    if (ref_norm < 0.0) ref_norm = norm;
    if (norm <= std::max(cfg.abs_tol, cfg.rel_tol * ref_norm)) {
      rep.converged = true;
      rep.iterations = iter;
      return rep;
    }
    if (iter == cfg.max_iter) return rep;
    if (dofs.n_free == 0) return rep;  // fully constrained but not in equilibrium

    // reduce and solve
    std::vector<Eigen::Triplet<double>> rt;
    for (int col = 0; col < asmb.K.outerSize(); ++col) {
      const int jc = dofs.free_of_dof[col];
      if (jc < 0) continue;
      for (Eigen::SparseMatrix<double>::InnerIterator it(asmb.K, col); it; ++it) {
        const int ir = dofs.free_of_dof[it.row()];
        if (ir >= 0) rt.emplace_back(ir, jc, it.value());
      }
    }
    Eigen::SparseMatrix<double> Kr(dofs.n_free, dofs.n_free);
    Kr.setFromTriplets(rt.begin(), rt.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(Kr);
    if (lu.info() != Eigen::Success) return rep;
    const VecX dx = lu.solve(-f_red);
    if (lu.info() != Eigen::Success) return rep;

    // backtracking on the residual norm; guards against wild increments
    // through near-mechanisms (flat states under pure moment loading)
    if (norm <= 1e-3 * ref_norm) {  // quadratic regime, take the full step
      for (int i = 0; i < dofs.n_free; ++i) state.x[dofs.dof_of_free[i]] += dx[i];
      continue;
    }
    const VecX x_base = state.x;
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12 && !accepted; ++ls) {
      for (int i = 0; i < dofs.n_free; ++i)
        state.x[dofs.dof_of_free[i]] = x_base[dofs.dof_of_free[i]] + alpha * dx[i];
      double trial = std::numeric_limits<double>::quiet_NaN();
      try {
        const VecX r =
            assemble_global(model, mesh, state, load_factor, false, branches).residual();
        trial = 0.0;
        for (int i = 0; i < dofs.n_free; ++i) {
          const double v = r[dofs.dof_of_free[i]];
          trial += v * v;
        }
        trial = std::sqrt(trial);
      } catch (const FshellError&) {
      }
      if (std::isfinite(trial) &&
          (trial <= (1.0 - 1e-4 * alpha) * norm || alpha <= 1.0 / 1024.0))
        accepted = true;
      else
        alpha *= 0.5;
    }
    if (!accepted) {  // no admissible trial point at all
      state.x = x_base;
      return rep;
    }
  }
  return rep;
}

}  // namespace

NewtonReport newton_solve(const Model& model, const Mesh& mesh, const DofMap& dofs,
                          SolveState& state, double load_factor, const NewtonSettings& cfg) {
  const bool switching = model.use_stabilization ||
                         (model.material == MaterialModel::Simple && model.simple.tension_only) ||
                         (model.material == MaterialModel::Woven && model.woven.tension_only);
  if (!switching) return newton_frozen(model, mesh, dofs, state, load_factor, cfg, nullptr);

  // active-set treatment of the tensile switch: freeze the branch of every
  // quadrature point, solve, and re-check against the converged stretches.
  // Points that keep hopping across lambda = 1 carry no appreciable stress
  // either way; after a bounded number of sweeps the last frozen solution is
  // accepted as the regularized answer. The set is warm-started from the
  // previous step.
  apply_constraints(model, state.t, state.x);
  const size_t expected = static_cast<size_t>(mesh.total_qps) * model.families();
  std::vector<signed char> branches = state.branches.size() == expected
                                          ? state.branches
                                          : evaluate_branches(model, mesh, state);
  NewtonReport rep;
  for (int outer = 0; outer < 3; ++outer) {
    rep = newton_frozen(model, mesh, dofs, state, load_factor, cfg, &branches);
    if (!rep.converged) return rep;
    const std::vector<signed char> actual = evaluate_branches(model, mesh, state);
    if (actual == branches) break;
    branches = actual;
  }
  if (rep.converged) state.branches = branches;
  return rep;
}

namespace {

bool advance(Model& model, const Mesh& mesh, const DofMap& dofs, SolveState& state,
             double t_to, const NewtonSettings& cfg, int depth, int& iters) {
  const double t_from = state.t_pre;
  state.t = t_to;
  if (model.predictor)
    for (int n = 0; n < model.patch.num_ctrl(); ++n)
      state.x.segment<3>(3 * n) = model.predictor(model.patch.ctrl[n], t_to);
  NewtonReport rep = newton_solve(model, mesh, dofs, state, t_to, cfg);
  if (rep.converged) {
    state.t_pre = t_to;
    state.x_pre = state.x;
    iters += rep.iterations;
    return true;
  }
  if (depth >= cfg.max_halvings) return false;
  // retry with halved increment
  state.x = state.x_pre;
  state.t = t_from;
  const double mid = 0.5 * (t_from + t_to);
  if (!advance(model, mesh, dofs, state, mid, cfg, depth + 1, iters)) return false;
  return advance(model, mesh, dofs, state, t_to, cfg, depth + 1, iters);
}

}  // namespace

Trajectory run_steps(Model& model, const NewtonSettings& cfg, const StepCallback& on_step) {
  if (cfg.sigma_imperfection > 0.0) {
    std::vector<int> skip;
    for (const Constraint& c : model.constraints) skip.insert(skip.end(), c.nodes.begin(), c.nodes.end());
    model.patch = seed_imperfection(model.patch, cfg.sigma_imperfection, cfg.seed, skip);
  }
  const Mesh mesh = build_mesh(model);
  const DofMap dofs = build_dof_map(model);
  SolveState state = initial_state(model);

  Trajectory traj;
  for (int k = 1; k <= cfg.n_steps; ++k) {
    const double t = static_cast<double>(k) / cfg.n_steps;
    int iters = 0;
    if (!advance(model, mesh, dofs, state, t, cfg, 0, iters)) {
      traj.failure = "step " + std::to_string(k) + " failed to converge";
      return traj;
    }
    StepRecord rec;
    rec.step = k;
    rec.t = t;
    rec.newton_iterations = iters;
    const Assembly asmb = assemble_global(model, mesh, state, t, false);
    rec.energy = asmb.energy;
    for (size_t c = 0; c < model.constraints.size(); ++c) {
      rec.reactions.push_back(constraint_reaction(model, mesh, state, asmb, static_cast<int>(c)));
      Vec3 mom = Vec3::Zero();
      for (int n : model.constraints[c].nodes) {
        Vec3 r = Vec3::Zero();
        for (int k = 0; k < 3; ++k)
          if (model.constraints[c].comp[k]) r[k] = asmb.f_int[3 * n + k] - asmb.f_ext[3 * n + k];
        const Vec3 pos = state.x.segment<3>(3 * n);
        mom += (pos - model.moment_center).cross(r);
      }
      rec.reaction_moments.push_back(mom);
    }
    rec.x = state.x;
    if (on_step) on_step(rec, model, mesh);
    traj.steps.push_back(std::move(rec));
  }
  traj.completed = true;
  return traj;
}

NurbsPatch seed_imperfection(const NurbsPatch& patch, double sigma, unsigned long long seed,
                             const std::vector<int>& skip_nodes) {
  if (sigma < 0.0) throw FshellError("seed_imperfection: sigma must be >= 0");
  NurbsPatch out = patch;
  if (sigma == 0.0) return out;
  std::vector<bool> skip(patch.num_ctrl(), false);
  for (int n : skip_nodes) skip[n] = true;
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return ((rng() >> 11) + 0.5) * 0x1.0p-53; };
  for (int n = 0; n < patch.num_ctrl(); ++n) {
    // Box-Muller keeps the stream implementation-independent
    const double z = std::sqrt(-2.0 * std::log(uniform())) * std::cos(2.0 * M_PI * uniform());
    if (!skip[n]) out.ctrl[n][2] += sigma * z;
  }
  return out;
}

Vec3 constraint_reaction(const Model& model, const Mesh& mesh, const SolveState& state,
                         const Assembly& asmb, int constraint_index) {
  (void)mesh;
  (void)state;
  const Constraint& c = model.constraints[constraint_index];
  Vec3 r = Vec3::Zero();
  for (int n : c.nodes)
    for (int k = 0; k < 3; ++k)
      if (c.comp[k]) r[k] += asmb.f_int[3 * n + k] - asmb.f_ext[3 * n + k];
  return r;
}

EdgeResultant edge_stress_resultant(const Model& model, const SolveState& state,
                                    EdgeId edge, int n_gauss) {
  const NurbsPatch& patch = model.patch;
  const EdgeGeom eg = edge_geometry(patch, edge);
  const KnotVector& kv = (eg.dir == 0) ? patch.U : patch.V;
  const int p = (eg.dir == 0) ? patch.U.degree : patch.V.degree;
  const int ng = n_gauss > 0 ? n_gauss : p + 1;
  const GaussRule g1 = gauss_rule_01(ng);
  const int nf = model.families();

  VecX X0(3 * patch.num_ctrl());
  for (int n = 0; n < patch.num_ctrl(); ++n) X0.segment<3>(3 * n) = patch.ctrl[n];

  EdgeResultant out;
  double total_len = 0.0;
  for (int span : kv.span_indices()) {
    const double s0 = kv.knots[span], s1 = kv.knots[span + 1];
    for (int jg = 0; jg < ng; ++jg) {
      const double s = s0 + (s1 - s0) * g1.points[jg];
      const double u = (eg.dir == 0) ? s : eg.fixed;
      const double v = (eg.dir == 0) ? eg.fixed : s;
      const BasisEval be = eval_basis(patch, u, v);
      const VecX Xe = gather(X0, be.nodes);
      const VecX xe = gather(state.x, be.nodes);
      QuadPoint qp;
      qp.basis = be;
      qp.ref = surface_config(be, Xe);
      qp.X.setZero();
      for (int a = 0; a < be.size(); ++a) qp.X += be.N[a] * Xe.segment<3>(3 * a);
      for (const FiberField& ff : model.fiber_fields)
        qp.fibers.push_back(fiber_reference(qp.ref, ff, qp.X));
      const SurfaceConfig cur = surface_config(be, xe);
      std::vector<FiberState> fc(nf);
      for (int i = 0; i < nf; ++i) fc[i] = fiber_state(cur, qp.fibers[i]);
      const DeformationInvariants inv = deformation_invariants(qp.ref, qp.fibers, cur, fc);
      Mat2 a_pre = metric_of(be, gather(state.x_pre, be.nodes));
      const MaterialResponse resp = material_at(model, qp, cur, fc, inv, a_pre);

      // Cauchy surface stress sigma = tau^{ab}/J a_a x a_b
      const double J = cur.jac / qp.ref.jac;
      const Mat2 tmat = from_voigt(resp.tau);
      Mat3 sigma = Mat3::Zero();
      for (int al = 0; al < 2; ++al)
        for (int bt = 0; bt < 2; ++bt)
          sigma += (tmat(al, bt) / J) * cur.a[al] * cur.a[bt].transpose();

      const Vec3 axi = eg.sign * cur.a[eg.dir];
      const double ds = cur.a[eg.dir].norm() * (s1 - s0) * g1.weights[jg];
      const Vec3 tau_hat = axi.normalized();
      const Vec3 nu = tau_hat.cross(cur.normal);
      out.force += sigma.transpose() * nu * ds;
      out.nu_sigma_nu += nu.dot(sigma * nu) * ds;
      out.tangent_avg += tau_hat * ds;
      total_len += ds;
    }
  }
  if (total_len > 0.0) out.tangent_avg /= total_len;
  return out;
}

std::vector<FieldSample> sample_fields(const Model& model, const Mesh& mesh,
                                       const SolveState& state) {
  std::vector<FieldSample> out;
  const int nf = model.families();
  for (const ElementData& ed : mesh.elems) {
    const VecX xe = gather(state.x, ed.nodes);
    const VecX xpre_e = gather(state.x_pre, ed.nodes);
    for (const QuadPoint& qp : ed.qps) {
      const SurfaceConfig cur = surface_config(qp.basis, xe);
      std::vector<FiberState> fc(nf);
      for (int i = 0; i < nf; ++i) fc[i] = fiber_state(cur, qp.fibers[i]);
      const DeformationInvariants inv = deformation_invariants(qp.ref, qp.fibers, cur, fc);
      const MaterialResponse resp =
          material_at(model, qp, cur, fc, inv, metric_of(qp.basis, xpre_e));

      FieldSample fsmp;
      fsmp.X = qp.X;
      fsmp.x.setZero();
      for (int a = 0; a < qp.basis.size(); ++a) fsmp.x += qp.basis.N[a] * xe.segment<3>(3 * a);
      fsmp.Lambda = inv.Lambda;
      fsmp.Kn = inv.Kn;
      fsmp.Tg = inv.Tg;
      fsmp.Kg = inv.Kg;
      if (nf == 2) {
        const double g = std::clamp(inv.gamma_hat, -1.0, 1.0);
        fsmp.theta_deg = std::acos(g) * 180.0 / M_PI - 90.0;
      }
      for (int i = 0; i < nf; ++i) {
        const double kg = fc[i].ell_con.transpose() * fc[i].bbar * fc[i].ell_con;
        fsmp.kappa_band += std::abs(kg);
      }
      fsmp.H = 0.5 * (cur.metric_inv * cur.curv).trace();
      fsmp.Jdet = cur.jac / qp.ref.jac;
      fsmp.lambda1 = std::sqrt(cur.metric(0, 0) / qp.ref.metric(0, 0));
      fsmp.energy_density = resp.energy;
      out.push_back(std::move(fsmp));
    }
  }
  return out;
}

}  // namespace fshell
