#ifndef FIBERSHELL_SOLVER_HPP
#define FIBERSHELL_SOLVER_HPP

#include <Eigen/SparseCore>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fibershell/element.hpp"

namespace fshell {

enum class EdgeId { UMin, UMax, VMin, VMax };

// Nodes of the patch boundary edge (a full control-point row or column).
std::vector<int> edge_nodes(const NurbsPatch& patch, EdgeId edge);

struct BoundaryLoad {
  enum class Type { Traction, MomentOut, MomentIn };
  EdgeId edge = EdgeId::UMin;
  Type type = Type::Traction;
  Vec3 traction = Vec3::Zero();
  double magnitude = 0.0;  // m_tau or m_bar
  int family = 0;          // fiber family for in-plane moments
  bool live_measure = false;
};

struct CornerLoad {
  int iu = 0, iv = 0;  // 0 or 1 selects the patch corner
  double m_nu = 0.0;
};

struct LoadSpec {
  Vec3 body_force = Vec3::Zero();
  double pressure = 0.0;
  std::vector<BoundaryLoad> boundary;
  std::vector<CornerLoad> corners;

  bool empty() const {
    return body_force.isZero() && pressure == 0.0 && boundary.empty() && corners.empty();
  }
};

// Prescribed motion of a node set. The target maps the reference position of
// a control point and the schedule time t in [0,1] to its prescribed position;
// only the masked components are imposed.
struct Constraint {
  std::string name;
  std::vector<int> nodes;
  std::array<bool, 3> comp{true, true, true};
  std::function<Vec3(const Vec3&, double)> target;  // defaults to fixed-at-reference
};

Constraint fix_nodes(std::string name, std::vector<int> nodes,
                     std::array<bool, 3> comp = {true, true, true});

enum class MaterialModel { Simple, Woven };

struct Model {
  NurbsPatch patch;
  std::vector<FiberField> fiber_fields;

  MaterialModel material = MaterialModel::Simple;
  SimpleFabricParams simple;
  WovenFabricParams woven;
  StabilizationParams stab;
  bool use_stabilization = false;

  LoadSpec loads;
  std::vector<Constraint> constraints;
  bool planar = false;          // eliminate out-of-plane displacements
  int gauss_u = 0, gauss_v = 0; // 0 selects degree+1 points
  double viscosity = 0.0;       // out-of-plane regularization parameter
  Vec3 moment_center = Vec3::Zero();  // reference point for reaction moments

  // optional initial-guess map applied to free nodes before each step
  std::function<Vec3(const Vec3&, double)> predictor;

  // test hooks
  ElementDebug debug;
  std::function<MaterialResponse(const MaterialPointState&)> custom_material;

  int families() const { return static_cast<int>(fiber_fields.size()); }
};

struct QuadPoint {
  BasisEval basis;
  SurfaceConfig ref;
  std::vector<FiberRef> fibers;
  double w_par = 0.0;  // parametric quadrature weight
  double wA = 0.0;     // w_par * reference jacobian
  Vec3 X = Vec3::Zero();
};

struct ElementData {
  std::vector<int> nodes;
  std::vector<QuadPoint> qps;
  MatX mass;  // int N_A N_B dA of the reference configuration
};

struct BoundaryQP {
  BasisEval basis;
  SurfaceConfig ref;
  std::vector<FiberRef> fibers;
  int dir = 0;
  double sign = 1.0;
  double w_par = 0.0;
  double ref_len = 0.0;
};

struct Mesh {
  std::vector<ElementData> elems;
  std::vector<std::vector<BoundaryQP>> boundary;  // parallel to model.loads.boundary
  std::vector<std::pair<int, int>> corner_elems;  // (element, local node) per corner load
  std::vector<int> qp_offset;                     // per element, into the qp-major arrays
  int total_qps = 0;
  int n_nodes = 0;

  int ndof() const { return 3 * n_nodes; }

  // fixed sparsity pattern of the tangent with cached scatter offsets,
  // built on the first assembly and reused afterwards
  mutable Eigen::SparseMatrix<double> K_pattern;
  mutable std::vector<int> scatter;
};

Mesh build_mesh(const Model& model);

struct SolveState {
  VecX x;      // current control point positions
  VecX x_pre;  // positions at the last accepted step
  double t = 0.0;
  double t_pre = 0.0;
  int step = 0;
  std::vector<signed char> branches;  // warm-started tensile-switch states

  double dt() const { return t - t_pre; }
};

SolveState initial_state(const Model& model);

struct Assembly {
  VecX f_int;
  VecX f_ext;
  Eigen::SparseMatrix<double> K;  // k_mat + k_geo - k_ext (+ viscous)
  EnergyParts energy;

  VecX residual() const { return f_int - f_ext; }
};

// Global force, tangent and energy at the given state. The load factor
// scales all external loads; dt enters the viscous and stabilization terms.
// The optional branch table (total_qps x families, +1/-1) pins the tensile
// switch per quadrature point during a Newton solve.
Assembly assemble_global(const Model& model, const Mesh& mesh, const SolveState& state,
                         double load_factor, bool with_tangent = true,
                         const std::vector<signed char>* branches = nullptr);

// Signs of (lambda_i - 1) at every quadrature point of the current state.
std::vector<signed char> evaluate_branches(const Model& model, const Mesh& mesh,
                                           const SolveState& state);

struct NewtonSettings {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  int max_iter = 30;
  int max_halvings = 4;
  int n_steps = 1;
  double sigma_imperfection = 0.0;
  unsigned long long seed = 0;
  bool verbose = false;
};

struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;
};

// Constrained DOF bookkeeping.
struct DofMap {
  std::vector<int> free_of_dof;  // -1 when constrained
  std::vector<int> dof_of_free;
  int n_free = 0;
};
DofMap build_dof_map(const Model& model);

void apply_constraints(const Model& model, double t, VecX& x);

// One equilibrium solve at fixed schedule time; state.x is the initial guess.
NewtonReport newton_solve(const Model& model, const Mesh& mesh, const DofMap& dofs,
                          SolveState& state, double load_factor, const NewtonSettings& cfg);

struct StepRecord {
  int step = 0;
  double t = 0.0;
  int newton_iterations = 0;
  EnergyParts energy;
  std::vector<Vec3> reactions;         // per constraint group
  std::vector<Vec3> reaction_moments;  // about model.moment_center
  VecX x;                              // converged positions
};

struct Trajectory {
  std::vector<StepRecord> steps;
  bool completed = false;
  std::string failure;
};

using StepCallback = std::function<void(const StepRecord&, const Model&, const Mesh&)>;

Trajectory run_steps(Model& model, const NewtonSettings& cfg,
                     const StepCallback& on_step = nullptr);

// Normal out-of-plane noise on the X3 coordinate of every node not touched
// by a constraint. Deterministic per seed (own Box-Muller on mt19937_64).
NurbsPatch seed_imperfection(const NurbsPatch& patch, double sigma,
                             unsigned long long seed,
                             const std::vector<int>& skip_nodes = {});

// Stress-resultant line integrals over a boundary edge of the current state.
struct EdgeResultant {
  Vec3 force = Vec3::Zero();   // int sigma^T nu ds
  double nu_sigma_nu = 0.0;    // int nu . sigma nu ds
  Vec3 tangent_avg = Vec3::Zero();
};
EdgeResultant edge_stress_resultant(const Model& model, const SolveState& state,
                                    EdgeId edge, int n_gauss = 0);

// Reaction resultant (sum of f_int - f_ext rows) of one constraint group.
Vec3 constraint_reaction(const Model& model, const Mesh& mesh, const SolveState& state,
                         const Assembly& asmb, int constraint_index);

// Invariant fields sampled at the quadrature points.
struct FieldSample {
  Vec3 X, x;
  double theta_deg = 0.0;       // arccos(gamma_hat) - 90deg
  double kappa_band = 0.0;      // |kappa_g^1| + |kappa_g^2|
  std::vector<double> Lambda;
  std::vector<double> Kn, Tg, Kg;
  double H = 0.0;               // mean curvature
  double Jdet = 1.0;
  double lambda1 = 1.0;         // stretch of the first parametric direction
  EnergyParts energy_density;
};
std::vector<FieldSample> sample_fields(const Model& model, const Mesh& mesh,
                                       const SolveState& state);

}  // namespace fshell

#endif
