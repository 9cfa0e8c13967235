#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "abd/body/affine_body.hpp"
#include "abd/constraints/dof_layout.hpp"
#include "abd/contact/friction.hpp"
#include "abd/parallel.hpp"
#include "abd/solver/block_sparse.hpp"

namespace abd {

struct Body {
  std::string name;
  SurfaceMesh mesh;
  GeneralizedMass mass;
  double kappa_ortho = 1e11;
  bool kinematic = false;
  Vec12 q = identity_coords();
  Vec12 q_dot = Vec12::Zero();
};

struct StepParams {
  double dt = 0.01;
  double d_hat = 1e-3;
  double kappa_barrier = 1e4;
  double mu = 0.0;
  double epsilon_v = 1e-3;
  double newton_tol = 1e-2;  // on the largest vertex displacement per Newton step, over dt
  int max_newton_iters = 100;
  int friction_outer_iters = 1;
  double ccd_slack = 0.1;
  double line_search_cap = 0.9;
  bool project_psd = true;
  /// Record the exact global minimum distance after every accepted iterate.
  bool audit_iterates = false;
};

struct StepTimings {
  double broad_phase = 0.0;
  double narrow_phase = 0.0;
  double assembly = 0.0;
  double solve = 0.0;
  double ccd = 0.0;
  double line_search = 0.0;
};

struct StepStats {
  int newton_iters = 0;  // accepted Newton updates
  bool converged = false;
  double residual = 0.0;  // last max vertex displacement (inf-norm) / dt
  double min_distance = 0.0;
  double min_iterate_distance = 0.0;  // with audit_iterates, minimum over accepted iterates
  std::size_t candidate_pairs = 0;
  std::size_t friction_pairs = 0;
  double ip_value = 0.0;
  std::vector<double> energy_trace;
  StepTimings timings;
};

/// Quantities frozen for the duration of one step.
struct StepContext {
  StepParams params;
  std::vector<Vec12> q_prev;
  std::vector<Vec12> q_tilde;
  Positions prev_positions;
  std::vector<FrictionDatum> friction;
};

struct Assembled {
  double energy = 0.0;
  Eigen::VectorXd gradient;
  BlockSparseMatrix hessian;
};

/// Bodies, their reduced unknowns and the stepping loop.
class World {
 public:
  World(std::vector<Body> bodies, DofLayout layout, int workers = 1);
  /// Unconstrained layout: one 12-entry group per dynamic body.
  explicit World(std::vector<Body> bodies, int workers = 1);
  World(const World&) = delete;
  World& operator=(const World&) = delete;
  World(World&&) = default;
  World& operator=(World&&) = default;

  const std::vector<Body>& bodies() const { return bodies_; }
  const Body& body(int b) const { return bodies_[b]; }
  int num_bodies() const { return static_cast<int>(bodies_.size()); }
  const std::vector<CollisionShape>& shapes() const { return shapes_; }
  const DofLayout& layout() const { return layout_; }
  const Eigen::VectorXd& unknowns() const { return y_; }
  const Executor& executor() const { return exec_; }

  std::vector<Vec12> coords(const Eigen::VectorXd& y) const;
  Positions positions(const std::vector<Vec12>& q) const;
  Positions positions() const;

  /// q_tilde_b = q_b + dt qdot_b + dt^2 M^-1 f_b; kinematic bodies keep q.
  std::vector<Vec12> compute_q_tilde(double dt, const std::vector<Vec12>& forces) const;

  /// Friction data from the current state; empty when mu = 0.
  StepContext make_context(const StepParams& params, const std::vector<Vec12>& forces) const;

  /// Inertia + dt^2 orthogonality + contact + friction at reduced unknowns y.
  double ip_value(const Eigen::VectorXd& y, const StepContext& ctx, const CandidateSet& candidates) const;

  /// Gradient and block-sparse Hessian in reduced unknowns. `two_pass` selects the parallel
  /// slot-then-reduce path; otherwise pairs are accumulated one after another.
  Assembled assemble(const Eigen::VectorXd& y, const StepContext& ctx, const CandidateSet& candidates,
                     bool two_pass = true) const;

  /// y with every unconstrained body moved to the rigid motion nearest its inertial target in the
  /// mass norm: centroid where q_tilde puts it, rotation from the polar factor of A_tilde S_c.
  Eigen::VectorXd rigid_prediction(const Eigen::VectorXd& y, const StepContext& ctx) const;
  /// y with each unconstrained body set to the rigid motion nearest q_b.
  Eigen::VectorXd rigid_projection(const Eigen::VectorXd& y, const std::vector<Vec12>& q) const;

  /// One implicit Euler step. `forces` holds one generalized force per body (empty means none).
  StepStats advance_step(const StepParams& params, const std::vector<Vec12>& forces = {});

  /// Overwrites the state (used by tests and scene setup).
  void set_unknowns(const Eigen::VectorXd& y);

 private:
  struct LineSearch {
    double alpha = 0.0;  // 0 when no decrease was found above alpha_min
    double alpha_max = 0.0;
    double start_energy = 0.0;
    double energy = 0.0;
  };
  LineSearch line_search(const Eigen::VectorXd& y, const Eigen::VectorXd& dy, const StepContext& ctx,
                         double alpha_min, StepStats& stats) const;

  std::vector<Body> bodies_;
  std::vector<CollisionShape> shapes_;
  DofLayout layout_;
  Eigen::VectorXd y_;
  Executor exec_;
};

std::vector<BodyDofInput> plain_dof_inputs(const std::vector<Body>& bodies);

}  // namespace abd
