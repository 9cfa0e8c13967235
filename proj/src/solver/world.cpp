#include "abd/solver/world.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <spdlog/spdlog.h>

#include "abd/ccd/accd.hpp"
#include "abd/error.hpp"

namespace abd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct BodyTerm {
  double energy = 0.0;
  Vec12 grad = Vec12::Zero();
  Mat12 hess = Mat12::Zero();
};

double body_energy(const Body& b, const Vec12& q, const Vec12& q_tilde, double dt) {
  const Vec12 d = q - q_tilde;
  return 0.5 * d.dot(b.mass.matrix * d) + dt * dt * ortho_energy(q, b.kappa_ortho * b.mass.volume);
}

BodyTerm body_term(const Body& b, const Vec12& q, const Vec12& q_tilde, double dt, bool project) {
  BodyTerm t;
  const Vec12 d = q - q_tilde;
  const double stiffness = b.kappa_ortho * b.mass.volume;
  t.energy = 0.5 * d.dot(b.mass.matrix * d) + dt * dt * ortho_energy(q, stiffness);
  t.grad = b.mass.matrix * d + dt * dt * ortho_gradient(q, stiffness);
  t.hess = b.mass.matrix + dt * dt * ortho_hessian(q, stiffness, project);
  return t;
}

// Where a pair contribution lands: slot index and which side (0 = body_a, 1 = body_b).
struct SlotRef {
  int slot;
  int side;
};

}  // namespace

std::vector<BodyDofInput> plain_dof_inputs(const std::vector<Body>& bodies) {
  std::vector<BodyDofInput> in;
  for (const auto& b : bodies) in.push_back({b.kinematic, b.q, std::nullopt});
  return in;
}

World::World(std::vector<Body> bodies, DofLayout layout, int workers)
    : bodies_(std::move(bodies)), layout_(std::move(layout)), exec_(workers) {
  if (layout_.num_bodies() != static_cast<int>(bodies_.size())) {
    throw ContractViolation("World: layout and body count differ");
  }
  for (const auto& b : bodies_) shapes_.push_back({&b.mesh, b.kinematic});
  y_ = layout_.initial();
  for (int b = 0; b < num_bodies(); ++b) bodies_[b].q = layout_.coords(b, y_);
}

World::World(std::vector<Body> bodies, int workers)
    : World(bodies, DofLayout(plain_dof_inputs(bodies), {}), workers) {}

void World::set_unknowns(const Eigen::VectorXd& y) {
  y_ = y;
  for (int b = 0; b < num_bodies(); ++b) bodies_[b].q = layout_.coords(b, y_);
}

std::vector<Vec12> World::coords(const Eigen::VectorXd& y) const {
  std::vector<Vec12> q(bodies_.size());
  for (int b = 0; b < num_bodies(); ++b) q[b] = layout_.coords(b, y);
  return q;
}

Positions World::positions(const std::vector<Vec12>& q) const {
  Positions p(bodies_.size());
  for (int b = 0; b < num_bodies(); ++b) p[b] = world_vertices(bodies_[b].mesh, q[b]);
  return p;
}

Positions World::positions() const {
  std::vector<Vec12> q;
  for (const auto& b : bodies_) q.push_back(b.q);
  return positions(q);
}

std::vector<Vec12> World::compute_q_tilde(double dt, const std::vector<Vec12>& forces) const {
  std::vector<Vec12> qt(bodies_.size());
  for (int b = 0; b < num_bodies(); ++b) {
    const Body& body = bodies_[b];
    if (body.kinematic) {
      qt[b] = body.q;
      continue;
    }
    qt[b] = body.q + dt * body.q_dot;
    if (!forces.empty() && !forces[b].isZero(0.0)) {
      qt[b] += dt * dt * body.mass.matrix.llt().solve(forces[b]);
    }
  }
  return qt;
}

StepContext World::make_context(const StepParams& params, const std::vector<Vec12>& forces) const {
  StepContext ctx;
  ctx.params = params;
  for (const auto& b : bodies_) ctx.q_prev.push_back(b.q);
  ctx.q_tilde = compute_q_tilde(params.dt, forces);
  ctx.prev_positions = positions(ctx.q_prev);
  if (params.mu > 0.0) {
    const CandidateSet c = broad_phase(shapes_, ctx.prev_positions, ctx.prev_positions, params.d_hat, exec_);
    ctx.friction = friction_precompute(shapes_, ctx.prev_positions, c, {params.kappa_barrier, params.d_hat});
  }
  return ctx;
}

double World::ip_value(const Eigen::VectorXd& y, const StepContext& ctx, const CandidateSet& candidates) const {
  const std::vector<Vec12> q = coords(y);
  const Positions pos = positions(q);
  double e = 0.0;
  for (int b = 0; b < num_bodies(); ++b) {
    if (!bodies_[b].kinematic) e += body_energy(bodies_[b], q[b], ctx.q_tilde[b], ctx.params.dt);
  }
  const StepParams& p = ctx.params;
  e += contact_energy(shapes_, pos, candidates, {p.kappa_barrier, p.d_hat});
  if (!ctx.friction.empty()) {
    e += friction_energy(shapes_, pos, ctx.prev_positions, ctx.friction, p.mu, p.epsilon_v * p.dt);
  }
  return e;
}

Assembled World::assemble(const Eigen::VectorXd& y, const StepContext& ctx, const CandidateSet& candidates,
                          bool two_pass) const {
  const StepParams& p = ctx.params;
  const ContactParams cp{p.kappa_barrier, p.d_hat};
  const double fric_eps = p.epsilon_v * p.dt;
  const int n = num_bodies();
  const std::vector<Vec12> q = coords(y);
  const Positions pos = positions(q);
  const Executor serial(1);
  const Executor& ex = two_pass ? exec_ : serial;

  // Active contacts, in candidate order.
  std::vector<char> active(candidates.size(), 0);
  ex.for_each(candidates.size(), [&](std::size_t i) {
    const DistanceResult d = pair_distance(candidates.pairs[i], shapes_, pos);
    active[i] = d.d_sq < p.d_hat * p.d_hat;
  });
  std::vector<int> active_ids;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i]) active_ids.push_back(static_cast<int>(i));
  }
  const int n_contact = static_cast<int>(active_ids.size());
  const int n_fric = static_cast<int>(ctx.friction.size());

  auto pair_of_slot = [&](int s) -> const ContactPair& {
    return s < n_contact ? candidates.pairs[active_ids[s]] : ctx.friction[s - n_contact].pair;
  };

  // Body-pair keys for off-diagonal body blocks, canonical order.
  std::map<std::array<int, 2>, int> pair_key;
  for (int s = 0; s < n_contact + n_fric; ++s) {
    const ContactPair& cpair = pair_of_slot(s);
    if (shapes_[cpair.body_a].kinematic || shapes_[cpair.body_b].kinematic) continue;
    pair_key.emplace(std::array<int, 2>{cpair.body_a, cpair.body_b}, 0);
  }
  std::vector<std::array<int, 2>> body_pairs;
  for (auto& [k, v] : pair_key) {
    v = static_cast<int>(body_pairs.size());
    body_pairs.push_back(k);
  }

  std::vector<BodyTerm> terms(n);
  std::vector<PairContribution> slots(n_contact + n_fric);
  std::vector<Mat12> body_diag(n);
  std::vector<Vec12> body_grad(n);
  std::vector<Mat12> body_off(body_pairs.size(), Mat12::Zero());

  auto eval_slot = [&](int s) {
    if (s < n_contact) {
      evaluate_contact_pair(candidates.pairs[active_ids[s]], shapes_, pos, cp, true, p.project_psd, slots[s]);
    } else {
      evaluate_friction_pair(ctx.friction[s - n_contact], shapes_, pos, ctx.prev_positions, p.mu, fric_eps, true,
                             p.project_psd, slots[s]);
    }
  };

  if (two_pass) {
    // Pass 1: independent local terms into slots.
    exec_.for_each(n, [&](std::size_t b) {
      if (!bodies_[b].kinematic) terms[b] = body_term(bodies_[b], q[b], ctx.q_tilde[b], p.dt, p.project_psd);
    });
    exec_.for_each(slots.size(), [&](std::size_t s) { eval_slot(static_cast<int>(s)); });

    // Pass 2: every target block sums its contributions in slot order.
    std::vector<std::vector<SlotRef>> to_body(n);
    std::vector<std::vector<int>> to_pair(body_pairs.size());
    for (int s = 0; s < n_contact + n_fric; ++s) {
      const ContactPair& cpair = pair_of_slot(s);
      to_body[cpair.body_a].push_back({s, 0});
      to_body[cpair.body_b].push_back({s, 1});
      auto it = pair_key.find({cpair.body_a, cpair.body_b});
      if (it != pair_key.end()) to_pair[it->second].push_back(s);
    }
    exec_.for_each(n, [&](std::size_t b) {
      if (bodies_[b].kinematic) return;
      Mat12 h = terms[b].hess;
      Vec12 g = terms[b].grad;
      for (const auto& r : to_body[b]) {
        h += slots[r.slot].hess.block<12, 12>(12 * r.side, 12 * r.side);
        g += slots[r.slot].grad.segment<12>(12 * r.side);
      }
      body_diag[b] = h;
      body_grad[b] = g;
    });
    exec_.for_each(body_pairs.size(), [&](std::size_t k) {
      Mat12 h = Mat12::Zero();
      for (int s : to_pair[k]) h += slots[s].hess.block<12, 12>(0, 12);
      body_off[k] = h;
    });
  } else {
    for (int b = 0; b < n; ++b) {
      if (bodies_[b].kinematic) continue;
      terms[b] = body_term(bodies_[b], q[b], ctx.q_tilde[b], p.dt, p.project_psd);
      body_diag[b] = terms[b].hess;
      body_grad[b] = terms[b].grad;
    }
    for (int s = 0; s < n_contact + n_fric; ++s) {
      eval_slot(s);
      const ContactPair& cpair = pair_of_slot(s);
      const int ab[2] = {cpair.body_a, cpair.body_b};
      for (int side = 0; side < 2; ++side) {
        if (bodies_[ab[side]].kinematic) continue;
        body_diag[ab[side]] += slots[s].hess.block<12, 12>(12 * side, 12 * side);
        body_grad[ab[side]] += slots[s].grad.segment<12>(12 * side);
      }
      auto it = pair_key.find({cpair.body_a, cpair.body_b});
      if (it != pair_key.end()) body_off[it->second] += slots[s].hess.block<12, 12>(0, 12);
    }
  }

  // Energy, summed in a fixed order.
  Assembled out;
  double e_body = 0.0, e_contact = 0.0, e_fric = 0.0;
  for (int b = 0; b < n; ++b) e_body += terms[b].energy;
  for (int s = 0; s < n_contact; ++s) e_contact += slots[s].energy;
  for (int s = n_contact; s < n_contact + n_fric; ++s) e_fric += slots[s].energy;
  out.energy = e_body + e_contact + e_fric;

  // Sparsity: groups sharing a body, and groups of bodies whose boxes overlap or share friction.
  std::vector<std::array<int, 2>> upper;
  auto couple = [&](int a, int b) {
    for (int ga : layout_.groups_of(a)) {
      for (int gb : layout_.groups_of(b)) {
        if (ga != gb) upper.push_back({std::min(ga, gb), std::max(ga, gb)});
      }
    }
  };
  for (int b = 0; b < n; ++b) couple(b, b);
  for (const auto& ob : candidates.overlapping_bodies) couple(ob[0], ob[1]);
  for (const auto& bp : body_pairs) couple(bp[0], bp[1]);
  out.hessian = BlockSparseMatrix(layout_.group_sizes(), std::move(upper));
  out.gradient = Eigen::VectorXd::Zero(layout_.num_unknowns());

  BlockSparseMatrix& h = out.hessian;
  auto add_block = [&](int gi, int gj, const Eigen::MatrixXd& x) {
    if (gi == gj) {
      h.diag(gi) += x;
    } else if (gi < gj) {
      h.off()[h.find(gi, gj)].m += x;
    } else {
      h.off()[h.find(gj, gi)].m += x.transpose();
    }
  };

  for (int b = 0; b < n; ++b) {
    const auto& m = layout_.body(b);
    if (m.kinematic) continue;
    if (m.identity) {
      const int g = m.refs[0].group;
      h.diag(g) += body_diag[b];
      out.gradient.segment<12>(layout_.group_offset(g)) += body_grad[b];
      continue;
    }
    for (const auto& r : m.refs) {
      out.gradient.segment(layout_.group_offset(r.group), layout_.group_size(r.group)) += r.t.transpose() * body_grad[b];
    }
    for (std::size_t i = 0; i < m.refs.size(); ++i) {
      for (std::size_t j = i; j < m.refs.size(); ++j) {
        const Eigen::MatrixXd x = m.refs[i].t.transpose() * body_diag[b] * m.refs[j].t;
        if (i == j) {
          h.diag(m.refs[i].group) += x;
        } else {
          add_block(m.refs[i].group, m.refs[j].group, x);
        }
      }
    }
  }
  for (std::size_t k = 0; k < body_pairs.size(); ++k) {
    const auto& ma = layout_.body(body_pairs[k][0]);
    const auto& mb = layout_.body(body_pairs[k][1]);
    for (const auto& ra : ma.refs) {
      for (const auto& rb : mb.refs) {
        Eigen::MatrixXd x;
        if (ma.identity && mb.identity) {
          x = body_off[k];
        } else {
          x = ra.t.transpose() * body_off[k] * rb.t;
        }
        if (ra.group == rb.group) {
          h.diag(ra.group) += x + x.transpose();
        } else {
          add_block(ra.group, rb.group, x);
        }
      }
    }
  }
  return out;
}

namespace {

// Rigid motion nearest to q in the body's mass norm: same centroid, rotation from the polar
// factor of A S_c.
Vec12 nearest_rigid(const Vec12& q, const GeneralizedMass& m) {
  const Mat3 a = linear_part(q);
  const Vec3 c = m.first_moment / m.mass;
  const Mat3 s_c = m.second_moment - m.mass * c * c.transpose();
  Eigen::JacobiSVD<Mat3> svd(a * s_c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  if ((u * svd.matrixV().transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  const Mat3 r = u * svd.matrixV().transpose();
  return make_coords(translation(q) + (a - r) * c, r);
}

}  // namespace

Eigen::VectorXd World::rigid_prediction(const Eigen::VectorXd& y, const StepContext& ctx) const {
  return rigid_projection(y, ctx.q_tilde);
}

Eigen::VectorXd World::rigid_projection(const Eigen::VectorXd& y, const std::vector<Vec12>& q) const {
  Eigen::VectorXd out = y;
  for (int b = 0; b < num_bodies(); ++b) {
    const auto& map = layout_.body(b);
    if (bodies_[b].kinematic || !map.identity) continue;
    out.segment<12>(layout_.group_offset(map.refs[0].group)) = nearest_rigid(q[b], bodies_[b].mass);
  }
  return out;
}

World::LineSearch World::line_search(const Eigen::VectorXd& y, const Eigen::VectorXd& dy, const StepContext& ctx,
                                     double alpha_min, StepStats& stats) const {
  const double cap = ctx.params.line_search_cap;
  auto t0 = Clock::now();
  const std::vector<Vec12> q = coords(y);
  const Positions pos = positions(q);
  Positions disp(q.size());
  Positions end(q.size());
  for (int b = 0; b < num_bodies(); ++b) {
    const Vec12 dq = bodies_[b].kinematic ? Vec12::Zero() : layout_.coords_delta(b, dy);
    disp[b] = vertex_displacements(bodies_[b].mesh, dq);
    end[b].resize(pos[b].size());
    for (std::size_t v = 0; v < pos[b].size(); ++v) end[b][v] = pos[b][v] + disp[b][v];
  }
  const CandidateSet sweep = broad_phase(shapes_, pos, end, ctx.params.d_hat, exec_);
  stats.timings.broad_phase += seconds_since(t0);

  t0 = Clock::now();
  LineSearch ls;
  ls.alpha_max = step_filter(shapes_, pos, disp, sweep, ctx.params.ccd_slack, exec_);
  stats.timings.ccd += seconds_since(t0);

  t0 = Clock::now();
  double alpha = ls.alpha_max >= 1.0 ? 1.0 : cap * ls.alpha_max;
  const double e0 = ip_value(y, ctx, sweep);
  double e1 = ip_value(y + alpha * dy, ctx, sweep);
  while (!(e1 < e0)) {
    alpha *= 0.5;
    if (alpha < alpha_min) {
      alpha = 0.0;
      break;
    }
    e1 = ip_value(y + alpha * dy, ctx, sweep);
  }
  ls.alpha = alpha;
  ls.start_energy = e0;
  ls.energy = e1;
  stats.timings.line_search += seconds_since(t0);
  return ls;
}

StepStats World::advance_step(const StepParams& params, const std::vector<Vec12>& forces) {
  StepStats stats;
  const double dt = params.dt;
  const auto t_setup = Clock::now();
  StepContext ctx = make_context(params, forces);
  stats.timings.broad_phase += seconds_since(t_setup);
  stats.friction_pairs = ctx.friction.size();
  stats.min_iterate_distance = std::numeric_limits<double>::infinity();

  Eigen::VectorXd y = y_;
  {
    const Eigen::VectorXd dy = rigid_prediction(y, ctx) - y;
    if (dy.lpNorm<Eigen::Infinity>() > 0.0) {
      const LineSearch ls = line_search(y, dy, ctx, 1e-6, stats);
      if (ls.alpha > 0.0) {
        y += ls.alpha * dy;
        ++stats.newton_iters;
        stats.energy_trace.push_back(ls.start_energy);
        stats.energy_trace.push_back(ls.energy);
        if (params.audit_iterates) stats.min_iterate_distance = std::sqrt(min_distance_sq(shapes_, positions(coords(y))));
        spdlog::trace("prediction: alpha_max {:.3e}, alpha {:.3e}, energy {:.9e}", ls.alpha_max, ls.alpha, ls.energy);
      }
    }
  }
  CandidateSet candidates;
  const int outer = std::max(1, params.friction_outer_iters);
  bool converged = false;

  for (int round = 0; round < outer; ++round) {
    if (round > 0) {
      if (params.mu <= 0.0) break;
      // Refresh lagged friction from the latest solution, keeping the step's start state.
      const Positions pos = positions(coords(y));
      const CandidateSet c = broad_phase(shapes_, pos, pos, params.d_hat, exec_);
      ctx.friction = friction_precompute(shapes_, pos, c, {params.kappa_barrier, params.d_hat});
    }
    converged = false;
    for (int it = 0; it < params.max_newton_iters; ++it) {
      auto t0 = Clock::now();
      const std::vector<Vec12> q = coords(y);
      const Positions pos = positions(q);
      candidates = broad_phase(shapes_, pos, pos, params.d_hat, exec_);
      stats.timings.broad_phase += seconds_since(t0);

      t0 = Clock::now();
      Assembled sys = assemble(y, ctx, candidates, true);
      stats.timings.assembly += seconds_since(t0);
      if (stats.energy_trace.empty()) stats.energy_trace.push_back(sys.energy);

      t0 = Clock::now();
      Eigen::VectorXd dy = solve_spd(sys.hessian, -sys.gradient);
      stats.timings.solve += seconds_since(t0);
      if (sys.gradient.dot(dy) >= 0.0 && sys.gradient.squaredNorm() > 0.0) {
        spdlog::warn("Newton direction is not a descent direction; using the negative gradient");
        dy = -sys.gradient;
      }

      double dx_inf = 0.0;
      for (int b = 0; b < num_bodies(); ++b) {
        if (bodies_[b].kinematic) continue;
        for (const Vec3& d : vertex_displacements(bodies_[b].mesh, layout_.coords_delta(b, dy))) {
          dx_inf = std::max(dx_inf, d.cwiseAbs().maxCoeff());
        }
      }
      stats.residual = dx_inf / dt;
      if (stats.residual < params.newton_tol) {
        converged = true;
        break;
      }

      LineSearch ls = line_search(y, dy, ctx, 1e-12, stats);
      // The same step with every free body snapped back to a rigid motion: rotations taken
      // as linear steps leave the orthogonal manifold, which the stiff potential punishes.
      const Eigen::VectorXd y_full = y + dy;
      const Eigen::VectorXd dy_rigid = rigid_projection(y_full, coords(y_full)) - y;
      if (dy_rigid != dy) {
        const LineSearch alt = line_search(y, dy_rigid, ctx, 1e-6, stats);
        if (alt.alpha > 0.0 && (ls.alpha == 0.0 || alt.energy < ls.energy)) {
          ls = alt;
          dy = dy_rigid;
        }
      }
      if (ls.alpha == 0.0) {
        throw SolverError("line search failed: no decrease down to alpha = 1e-12 (||dx||_inf / dt = " +
                          std::to_string(stats.residual) + ")");
      }
      const double alpha = ls.alpha;
      const double e1 = ls.energy;
      spdlog::trace("newton {}: |dx|/dt {:.3e}, alpha_max {:.3e}, alpha {:.3e}, energy {:.9e}", it, stats.residual,
                    ls.alpha_max, alpha, e1);
      y += alpha * dy;
      ++stats.newton_iters;
      stats.energy_trace.push_back(e1);

      if (params.audit_iterates) {
        const double d = std::sqrt(min_distance_sq(shapes_, positions(coords(y))));
        stats.min_iterate_distance = std::min(stats.min_iterate_distance, d);
      }
    }
  }
  stats.converged = converged;
  if (!converged) {
    spdlog::warn("step did not converge in {} Newton iterations (||dx||_inf / dt = {:.3e})", params.max_newton_iters,
                 stats.residual);
  }

  const std::vector<Vec12> q_new = coords(y);
  for (int b = 0; b < num_bodies(); ++b) {
    if (bodies_[b].kinematic) continue;
    bodies_[b].q_dot = (q_new[b] - ctx.q_prev[b]) / dt;
    bodies_[b].q = q_new[b];
  }
  y_ = y;

  const auto t0 = Clock::now();
  const Positions pos = positions(q_new);
  stats.min_distance = std::sqrt(min_distance_sq(shapes_, pos));
  stats.candidate_pairs = candidates.size();
  stats.ip_value = ip_value(y, ctx, broad_phase(shapes_, pos, pos, params.d_hat, exec_));
  stats.timings.narrow_phase += seconds_since(t0);
  if (!params.audit_iterates) stats.min_iterate_distance = stats.min_distance;
  return stats;
}

}  // namespace abd
