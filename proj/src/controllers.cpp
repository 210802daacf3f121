#include "pbsmc/controllers.hpp"

#include <cmath>
#include <sstream>

#include "pbsmc/errors.hpp"

namespace pbsmc {

namespace {

Vec solve_input_map(const Mat& g, const Vec& rhs) {
  Eigen::FullPivLU<Mat> lu(g);
  if (!lu.isInvertible()) throw ModelInvalid("input map G(q) is singular");
  return lu.solve(rhs);
}

Vec solve_jacobian(const Mat& j, const Vec& rhs) {
  Eigen::PartialPivLU<Mat> lu(j);
  return lu.solve(rhs);
}

const DesiredTrajectory& require_trajectory(const ControllerSpec& spec) {
  if (!spec.trajectory) {
    throw ParameterError("tracking controller requires a desired trajectory");
  }
  return *spec.trajectory;
}

bool potential_is_smooth(const Potential& pot) {
  if (pot.smoothing_eps > 0.0) return true;
  switch (pot.kind) {
    case PotentialKind::NormPower: return pot.r > 1.0 && pot.s > 1.0;
    case PotentialKind::L1Quadratic: return false;
    case PotentialKind::Custom: return true;
  }
  return true;
}

// J * grad H with J = [[-T je^T jq^{-T}, T], [-T^T, lower_right]].
PhaseRate structured_field(const Mat& t, const Mat& jq, const Mat& je,
                           const Mat& lower_right, const Vec& eta,
                           const Vec& grad_u) {
  const Vec grad_q = jq.transpose() * grad_u;
  const Vec grad_eta = eta + je.transpose() * grad_u;
  const Vec jq_inv_t_grad = jq.transpose().partialPivLu().solve(grad_q);
  PhaseRate rate;
  rate.q_dot = -t * je.transpose() * jq_inv_t_grad + t * grad_eta;
  rate.second = -t.transpose() * grad_q - lower_right * grad_eta;
  return rate;
}

}  // namespace

DesiredTrajectory constant_trajectory(const Vec& q_const) {
  DesiredTrajectory traj;
  traj.name = "constant";
  traj.q_d = [q_const](double) { return q_const; };
  traj.qdot_d = [n = q_const.size()](double) -> Vec { return Vec::Zero(n); };
  traj.qddot_d = [n = q_const.size()](double) -> Vec { return Vec::Zero(n); };
  return traj;
}

std::string to_string(ControllerMode mode) {
  switch (mode) {
    case ControllerMode::Kpes: return "kpes";
    case ControllerMode::PbsmcStabilize: return "pbsmc_stabilize";
    case ControllerMode::PbsmcTrack: return "pbsmc_track";
  }
  return "unknown";
}

ControllerMode controller_mode_from_string(const std::string& name) {
  if (name == "kpes") return ControllerMode::Kpes;
  if (name == "pbsmc_stabilize") return ControllerMode::PbsmcStabilize;
  if (name == "pbsmc_track") return ControllerMode::PbsmcTrack;
  throw ParameterError("unknown controller mode '" + name + "'");
}

std::function<Mat(const Vec&, const Vec&)> scaled_identity_damping(int dof,
                                                                   double gain) {
  if (!(gain > 0.0)) throw ParameterError("damping_d gain must be positive");
  return [dof, gain](const Vec&, const Vec&) -> Mat {
    return gain * Mat::Identity(dof, dof);
  };
}

void validate(const ControllerSpec& spec) {
  if (spec.model.dof < 1) throw ParameterError("controller: model has no dof");
  if (spec.mode == ControllerMode::Kpes && !spec.damping_d) {
    throw ParameterError("kpes controller requires damping_d");
  }
  if (spec.mode == ControllerMode::PbsmcTrack) require_trajectory(spec);
}

std::vector<std::string> advisories(const ControllerSpec& spec) {
  std::vector<std::string> out;
  if (spec.mode == ControllerMode::Kpes && !potential_is_smooth(spec.potential)) {
    out.emplace_back(
        "kpes: potential is not smooth; the asymptotic-stability conditions "
        "for energy shaping assume a smooth positive-definite U");
  }
  return out;
}

Vec kpes_feedback(const ControllerSpec& spec, const Vec& q, const Vec& eta) {
  if (!spec.damping_d) throw ParameterError("kpes controller requires damping_d");
  const MechanicalModel& model = spec.model;
  const MomentumGeometry geo = momentum_geometry(model, q);
  const Mat& t = geo.t;
  const Mat d = transformed_damping(model, geo, q, eta);
  const Mat dd = spec.damping_d(q, eta);
  if (Eigen::LLT<Mat>(dd + dd.transpose()).info() != Eigen::Success) {
    throw ParameterError("kpes: D_d + D_d^T is not positive definite");
  }
  const Mat jq = jacobian_q(spec.sliding_map, q, eta);
  const Mat je = jacobian_eta(spec.sliding_map, q, eta);
  const Vec grad_u = gradient(spec.potential, sigma(spec.sliding_map, q, eta));
  const Vec rhs = (dd - d) * eta +
                  (t.transpose() * jq.transpose() + dd * je.transpose()) * grad_u;
  return -solve_input_map(t.transpose() * model.input_map0(q), rhs);
}

Vec pbsmc_feedback(const ControllerSpec& spec, const Vec& q, const Vec& eta) {
  const MechanicalModel& model = spec.model;
  const MomentumGeometry geo = momentum_geometry(model, q);
  const Mat& t = geo.t;
  const Mat jq = jacobian_q(spec.sliding_map, q, eta);
  const Mat je = jacobian_eta(spec.sliding_map, q, eta);
  const Mat half = jq * t * je.transpose();
  const Mat lam = 0.5 * ((half + half.transpose()) + (half + half.transpose()).transpose());
  const Vec grad_u = gradient(spec.potential, sigma(spec.sliding_map, q, eta));
  const Vec rhs = -solve_jacobian(je, lam * grad_u) +
                  transformed_damping(model, geo, q, eta) * eta -
                  solve_jacobian(je, jq * t * eta);
  return solve_input_map(t.transpose() * model.input_map0(q), rhs);
}

namespace {

DesiredMomentum desired_momentum_from(const MomentumGeometry& geo,
                                      const Vec& qdot_d) {
  const auto tri = geo.t.triangularView<Eigen::Lower>();
  DesiredMomentum out;
  out.eta_d = tri.solve(qdot_d);
  const auto m = qdot_d.size();
  out.jacobian.resize(m, m);
  // d(T^{-1})/dq_k = -T^{-1} (dT/dq_k) T^{-1}
  for (Eigen::Index k = 0; k < m; ++k) {
    out.jacobian.col(k) = -tri.solve(geo.dt[static_cast<std::size_t>(k)] * out.eta_d);
  }
  return out;
}

// Everything the tracking law needs at one (q, eta, t), from one factorization.
struct TrackingTerms {
  MomentumGeometry geo;
  Mat d;
  DesiredMomentum desired;
  Vec q_err;
  Vec eta_err;
};

TrackingTerms tracking_terms(const ControllerSpec& spec, const Vec& q,
                             const Vec& eta, double t) {
  const DesiredTrajectory& traj = require_trajectory(spec);
  TrackingTerms terms;
  terms.geo = momentum_geometry(spec.model, q);
  terms.d = transformed_damping(spec.model, terms.geo, q, eta);
  terms.desired = desired_momentum_from(terms.geo, traj.qdot_d(t));
  terms.q_err = q - traj.q_d(t);
  terms.eta_err = eta - terms.desired.eta_d;
  return terms;
}

Vec prefeedback_from(const ControllerSpec& spec, const TrackingTerms& terms,
                     const Vec& q, const Vec& eta, double t, const Vec& v) {
  const Mat& tq = terms.geo.t;
  const Vec rhs = terms.d * terms.desired.eta_d +
                  terms.desired.jacobian * (tq * eta) +
                  tq.triangularView<Eigen::Lower>().solve(spec.trajectory->qddot_d(t)) + v;
  return solve_input_map(tq.transpose() * spec.model.input_map0(q), rhs);
}

Vec v_from(const ControllerSpec& spec, const TrackingTerms& terms) {
  const Mat& tq = terms.geo.t;
  const Mat jq = jacobian_q(spec.sliding_map, terms.q_err, terms.eta_err);
  const Mat je = jacobian_eta(spec.sliding_map, terms.q_err, terms.eta_err);
  const Mat half = jq * tq * je.transpose();
  const Mat lam = 0.5 * ((half + half.transpose()) + (half + half.transpose()).transpose());
  const Vec grad_u = gradient(spec.potential,
                              sigma(spec.sliding_map, terms.q_err, terms.eta_err));
  return -solve_jacobian(je, lam * grad_u) + terms.d * terms.eta_err -
         solve_jacobian(je, jq * tq * terms.eta_err);
}

}  // namespace

DesiredMomentum desired_momentum(const ControllerSpec& spec, const Vec& q,
                                 double t) {
  const DesiredTrajectory& traj = require_trajectory(spec);
  return desired_momentum_from(momentum_geometry(spec.model, q), traj.qdot_d(t));
}

Mat desired_momentum_jacobian_fd(const ControllerSpec& spec, const Vec& q,
                                 double t) {
  const DesiredTrajectory& traj = require_trajectory(spec);
  const Vec qdot_d = traj.qdot_d(t);
  const auto eta_d_at = [&](const Vec& x) -> Vec {
    const Mat tx = cholesky_factor(spec.model, x);
    return tx.triangularView<Eigen::Lower>().solve(qdot_d);
  };
  Mat jac(q.size(), q.size());
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    const double h = spec.model.fd_step * std::max(1.0, std::abs(q(k)));
    Vec qp = q, qm = q;
    qp(k) += h;
    qm(k) -= h;
    jac.col(k) = (eta_d_at(qp) - eta_d_at(qm)) / (2.0 * h);
  }
  return jac;
}

Vec tracking_prefeedback(const ControllerSpec& spec, const Vec& q,
                         const Vec& eta, double t, const Vec& v) {
  return prefeedback_from(spec, tracking_terms(spec, q, eta, t), q, eta, t, v);
}

Vec tracking_v(const ControllerSpec& spec, const Vec& q, const Vec& eta,
               double t) {
  return v_from(spec, tracking_terms(spec, q, eta, t));
}

Vec tracking_pbsmc(const ControllerSpec& spec, const Vec& q, const Vec& eta,
                   double t) {
  const TrackingTerms terms = tracking_terms(spec, q, eta, t);
  return prefeedback_from(spec, terms, q, eta, t, v_from(spec, terms));
}

Vec feedback(const ControllerSpec& spec, double t, const Vec& q,
             const Vec& eta) {
  switch (spec.mode) {
    case ControllerMode::Kpes: return kpes_feedback(spec, q, eta);
    case ControllerMode::PbsmcStabilize: return pbsmc_feedback(spec, q, eta);
    case ControllerMode::PbsmcTrack: return tracking_pbsmc(spec, q, eta, t);
  }
  return Vec();
}

ErrorState error_state(const ControllerSpec& spec, double t, const Vec& q,
                       const Vec& eta) {
  if (spec.mode != ControllerMode::PbsmcTrack) return {q, eta};
  const DesiredTrajectory& traj = require_trajectory(spec);
  const Mat tq = cholesky_factor(spec.model, q);
  const Vec eta_d = tq.triangularView<Eigen::Lower>().solve(traj.qdot_d(t));
  return {q - traj.q_d(t), eta - eta_d};
}

Vec sliding_value(const ControllerSpec& spec, double t, const Vec& q,
                  const Vec& eta) {
  const ErrorState err = error_state(spec, t, q, eta);
  return sigma(spec.sliding_map, err.q_err, err.eta_err);
}

double lyapunov(const ControllerSpec& spec, double t, const Vec& q,
                const Vec& eta) {
  const ErrorState err = error_state(spec, t, q, eta);
  return 0.5 * err.eta_err.squaredNorm() +
         value(spec.potential, sigma(spec.sliding_map, err.q_err, err.eta_err));
}

double reaching_time_bound(double u0, double eps, double c, double rho,
                           double a) {
  if (!(eps > 0.0) || !(c > 0.0)) {
    throw ParameterError("reaching_time_bound: eps and c must be positive");
  }
  if (!(rho >= 0.0 && rho < 0.5)) {
    throw ParameterError("reaching_time_bound: rho must lie in [0, 1/2)");
  }
  if (!(a >= 1.0)) throw ParameterError("reaching_time_bound: a must be >= 1");
  if (!(u0 >= 0.0)) throw ParameterError("reaching_time_bound: U0 must be >= 0");
  if (u0 == 0.0) return 0.0;
  return a * a * std::pow(u0, 1.0 - 2.0 * rho) / (eps * c * c);
}

PhaseRate kpes_closed_loop(const ControllerSpec& spec, const Vec& q,
                           const Vec& eta) {
  if (!spec.damping_d) throw ParameterError("kpes controller requires damping_d");
  const Mat t = cholesky_factor(spec.model, q);
  const Mat jq = jacobian_q(spec.sliding_map, q, eta);
  const Mat je = jacobian_eta(spec.sliding_map, q, eta);
  const Vec grad_u = gradient(spec.potential, sigma(spec.sliding_map, q, eta));
  return structured_field(t, jq, je, spec.damping_d(q, eta), eta, grad_u);
}

PhaseRate pbsmc_closed_loop(const ControllerSpec& spec, const Vec& q,
                            const Vec& eta) {
  const Mat t = cholesky_factor(spec.model, q);
  const Mat jq = jacobian_q(spec.sliding_map, q, eta);
  const Mat je = jacobian_eta(spec.sliding_map, q, eta);
  const Vec grad_u = gradient(spec.potential, sigma(spec.sliding_map, q, eta));
  const Mat lower_right = je.partialPivLu().solve(jq * t);
  return structured_field(t, jq, je, lower_right, eta, grad_u);
}

PhaseRate tracking_closed_loop(const ControllerSpec& spec, double t,
                               const Vec& q_err, const Vec& eta_err) {
  const DesiredTrajectory& traj = require_trajectory(spec);
  const Vec q = q_err + traj.q_d(t);
  const Mat tq = cholesky_factor(spec.model, q);
  const Mat jq = jacobian_q(spec.sliding_map, q_err, eta_err);
  const Mat je = jacobian_eta(spec.sliding_map, q_err, eta_err);
  const Vec grad_u = gradient(spec.potential, sigma(spec.sliding_map, q_err, eta_err));
  const Mat lower_right = je.partialPivLu().solve(jq * tq);
  return structured_field(tq, jq, je, lower_right, eta_err, grad_u);
}

}  // namespace pbsmc
