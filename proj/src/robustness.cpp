#include "pbsmc/robustness.hpp"

#include <cmath>
#include <sstream>

#include "pbsmc/errors.hpp"

namespace pbsmc {

namespace {

void require_affine(const SlidingMap& map) {
  const bool affine = map.kind == SlidingKind::AffineInEta ||
                      (map.kind == SlidingKind::Linear &&
                       map.phi_eta.isIdentity(0.0));
  if (!affine) {
    throw MapInvalid("robustness sets need a sliding map of the form psi(q) + eta");
  }
}

double lmax_sym(const Mat& a) {
  return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (a + a.transpose()))
      .eigenvalues()
      .maxCoeff();
}

}  // namespace

PhaseRate disturbed_plant_dynamics(const MechanicalModel& model, const Vec& q,
                                   const Vec& p, const Vec& u, const Vec& d_um,
                                   const Vec& d_m) {
  PhaseRate rate = plant_dynamics(model, q, p, u);
  rate.q_dot += d_um;
  rate.second += d_m;
  return rate;
}

std::function<Vec(double)> sinusoid_signal(const Sinusoid& s) {
  if (s.amplitude.size() != s.phase.size()) {
    throw ParameterError("sinusoid: amplitude and phase sizes differ");
  }
  return [s](double t) -> Vec {
    Vec d(s.amplitude.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      d(i) = s.amplitude(i) * std::sin(s.omega * t + s.phase(i));
    }
    return d;
  };
}

double sinusoid_bound(const Sinusoid& s) { return s.amplitude.norm(); }

Vec stack_disturbance(const Vec& d_um, const Vec& d_m) {
  Vec d(d_um.size() + d_m.size());
  d << d_um, d_m;
  return d;
}

SetGeometry set_geometry(const MechanicalModel& model, const SlidingMap& map,
                         const Vec& q_plant, const Vec& q_map) {
  require_affine(map);
  SetGeometry geo;
  geo.t = cholesky_factor(model, q_plant);
  const Vec zero = Vec::Zero(q_map.size());
  geo.psi_jacobian = jacobian_q(map, q_map, zero);
  const Mat half = geo.psi_jacobian * geo.t;
  geo.lambda_min = Eigen::SelfAdjointEigenSolver<Mat>(half + half.transpose())
                       .eigenvalues()(0);
  if (!(geo.lambda_min > 0.0)) {
    std::ostringstream os;
    os << "Lambda(q) is not positive definite at q = [" << q_plant.transpose()
       << "] (lambda_min = " << geo.lambda_min << ")";
    throw AssumptionViolated(os.str(), q_plant);
  }
  geo.psi_lmax = lmax_sym(geo.psi_jacobian * geo.psi_jacobian.transpose());
  geo.t_lmax = lmax_sym(geo.t.transpose() * geo.t);
  return geo;
}

double gamma1(const SetGeometry& geo) {
  return 4.0 * std::max(geo.psi_lmax, geo.t_lmax) /
         (geo.lambda_min * geo.lambda_min);
}

double gamma2(const SetGeometry& geo) {
  return 4.0 * geo.psi_lmax / (geo.lambda_min * geo.lambda_min);
}

double gamma1(const MechanicalModel& model, const SlidingMap& map,
              const Vec& q) {
  return gamma1(set_geometry(model, map, q, q));
}

double gamma2(const MechanicalModel& model, const SlidingMap& map,
              const Vec& q) {
  return gamma2(set_geometry(model, map, q, q));
}

double b1_residual(const SetGeometry& geo, const SlidingMap& map,
                   const Potential& pot, const Vec& q_map, const Vec& eta,
                   const Vec& d) {
  const Vec grad_u = gradient(pot, sigma(map, q_map, eta));
  return grad_u.squaredNorm() + (grad_u + eta).squaredNorm() -
         gamma1(geo) * d.squaredNorm();
}

double b1_residual(const MechanicalModel& model, const SlidingMap& map,
                   const Potential& pot, const Vec& q, const Vec& eta,
                   const Vec& d) {
  return b1_residual(set_geometry(model, map, q, q), map, pot, q, eta, d);
}

double b2_residual(const SetGeometry& geo, const SlidingMap& map,
                   const Vec& q_map, const Vec& eta, const Vec& d_um,
                   double tol_sigma) {
  if (sigma(map, q_map, eta).norm() > tol_sigma) {
    return std::numeric_limits<double>::infinity();
  }
  return eta.squaredNorm() - gamma2(geo) * d_um.squaredNorm();
}

double b2_residual(const MechanicalModel& model, const SlidingMap& map,
                   const Vec& q, const Vec& eta, const Vec& d_um,
                   double tol_sigma) {
  return b2_residual(set_geometry(model, map, q, q), map, q, eta, d_um,
                     tol_sigma);
}

double reaching_margin(const SetGeometry& geo, const SlidingMap& map,
                          const Potential& pot, const Vec& q_map,
                          const Vec& eta, const Vec& d_um, const Vec& d_m) {
  const Vec grad_u = gradient(pot, sigma(map, q_map, eta));
  return geo.lambda_min * grad_u.norm() -
         (geo.psi_jacobian * d_um + geo.t.transpose() * d_m).norm();
}

double reaching_margin(const MechanicalModel& model, const SlidingMap& map,
                          const Potential& pot, const Vec& q, const Vec& eta,
                          const Vec& d_um, const Vec& d_m) {
  return reaching_margin(set_geometry(model, map, q, q), map, pot, q, eta,
                            d_um, d_m);
}

}  // namespace pbsmc
