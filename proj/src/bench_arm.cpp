#include "pbsmc/bench_arm.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pbsmc/errors.hpp"

namespace pbsmc {

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// d/dt acos(z(t)) and its second derivative.
void acos_rates(double z, double zd, double zdd, double& d1, double& d2) {
  const double w = 1.0 - z * z;
  d1 = -zd / std::sqrt(w);
  d2 = -zdd / std::sqrt(w) - z * zd * zd / (w * std::sqrt(w));
}

}  // namespace

void validate(const ArmParams& p) {
  for (double x : {p.l1, p.l2, p.m1, p.m2, p.r1, p.r2, p.J1, p.J2, p.nu1, p.nu2}) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw ParameterError("arm parameters must be positive and finite");
    }
  }
}

MechanicalModel arm_model(const ArmParams& params) {
  validate(params);
  const double m1 = params.M1(), m2 = params.M2(), m3 = params.M3();
  MechanicalModel model;
  model.name = "two_link_arm";
  model.dof = 2;
  model.inertia = [=](const Vec& q) {
    const double c = std::cos(q(1));
    Mat m(2, 2);
    m << m1 + m2 + 2.0 * m3 * c, m2 + m3 * c,
         m2 + m3 * c, m2;
    return m;
  };
  model.d_inertia = [=](const Vec& q) {
    const double s = std::sin(q(1));
    Mat d2(2, 2);
    d2 << -2.0 * m3 * s, -m3 * s,
          -m3 * s, 0.0;
    return std::vector<Mat>{Mat::Zero(2, 2), d2};
  };
  const Mat d0 = vec2(params.nu1, params.nu2).asDiagonal();
  model.damping0 = [d0](const Vec&, const Vec&) { return d0; };
  model.input_map0 = [](const Vec&) -> Mat { return Mat::Identity(2, 2); };
  model.analytic_cholesky = [params](const Vec& q) {
    return arm_cholesky_closed_form(params, q);
  };
  return model;
}

Mat arm_cholesky_closed_form(const ArmParams& params, const Vec& q) {
  const double m1 = params.M1(), m2 = params.M2(), m3 = params.M3();
  const double c = std::cos(q(1));
  const double root = std::sqrt(m1 * m2 - m3 * m3 * c * c);
  Mat t(2, 2);
  t << std::sqrt(m2) / root, 0.0,
       -(m2 + m3 * c) / (std::sqrt(m2) * root), 1.0 / std::sqrt(m2);
  return t;
}

Mat reference_lambda_closed_form(const Vec& q) {
  const double c = std::cos(q(1));
  Mat lam(2, 2);
  lam << 4.0, -3.0 * c,
         -3.0 * c, 12.0;
  return std::sqrt(3.0) / std::sqrt(16.0 - 9.0 * c * c) * lam;
}

Mat arm_sliding_gain() {
  Mat phi(2, 2);
  phi << 2.0, 0.0,
         2.0, 2.0;
  return phi;
}

JointReference circle_reference(const ArmParams& params,
                                const CircleParams& circle, double t) {
  const double l1 = params.l1, l2 = params.l2;
  const double w = circle.omega, rad = circle.radius;
  const double x = circle.cx + rad * std::cos(w * t);
  const double y = circle.cy + rad * std::sin(w * t);
  const double xd = -rad * w * std::sin(w * t);
  const double yd = rad * w * std::cos(w * t);
  const double xdd = -w * w * (x - circle.cx);
  const double ydd = -w * w * (y - circle.cy);

  const double rho = x * x + y * y;  // r^2
  const double r = std::sqrt(rho);
  if (!(r > std::abs(l1 - l2)) || !(r < l1 + l2)) {
    std::ostringstream os;
    os << "circle trajectory leaves the reachable annulus at t = " << t
       << " (r = " << r << ")";
    throw TrajectoryError(os.str());
  }
  const double rho_d = 2.0 * (x * xd + y * yd);
  const double rho_dd = 2.0 * (xd * xd + x * xdd + yd * yd + y * ydd);

  const double theta = std::atan2(y, x);
  const double cross = x * yd - y * xd;
  const double theta_d = cross / rho;
  const double theta_dd = (x * ydd - y * xdd) / rho - cross * rho_d / (rho * rho);

  const double a = l1 * l1 - l2 * l2;
  const double b = (a + rho) / (2.0 * l1 * r);
  const double b1 = (rho - a) / (4.0 * l1 * rho * r);
  const double b2 = (1.5 * a - 0.5 * rho) / (4.0 * l1 * rho * rho * r);
  const double b_d = b1 * rho_d;
  const double b_dd = b2 * rho_d * rho_d + b1 * rho_dd;

  const double c2 = (rho - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  const double c2_d = rho_d / (2.0 * l1 * l2);
  const double c2_dd = rho_dd / (2.0 * l1 * l2);

  double acos_b_d, acos_b_dd, acos_c_d, acos_c_dd;
  acos_rates(b, b_d, b_dd, acos_b_d, acos_b_dd);
  acos_rates(c2, c2_d, c2_dd, acos_c_d, acos_c_dd);

  JointReference ref;
  ref.q = vec2(theta - std::acos(b), std::acos(c2));
  ref.qdot = vec2(theta_d - acos_b_d, acos_c_d);
  ref.qddot = vec2(theta_dd - acos_b_dd, acos_c_dd);
  return ref;
}

DesiredTrajectory circle_trajectory(const ArmParams& params,
                                    const CircleParams& circle) {
  validate(params);
  DesiredTrajectory traj;
  traj.name = "paper_circle";
  traj.q_d = [=](double t) { return circle_reference(params, circle, t).q; };
  traj.qdot_d = [=](double t) { return circle_reference(params, circle, t).qdot; };
  traj.qddot_d = [=](double t) { return circle_reference(params, circle, t).qddot; };
  return traj;
}

Vec arm_forward_kinematics(const ArmParams& params, const Vec& q) {
  return vec2(params.l1 * std::cos(q(0)) + params.l2 * std::cos(q(0) + q(1)),
              params.l1 * std::sin(q(0)) + params.l2 * std::sin(q(0) + q(1)));
}

CertificationBox arm_certification_box() {
  CertificationBox box;
  box.q = {{0.0, 0.0}, {-std::numbers::pi, std::numbers::pi}};
  box.eta = {{0.0, 0.0}, {0.0, 0.0}};
  return box;
}

Scenario arm_tracking_scenario(const std::string& name, const ArmParams& params,
                               const CircleParams& circle, SlidingMap map,
                               Potential potential) {
  Scenario scn;
  scn.name = name;
  scn.controller.mode = ControllerMode::PbsmcTrack;
  scn.controller.model = arm_model(params);
  scn.controller.sliding_map = std::move(map);
  scn.controller.potential = std::move(potential);
  scn.controller.trajectory = circle_trajectory(params, circle);
  scn.q0 = Vec::Zero(2);
  scn.p0 = Vec::Zero(2);
  scn.t_final = 10.0;
  scn.h = 1e-4;
  scn.record_stride = 10;
  scn.certification = arm_certification_box();
  scn.certification_samples = 2001;
  return scn;
}

Sinusoid robust_matched_disturbance() {
  return {vec2(0.5, 0.5), vec2(0.0, std::numbers::pi / 2.0), 3.0};
}

Sinusoid robust_unmatched_disturbance() {
  return {vec2(0.2, 0.2), vec2(0.0, std::numbers::pi / 2.0), 2.0};
}

std::vector<Scenario> paper_scenarios(const ArmParams& params) {
  const CircleParams circle;
  const Mat phi = arm_sliding_gain();
  const Mat id = Mat::Identity(2, 2);
  std::vector<Scenario> out;
  out.push_back(arm_tracking_scenario("paper_norm2_r1.3", params, circle,
                                      SlidingMap::linear(phi, id),
                                      Potential::norm_power(2.0, 1.3, 2.0)));
  out.push_back(arm_tracking_scenario("paper_norm1", params, circle,
                                      SlidingMap::linear(phi, id),
                                      Potential::norm_power(2.0, 1.0, 1.0)));

  const Sinusoid matched = robust_matched_disturbance();
  const Sinusoid unmatched = robust_unmatched_disturbance();

  Scenario robust_m = arm_tracking_scenario("robust_matched", params, circle,
                                            SlidingMap::affine_linear(phi),
                                            Potential::norm_power(2.0, 1.0, 1.0));
  DisturbanceProfile dm;
  dm.d_m = sinusoid_signal(matched);
  dm.bound_m = sinusoid_bound(matched);
  dm.bound_um = 0.0;
  robust_m.disturbance = dm;
  out.push_back(std::move(robust_m));

  // The B1 set is informative only for a potential whose gradient vanishes
  // continuously on the surface, so this variant uses the r = 1.3 potential.
  Scenario robust_mu = arm_tracking_scenario("robust_matched_unmatched", params, circle,
                                             SlidingMap::affine_linear(phi),
                                             Potential::norm_power(2.0, 1.3, 2.0));
  DisturbanceProfile dmu = dm;
  dmu.d_um = sinusoid_signal(unmatched);
  dmu.bound_um = sinusoid_bound(unmatched);
  robust_mu.disturbance = dmu;
  out.push_back(std::move(robust_mu));
  return out;
}

}  // namespace pbsmc
