#pragma once
// Two-link planar arm (horizontal, no gravity) with viscous joint friction,
// tracking a circle with its end effector.

#include <vector>

#include "pbsmc/controllers.hpp"
#include "pbsmc/mech_ph.hpp"
#include "pbsmc/sim.hpp"

namespace pbsmc {

struct ArmParams {
  double l1 = 1.0, l2 = 1.0;
  double m1 = 1.0, m2 = 1.0;
  double r1 = 0.5, r2 = 0.5;
  double J1 = 1.0 / 12.0, J2 = 1.0 / 12.0;
  double nu1 = 0.5, nu2 = 0.5;

  double M1() const { return m1 * r1 * r1 + m2 * l1 * l1 + J1; }
  double M2() const { return m2 * r2 * r2 + J2; }
  double M3() const { return m2 * l1 * r2; }
};

/// Throws ParameterError unless every parameter is positive and finite.
void validate(const ArmParams& params);

/// M(q) = [[M1 + M2 + 2 M3 cos q2, M2 + M3 cos q2], [M2 + M3 cos q2, M2]],
/// D0 = diag(nu1, nu2), G0 = I, with analytic dM/dq and the closed-form T.
MechanicalModel arm_model(const ArmParams& params = {});

/// Closed-form lower Cholesky factor of M(q)^{-1}.
Mat arm_cholesky_closed_form(const ArmParams& params, const Vec& q);

/// Reference closed form for Lambda~ with Phi_q = [[2, 0], [2, 2]],
/// Phi_eta = I and the default parameters:
///   sqrt(3) / sqrt(16 - 9 cos^2 q2) * [[4, -3 cos q2], [-3 cos q2, 12]].
Mat reference_lambda_closed_form(const Vec& q);

/// [[2, 0], [2, 2]].
Mat arm_sliding_gain();

struct CircleParams {
  double cx = 1.0;
  double cy = 0.0;
  double radius = 0.5;
  double omega = 1.0;
};

struct JointReference {
  Vec q, qdot, qddot;
};

/// End-effector point (cx + R cos wt, cy + R sin wt) mapped through the
/// elbow-up inverse kinematics
///   q1 = atan2(y, x) - acos((l1^2 - l2^2 + r^2) / (2 l1 r)),
///   q2 = acos((r^2 - l1^2 - l2^2) / (2 l1 l2)),
/// differentiated analytically. Throws TrajectoryError outside the open
/// annulus |l1 - l2| < r < l1 + l2.
JointReference circle_reference(const ArmParams& params,
                                const CircleParams& circle, double t);

DesiredTrajectory circle_trajectory(const ArmParams& params = {},
                                    const CircleParams& circle = {});

/// Forward kinematics of the end effector.
Vec arm_forward_kinematics(const ArmParams& params, const Vec& q);

/// q1 fixed, q2 over [-pi, pi], eta = 0: Lambda~ depends on q2 only for the
/// linear sliding map.
CertificationBox arm_certification_box();

/// Tracking scenario on the arm: zero initial state, t_final = 10, h = 1e-4,
/// certification over arm_certification_box().
Scenario arm_tracking_scenario(const std::string& name, const ArmParams& params,
                               const CircleParams& circle, SlidingMap map,
                               Potential potential);

/// Disturbances of the two robustness scenarios.
Sinusoid robust_matched_disturbance();
Sinusoid robust_unmatched_disturbance();

/// paper_norm2_r1.3, paper_norm1, robust_matched, robust_matched_unmatched.
std::vector<Scenario> paper_scenarios(const ArmParams& params = {});

}  // namespace pbsmc
