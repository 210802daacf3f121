#pragma once
// Feedback laws for the transformed plant
//   qdot = T(q) eta,  etadot = -D(q, eta) eta + G(q) u:
//   * kinetic-potential energy shaping (KPES) with a free damping D_d,
//   * passivity-based sliding-mode stabilization (sigma = phi(q, eta)),
//   * passivity-based sliding-mode trajectory tracking (sigma = phi(q~, eta~)).
// Each law comes with the closed-loop port-Hamiltonian vector field it is
// meant to produce, evaluated directly so the two can be checked against
// each other.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pbsmc/mech_ph.hpp"
#include "pbsmc/potentials.hpp"
#include "pbsmc/sliding.hpp"

namespace pbsmc {

struct DesiredTrajectory {
  std::string name;
  std::function<Vec(double t)> q_d;
  std::function<Vec(double t)> qdot_d;
  std::function<Vec(double t)> qddot_d;
};

/// Holds q^d(t) = q_const with zero derivatives.
DesiredTrajectory constant_trajectory(const Vec& q_const);

enum class ControllerMode { Kpes, PbsmcStabilize, PbsmcTrack };

std::string to_string(ControllerMode mode);
ControllerMode controller_mode_from_string(const std::string& name);

struct ControllerSpec {
  ControllerMode mode = ControllerMode::PbsmcStabilize;
  MechanicalModel model;
  SlidingMap sliding_map;
  Potential potential;
  /// KPES only: D_d(q, eta), with D_d + D_d^T positive definite.
  std::function<Mat(const Vec& q, const Vec& eta)> damping_d;
  std::optional<DesiredTrajectory> trajectory;
};

/// D_d = gain * I.
std::function<Mat(const Vec&, const Vec&)> scaled_identity_damping(int dof,
                                                                   double gain);

/// Throws ParameterError for missing mode-specific parts.
void validate(const ControllerSpec& spec);

/// Non-fatal remarks, e.g. a non-smooth potential paired with KPES.
std::vector<std::string> advisories(const ControllerSpec& spec);

Vec kpes_feedback(const ControllerSpec& spec, const Vec& q, const Vec& eta);
Vec pbsmc_feedback(const ControllerSpec& spec, const Vec& q, const Vec& eta);

struct DesiredMomentum {
  Vec eta_d;     ///< T(q)^{-1} qdot_d(t)
  Mat jacobian;  ///< d eta_d / dq
};

DesiredMomentum desired_momentum(const ControllerSpec& spec, const Vec& q,
                                 double t);

/// Same Jacobian by central differences of T(q)^{-1} qdot_d(t).
Mat desired_momentum_jacobian_fd(const ControllerSpec& spec, const Vec& q,
                                 double t);

/// u = G^{-1}(D eta_d + (d eta_d/dq) T eta + T^{-1} qddot_d + v); turns the
/// plant into the error system q~dot = T eta~, eta~dot = -D eta~ + v.
Vec tracking_prefeedback(const ControllerSpec& spec, const Vec& q,
                         const Vec& eta, double t, const Vec& v);

/// v = -(dphi/deta~)^{-1} Lambda~ grad U + D eta~ - (dphi/deta~)^{-1}(dphi/dq~) T eta~.
Vec tracking_v(const ControllerSpec& spec, const Vec& q, const Vec& eta,
               double t);

Vec tracking_pbsmc(const ControllerSpec& spec, const Vec& q, const Vec& eta,
                   double t);

/// Dispatch on spec.mode.
Vec feedback(const ControllerSpec& spec, double t, const Vec& q,
             const Vec& eta);

struct ErrorState {
  Vec q_err;
  Vec eta_err;
};

/// (q - q_d, eta - eta_d) in track mode; (q, eta) otherwise.
ErrorState error_state(const ControllerSpec& spec, double t, const Vec& q,
                       const Vec& eta);

/// sigma in the coordinates the controller regulates.
Vec sliding_value(const ControllerSpec& spec, double t, const Vec& q,
                  const Vec& eta);

/// H_smc (or H~_smc, or H_d for KPES): 1/2 |eta|^2 + U(phi(.)) in the
/// controller's coordinates.
double lyapunov(const ControllerSpec& spec, double t, const Vec& q,
                const Vec& eta);

/// a^2 U0^{1-2 rho} / (eps c^2).
double reaching_time_bound(double u0, double eps, double c, double rho,
                           double a);

/// Closed-loop vector field of the KPES law written in port-Hamiltonian form.
PhaseRate kpes_closed_loop(const ControllerSpec& spec, const Vec& q,
                           const Vec& eta);

/// Closed-loop vector field of the stabilizing sliding-mode law.
PhaseRate pbsmc_closed_loop(const ControllerSpec& spec, const Vec& q,
                            const Vec& eta);

/// Closed-loop error dynamics of the tracking law in (q~, eta~), with the
/// plant configuration q = q~ + q_d(t).
PhaseRate tracking_closed_loop(const ControllerSpec& spec, double t,
                               const Vec& q_err, const Vec& eta_err);

}  // namespace pbsmc
