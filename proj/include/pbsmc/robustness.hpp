#pragma once
// Disturbed plant and the convergence sets of the sliding-mode closed loop
// with sigma = psi(q) + eta:
//   B1: ||(grad U, grad U + eta)||^2 <= gamma1(q) ||d||^2
//   B2: ||eta||^2 <= gamma2(q) ||d_um||^2  and  psi(q) + eta = 0
// Membership is reported as signed residuals (<= 0 means inside).

#include <functional>
#include <limits>

#include "pbsmc/mech_ph.hpp"
#include "pbsmc/potentials.hpp"
#include "pbsmc/sliding.hpp"

namespace pbsmc {

struct DisturbanceProfile {
  std::function<Vec(double t)> d_um;  ///< unmatched: enters the q row
  std::function<Vec(double t)> d_m;   ///< matched: enters the p row
  double bound_um = std::numeric_limits<double>::infinity();
  double bound_m = std::numeric_limits<double>::infinity();
};

/// d_i(t) = amplitude_i sin(omega t + phase_i).
struct Sinusoid {
  Vec amplitude;
  Vec phase;
  double omega = 1.0;
};

std::function<Vec(double t)> sinusoid_signal(const Sinusoid& s);

/// ||amplitude||, an upper bound on ||d(t)|| for every t.
double sinusoid_bound(const Sinusoid& s);

PhaseRate disturbed_plant_dynamics(const MechanicalModel& model, const Vec& q,
                                   const Vec& p, const Vec& u, const Vec& d_um,
                                   const Vec& d_m);

/// Eigen-quantities shared by gamma1, gamma2 and the margin. T is taken at
/// the plant configuration, dpsi/dq at the map argument (they coincide for
/// stabilization; for tracking the map argument is q~).
struct SetGeometry {
  Mat t;
  Mat psi_jacobian;
  double lambda_min = 0.0;   ///< lambda_min(Lambda)
  double psi_lmax = 0.0;     ///< lambda_max(dpsi/dq dpsi/dq^T)
  double t_lmax = 0.0;       ///< lambda_max(T^T T)
};

SetGeometry set_geometry(const MechanicalModel& model, const SlidingMap& map,
                         const Vec& q_plant, const Vec& q_map);

double gamma1(const SetGeometry& geo);
double gamma2(const SetGeometry& geo);
double gamma1(const MechanicalModel& model, const SlidingMap& map, const Vec& q);
double gamma2(const MechanicalModel& model, const SlidingMap& map, const Vec& q);

/// `d` is the stacked (d_um, d_m) vector.
double b1_residual(const SetGeometry& geo, const SlidingMap& map,
                   const Potential& pot, const Vec& q_map, const Vec& eta,
                   const Vec& d);
double b1_residual(const MechanicalModel& model, const SlidingMap& map,
                   const Potential& pot, const Vec& q, const Vec& eta,
                   const Vec& d);

/// +infinity when ||psi(q) + eta|| > tol_sigma (off the surface).
double b2_residual(const SetGeometry& geo, const SlidingMap& map,
                   const Vec& q_map, const Vec& eta, const Vec& d_um,
                   double tol_sigma);
double b2_residual(const MechanicalModel& model, const SlidingMap& map,
                   const Vec& q, const Vec& eta, const Vec& d_um,
                   double tol_sigma);

/// lambda_min(Lambda) ||grad U|| - ||dpsi/dq d_um + T^T d_m||.
double reaching_margin(const SetGeometry& geo, const SlidingMap& map,
                          const Potential& pot, const Vec& q_map,
                          const Vec& eta, const Vec& d_um, const Vec& d_m);
double reaching_margin(const MechanicalModel& model, const SlidingMap& map,
                          const Potential& pot, const Vec& q, const Vec& eta,
                          const Vec& d_um, const Vec& d_m);

Vec stack_disturbance(const Vec& d_um, const Vec& d_m);

}  // namespace pbsmc
