#pragma once
// Fully-actuated mechanical port-Hamiltonian plants and the momentum
// transformation eta = T(q)^T p with T T^T = M^{-1}.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pbsmc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Plant description:
///   qdot = grad_p H0,  pdot = -grad_q H0 - D0 grad_p H0 + G0 u,
///   H0 = 1/2 p^T M(q)^{-1} p.
struct MechanicalModel {
  std::string name;
  int dof = 0;
  std::function<Mat(const Vec& q)> inertia;
  std::function<Mat(const Vec& q, const Vec& p)> damping0;
  std::function<Mat(const Vec& q)> input_map0;
  /// Optional analytic {dM/dq_k}; finite differences are used when empty.
  std::function<std::vector<Mat>(const Vec& q)> d_inertia;
  /// Relative central-difference step, scaled by max(1, |q_k|).
  double fd_step = 1e-6;
  /// Optional closed-form T(q), kept only for cross-validation.
  std::function<Mat(const Vec& q)> analytic_cholesky;
};

/// Constant inertia, damping and input map (useful for toy plants and tests).
MechanicalModel constant_model(const Mat& inertia, const Mat& damping0,
                               const Mat& input_map0,
                               std::string name = "constant");

/// M(q), checked for symmetry and positive definiteness.
Mat checked_inertia(const MechanicalModel& model, const Vec& q);

double hamiltonian0(const MechanicalModel& model, const Vec& q, const Vec& p);

/// Lower-triangular T with positive diagonal and T T^T = M(q)^{-1}.
Mat cholesky_factor(const MechanicalModel& model, const Vec& q);

/// Slices {dT/dq_k}, k = 0..m-1.
std::vector<Mat> d_cholesky(const MechanicalModel& model, const Vec& q);

/// Same slices, always by central differences of cholesky_factor.
std::vector<Mat> d_cholesky_fd(const MechanicalModel& model, const Vec& q);

/// T(q) together with its slices {dT/dq_k}, computed from one factorization.
struct MomentumGeometry {
  Mat t;
  std::vector<Mat> dt;
};

MomentumGeometry momentum_geometry(const MechanicalModel& model, const Vec& q);

/// Transformed gyroscopic-plus-damping matrix
///   D(q, eta) = T^T D0 T + (A^T - A),
///   A = sum_k (dT/dq_k)^T T^{-T} eta e_k^T T,
/// so that D + D^T = 2 T^T D0 T.
Mat transformed_damping(const MechanicalModel& model, const Vec& q,
                        const Vec& eta);

Mat transformed_damping(const MechanicalModel& model,
                        const MomentumGeometry& geo, const Vec& q,
                        const Vec& eta);

/// The gyroscopic part A^T - A of transformed_damping alone.
Mat gyroscopic_term(const MechanicalModel& model, const Vec& q, const Vec& eta);

/// G(q) = T(q)^T G0(q).
Mat transformed_input_map(const MechanicalModel& model, const Vec& q);

struct PhaseRate {
  Vec q_dot;
  Vec second;  ///< p_dot or eta_dot depending on the coordinates
};

Vec grad_q_hamiltonian0(const MechanicalModel& model, const Vec& q,
                        const Vec& p);

PhaseRate plant_dynamics(const MechanicalModel& model, const Vec& q,
                         const Vec& p, const Vec& u);

PhaseRate transformed_dynamics(const MechanicalModel& model, const Vec& q,
                               const Vec& eta, const Vec& u);

Vec momentum_to_eta(const MechanicalModel& model, const Vec& q, const Vec& p);
Vec eta_to_momentum(const MechanicalModel& model, const Vec& q,
                    const Vec& eta);

}  // namespace pbsmc
