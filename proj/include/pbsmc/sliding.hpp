#pragma once
// Sliding variables sigma = phi(q, eta), their Jacobians, and the matrix
//   Lambda = (dphi/dq) T (dphi/deta)^T + (dphi/deta) T^T (dphi/dq)^T
// whose uniform positive definiteness gives finite-time reaching.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pbsmc/mech_ph.hpp"

namespace pbsmc {

enum class SlidingKind { Linear, AffineInEta, Custom };

struct SlidingMap {
  SlidingKind kind = SlidingKind::Linear;
  Mat phi_q;    ///< linear kind
  Mat phi_eta;  ///< linear kind
  std::function<Vec(const Vec& q)> psi;          ///< affine_in_eta kind
  std::function<Mat(const Vec& q)> psi_jacobian;  ///< affine_in_eta kind
  std::function<Vec(const Vec& q, const Vec& eta)> custom_phi;
  std::function<Mat(const Vec& q, const Vec& eta)> jac_q;
  std::function<Mat(const Vec& q, const Vec& eta)> jac_eta;

  /// sigma = phi_q q + phi_eta eta.
  static SlidingMap linear(Mat phi_q, Mat phi_eta);
  /// sigma = psi(q) + eta.
  static SlidingMap affine_in_eta(std::function<Vec(const Vec&)> psi,
                                  std::function<Mat(const Vec&)> jacobian);
  /// sigma = phi_q q + eta, the affine form with a linear psi.
  static SlidingMap affine_linear(const Mat& phi_q);
  static SlidingMap custom(std::function<Vec(const Vec&, const Vec&)> phi,
                           std::function<Mat(const Vec&, const Vec&)> jac_q,
                           std::function<Mat(const Vec&, const Vec&)> jac_eta);
};

std::string to_string(SlidingKind kind);

Vec sigma(const SlidingMap& map, const Vec& q, const Vec& eta);

/// dphi/dq and dphi/deta, checked for nonsingularity (condition < 1e12).
Mat jacobian_q(const SlidingMap& map, const Vec& q, const Vec& eta);
Mat jacobian_eta(const SlidingMap& map, const Vec& q, const Vec& eta);

/// Lambda with T evaluated at `q`; symmetrized.
Mat lambda_matrix(const SlidingMap& map, const MechanicalModel& model,
                  const Vec& q, const Vec& eta);

/// Tracking variant: T at the plant configuration, Jacobians at the error
/// coordinates (q_err, eta_err).
Mat lambda_matrix_tracking(const SlidingMap& map, const MechanicalModel& model,
                           const Vec& q, const Vec& q_err, const Vec& eta_err);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Sampling box over (q, eta). Lambda is evaluated with T(q) and the map's
/// Jacobians at (q, eta); for linear and affine-linear maps the Jacobians are
/// constant, so this also covers the tracking matrix of any error state.
struct CertificationBox {
  std::vector<Interval> q;
  std::vector<Interval> eta;

  static CertificationBox symmetric(int dof, double q_half_width,
                                    double eta_half_width);
};

struct PdCertificate {
  double epsilon = 0.0;  ///< inf over samples of lambda_min(Lambda); an estimate
  Vec witness_q;
  Vec witness_eta;
  /// Sampled max over sub-sliding partitions of ||[-L11^{-1} L12; I]||, >= 1.
  /// Reporting only.
  double a_estimate = 1.0;
  std::size_t samples = 0;
};

/// Grid sampling of the box (endpoints included, about n_samples points).
/// Throws AssumptionViolated naming the witness when epsilon <= 0.
PdCertificate certify_uniform_pd(const SlidingMap& map,
                                 const MechanicalModel& model,
                                 const CertificationBox& box,
                                 std::size_t n_samples);

/// Grid points used by certify_uniform_pd, as (q, eta) pairs.
std::vector<std::pair<Vec, Vec>> box_grid(const CertificationBox& box,
                                          std::size_t n_samples);

/// max over nonempty proper index subsets S of ||[-L_SS^{-1} L_SR; I]||_2.
double partition_bound(const Mat& lambda);

}  // namespace pbsmc
