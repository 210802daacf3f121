#pragma once
// Sliding potentials U(sigma): the norm-power family k ||sigma||_s^r and the
// l1-plus-quadratic family alpha ||sigma||_1 + beta/2 ||sigma||^2.
//
// At sigma_i = 0 the signum selection is 0, so gradient(0) = 0. With
// smoothing_eps > 0 the potential is replaced by a boundary-layer version
// whose gradient is continuous:
//   * s = 1 and l1_quadratic: |sigma_i| -> Huber_eps(sigma_i), which turns
//     every sgn(sigma_i) in the gradient into sat(sigma_i / eps);
//   * s > 1: ||sigma||_s -> Huber_eps(||sigma||_s) (radial boundary layer).
// value() and gradient() always describe the same function, so closed-loop
// Lyapunov functions stay exact under smoothing.

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace pbsmc {

using Vec = Eigen::VectorXd;

enum class PotentialKind { NormPower, L1Quadratic, Custom };

struct Potential {
  PotentialKind kind = PotentialKind::NormPower;
  double k = 1.0;
  double r = 1.0;
  double s = 2.0;
  double alpha = 1.0;
  double beta = 1.0;
  double smoothing_eps = 0.0;
  // Custom kind only.
  std::function<double(const Vec&)> custom_value;
  std::function<Vec(const Vec&)> custom_gradient;
  double custom_rho = 0.0;  ///< declared gradient-domination exponent

  static Potential norm_power(double k, double r, double s,
                              double smoothing_eps = 0.0);
  static Potential l1_quadratic(double alpha, double beta,
                                double smoothing_eps = 0.0);
  static Potential custom(std::function<double(const Vec&)> value,
                          std::function<Vec(const Vec&)> gradient,
                          double rho);
};

std::string to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& name);

double value(const Potential& pot, const Vec& sigma);
Vec gradient(const Potential& pot, const Vec& sigma);

/// sat(z) = clamp(z, -1, 1).
double saturate(double z);

struct GradientDominationConstants {
  double c = 0.0;
  double rho = 0.0;
  bool sampled = false;          ///< c comes from sampling rather than a closed form
  double sampled_infimum = 0.0;  ///< inf ||grad U|| / U^rho over the samples
  std::size_t samples = 0;
};

struct GradientDominationOptions {
  std::size_t directions = 2000;
  double min_magnitude = 1e-3;
  int decades = 6;
  double box_half_width = 1.0;  ///< custom kind: sampling box [-w, w]^m
  unsigned long long seed = 0x5eedULL;
};

/// Constants (c, rho) with ||grad U(sigma)|| >= c U(sigma)^rho for sigma != 0,
/// for the unsmoothed potential in dimension `dim`.
///
/// norm_power: rho = (r-1)/r and c = r k^{1/r} * min(1, dim^{1/s - 1/2}),
/// which is the exact infimum of ||grad U|| / U^rho, lowered by 1e-12
/// relative so that evaluation roundoff cannot violate it; the value is then
/// checked against samples of the unit s-sphere scaled over `decades`
/// magnitudes.
/// l1_quadratic: (alpha, 0). Custom: declared rho, c = 0.95 * sampled infimum.
///
/// Throws AssumptionViolated when the infimum is (numerically) zero.
GradientDominationConstants gradient_domination_constants(const Potential& pot, int dim,
                                           const GradientDominationOptions& opts = {});

}  // namespace pbsmc
