#include "pbsmc/sliding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pbsmc/errors.hpp"

namespace pbsmc {

namespace {

constexpr double kMaxCondition = 1e12;

void check_nonsingular(const Mat& j, const char* what) {
  if (j.rows() != j.cols()) {
    throw MapInvalid(std::string("sliding map: ") + what + " is not square");
  }
  Eigen::JacobiSVD<Mat> svd(j);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || smax / smin > kMaxCondition) {
    std::ostringstream os;
    os << "sliding map: " << what << " is singular (condition "
       << (smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity())
       << ")";
    throw MapInvalid(os.str());
  }
}

Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

Mat lambda_from(const Mat& jq, const Mat& je, const Mat& t) {
  const Mat half = jq * t * je.transpose();
  return symmetrize(half + half.transpose());
}

}  // namespace

SlidingMap SlidingMap::linear(Mat phi_q, Mat phi_eta) {
  if (phi_q.rows() != phi_q.cols() || phi_eta.rows() != phi_eta.cols() ||
      phi_q.rows() != phi_eta.rows()) {
    throw MapInvalid("linear sliding map: phi_q and phi_eta must be m x m");
  }
  check_nonsingular(phi_q, "phi_q");
  check_nonsingular(phi_eta, "phi_eta");
  SlidingMap map;
  map.kind = SlidingKind::Linear;
  map.phi_q = std::move(phi_q);
  map.phi_eta = std::move(phi_eta);
  return map;
}

SlidingMap SlidingMap::affine_in_eta(std::function<Vec(const Vec&)> psi,
                                     std::function<Mat(const Vec&)> jacobian) {
  if (!psi || !jacobian) throw MapInvalid("affine map needs psi and its Jacobian");
  SlidingMap map;
  map.kind = SlidingKind::AffineInEta;
  map.psi = std::move(psi);
  map.psi_jacobian = std::move(jacobian);
  return map;
}

SlidingMap SlidingMap::affine_linear(const Mat& phi_q) {
  check_nonsingular(phi_q, "psi jacobian");
  SlidingMap map = affine_in_eta([phi_q](const Vec& q) -> Vec { return phi_q * q; },
                                 [phi_q](const Vec&) -> Mat { return phi_q; });
  map.phi_q = phi_q;
  map.phi_eta = Mat::Identity(phi_q.rows(), phi_q.cols());
  return map;
}

SlidingMap SlidingMap::custom(std::function<Vec(const Vec&, const Vec&)> phi,
                              std::function<Mat(const Vec&, const Vec&)> jq,
                              std::function<Mat(const Vec&, const Vec&)> je) {
  if (!phi || !jq || !je) throw MapInvalid("custom map needs phi and both Jacobians");
  SlidingMap map;
  map.kind = SlidingKind::Custom;
  map.custom_phi = std::move(phi);
  map.jac_q = std::move(jq);
  map.jac_eta = std::move(je);
  return map;
}

std::string to_string(SlidingKind kind) {
  switch (kind) {
    case SlidingKind::Linear: return "linear";
    case SlidingKind::AffineInEta: return "affine_in_eta";
    case SlidingKind::Custom: return "custom";
  }
  return "unknown";
}

Vec sigma(const SlidingMap& map, const Vec& q, const Vec& eta) {
  switch (map.kind) {
    case SlidingKind::Linear: return map.phi_q * q + map.phi_eta * eta;
    case SlidingKind::AffineInEta: return map.psi(q) + eta;
    case SlidingKind::Custom: return map.custom_phi(q, eta);
  }
  return Vec();
}

Mat jacobian_q(const SlidingMap& map, const Vec& q, const Vec& eta) {
  switch (map.kind) {
    case SlidingKind::Linear: return map.phi_q;
    case SlidingKind::AffineInEta: {
      Mat j = map.psi_jacobian(q);
      check_nonsingular(j, "dpsi/dq");
      return j;
    }
    case SlidingKind::Custom: {
      Mat j = map.jac_q(q, eta);
      check_nonsingular(j, "dphi/dq");
      return j;
    }
  }
  return Mat();
}

Mat jacobian_eta(const SlidingMap& map, const Vec& q, const Vec& eta) {
  switch (map.kind) {
    case SlidingKind::Linear: return map.phi_eta;
    case SlidingKind::AffineInEta: return Mat::Identity(q.size(), q.size());
    case SlidingKind::Custom: {
      Mat j = map.jac_eta(q, eta);
      check_nonsingular(j, "dphi/deta");
      return j;
    }
  }
  return Mat();
}

Mat lambda_matrix(const SlidingMap& map, const MechanicalModel& model,
                  const Vec& q, const Vec& eta) {
  return lambda_from(jacobian_q(map, q, eta), jacobian_eta(map, q, eta),
                     cholesky_factor(model, q));
}

Mat lambda_matrix_tracking(const SlidingMap& map, const MechanicalModel& model,
                           const Vec& q, const Vec& q_err, const Vec& eta_err) {
  return lambda_from(jacobian_q(map, q_err, eta_err),
                     jacobian_eta(map, q_err, eta_err),
                     cholesky_factor(model, q));
}

CertificationBox CertificationBox::symmetric(int dof, double q_half_width,
                                             double eta_half_width) {
  CertificationBox box;
  box.q.assign(static_cast<std::size_t>(dof), {-q_half_width, q_half_width});
  box.eta.assign(static_cast<std::size_t>(dof), {-eta_half_width, eta_half_width});
  return box;
}

std::vector<std::pair<Vec, Vec>> box_grid(const CertificationBox& box,
                                          std::size_t n_samples) {
  if (box.q.empty() || box.q.size() != box.eta.size()) {
    throw ParameterError("certification box: q and eta need one interval per dof");
  }
  std::vector<Interval> axes(box.q);
  axes.insert(axes.end(), box.eta.begin(), box.eta.end());
  int free_axes = 0;
  for (const auto& iv : axes) {
    if (!(iv.hi >= iv.lo)) throw ParameterError("certification box: empty interval");
    if (iv.hi > iv.lo) ++free_axes;
  }
  const std::size_t per_axis =
      free_axes == 0
          ? 1
          : std::max<std::size_t>(
                2, static_cast<std::size_t>(std::floor(
                       std::pow(static_cast<double>(std::max<std::size_t>(n_samples, 1)),
                                1.0 / free_axes) + 1e-9)));

  std::vector<std::size_t> counts;
  std::size_t total = 1;
  for (const auto& iv : axes) {
    counts.push_back(iv.hi > iv.lo ? per_axis : 1);
    total *= counts.back();
  }

  const std::size_t m = box.q.size();
  std::vector<std::pair<Vec, Vec>> points;
  points.reserve(total);
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    Vec q(static_cast<Eigen::Index>(m)), eta(static_cast<Eigen::Index>(m));
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& iv = axes[a];
      const double x = counts[a] == 1
                           ? iv.lo
                           : iv.lo + (iv.hi - iv.lo) * static_cast<double>(idx[a]) /
                                         static_cast<double>(counts[a] - 1);
      if (a < m) {
        q(static_cast<Eigen::Index>(a)) = x;
      } else {
        eta(static_cast<Eigen::Index>(a - m)) = x;
      }
    }
    points.emplace_back(std::move(q), std::move(eta));
    for (std::size_t a = 0; a < axes.size(); ++a) {
      if (++idx[a] < counts[a]) break;
      idx[a] = 0;
    }
  }
  return points;
}

double partition_bound(const Mat& lambda) {
  const auto m = static_cast<int>(lambda.rows());
  if (m < 2) return 1.0;
  if (m > 16) throw ParameterError("partition_bound: dimension too large to enumerate");
  double best = 1.0;
  for (unsigned mask = 1; mask + 1 < (1u << m); ++mask) {
    std::vector<int> s, r;
    for (int i = 0; i < m; ++i) ((mask >> i) & 1u ? s : r).push_back(i);
    Mat l11(s.size(), s.size()), l12(s.size(), r.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = 0; j < s.size(); ++j) l11(i, j) = lambda(s[i], s[j]);
      for (std::size_t j = 0; j < r.size(); ++j) l12(i, j) = lambda(s[i], r[j]);
    }
    Mat l(m, r.size());
    l.topRows(s.size()) = -l11.ldlt().solve(l12);
    l.bottomRows(r.size()) = Mat::Identity(r.size(), r.size());
    best = std::max(best, Eigen::JacobiSVD<Mat>(l).singularValues()(0));
  }
  return best;
}

PdCertificate certify_uniform_pd(const SlidingMap& map,
                                 const MechanicalModel& model,
                                 const CertificationBox& box,
                                 std::size_t n_samples) {
  if (static_cast<int>(box.q.size()) != model.dof) {
    throw ParameterError("certification box dimension does not match the model");
  }
  PdCertificate cert;
  cert.epsilon = std::numeric_limits<double>::infinity();
  for (const auto& [q, eta] : box_grid(box, n_samples)) {
    const Mat lam = lambda_matrix(map, model, q, eta);
    const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(lam).eigenvalues()(0);
    ++cert.samples;
    if (lmin < cert.epsilon) {
      cert.epsilon = lmin;
      cert.witness_q = q;
      cert.witness_eta = eta;
    }
    if (lmin > 0.0) cert.a_estimate = std::max(cert.a_estimate, partition_bound(lam));
  }
  if (!(cert.epsilon > 0.0)) {
    Vec witness(cert.witness_q.size() + cert.witness_eta.size());
    witness << cert.witness_q, cert.witness_eta;
    std::ostringstream os;
    os << "Lambda is not uniformly positive definite: lambda_min = "
       << cert.epsilon << " at q = [" << cert.witness_q.transpose()
       << "], eta = [" << cert.witness_eta.transpose() << "]";
    throw AssumptionViolated(os.str(), witness);
  }
  return cert;
}

}  // namespace pbsmc
