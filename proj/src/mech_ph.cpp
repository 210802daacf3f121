#include "pbsmc/mech_ph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pbsmc/errors.hpp"

namespace pbsmc {

namespace {

void check_dim(const MechanicalModel& model, const Vec& v, const char* what) {
  if (v.size() != model.dof) {
    std::ostringstream os;
    os << "model '" << model.name << "': " << what << " has dimension "
       << v.size() << ", expected " << model.dof;
    throw ModelInvalid(os.str());
  }
}

double fd_step_for(const MechanicalModel& model, double coordinate) {
  return model.fd_step * std::max(1.0, std::abs(coordinate));
}

Mat inverse_spd(const Mat& m) {
  Eigen::LLT<Mat> llt(m);
  Mat inv = llt.solve(Mat::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

// Lower-triangular part of X with the diagonal halved.
Mat lower_half(const Mat& x) {
  Mat out = x.triangularView<Eigen::StrictlyLower>();
  out.diagonal() = 0.5 * x.diagonal();
  return out;
}

}  // namespace

MechanicalModel constant_model(const Mat& inertia, const Mat& damping0,
                               const Mat& input_map0, std::string name) {
  MechanicalModel model;
  model.name = std::move(name);
  model.dof = static_cast<int>(inertia.rows());
  model.inertia = [inertia](const Vec&) { return inertia; };
  model.damping0 = [damping0](const Vec&, const Vec&) { return damping0; };
  model.input_map0 = [input_map0](const Vec&) { return input_map0; };
  const int m = model.dof;
  model.d_inertia = [m](const Vec&) {
    return std::vector<Mat>(static_cast<std::size_t>(m), Mat::Zero(m, m));
  };
  return model;
}

Mat checked_inertia(const MechanicalModel& model, const Vec& q) {
  check_dim(model, q, "q");
  Mat m = model.inertia(q);
  if (m.rows() != model.dof || m.cols() != model.dof) {
    throw ModelInvalid("model '" + model.name + "': inertia has wrong shape");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ModelInvalid("model '" + model.name + "': inertia is not symmetric");
  }
  m = 0.5 * (m + m.transpose());
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) {
    const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(m).eigenvalues()(0);
    std::ostringstream os;
    os << "model '" << model.name
       << "': inertia is not positive definite (min eigenvalue " << lmin
       << ")";
    throw FactorizationError(os.str(), lmin);
  }
  return m;
}

double hamiltonian0(const MechanicalModel& model, const Vec& q, const Vec& p) {
  check_dim(model, p, "p");
  const Mat m = checked_inertia(model, q);
  return 0.5 * p.dot(Eigen::LLT<Mat>(m).solve(p));
}

Mat cholesky_factor(const MechanicalModel& model, const Vec& q) {
  const Mat m_inv = inverse_spd(checked_inertia(model, q));
  Eigen::LLT<Mat> llt(m_inv);
  if (llt.info() != Eigen::Success) {
    const double lmin =
        Eigen::SelfAdjointEigenSolver<Mat>(m_inv).eigenvalues()(0);
    throw FactorizationError(
        "model '" + model.name + "': M^{-1} lost positive definiteness", lmin);
  }
  return llt.matrixL();
}

std::vector<Mat> d_cholesky_fd(const MechanicalModel& model, const Vec& q) {
  check_dim(model, q, "q");
  std::vector<Mat> slices;
  slices.reserve(static_cast<std::size_t>(model.dof));
  for (int k = 0; k < model.dof; ++k) {
    const double h = fd_step_for(model, q(k));
    if (!(h > 0.0) || q(k) + h == q(k)) {
      throw ModelInvalid("model '" + model.name +
                         "': finite-difference step underflow");
    }
    Vec qp = q, qm = q;
    qp(k) += h;
    qm(k) -= h;
    slices.push_back((cholesky_factor(model, qp) - cholesky_factor(model, qm)) /
                     (2.0 * h));
  }
  return slices;
}

MomentumGeometry momentum_geometry(const MechanicalModel& model,
                                   const Vec& q) {
  MomentumGeometry geo;
  if (!model.d_inertia) {
    geo.t = cholesky_factor(model, q);
    geo.dt = d_cholesky_fd(model, q);
    return geo;
  }
  const Mat m_inv = inverse_spd(checked_inertia(model, q));
  Eigen::LLT<Mat> llt(m_inv);
  if (llt.info() != Eigen::Success) {
    const double lmin =
        Eigen::SelfAdjointEigenSolver<Mat>(m_inv).eigenvalues()(0);
    throw FactorizationError(
        "model '" + model.name + "': M^{-1} lost positive definiteness", lmin);
  }
  geo.t = llt.matrixL();
  const auto dm = model.d_inertia(q);
  if (static_cast<int>(dm.size()) != model.dof) {
    throw ModelInvalid("model '" + model.name +
                       "': d_inertia returned the wrong number of slices");
  }
  // d(T T^T) = dM^{-1} with dT lower triangular: dT = T * lower_half(X),
  // X = T^{-1} dM^{-1} T^{-T}.
  geo.dt.reserve(dm.size());
  const auto tri = geo.t.triangularView<Eigen::Lower>();
  for (const Mat& dmk : dm) {
    const Mat dm_inv = -m_inv * dmk * m_inv;
    Mat x = tri.solve(dm_inv);
    x = tri.solve(x.transpose()).transpose();
    geo.dt.push_back(geo.t * lower_half(0.5 * (x + x.transpose())));
  }
  return geo;
}

std::vector<Mat> d_cholesky(const MechanicalModel& model, const Vec& q) {
  return momentum_geometry(model, q).dt;
}

namespace {

// A = sum_k (dT_k)^T p e_k^T T, with p = T^{-T} eta.
Mat gyroscopic_a(const Mat& t, const std::vector<Mat>& dt, const Vec& p) {
  const auto m = t.rows();
  Mat a = Mat::Zero(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    a.noalias() += (dt[static_cast<std::size_t>(k)].transpose() * p) * t.row(k);
  }
  return a;
}

}  // namespace

Mat gyroscopic_term(const MechanicalModel& model, const Vec& q,
                    const Vec& eta) {
  check_dim(model, eta, "eta");
  const MomentumGeometry geo = momentum_geometry(model, q);
  const Vec p = geo.t.transpose().triangularView<Eigen::Upper>().solve(eta);
  const Mat a = gyroscopic_a(geo.t, geo.dt, p);
  return a.transpose() - a;
}

Mat transformed_damping(const MechanicalModel& model,
                        const MomentumGeometry& geo, const Vec& q,
                        const Vec& eta) {
  check_dim(model, eta, "eta");
  const Vec p = geo.t.transpose().triangularView<Eigen::Upper>().solve(eta);
  const Mat a = gyroscopic_a(geo.t, geo.dt, p);
  return geo.t.transpose() * model.damping0(q, p) * geo.t + (a.transpose() - a);
}

Mat transformed_damping(const MechanicalModel& model, const Vec& q,
                        const Vec& eta) {
  return transformed_damping(model, momentum_geometry(model, q), q, eta);
}

Mat transformed_input_map(const MechanicalModel& model, const Vec& q) {
  return cholesky_factor(model, q).transpose() * model.input_map0(q);
}

Vec grad_q_hamiltonian0(const MechanicalModel& model, const Vec& q,
                        const Vec& p) {
  check_dim(model, p, "p");
  Vec grad(model.dof);
  if (model.d_inertia) {
    const Mat m = checked_inertia(model, q);
    const Vec v = Eigen::LLT<Mat>(m).solve(p);
    const auto dm = model.d_inertia(q);
    for (int k = 0; k < model.dof; ++k) {
      grad(k) = -0.5 * v.dot(dm[static_cast<std::size_t>(k)] * v);
    }
    return grad;
  }
  for (int k = 0; k < model.dof; ++k) {
    const double h = fd_step_for(model, q(k));
    Vec qp = q, qm = q;
    qp(k) += h;
    qm(k) -= h;
    grad(k) = (hamiltonian0(model, qp, p) - hamiltonian0(model, qm, p)) /
              (2.0 * h);
  }
  return grad;
}

PhaseRate plant_dynamics(const MechanicalModel& model, const Vec& q,
                         const Vec& p, const Vec& u) {
  check_dim(model, p, "p");
  check_dim(model, u, "u");
  const Mat m = checked_inertia(model, q);
  const Vec v = Eigen::LLT<Mat>(m).solve(p);
  PhaseRate rate;
  rate.q_dot = v;
  rate.second = -grad_q_hamiltonian0(model, q, p) - model.damping0(q, p) * v +
                model.input_map0(q) * u;
  return rate;
}

PhaseRate transformed_dynamics(const MechanicalModel& model, const Vec& q,
                               const Vec& eta, const Vec& u) {
  check_dim(model, u, "u");
  const MomentumGeometry geo = momentum_geometry(model, q);
  PhaseRate rate;
  rate.q_dot = geo.t * eta;
  rate.second = -transformed_damping(model, geo, q, eta) * eta +
                geo.t.transpose() * model.input_map0(q) * u;
  return rate;
}

Vec momentum_to_eta(const MechanicalModel& model, const Vec& q, const Vec& p) {
  check_dim(model, p, "p");
  return cholesky_factor(model, q).transpose() * p;
}

Vec eta_to_momentum(const MechanicalModel& model, const Vec& q,
                    const Vec& eta) {
  check_dim(model, eta, "eta");
  const Mat t = cholesky_factor(model, q);
  return t.transpose().triangularView<Eigen::Upper>().solve(eta);
}

}  // namespace pbsmc
