#include "pbsmc/sim.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "pbsmc/errors.hpp"

namespace pbsmc {

namespace {

struct Deriv {
  Vec dq;
  Vec dp;
};

class Stepper {
 public:
  explicit Stepper(const Scenario& scn) : scn_(scn), dof_(scn.controller.model.dof) {}

  Vec control(double t, const Vec& q, const Vec& p) const {
    if (scn_.open_loop) return Vec::Zero(dof_);
    const Vec eta = momentum_to_eta(scn_.controller.model, q, p);
    return feedback(scn_.controller, t, q, eta);
  }

  Vec d_um(double t) const {
    if (!scn_.disturbance || !scn_.disturbance->d_um) return Vec::Zero(dof_);
    return scn_.disturbance->d_um(t);
  }

  Vec d_m(double t) const {
    if (!scn_.disturbance || !scn_.disturbance->d_m) return Vec::Zero(dof_);
    return scn_.disturbance->d_m(t);
  }

  Deriv rhs(double t, const Vec& q, const Vec& p, const Vec& u) const {
    const PhaseRate r = disturbed_plant_dynamics(scn_.controller.model, q, p, u,
                                                 d_um(t), d_m(t));
    return {r.q_dot, r.second};
  }

  Deriv rhs(double t, const Vec& q, const Vec& p) const {
    return rhs(t, q, p, control(t, q, p));
  }

  double energy(double t, const Vec& q, const Vec& p) const {
    if (scn_.open_loop) return hamiltonian0(scn_.controller.model, q, p);
    const Vec eta = momentum_to_eta(scn_.controller.model, q, p);
    return lyapunov(scn_.controller, t, q, eta);
  }

  // Advances (q, p) by one step; u0 is the feedback already evaluated at (t, q, p).
  void step(double t, double h, Vec& q, Vec& p, const Vec& u0) const {
    if (scn_.integrator == Integrator::SemiImplicitEuler) {
      const Deriv k1 = rhs(t, q, p, u0);
      p += h * k1.dp;
      const Mat m = checked_inertia(scn_.controller.model, q);
      q += h * (Eigen::LLT<Mat>(m).solve(p) + d_um(t));
      return;
    }
    const Deriv k1 = rhs(t, q, p, u0);
    const Deriv k2 = rhs(t + 0.5 * h, q + 0.5 * h * k1.dq, p + 0.5 * h * k1.dp);
    const Deriv k3 = rhs(t + 0.5 * h, q + 0.5 * h * k2.dq, p + 0.5 * h * k2.dp);
    const Deriv k4 = rhs(t + h, q + h * k3.dq, p + h * k3.dp);
    q += (h / 6.0) * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    p += (h / 6.0) * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
  }

  TraceSample sample(double t, const Vec& q, const Vec& p, const Vec& u,
                     double energy) const {
    const ControllerSpec& spec = scn_.controller;
    TraceSample s;
    s.t = t;
    s.q = q;
    s.p = p;
    s.eta = momentum_to_eta(spec.model, q, p);
    const ErrorState err = error_state(spec, t, q, s.eta);
    s.q_err = err.q_err;
    s.eta_err = err.eta_err;
    s.sigma = sigma(spec.sliding_map, err.q_err, err.eta_err);
    s.u = u;
    s.H = energy;
    s.U = value(spec.potential, s.sigma);
    s.d_um = d_um(t);
    s.d_m = d_m(t);
    return s;
  }

  void check_bounds(double t) const {
    if (!scn_.disturbance) return;
    const auto over = [](double norm, double bound) {
      return norm > bound * (1.0 + 1e-12) + 1e-300;
    };
    const double n_um = d_um(t).norm();
    const double n_m = d_m(t).norm();
    if (over(n_um, scn_.disturbance->bound_um) || over(n_m, scn_.disturbance->bound_m)) {
      std::ostringstream os;
      os << "scenario '" << scn_.name << "': disturbance exceeds its declared bound at t = "
         << t << " (|d_um| = " << n_um << ", |d_m| = " << n_m << ")";
      throw ParameterError(os.str());
    }
  }

 private:
  const Scenario& scn_;
  int dof_;
};

bool finite(const Vec& v) { return v.allFinite(); }

std::optional<double> scan_window(const Trace& trace, double dwell,
                                  const std::function<bool(const TraceSample&)>& inside) {
  const auto& s = trace.samples;
  const double slack = 1e-9 * std::max(1.0, dwell);
  std::size_t start = 0;
  bool running = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!inside(s[i])) {
      running = false;
      continue;
    }
    if (!running) {
      start = i;
      running = true;
    }
    if (s[i].t - s[start].t >= dwell - slack) return s[start].t;
  }
  return std::nullopt;
}

void check_detector_args(double tol, double dwell) {
  if (!(tol > 0.0) || !(dwell > 0.0)) {
    throw ParameterError("detect_sliding: tol and dwell must be positive");
  }
}

}  // namespace

std::string to_string(Integrator integrator) {
  switch (integrator) {
    case Integrator::Rk4: return "rk4";
    case Integrator::SemiImplicitEuler: return "semi_implicit_euler";
  }
  return "unknown";
}

Integrator integrator_from_string(const std::string& name) {
  if (name == "rk4") return Integrator::Rk4;
  if (name == "semi_implicit_euler") return Integrator::SemiImplicitEuler;
  throw ParameterError("unknown integrator '" + name + "'");
}

void validate(const Scenario& scn) {
  const int m = scn.controller.model.dof;
  if (!(scn.h > 0.0) || !std::isfinite(scn.h)) throw ParameterError("step h must be positive");
  if (!(scn.t_final > 0.0) || !std::isfinite(scn.t_final)) {
    throw ParameterError("t_final must be positive");
  }
  if (scn.record_stride < 1) throw ParameterError("record_stride must be >= 1");
  if (scn.q0.size() != m || scn.p0.size() != m) {
    throw ParameterError("scenario '" + scn.name + "': initial state has the wrong dimension");
  }
  if (!scn.open_loop) validate(scn.controller);
}

Trace simulate(const Scenario& scn) {
  validate(scn);
  const ControllerSpec& spec = scn.controller;
  if (scn.certification && !scn.waive_assumptions && !scn.open_loop) {
    certify_uniform_pd(spec.sliding_map, spec.model, *scn.certification,
                       scn.certification_samples);
    gradient_domination_constants(spec.potential, spec.model.dof);
  }

  const Stepper stepper(scn);
  const auto steps = static_cast<std::size_t>(std::floor(scn.t_final / scn.h + 1e-9));
  const auto stride = static_cast<std::size_t>(scn.record_stride);

  Trace trace;
  trace.scenario = scn.name;
  trace.dof = spec.model.dof;
  trace.samples.reserve(steps / stride + 1);

  Vec q = scn.q0;
  Vec p = scn.p0;
  double t = 0.0;
  Vec u = stepper.control(t, q, p);
  double energy = stepper.energy(t, q, p);
  StepStats& st = trace.stats;
  st.peak_input_norm = u.norm();

  for (std::size_t k = 0;; ++k) {
    stepper.check_bounds(t);
    if (k % stride == 0) trace.samples.push_back(stepper.sample(t, q, p, u, energy));
    if (k == steps) break;

    try {
      stepper.step(t, scn.h, q, p, u);
    } catch (const ModelInvalid& e) {
      // A stage that leaves the model's domain after a valid start is a blow-up.
      if (k == 0) throw;
      throw DivergenceError(std::string("simulation diverged: ") + e.what(), t);
    }
    if (!finite(q) || !finite(p)) {
      std::ostringstream os;
      os << "scenario '" << scn.name << "': state became non-finite after t = " << t;
      throw DivergenceError(os.str(), t);
    }
    const double t_next = static_cast<double>(k + 1) * scn.h;
    const Vec u_next = stepper.control(t_next, q, p);
    const double energy_next = stepper.energy(t_next, q, p);
    if (!finite(u_next) || !std::isfinite(energy_next)) {
      std::ostringstream os;
      os << "scenario '" << scn.name << "': feedback became non-finite after t = " << t;
      throw DivergenceError(os.str(), t);
    }

    ++st.steps;
    st.input_total_variation += (u_next - u).lpNorm<1>();
    st.peak_input_norm = std::max(st.peak_input_norm, u_next.norm());
    const double rise = energy_next - energy;
    st.max_h_increase = std::max(st.max_h_increase, rise);
    st.max_relative_h_increase =
        std::max(st.max_relative_h_increase, rise / std::max(1.0, std::abs(energy)));

    t = t_next;
    u = u_next;
    energy = energy_next;
  }

  trace.sliding_entry = detect_sliding(trace, kSlidingTol, kSlidingDwell);
  return trace;
}

std::optional<double> detect_sliding(const Trace& trace, double tol, double dwell) {
  check_detector_args(tol, dwell);
  return scan_window(trace, dwell, [tol](const TraceSample& s) {
    return s.sigma.size() == 0 || s.sigma.lpNorm<Eigen::Infinity>() <= tol;
  });
}

std::optional<double> detect_sliding_component(const Trace& trace, int i,
                                               double tol, double dwell) {
  check_detector_args(tol, dwell);
  if (i < 0 || i >= trace.dof) throw ParameterError("detect_sliding: component out of range");
  return scan_window(trace, dwell, [tol, i](const TraceSample& s) {
    return std::abs(s.sigma(i)) <= tol;
  });
}

Metrics metrics(const Trace& trace) {
  Metrics m;
  m.sliding_entry_time = detect_sliding(trace, kSlidingTol, kSlidingDwell);
  for (int i = 0; i < trace.dof; ++i) {
    m.component_entry_times.push_back(
        detect_sliding_component(trace, i, kSlidingTol, kSlidingDwell));
  }
  m.max_h_increase = trace.stats.max_h_increase;
  m.max_relative_h_increase = trace.stats.max_relative_h_increase;
  m.input_total_variation = trace.stats.input_total_variation;
  m.peak_input_norm = trace.stats.peak_input_norm;
  m.samples = trace.samples.size();
  m.steps = trace.stats.steps;
  if (!trace.samples.empty()) {
    const TraceSample& last = trace.samples.back();
    m.terminal_q_err_norm = last.q_err.norm();
    m.terminal_sigma_norm = last.sigma.norm();
  }
  return m;
}

void write_csv(const Trace& trace, std::ostream& os) {
  const int m = trace.dof;
  os << 't';
  for (const char* group : {"q", "p", "eta", "sigma", "u"}) {
    for (int i = 1; i <= m; ++i) os << ',' << group << i;
  }
  os << ",H,U\n";
  char buf[32];
  const auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf;
  };
  for (const TraceSample& s : trace.samples) {
    put(s.t);
    for (const Vec* v : {&s.q, &s.p, &s.eta, &s.sigma, &s.u}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) {
        os << ',';
        put((*v)(i));
      }
    }
    os << ',';
    put(s.H);
    os << ',';
    put(s.U);
    os << '\n';
  }
}

void write_metrics(const Metrics& m, std::ostream& os) {
  using nlohmann::ordered_json;
  const auto opt = [](const std::optional<double>& x) -> ordered_json {
    return x ? ordered_json(*x) : ordered_json(nullptr);
  };
  ordered_json j;
  j["sliding_entry_time"] = opt(m.sliding_entry_time);
  ordered_json comps = ordered_json::array();
  for (const auto& c : m.component_entry_times) comps.push_back(opt(c));
  j["component_entry_times"] = comps;
  j["max_h_increase"] = m.max_h_increase;
  j["max_relative_h_increase"] = m.max_relative_h_increase;
  j["terminal_q_err_norm"] = m.terminal_q_err_norm;
  j["terminal_sigma_norm"] = m.terminal_sigma_norm;
  j["input_total_variation"] = m.input_total_variation;
  j["peak_input_norm"] = m.peak_input_norm;
  j["samples"] = m.samples;
  j["steps"] = m.steps;
  os << j.dump(2) << '\n';
}

}  // namespace pbsmc
