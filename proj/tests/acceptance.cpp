// Acceptance checks. Usage: acceptance <c1..c10 | all>
// Prints one PASS/FAIL line per criterion; exits nonzero if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pbsmc/bench_arm.hpp"
#include "pbsmc/controllers.hpp"
#include "pbsmc/potentials.hpp"
#include "pbsmc/robustness.hpp"
#include "pbsmc/sim.hpp"
#include "pbsmc/sliding.hpp"
#include "test_util.hpp"

using namespace pbsmc;
using namespace pbsmc::test;

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const Scenario& paper(const std::string& name) {
  static const std::vector<Scenario> all = paper_scenarios();
  for (const auto& s : all) {
    if (s.name == name) return s;
  }
  throw std::logic_error("no scenario " + name);
}

Scenario waived(Scenario s) {
  s.waive_assumptions = true;
  return s;
}

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

// ---- 1 ---------------------------------------------------------------------

Verdict factorization_identity() {
  const auto start = Clock::now();
  const auto model = arm_model();
  std::mt19937_64 rng(1);
  double worst_rel = 0.0, worst_closed = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec q = random_vec(rng, 2, -kPi, kPi);
    const Mat t = cholesky_factor(model, q);
    const Mat minv = checked_inertia(model, q).inverse();
    worst_rel = std::max(worst_rel, max_abs(t * t.transpose() - minv) / max_abs(minv));
    worst_closed = std::max(worst_closed, max_abs(arm_cholesky_closed_form(ArmParams{}, q) - t));
  }
  const double elapsed = seconds_since(start);
  return {worst_rel < 1e-12 && worst_closed < 1e-12 && elapsed < 1.0,
          "max rel |TT^T - M^-1| = " + fmt(worst_rel) + ", max |T_closed - T| = " +
              fmt(worst_closed) + ", " + fmt(elapsed) + " s"};
}

// ---- 2 ---------------------------------------------------------------------

Verdict lambda_closed_form() {
  const auto start = Clock::now();
  const Scenario& s = paper("paper_norm1");
  const auto& map = s.controller.sliding_map;
  const auto& model = s.controller.model;
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double q2 = -kPi + 2.0 * kPi * i / 200.0;
    const Vec q = v2(0.0, q2);
    worst = std::max(worst, max_abs(lambda_matrix(map, model, q, Vec::Zero(2)) -
                                    reference_lambda_closed_form(q)));
  }
  const auto cert = certify_uniform_pd(map, model, *s.certification, s.certification_samples);
  const double target = 3.0 * std::sqrt(3.0) / std::sqrt(7.0);
  const double rel = std::abs(cert.epsilon - target) / target;
  const double elapsed = seconds_since(start);
  return {worst < 1e-10 && rel < 0.01 && elapsed < 1.0,
          "max |Lambda - closed form| = " + fmt(worst) + ", epsilon = " + fmt(cert.epsilon) +
              " vs " + fmt(target) + " (rel " + fmt(rel) + "), " + fmt(elapsed) + " s"};
}

// ---- 3 ---------------------------------------------------------------------

// Sup over the grid of |q_plant - q_direct| + |p_plant - p_direct|, where the
// direct path integrates the closed-loop field with the same RK4 grid.
double equivalence_gap(const Scenario& scn) {
  Scenario s = waived(scn);
  s.record_stride = 1;
  const Trace plant = simulate(s);
  const auto& spec = s.controller;
  const int m = spec.model.dof;
  const bool track = spec.mode == ControllerMode::PbsmcTrack;

  const auto field = [&](double t, const Vec& x) {
    const Vec a = x.head(m), b = x.tail(m);
    PhaseRate r;
    switch (spec.mode) {
      case ControllerMode::Kpes: r = kpes_closed_loop(spec, a, b); break;
      case ControllerMode::PbsmcStabilize: r = pbsmc_closed_loop(spec, a, b); break;
      case ControllerMode::PbsmcTrack: r = tracking_closed_loop(spec, t, a, b); break;
    }
    return stack(r.q_dot, r.second);
  };
  const auto to_plant = [&](double t, const Vec& x, Vec& q, Vec& p) {
    if (track) {
      q = x.head(m) + spec.trajectory->q_d(t);
      const Vec eta = x.tail(m) + desired_momentum(spec, q, t).eta_d;
      p = eta_to_momentum(spec.model, q, eta);
    } else {
      q = x.head(m);
      p = eta_to_momentum(spec.model, q, x.tail(m));
    }
  };

  const Vec eta0 = momentum_to_eta(spec.model, s.q0, s.p0);
  const ErrorState e0 = error_state(spec, 0.0, s.q0, eta0);
  Vec x = stack(e0.q_err, e0.eta_err);
  double gap = 0.0;
  for (std::size_t k = 0; k < plant.samples.size(); ++k) {
    const double t = static_cast<double>(k) * s.h;
    Vec q, p;
    to_plant(t, x, q, p);
    const auto& smp = plant.samples[k];
    gap = std::max(gap, (smp.q - q).norm() + (smp.p - p).norm());
    x = rk4_step(field, t, x, s.h);
  }
  return gap;
}

Verdict closed_loop_equivalence() {
  const auto start = Clock::now();
  // Lipschitz-gradient potential: near sigma = 0 the gradient of the
  // unsmoothed r = 1.3 law is only Hoelder, and RK4 truncation then differs
  // between the (q, p) and (q, eta) coordinates by more than the tolerance.
  const Potential pot = Potential::norm_power(2.0, 1.3, 2.0, 0.05);
  std::vector<std::pair<std::string, double>> gaps;
  for (auto mode : {ControllerMode::Kpes, ControllerMode::PbsmcStabilize}) {
    Scenario s;
    s.name = to_string(mode);
    s.controller.mode = mode;
    s.controller.model = arm_model();
    s.controller.sliding_map = SlidingMap::linear(arm_sliding_gain(), Mat::Identity(2, 2));
    s.controller.potential = pot;
    s.controller.damping_d = scaled_identity_damping(2, 1.0);
    s.q0 = v2(0.5, -0.3);
    s.p0 = v2(0.2, 0.1);
    s.t_final = 1.0;
    s.h = 1e-4;
    gaps.emplace_back(s.name, equivalence_gap(s));
  }
  Scenario track = paper("paper_norm2_r1.3");
  track.t_final = 1.0;
  track.controller.potential = pot;
  gaps.emplace_back(to_string(track.controller.mode), equivalence_gap(track));

  const double elapsed = seconds_since(start);
  bool ok = elapsed < 30.0;
  std::string detail;
  for (const auto& [name, g] : gaps) {
    ok = ok && g < 1e-6;
    detail += name + " sup gap = " + fmt(g) + ", ";
  }
  return {ok, detail + fmt(elapsed) + " s"};
}

// ---- 4 ---------------------------------------------------------------------

Verdict lyapunov_monotone() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"paper_norm2_r1.3", "paper_norm1"}) {
    const auto start = Clock::now();
    const Trace tr = simulate(paper(name));
    const double elapsed = seconds_since(start);
    const double rise = tr.stats.max_relative_h_increase;
    ok = ok && rise <= 1e-7 && elapsed < 60.0;
    detail += std::string(name) + ": max per-step rise / max(1,H) = " + fmt(rise) + " (" +
              fmt(elapsed) + " s); ";
  }
  return {ok, detail};
}

// ---- 5 ---------------------------------------------------------------------

double relative_gap(const Metrics& m) {
  const auto& c = m.component_entry_times;
  if (c.size() != 2 || !c[0] || !c[1]) return std::numeric_limits<double>::infinity();
  return std::abs(*c[0] - *c[1]) / std::max(*c[0], *c[1]);
}

Verdict finite_time_entry() {
  const Metrics l1 = metrics(simulate(paper("paper_norm1")));
  const Metrics l2 = metrics(simulate(paper("paper_norm2_r1.3")));
  const bool entry_l1 = l1.sliding_entry_time && *l1.sliding_entry_time >= 0.8 &&
                        *l1.sliding_entry_time <= 1.3;
  const bool entry_l2 = l2.sliding_entry_time && *l2.sliding_entry_time < 2.0;
  const double gap_l1 = relative_gap(l1), gap_l2 = relative_gap(l2);
  const auto show = [](const std::optional<double>& t) { return t ? fmt(*t) : std::string("none"); };
  return {entry_l1 && entry_l2 && gap_l2 < 0.1 && gap_l1 > 0.1,
          "l1 entry = " + show(l1.sliding_entry_time) + " (window [0.8, 1.3]: " +
              (entry_l1 ? "in" : "out") + "), norm2 entry = " + show(l2.sliding_entry_time) +
              ", component gap norm2 = " + fmt(gap_l2) + " (< 0.1), l1 = " + fmt(gap_l1) +
              " (> 0.1)"};
}

// ---- 6 ---------------------------------------------------------------------

Verdict chattering_ordering() {
  const Trace r1 = simulate(paper("paper_norm1"));
  const Trace r13 = simulate(paper("paper_norm2_r1.3"));
  Scenario smooth = paper("paper_norm1");
  smooth.controller.potential.smoothing_eps = 0.05;
  const Trace r1s = simulate(smooth);
  const double ratio = r1.stats.input_total_variation / r13.stats.input_total_variation;
  const double drop = r1.stats.input_total_variation / r1s.stats.input_total_variation;
  const double rise = r1s.stats.max_relative_h_increase;
  return {ratio >= 3.0 && drop >= 3.0 && rise <= 1e-7,
          "TV r=1 / r=1.3 = " + fmt(r1.stats.input_total_variation) + " / " +
              fmt(r13.stats.input_total_variation) + " = " + fmt(ratio) +
              "; TV r=1 / smoothed = " + fmt(drop) + "; smoothed max rise = " + fmt(rise)};
}

// ---- 7 ---------------------------------------------------------------------

Verdict gradient_and_constants() {
  const std::vector<Potential> pots = {Potential::norm_power(2, 1.3, 2), Potential::norm_power(2, 1, 1),
                                       Potential::l1_quadratic(1, 2), Potential::norm_power(1.5, 1.6, 3)};
  std::mt19937_64 rng(7);
  double worst = 0.0;
  int violations = 0;
  std::uniform_real_distribution<double> decade(-4, 2);
  for (const auto& pot : pots) {
    for (int i = 0; i < 100; ++i) {
      Vec s = random_vec(rng, 2, -2, 2);
      for (int j = 0; j < 2; ++j) {
        if (std::abs(s(j)) < 1e-3) s(j) = 1e-3;
      }
      const Vec g = gradient(pot, s);
      const Vec fd = fd_gradient([&](const Vec& x) { return value(pot, x); }, s, 1e-7);
      worst = std::max(worst, (g - fd).norm() / std::max(1.0, g.norm()));
    }
    const auto a = gradient_domination_constants(pot, 2);
    for (int i = 0; i < 10000; ++i) {
      Vec s = random_vec(rng, 2, -1, 1);
      if (s.norm() == 0.0) continue;
      s *= std::pow(10.0, decade(rng)) / s.norm();
      if (gradient(pot, s).norm() < a.c * std::pow(value(pot, s), a.rho)) ++violations;
    }
  }
  return {worst < 1e-6 && violations == 0,
          "max rel gradient error = " + fmt(worst) + ", (c, rho) violations = " +
              std::to_string(violations) + " / " + std::to_string(10000 * pots.size())};
}

// ---- 8 ---------------------------------------------------------------------

Verdict robustness() {
  bool ok = true;
  std::string detail;
  {
    const auto start = Clock::now();
    const Scenario& s = paper("robust_matched");
    const Trace tr = simulate(s);
    const auto& spec = s.controller;
    double min_margin = std::numeric_limits<double>::infinity();
    double max_b2 = -std::numeric_limits<double>::infinity();
    const double tol = kSlidingTol * std::sqrt(2.0);
    for (const auto& smp : tr.samples) {
      const SetGeometry geo = set_geometry(spec.model, spec.sliding_map, smp.q, smp.q_err);
      min_margin = std::min(min_margin, reaching_margin(geo, spec.sliding_map, spec.potential, smp.q_err,
                                                        smp.eta_err, smp.d_um, smp.d_m));
      if (tr.sliding_entry && smp.t >= *tr.sliding_entry) {
        max_b2 = std::max(max_b2, b2_residual(geo, spec.sliding_map, smp.q_err, smp.eta_err, smp.d_um, tol));
      }
    }
    const double elapsed = seconds_since(start);
    ok = ok && min_margin > 0.0 && tr.sliding_entry && max_b2 <= 0.0 && elapsed < 60.0;
    detail += "matched: min margin = " + fmt(min_margin) + ", entry = " +
              (tr.sliding_entry ? fmt(*tr.sliding_entry) : std::string("none")) +
              ", max post-entry b2 = " + fmt(max_b2) + " (" + fmt(elapsed) + " s); ";
  }
  {
    const auto start = Clock::now();
    const Scenario& s = paper("robust_matched_unmatched");
    const Trace tr = simulate(s);
    const auto& spec = s.controller;
    const double settle = 2.0;
    double max_b1 = -std::numeric_limits<double>::infinity();
    for (const auto& smp : tr.samples) {
      if (smp.t < settle) continue;
      const SetGeometry geo = set_geometry(spec.model, spec.sliding_map, smp.q, smp.q_err);
      max_b1 = std::max(max_b1, b1_residual(geo, spec.sliding_map, spec.potential, smp.q_err, smp.eta_err,
                                            stack_disturbance(smp.d_um, smp.d_m)));
    }
    const double elapsed = seconds_since(start);
    ok = ok && max_b1 <= 0.0 && elapsed < 60.0;
    detail += "matched+unmatched: max b1 for t >= " + fmt(settle) + " s = " + fmt(max_b1) + " (" +
              fmt(elapsed) + " s)";
  }
  return {ok, detail};
}

// ---- 9 ---------------------------------------------------------------------

Verdict conservation_and_order() {
  Scenario cons;
  cons.name = "conservative";
  cons.controller.mode = ControllerMode::PbsmcStabilize;
  cons.controller.model = undamped(arm_model());
  cons.controller.sliding_map = SlidingMap::linear(arm_sliding_gain(), Mat::Identity(2, 2));
  cons.controller.potential = Potential::norm_power(2, 1.3, 2);
  cons.open_loop = true;
  cons.waive_assumptions = true;
  cons.q0 = v2(0.2, 0.5);
  cons.p0 = v2(0.8, -0.3);
  cons.t_final = 1.0;
  cons.h = 1e-4;
  const Trace tr = simulate(cons);
  double drift = 0.0;
  for (const auto& smp : tr.samples) drift = std::max(drift, std::abs(smp.H - tr.samples.front().H));

  // Quadratic potential: the closed loop is smooth, so RK4 shows its order.
  Scenario smooth = cons;
  smooth.controller.model = arm_model();
  smooth.controller.potential = Potential::norm_power(1, 2, 2);
  smooth.open_loop = false;
  smooth.p0 = v2(0.2, 0.1);
  std::vector<Vec> finals;
  for (double h : {0.02, 0.01, 0.005}) {
    smooth.h = h;
    smooth.record_stride = static_cast<int>(std::lround(smooth.t_final / h));
    const Trace tr = simulate(smooth);
    const auto& last = tr.samples.back();
    finals.push_back(stack(last.q, last.p));
  }
  const double order = std::log2((finals[0] - finals[1]).norm() / (finals[1] - finals[2]).norm());
  return {drift < 1e-8 && order > 3.5 && order < 4.5,
          "H0 drift over 1 s = " + fmt(drift) + ", observed RK4 order = " + fmt(order)};
}

// ---- 10 --------------------------------------------------------------------

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "pbsmc_acceptance_determinism";
  fs::remove_all(root);
  const auto run = [&](const std::string& sub, int workers) {
    const std::string cmd = std::string("\"") + PBSMC_CLI_PATH + "\" run paper --workers " +
                            std::to_string(workers) + " --out \"" + (root / sub).string() +
                            "\" > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const int a = run("a", 1), b = run("b", 4);
  int compared = 0, identical = 0;
  for (const auto& s : paper_scenarios()) {
    const std::string file = s.name + ".trace.csv";
    const std::string ca = read(root / "a" / file), cb = read(root / "b" / file);
    ++compared;
    if (!ca.empty() && ca == cb) ++identical;
  }
  return {a == 0 && b == 0 && compared == 4 && identical == 4,
          "exit codes " + std::to_string(a) + "/" + std::to_string(b) + ", identical CSVs " +
              std::to_string(identical) + "/" + std::to_string(compared)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::pair<std::string, std::function<Verdict()>>>> checks = {
      {"c1", {"factorization identity", factorization_identity}},
      {"c2", {"Lambda closed form and epsilon", lambda_closed_form}},
      {"c3", {"closed-loop equivalence", closed_loop_equivalence}},
      {"c4", {"Lyapunov monotonicity", lyapunov_monotone}},
      {"c5", {"finite-time sliding entry", finite_time_entry}},
      {"c6", {"chattering ordering", chattering_ordering}},
      {"c7", {"gradients and gradient-domination constants", gradient_and_constants}},
      {"c8", {"robustness sets", robustness}},
      {"c9", {"conservation and RK4 order", conservation_and_order}},
      {"c10", {"determinism", determinism}},
  };
  const std::string which = argc > 1 ? argv[1] : "all";
  bool all_pass = true, matched = false;
  for (const auto& [id, check] : checks) {
    if (which != "all" && which != id) continue;
    matched = true;
    Verdict v;
    try {
      v = check.second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s %s: %s\n", v.pass ? "PASS" : "FAIL", id.c_str(), check.first.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && v.pass;
  }
  if (!matched) {
    std::fprintf(stderr, "unknown criterion '%s'\n", which.c_str());
    return 2;
  }
  return all_pass ? 0 : 1;
}
