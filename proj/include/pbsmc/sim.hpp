#pragma once
// Fixed-step simulation of the plant under one of the feedback laws, with a
// recorded trace, sliding-entry detection and summary metrics.

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pbsmc/controllers.hpp"
#include "pbsmc/robustness.hpp"
#include "pbsmc/sliding.hpp"

namespace pbsmc {

enum class Integrator { Rk4, SemiImplicitEuler };

std::string to_string(Integrator integrator);
Integrator integrator_from_string(const std::string& name);

struct Scenario {
  std::string name = "scenario";
  ControllerSpec controller;
  std::optional<DisturbanceProfile> disturbance;
  Vec q0;
  Vec p0;
  double t_final = 10.0;
  double h = 1e-4;
  Integrator integrator = Integrator::Rk4;
  int record_stride = 1;
  /// u = 0 throughout; the H channel then records H0.
  bool open_loop = false;
  /// Checked before integrating unless waive_assumptions is set.
  std::optional<CertificationBox> certification;
  std::size_t certification_samples = 2000;
  bool waive_assumptions = false;
};

/// Throws ParameterError on h <= 0, t_final <= 0, stride < 1 or bad sizes.
void validate(const Scenario& scn);

struct TraceSample {
  double t = 0.0;
  Vec q, p, eta, sigma, u;
  double H = 0.0;  ///< H_smc, H~_smc or H_d for closed loops; H0 when open loop
  double U = 0.0;
  Vec q_err, eta_err;
  Vec d_um, d_m;
};

/// Statistics accumulated at every integration step, independent of the
/// record stride.
struct StepStats {
  std::size_t steps = 0;
  double input_total_variation = 0.0;  ///< sum_k ||u_{k+1} - u_k||_1
  double peak_input_norm = 0.0;
  double max_h_increase = 0.0;          ///< max_k (H_{k+1} - H_k), floored at 0
  double max_relative_h_increase = 0.0; ///< max_k (H_{k+1} - H_k) / max(1, H_k)
};

struct Trace {
  std::string scenario;
  int dof = 0;
  std::vector<TraceSample> samples;
  StepStats stats;
  std::optional<double> sliding_entry;  ///< detect_sliding(0.05, 0.5)
};

/// Deterministic fixed-step integration. Throws DivergenceError when the
/// state stops being finite and AssumptionViolated when an unwaived
/// certification fails.
Trace simulate(const Scenario& scn);

constexpr double kSlidingTol = 0.05;
constexpr double kSlidingDwell = 0.5;

/// Earliest recorded t* with ||sigma(t)||_inf <= tol for every sample in
/// [t*, t* + dwell].
std::optional<double> detect_sliding(const Trace& trace, double tol,
                                     double dwell);

/// Same test on the single component sigma_i.
std::optional<double> detect_sliding_component(const Trace& trace, int i,
                                               double tol, double dwell);

struct Metrics {
  std::optional<double> sliding_entry_time;
  std::vector<std::optional<double>> component_entry_times;
  double max_h_increase = 0.0;
  double max_relative_h_increase = 0.0;
  double terminal_q_err_norm = 0.0;
  double terminal_sigma_norm = 0.0;
  double input_total_variation = 0.0;
  double peak_input_norm = 0.0;
  std::size_t samples = 0;
  std::size_t steps = 0;
};

Metrics metrics(const Trace& trace);

/// Header `t,q1..qm,p1..pm,eta1..etam,sigma1..sigmam,u1..um,H,U`, values at
/// 17 significant digits.
void write_csv(const Trace& trace, std::ostream& os);

/// JSON object, one key per metric; absent entry times are null.
void write_metrics(const Metrics& m, std::ostream& os);

}  // namespace pbsmc
