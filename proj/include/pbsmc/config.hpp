#pragma once
// Scenario descriptions as plain data, their JSON form, and the built-in
// registry. See docs/config.md for the document grammar.

#include <optional>
#include <string>
#include <vector>

#include "pbsmc/bench_arm.hpp"
#include "pbsmc/sim.hpp"

namespace pbsmc {

struct ModelDesc {
  std::string name = "two_link_arm";  ///< two_link_arm | constant
  ArmParams arm;
  Mat inertia, damping, input_map;  ///< constant model only
};

struct SlidingDesc {
  std::string kind = "linear";  ///< linear | affine_in_eta (psi(q) = phi_q q)
  Mat phi_q;
  Mat phi_eta;  ///< linear only
};

struct PotentialDesc {
  std::string kind = "norm_power";  ///< norm_power | l1_quadratic
  double k = 1.0, r = 1.0, s = 2.0;
  double alpha = 1.0, beta = 1.0;
  double smoothing_eps = 0.0;
};

struct TrajectoryDesc {
  std::string name = "none";  ///< none | paper_circle | constant
  CircleParams circle;
  Vec q;  ///< constant only
};

struct ChannelDesc {
  std::string kind = "none";  ///< none | constant | sinusoid
  Vec amplitude;
  Vec phase;
  double omega = 1.0;
};

struct CertificationDesc {
  bool enabled = false;
  std::vector<Interval> q, eta;
  std::size_t samples = 2000;
};

struct ScenarioDesc {
  std::string name;
  ModelDesc model;
  std::string mode = "pbsmc_stabilize";
  double damping_d_gain = 1.0;
  SlidingDesc sliding;
  PotentialDesc potential;
  TrajectoryDesc trajectory;
  ChannelDesc matched, unmatched;
  Vec q0, p0;
  double t_final = 10.0;
  double h = 1e-4;
  std::string integrator = "rk4";
  int record_stride = 1;
  bool open_loop = false;
  CertificationDesc certification;
};

struct RunConfig {
  std::vector<ScenarioDesc> scenarios;
  std::optional<std::string> out_dir;
  int workers = 1;
  bool waive_assumptions = false;
};

/// Throws ConfigError for unknown names and inconsistent sizes.
Scenario build_scenario(const ScenarioDesc& desc, bool waive_assumptions = false);

/// Names accepted as scenario references, in listing order.
std::vector<std::string> builtin_names();

/// "paper" expands to the four arm scenarios; any other name to itself.
/// Throws ConfigError for unknown names.
std::vector<ScenarioDesc> builtin_descs(const std::string& name);

/// Parses a configuration document. `origin` names the source in messages.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

/// Fully explicit document that parses back to the same RunConfig.
std::string dump_config(const RunConfig& cfg);

}  // namespace pbsmc
