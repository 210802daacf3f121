#include "pbsmc/config.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

#include "pbsmc/errors.hpp"

namespace pbsmc {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError(key.empty() ? what : "'" + key + "': " + what, key);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Read access to one JSON object; remembers which keys were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    if (!has(key)) fail(join(path_, key), "missing required key");
    used_.insert(key);
    return j_.at(key);
  }

  Section section(const std::string& key) { return Section(raw(key), join(path_, key)); }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(join(path_, key), "expected a number");
    return v.get<double>();
  }

  void number(const std::string& key, double& out, bool required) {
    if (required || has(key)) out = number(key);
  }

  long long integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(join(path_, key), "expected an integer");
    return v.get<long long>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(join(path_, key), "expected a string");
    return v.get<std::string>();
  }

  void string(const std::string& key, std::string& out, bool required) {
    if (required || has(key)) out = string(key);
  }

  bool boolean(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_boolean()) fail(join(path_, key), "expected true or false");
    return v.get<bool>();
  }

  Vec vector(const std::string& key) {
    const json& v = raw(key);
    const std::string where = join(path_, key);
    if (!v.is_array()) fail(where, "expected an array of numbers");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(where, "expected an array of numbers");
      out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    return out;
  }

  void vector(const std::string& key, Vec& out, bool required) {
    if (required || has(key)) out = vector(key);
  }

  // Row-major: an array of equally long rows.
  Mat matrix(const std::string& key) {
    const json& v = raw(key);
    const std::string where = join(path_, key);
    if (!v.is_array() || v.empty() || !v[0].is_array()) fail(where, "expected an array of rows");
    const std::size_t rows = v.size(), cols = v[0].size();
    Mat out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
      if (!v[i].is_array() || v[i].size() != cols) fail(where, "rows must have equal length");
      for (std::size_t k = 0; k < cols; ++k) {
        if (!v[i][k].is_number()) fail(where, "matrix entries must be numbers");
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v[i][k].get<double>();
      }
    }
    return out;
  }

  void matrix(const std::string& key, Mat& out, bool required) {
    if (required || has(key)) out = matrix(key);
  }

  std::vector<Interval> intervals(const std::string& key) {
    const Mat m = matrix(key);
    if (m.cols() != 2) fail(join(path_, key), "expected [lo, hi] pairs");
    std::vector<Interval> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back({m(i, 0), m(i, 1)});
    return out;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) fail(join(path_, item.key()), "unknown key");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Vec vec_of(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

ScenarioDesc arm_desc(const std::string& name, const PotentialDesc& pot,
                      const std::string& sliding_kind) {
  ScenarioDesc d;
  d.name = name;
  d.model.name = "two_link_arm";
  d.mode = "pbsmc_track";
  d.sliding.kind = sliding_kind;
  d.sliding.phi_q = arm_sliding_gain();
  d.sliding.phi_eta = Mat::Identity(2, 2);
  d.potential = pot;
  d.trajectory.name = "paper_circle";
  d.q0 = Vec::Zero(2);
  d.p0 = Vec::Zero(2);
  d.t_final = 10.0;
  d.h = 1e-4;
  d.record_stride = 10;
  const CertificationBox box = arm_certification_box();
  d.certification.enabled = true;
  d.certification.q = box.q;
  d.certification.eta = box.eta;
  d.certification.samples = 2001;
  return d;
}

ChannelDesc sinusoid_channel(const Sinusoid& s) {
  ChannelDesc c;
  c.kind = "sinusoid";
  c.amplitude = s.amplitude;
  c.phase = s.phase;
  c.omega = s.omega;
  return c;
}

ScenarioDesc scalar_toy_desc() {
  ScenarioDesc d;
  d.name = "scalar_toy";
  d.model.name = "constant";
  d.model.inertia = Mat::Identity(1, 1);
  d.model.damping = Mat::Zero(1, 1);
  d.model.input_map = Mat::Identity(1, 1);
  d.mode = "pbsmc_stabilize";
  d.sliding.kind = "linear";
  d.sliding.phi_q = Mat::Identity(1, 1);
  d.sliding.phi_eta = Mat::Identity(1, 1);
  d.potential.kind = "norm_power";
  d.potential.k = 2.0;
  d.potential.r = 1.3;
  d.potential.s = 2.0;
  d.q0 = vec_of({1.0});
  d.p0 = vec_of({0.0});
  d.t_final = 5.0;
  d.h = 1e-3;
  d.record_stride = 1;
  d.certification.enabled = true;
  d.certification.q = {{-1.0, 1.0}};
  d.certification.eta = {{-1.0, 1.0}};
  d.certification.samples = 121;
  return d;
}

std::vector<ScenarioDesc> all_builtins() {
  PotentialDesc norm2;
  norm2.kind = "norm_power";
  norm2.k = 2.0;
  norm2.r = 1.3;
  norm2.s = 2.0;
  PotentialDesc norm1;
  norm1.kind = "norm_power";
  norm1.k = 2.0;
  norm1.r = 1.0;
  norm1.s = 1.0;

  std::vector<ScenarioDesc> out;
  out.push_back(arm_desc("paper_norm2_r1.3", norm2, "linear"));
  out.push_back(arm_desc("paper_norm1", norm1, "linear"));
  ScenarioDesc rm = arm_desc("robust_matched", norm1, "affine_in_eta");
  rm.matched = sinusoid_channel(robust_matched_disturbance());
  out.push_back(rm);
  ScenarioDesc rmu = arm_desc("robust_matched_unmatched", norm2, "affine_in_eta");
  rmu.matched = sinusoid_channel(robust_matched_disturbance());
  rmu.unmatched = sinusoid_channel(robust_unmatched_disturbance());
  out.push_back(rmu);
  out.push_back(scalar_toy_desc());
  return out;
}

const std::vector<std::string> kPaperSet = {"paper_norm2_r1.3", "paper_norm1",
                                            "robust_matched", "robust_matched_unmatched"};

// ---- parsing -------------------------------------------------------------

void parse_model(Section sec, ModelDesc& m, bool required) {
  sec.string("name", m.name, required);
  if (m.name == "two_link_arm") {
    if (sec.has("params")) {
      Section p = sec.section("params");
      ArmParams& a = m.arm;
      p.number("l1", a.l1, false);
      p.number("l2", a.l2, false);
      p.number("m1", a.m1, false);
      p.number("m2", a.m2, false);
      p.number("r1", a.r1, false);
      p.number("r2", a.r2, false);
      p.number("J1", a.J1, false);
      p.number("J2", a.J2, false);
      p.number("nu1", a.nu1, false);
      p.number("nu2", a.nu2, false);
      p.finish();
    }
  } else if (m.name == "constant") {
    sec.matrix("inertia", m.inertia, required);
    sec.matrix("damping", m.damping, required);
    sec.matrix("input_map", m.input_map, required);
  } else {
    fail(join(sec.path(), "name"), "unknown model '" + m.name + "'");
  }
  sec.finish();
}

void parse_potential(Section sec, PotentialDesc& p, bool required) {
  sec.string("kind", p.kind, required);
  if (p.kind == "norm_power") {
    sec.number("k", p.k, required);
    sec.number("r", p.r, required);
    sec.number("s", p.s, required);
  } else if (p.kind == "l1_quadratic") {
    sec.number("alpha", p.alpha, required);
    sec.number("beta", p.beta, required);
  } else {
    fail(join(sec.path(), "kind"), "unknown potential kind '" + p.kind + "'");
  }
  sec.number("smoothing_eps", p.smoothing_eps, false);
  sec.finish();
}

void parse_sliding(Section sec, SlidingDesc& s, int dof, bool required) {
  sec.string("kind", s.kind, required);
  if (s.kind != "linear" && s.kind != "affine_in_eta") {
    fail(join(sec.path(), "kind"), "unknown sliding kind '" + s.kind + "'");
  }
  sec.matrix("phi_q", s.phi_q, required);
  if (sec.has("phi_eta")) {
    s.phi_eta = sec.matrix("phi_eta");
  } else if (s.phi_eta.size() == 0) {
    s.phi_eta = Mat::Identity(dof, dof);
  }
  sec.finish();
}

void parse_trajectory(Section sec, TrajectoryDesc& t, bool required) {
  sec.string("name", t.name, required);
  if (t.name == "paper_circle") {
    if (sec.has("center")) {
      const Vec c = sec.vector("center");
      if (c.size() != 2) fail(join(sec.path(), "center"), "expected [x, y]");
      t.circle.cx = c(0);
      t.circle.cy = c(1);
    }
    sec.number("radius", t.circle.radius, false);
    sec.number("omega", t.circle.omega, false);
  } else if (t.name == "constant") {
    sec.vector("q", t.q, required);
  } else if (t.name != "none") {
    fail(join(sec.path(), "name"), "unknown trajectory '" + t.name + "'");
  }
  sec.finish();
}

void parse_channel(Section sec, ChannelDesc& c) {
  c.kind = sec.string("kind");
  if (c.kind == "constant") {
    c.amplitude = sec.vector("value");
    c.phase.resize(0);
    c.omega = 0.0;
  } else if (c.kind == "sinusoid") {
    c.amplitude = sec.vector("amplitude");
    c.phase = sec.has("phase") ? sec.vector("phase") : Vec::Zero(c.amplitude.size());
    c.omega = sec.number("omega");
  } else if (c.kind != "none") {
    fail(join(sec.path(), "kind"), "unknown disturbance kind '" + c.kind + "'");
  }
  sec.finish();
}

void parse_certification(Section sec, CertificationDesc& c, bool required) {
  c.enabled = sec.has("enabled") ? sec.boolean("enabled") : true;
  if (required || sec.has("q")) c.q = sec.intervals("q");
  if (required || sec.has("eta")) c.eta = sec.intervals("eta");
  if (sec.has("samples")) {
    const long long n = sec.integer("samples");
    if (n < 1) fail(join(sec.path(), "samples"), "must be >= 1");
    c.samples = static_cast<std::size_t>(n);
  }
  sec.finish();
}

ScenarioDesc parse_scenario(const json& j, const std::string& path) {
  Section sec(j, path);
  ScenarioDesc d;
  bool required = true;
  if (sec.has("base")) {
    const std::string base = sec.string("base");
    const auto descs = builtin_descs(base);
    if (descs.size() != 1) fail(join(path, "base"), "must name a single scenario");
    d = descs.front();
    required = false;
  }
  sec.string("name", d.name, required);
  if (d.name.empty()) fail(join(path, "name"), "must not be empty");

  if (required || sec.has("model")) parse_model(sec.section("model"), d.model, required);
  const int dof = d.model.name == "two_link_arm" ? 2 : static_cast<int>(d.model.inertia.rows());

  if (required || sec.has("controller")) {
    Section c = sec.section("controller");
    c.string("mode", d.mode, required);
    c.number("damping_d_gain", d.damping_d_gain, false);
    c.finish();
  }
  if (required || sec.has("sliding")) parse_sliding(sec.section("sliding"), d.sliding, dof, required);
  if (required || sec.has("potential")) {
    parse_potential(sec.section("potential"), d.potential, required);
  }
  if (sec.has("trajectory")) {
    parse_trajectory(sec.section("trajectory"), d.trajectory, required);
  } else if (required && d.mode == "pbsmc_track") {
    fail(join(path, "trajectory"), "missing required key (pbsmc_track needs a trajectory)");
  }
  if (sec.has("disturbance")) {
    Section dist = sec.section("disturbance");
    if (dist.has("matched")) parse_channel(dist.section("matched"), d.matched);
    if (dist.has("unmatched")) parse_channel(dist.section("unmatched"), d.unmatched);
    dist.finish();
  }
  if (required || sec.has("initial")) {
    Section init = sec.section("initial");
    init.vector("q", d.q0, required);
    init.vector("p", d.p0, required);
    init.finish();
  }
  if (required || sec.has("sim")) {
    Section s = sec.section("sim");
    s.number("t_final", d.t_final, required);
    s.number("step", d.h, required);
    s.string("integrator", d.integrator, false);
    if (s.has("record_stride")) d.record_stride = static_cast<int>(s.integer("record_stride"));
    if (s.has("open_loop")) d.open_loop = s.boolean("open_loop");
    s.finish();
  }
  if (sec.has("certification")) {
    parse_certification(sec.section("certification"), d.certification, required);
  }
  sec.finish();
  return d;
}

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

// ---- dumping -------------------------------------------------------------

ordered_json to_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ordered_json to_json(const Mat& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    a.push_back(row);
  }
  return a;
}

ordered_json to_json(const std::vector<Interval>& ivs) {
  ordered_json a = ordered_json::array();
  for (const auto& iv : ivs) a.push_back({iv.lo, iv.hi});
  return a;
}

ordered_json to_json(const ChannelDesc& c) {
  ordered_json j;
  j["kind"] = c.kind;
  if (c.kind == "constant") {
    j["value"] = to_json(c.amplitude);
  } else if (c.kind == "sinusoid") {
    j["amplitude"] = to_json(c.amplitude);
    j["phase"] = to_json(c.phase);
    j["omega"] = c.omega;
  }
  return j;
}

ordered_json to_json(const ScenarioDesc& d) {
  ordered_json j;
  j["name"] = d.name;

  ordered_json model;
  model["name"] = d.model.name;
  if (d.model.name == "two_link_arm") {
    const ArmParams& a = d.model.arm;
    model["params"] = {{"l1", a.l1}, {"l2", a.l2}, {"m1", a.m1}, {"m2", a.m2},
                       {"r1", a.r1}, {"r2", a.r2}, {"J1", a.J1}, {"J2", a.J2},
                       {"nu1", a.nu1}, {"nu2", a.nu2}};
  } else {
    model["inertia"] = to_json(d.model.inertia);
    model["damping"] = to_json(d.model.damping);
    model["input_map"] = to_json(d.model.input_map);
  }
  j["model"] = model;

  j["controller"] = {{"mode", d.mode}, {"damping_d_gain", d.damping_d_gain}};
  j["sliding"] = {{"kind", d.sliding.kind},
                  {"phi_q", to_json(d.sliding.phi_q)},
                  {"phi_eta", to_json(d.sliding.phi_eta)}};

  ordered_json pot;
  pot["kind"] = d.potential.kind;
  if (d.potential.kind == "norm_power") {
    pot["k"] = d.potential.k;
    pot["r"] = d.potential.r;
    pot["s"] = d.potential.s;
  } else {
    pot["alpha"] = d.potential.alpha;
    pot["beta"] = d.potential.beta;
  }
  pot["smoothing_eps"] = d.potential.smoothing_eps;
  j["potential"] = pot;

  ordered_json traj;
  traj["name"] = d.trajectory.name;
  if (d.trajectory.name == "paper_circle") {
    traj["center"] = {d.trajectory.circle.cx, d.trajectory.circle.cy};
    traj["radius"] = d.trajectory.circle.radius;
    traj["omega"] = d.trajectory.circle.omega;
  } else if (d.trajectory.name == "constant") {
    traj["q"] = to_json(d.trajectory.q);
  }
  j["trajectory"] = traj;

  j["disturbance"] = {{"matched", to_json(d.matched)}, {"unmatched", to_json(d.unmatched)}};
  j["initial"] = {{"q", to_json(d.q0)}, {"p", to_json(d.p0)}};
  j["sim"] = {{"t_final", d.t_final},
              {"step", d.h},
              {"integrator", d.integrator},
              {"record_stride", d.record_stride},
              {"open_loop", d.open_loop}};
  j["certification"] = {{"enabled", d.certification.enabled},
                        {"q", to_json(d.certification.q)},
                        {"eta", to_json(d.certification.eta)},
                        {"samples", d.certification.samples}};
  return j;
}

// ---- building ------------------------------------------------------------

std::function<Vec(double)> channel_signal(const ChannelDesc& c) {
  if (c.kind == "constant") {
    const Vec a = c.amplitude;
    return [a](double) { return a; };
  }
  return sinusoid_signal({c.amplitude, c.phase, c.omega});
}

void check_size(const std::string& key, Eigen::Index got, int dof) {
  if (got != dof) {
    std::ostringstream os;
    os << "expected dimension " << dof << ", got " << got;
    fail(key, os.str());
  }
}

void check_square(const std::string& key, const Mat& m, int dof) {
  if (m.rows() != dof || m.cols() != dof) {
    std::ostringstream os;
    os << "expected a " << dof << "x" << dof << " matrix";
    fail(key, os.str());
  }
}

}  // namespace

Scenario build_scenario(const ScenarioDesc& d, bool waive_assumptions) {
  Scenario scn;
  scn.name = d.name;
  ControllerSpec& spec = scn.controller;

  if (d.model.name == "two_link_arm") {
    try {
      spec.model = arm_model(d.model.arm);
    } catch (const Error& e) {
      fail("model.params", e.what());
    }
  } else if (d.model.name == "constant") {
    const int n = static_cast<int>(d.model.inertia.rows());
    if (n < 1) fail("model.inertia", "must be a nonempty square matrix");
    check_square("model.inertia", d.model.inertia, n);
    check_square("model.damping", d.model.damping, n);
    check_square("model.input_map", d.model.input_map, n);
    spec.model = constant_model(d.model.inertia, d.model.damping, d.model.input_map);
  } else {
    fail("model.name", "unknown model '" + d.model.name + "'");
  }
  const int dof = spec.model.dof;

  try {
    spec.mode = controller_mode_from_string(d.mode);
  } catch (const ParameterError& e) {
    fail("controller.mode", e.what());
  }
  if (spec.mode == ControllerMode::Kpes) {
    try {
      spec.damping_d = scaled_identity_damping(dof, d.damping_d_gain);
    } catch (const ParameterError& e) {
      fail("controller.damping_d_gain", e.what());
    }
  }

  check_square("sliding.phi_q", d.sliding.phi_q, dof);
  if (d.sliding.kind == "linear") {
    check_square("sliding.phi_eta", d.sliding.phi_eta, dof);
    spec.sliding_map = SlidingMap::linear(d.sliding.phi_q, d.sliding.phi_eta);
  } else if (d.sliding.kind == "affine_in_eta") {
    spec.sliding_map = SlidingMap::affine_linear(d.sliding.phi_q);
  } else {
    fail("sliding.kind", "unknown sliding kind '" + d.sliding.kind + "'");
  }

  try {
    if (d.potential.kind == "norm_power") {
      spec.potential = Potential::norm_power(d.potential.k, d.potential.r, d.potential.s,
                                             d.potential.smoothing_eps);
    } else if (d.potential.kind == "l1_quadratic") {
      spec.potential = Potential::l1_quadratic(d.potential.alpha, d.potential.beta,
                                               d.potential.smoothing_eps);
    } else {
      fail("potential.kind", "unknown potential kind '" + d.potential.kind + "'");
    }
  } catch (const ParameterError& e) {
    fail("potential", e.what());
  }

  if (d.trajectory.name == "paper_circle") {
    if (d.model.name != "two_link_arm") {
      fail("trajectory.name", "paper_circle needs the two_link_arm model");
    }
    spec.trajectory = circle_trajectory(d.model.arm, d.trajectory.circle);
  } else if (d.trajectory.name == "constant") {
    check_size("trajectory.q", d.trajectory.q.size(), dof);
    spec.trajectory = constant_trajectory(d.trajectory.q);
  } else if (d.trajectory.name != "none") {
    fail("trajectory.name", "unknown trajectory '" + d.trajectory.name + "'");
  }
  if (spec.mode == ControllerMode::PbsmcTrack && !spec.trajectory) {
    fail("trajectory", "pbsmc_track needs a trajectory");
  }

  if (d.matched.kind != "none" || d.unmatched.kind != "none") {
    DisturbanceProfile dist;
    dist.bound_m = 0.0;
    dist.bound_um = 0.0;
    const auto add = [&](const ChannelDesc& c, const std::string& key,
                         std::function<Vec(double)>& signal, double& bound) {
      if (c.kind == "none") return;
      if (c.kind != "constant" && c.kind != "sinusoid") {
        fail(key + ".kind", "unknown disturbance kind '" + c.kind + "'");
      }
      check_size(key + (c.kind == "constant" ? ".value" : ".amplitude"), c.amplitude.size(), dof);
      if (c.kind == "sinusoid") check_size(key + ".phase", c.phase.size(), dof);
      signal = channel_signal(c);
      bound = c.amplitude.norm();
    };
    add(d.matched, "disturbance.matched", dist.d_m, dist.bound_m);
    add(d.unmatched, "disturbance.unmatched", dist.d_um, dist.bound_um);
    scn.disturbance = dist;
  }

  check_size("initial.q", d.q0.size(), dof);
  check_size("initial.p", d.p0.size(), dof);
  scn.q0 = d.q0;
  scn.p0 = d.p0;
  if (!(d.t_final > 0.0)) fail("sim.t_final", "must be positive");
  if (!(d.h > 0.0)) fail("sim.step", "must be positive");
  if (d.record_stride < 1) fail("sim.record_stride", "must be >= 1");
  scn.t_final = d.t_final;
  scn.h = d.h;
  scn.record_stride = d.record_stride;
  scn.open_loop = d.open_loop;
  try {
    scn.integrator = integrator_from_string(d.integrator);
  } catch (const ParameterError& e) {
    fail("sim.integrator", e.what());
  }

  if (d.certification.enabled) {
    if (d.certification.q.size() != static_cast<std::size_t>(dof) ||
        d.certification.eta.size() != static_cast<std::size_t>(dof)) {
      fail("certification", "q and eta need one [lo, hi] interval per degree of freedom");
    }
    CertificationBox box;
    box.q = d.certification.q;
    box.eta = d.certification.eta;
    scn.certification = box;
    scn.certification_samples = d.certification.samples;
  }
  scn.waive_assumptions = waive_assumptions;
  return scn;
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> names{"paper"};
  for (const auto& d : all_builtins()) names.push_back(d.name);
  return names;
}

std::vector<ScenarioDesc> builtin_descs(const std::string& name) {
  const auto all = all_builtins();
  std::vector<ScenarioDesc> out;
  if (name == "paper") {
    for (const auto& n : kPaperSet) {
      out.push_back(*std::find_if(all.begin(), all.end(),
                                  [&](const ScenarioDesc& d) { return d.name == n; }));
    }
    return out;
  }
  for (const auto& d : all) {
    if (d.name == name) return {d};
  }
  throw ConfigError("unknown scenario '" + name + "'", name);
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const int line = line_of(text, e.byte);
    std::ostringstream os;
    os << origin << ":" << line << ": syntax error: " << e.what();
    throw ConfigError(os.str(), "", line);
  }

  RunConfig cfg;
  try {
    Section top(doc, "");
    if (top.has("run")) {
      Section run = top.section("run");
      if (run.has("out_dir")) cfg.out_dir = run.string("out_dir");
      if (run.has("workers")) {
        const long long w = run.integer("workers");
        if (w < 1) fail("run.workers", "must be >= 1");
        cfg.workers = static_cast<int>(w);
      }
      if (run.has("waive_assumptions")) cfg.waive_assumptions = run.boolean("waive_assumptions");
      run.finish();
    }
    const json& list = top.raw("scenarios");
    if (!list.is_array() || list.empty()) fail("scenarios", "expected a nonempty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "scenarios[" + std::to_string(i) + "]";
      if (list[i].is_string()) {
        for (auto& d : builtin_descs(list[i].get<std::string>())) cfg.scenarios.push_back(d);
      } else {
        cfg.scenarios.push_back(parse_scenario(list[i], path));
      }
    }
    top.finish();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what(), e.key(), e.line());
  }

  std::set<std::string> seen;
  for (const auto& d : cfg.scenarios) {
    if (!seen.insert(d.name).second) {
      throw ConfigError(origin + ": duplicate scenario name '" + d.name + "'", "name");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'", "");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string dump_config(const RunConfig& cfg) {
  ordered_json doc;
  ordered_json run;
  if (cfg.out_dir) run["out_dir"] = *cfg.out_dir;
  run["workers"] = cfg.workers;
  run["waive_assumptions"] = cfg.waive_assumptions;
  doc["run"] = run;
  ordered_json list = ordered_json::array();
  for (const auto& d : cfg.scenarios) list.push_back(to_json(d));
  doc["scenarios"] = list;
  return doc.dump(2) + "\n";
}

}  // namespace pbsmc
