#include "pbsmc/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "pbsmc/errors.hpp"

namespace pbsmc {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

std::string fmt(const Vec& v) {
  std::ostringstream os;
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << fmt(v(i));
  os << ']';
  return os.str();
}

bool affine_map(const SlidingMap& map) {
  return map.kind == SlidingKind::AffineInEta ||
         (map.kind == SlidingKind::Linear && map.phi_eta.isIdentity(0.0));
}

std::string outcome_line(const ScenarioOutcome& o) {
  std::ostringstream os;
  os << o.name << ": ";
  if (o.code == kExitOk) {
    os << "ok";
    if (o.metrics) {
      os << " (steps " << o.metrics->steps << ", sliding entry ";
      if (o.metrics->sliding_entry_time) {
        os << fmt(*o.metrics->sliding_entry_time);
      } else {
        os << "none";
      }
      os << ")";
    }
  } else {
    os << "FAILED [" << o.code << "] " << o.message;
  }
  return os.str();
}

}  // namespace

std::vector<ScenarioDesc> apply_overrides(std::vector<ScenarioDesc> descs,
                                          const RunOptions& opts) {
  for (auto& d : descs) {
    if (opts.step) d.h = *opts.step;
    if (opts.t_final) d.t_final = *opts.t_final;
  }
  return descs;
}

CertificationReport certify(const ScenarioDesc& desc) {
  const Scenario scn = build_scenario(desc, true);
  const ControllerSpec& spec = scn.controller;
  const int m = spec.model.dof;
  const CertificationBox box = scn.certification
                                   ? *scn.certification
                                   : CertificationBox::symmetric(m, std::numbers::pi, 1.0);
  const std::size_t samples = scn.certification ? scn.certification_samples : 2000;

  CertificationReport rep;
  std::ostringstream os;
  os << "scenario: " << desc.name << "\n"
     << "model: " << spec.model.name << " (dof " << m << ")\n"
     << "controller: " << to_string(spec.mode) << "\n"
     << "sliding map: " << to_string(spec.sliding_map.kind) << "\n"
     << "potential: " << to_string(spec.potential.kind) << "\n"
     << "box: " << (scn.certification ? "scenario" : "default") << ", q";
  for (const auto& iv : box.q) os << " [" << fmt(iv.lo) << ", " << fmt(iv.hi) << "]";
  os << ", eta";
  for (const auto& iv : box.eta) os << " [" << fmt(iv.lo) << ", " << fmt(iv.hi) << "]";
  os << "\n";

  PdCertificate cert;
  try {
    cert = certify_uniform_pd(spec.sliding_map, spec.model, box, samples);
    os << "lambda: uniformly positive definite on samples\n"
       << "  epsilon (sampled estimate) = " << fmt(cert.epsilon) << "\n"
       << "  attained at q = " << fmt(cert.witness_q) << ", eta = " << fmt(cert.witness_eta) << "\n"
       << "  a (sampled partition bound) = " << fmt(cert.a_estimate) << "\n"
       << "  samples = " << cert.samples << "\n";
  } catch (const AssumptionViolated& e) {
    rep.ok = false;
    rep.failure = e.what();
    os << "lambda: VIOLATED\n  " << e.what() << "\n  witness (q, eta) = " << fmt(e.witness()) << "\n";
    rep.text = os.str();
    return rep;
  }

  GradientDominationConstants a2;
  try {
    a2 = gradient_domination_constants(spec.potential, m);
    os << "potential constants: c = " << fmt(a2.c) << ", rho = " << fmt(a2.rho)
       << (a2.sampled ? " (sampled)" : " (closed form, checked on samples)") << "\n";
  } catch (const AssumptionViolated& e) {
    rep.ok = false;
    rep.failure = e.what();
    os << "potential constants: VIOLATED\n  " << e.what() << "\n";
    rep.text = os.str();
    return rep;
  }

  if (spec.mode != ControllerMode::Kpes) {
    const Vec eta0 = momentum_to_eta(spec.model, scn.q0, scn.p0);
    const double u0 = value(spec.potential, sliding_value(spec, 0.0, scn.q0, eta0));
    os << "initial U = " << fmt(u0) << "\n";
    if (a2.rho < 0.5) {
      const double bound = reaching_time_bound(u0, cert.epsilon, a2.c, a2.rho, cert.a_estimate);
      os << "reaching-time bound = " << fmt(bound) << "\n";
    } else {
      os << "reaching-time bound: not available (rho >= 1/2)\n";
    }
  }

  if (affine_map(spec.sliding_map)) {
    double g1_lo = std::numeric_limits<double>::infinity(), g1_hi = 0.0;
    double g2_lo = std::numeric_limits<double>::infinity(), g2_hi = 0.0;
    for (const auto& [q, eta] : box_grid(box, samples)) {
      const SetGeometry geo = set_geometry(spec.model, spec.sliding_map, q, q);
      const double g1 = gamma1(geo), g2 = gamma2(geo);
      g1_lo = std::min(g1_lo, g1);
      g1_hi = std::max(g1_hi, g1);
      g2_lo = std::min(g2_lo, g2);
      g2_hi = std::max(g2_hi, g2);
    }
    os << "gamma1 range = [" << fmt(g1_lo) << ", " << fmt(g1_hi) << "]\n"
       << "gamma2 range = [" << fmt(g2_lo) << ", " << fmt(g2_hi) << "]\n";
  } else {
    os << "gamma ranges: not applicable (map is not of the form psi(q) + eta)\n";
  }
  for (const auto& note : advisories(spec)) os << "note: " << note << "\n";
  rep.text = os.str();
  return rep;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  std::ostringstream tag;
  tag << ".tmp." << std::this_thread::get_id();
  const fs::path tmp = target.string() + tag.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target);
}

std::vector<ScenarioOutcome> run_scenarios(const std::vector<ScenarioDesc>& descs,
                                           const RunOptions& opts, std::ostream& log) {
  std::error_code ec;
  fs::create_directories(opts.out_dir, ec);
  if (ec || !fs::is_directory(opts.out_dir)) {
    throw ConfigError("output directory '" + opts.out_dir + "' is not writable", "out");
  }

  std::vector<ScenarioOutcome> outcomes(descs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  const auto work = [&]() {
    for (std::size_t i = next++; i < descs.size(); i = next++) {
      const ScenarioDesc& desc = descs[i];
      ScenarioOutcome& out = outcomes[i];
      out.name = desc.name;
      const fs::path base = fs::path(opts.out_dir) / desc.name;
      try {
        const CertificationReport rep = certify(desc);
        std::string cert_text = rep.text;
        if (!rep.ok && opts.waive_assumptions) cert_text += "waived: simulation ran anyway\n";
        write_file_atomic(base.string() + ".cert.txt", cert_text);
        if (!rep.ok && !opts.waive_assumptions) {
          out.code = kExitCertification;
          out.message = rep.failure;
        } else {
          const Scenario scn = build_scenario(desc, true);
          const Trace trace = simulate(scn);
          const Metrics met = metrics(trace);
          std::ostringstream csv, js;
          write_csv(trace, csv);
          write_metrics(met, js);
          write_file_atomic(base.string() + ".trace.csv", csv.str());
          write_file_atomic(base.string() + ".metrics.json", js.str());
          out.metrics = met;
        }
      } catch (const ConfigError& e) {
        out.code = kExitConfig;
        out.message = e.what();
      } catch (const AssumptionViolated& e) {
        out.code = kExitCertification;
        out.message = e.what();
      } catch (const DivergenceError& e) {
        out.code = kExitDivergence;
        out.message = e.what();
      } catch (const std::exception& e) {
        out.code = kExitFailure;
        out.message = e.what();
      }
      std::lock_guard<std::mutex> lock(log_mutex);
      log << outcome_line(out) << "\n";
    }
  };

  const int workers = std::clamp<int>(opts.workers, 1,
                                      static_cast<int>(std::max<std::size_t>(descs.size(), 1)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return outcomes;
}

int exit_code(const std::vector<ScenarioOutcome>& outcomes) {
  for (const auto& o : outcomes) {
    if (o.code != kExitOk) return o.code;
  }
  return kExitOk;
}

}  // namespace pbsmc
