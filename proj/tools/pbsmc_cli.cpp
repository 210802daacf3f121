#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pbsmc/config.hpp"
#include "pbsmc/errors.hpp"
#include "pbsmc/runner.hpp"

namespace fs = std::filesystem;
using namespace pbsmc;

namespace {

constexpr const char* kOutEnv = "PBSMC_OUT_DIR";

// Each reference is a config file path or a built-in scenario name.
RunConfig resolve(const std::vector<std::string>& refs) {
  RunConfig merged;
  bool have_out = false, have_workers = false;
  for (const auto& ref : refs) {
    if (fs::is_regular_file(ref)) {
      RunConfig cfg = load_config(ref);
      for (auto& d : cfg.scenarios) merged.scenarios.push_back(std::move(d));
      if (cfg.out_dir && !have_out) {
        merged.out_dir = cfg.out_dir;
        have_out = true;
      }
      if (!have_workers) {
        merged.workers = cfg.workers;
        have_workers = true;
      }
      merged.waive_assumptions = merged.waive_assumptions || cfg.waive_assumptions;
    } else {
      for (auto& d : builtin_descs(ref)) merged.scenarios.push_back(std::move(d));
    }
  }
  return merged;
}

int print_list() {
  for (const auto& name : builtin_names()) {
    if (name == "paper") {
      std::cout << "paper  (expands to the four arm scenarios)\n";
      continue;
    }
    const ScenarioDesc d = builtin_descs(name).front();
    std::cout << name << "  model=" << d.model.name << " mode=" << d.mode
              << " potential=" << d.potential.kind << " t_final=" << d.t_final
              << " step=" << d.h << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Passivity-based sliding-mode control: certification and simulation"};
  app.require_subcommand(1);

  std::vector<std::string> run_refs;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
  bool waive = false;
  std::optional<double> step, t_final;
  std::string dump_path;

  CLI::App* run = app.add_subcommand("run", "Simulate scenarios and write traces");
  run->add_option("scenarios", run_refs, "Config files or built-in names (see `list`)")->required();
  run->add_option("--out", out_dir, std::string("Output directory (default: config, then $") +
                                        kOutEnv + ", then ./out)");
  run->add_option("--workers", workers, "Scenarios run in parallel")->check(CLI::PositiveNumber);
  run->add_flag("--waive-assumptions", waive, "Simulate even when certification fails");
  run->add_option("--step", step, "Override the integration step")->check(CLI::PositiveNumber);
  run->add_option("--t-final", t_final, "Override the final time")->check(CLI::PositiveNumber);
  run->add_option("--dump-config", dump_path,
                  "Write the effective config to a file ('-' prints it and exits)");

  std::vector<std::string> cert_refs;
  CLI::App* cert = app.add_subcommand("certify", "Check the assumptions without simulating");
  cert->add_option("scenarios", cert_refs, "Config files or built-in names")->required();

  app.add_subcommand("list", "List built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (app.got_subcommand("list")) return print_list();

    if (app.got_subcommand("certify")) {
      const RunConfig cfg = resolve(cert_refs);
      int code = kExitOk;
      for (const auto& d : cfg.scenarios) {
        const CertificationReport rep = certify(d);
        std::cout << rep.text << "\n";
        if (!rep.ok && code == kExitOk) code = kExitCertification;
      }
      return code;
    }

    RunConfig cfg = resolve(run_refs);
    RunOptions opts;
    if (out_dir) {
      opts.out_dir = *out_dir;
    } else if (cfg.out_dir) {
      opts.out_dir = *cfg.out_dir;
    } else if (const char* env = std::getenv(kOutEnv); env && *env) {
      opts.out_dir = env;
    } else {
      opts.out_dir = "out";
    }
    opts.workers = workers ? *workers : cfg.workers;
    opts.waive_assumptions = waive || cfg.waive_assumptions;
    opts.step = step;
    opts.t_final = t_final;

    cfg.scenarios = apply_overrides(std::move(cfg.scenarios), opts);
    if (!dump_path.empty()) {
      RunConfig effective = cfg;
      effective.out_dir = opts.out_dir;
      effective.workers = opts.workers;
      effective.waive_assumptions = opts.waive_assumptions;
      const std::string text = dump_config(effective);
      if (dump_path == "-") {
        std::cout << text;
        return kExitOk;
      }
      write_file_atomic(dump_path, text);
    }

    const auto outcomes = run_scenarios(cfg.scenarios, opts, std::cout);
    return exit_code(outcomes);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const AssumptionViolated& e) {
    std::cerr << "certification failed: " << e.what() << "\n";
    return kExitCertification;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
