// Command-line front end over the C API.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "speedmeter/speedmeter.h"

namespace {

enum ExitCode { kOk = 0, kDomainFailure = 1, kUsage = 2 };

int exit_code(sm_status s) {
  switch (s) {
    case SM_OK: return kOk;
    case SM_NOT_CONVERGED:
    case SM_NO_LOCK:
    case SM_ERR_NUMERIC:
    case SM_ERR_INTERNAL: return kDomainFailure;
    case SM_ERR_INVALID_ARGUMENT:
    case SM_ERR_PARSE:
    case SM_ERR_IO: return kUsage;
  }
  return kDomainFailure;
}

struct ConfigDeleter {
  void operator()(sm_config* c) const { sm_config_free(c); }
};
using ConfigPtr = std::unique_ptr<sm_config, ConfigDeleter>;

struct Common {
  std::vector<std::string> configs;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool gnuplot = false;
};

void add_common(CLI::App* cmd, Common& c, bool plots) {
  cmd->add_option("-c,--config", c.configs, "Config file, applied in order (repeatable)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", c.sets, "Override one entry, section.key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "Seed for every random generator");
  cmd->add_option("-o,--out", c.out, "Output file")->required();
  if (plots) cmd->add_flag("--gnuplot", c.gnuplot, "Also write a gnuplot script");
}

int report_failure(sm_status s) {
  std::fprintf(stderr, "error (%s): %s\n", sm_status_name(s), sm_last_error());
  return exit_code(s);
}

// Builds the configuration from defaults, files, --set entries and --seed, in that order.
sm_status load_config(const Common& c, ConfigPtr& out) {
  sm_config* raw = nullptr;
  sm_status s = sm_config_new(&raw);
  if (s != SM_OK) return s;
  out.reset(raw);
  for (const auto& path : c.configs) {
    if ((s = sm_config_load_file(raw, path.c_str())) != SM_OK) return s;
  }
  for (const auto& entry : c.sets) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects section.key=value, got '%s'\n", entry.c_str());
      return SM_ERR_INVALID_ARGUMENT;
    }
    const std::string key = entry.substr(0, eq);
    const std::string value = entry.substr(eq + 1);
    if ((s = sm_config_set(raw, key.c_str(), value.c_str())) != SM_OK) return s;
  }
  if (c.seed && (s = sm_config_set_seed(raw, *c.seed)) != SM_OK) return s;
  const char* warnings = nullptr;
  if ((s = sm_config_check(raw, &warnings)) != SM_OK) return s;
  if (warnings && *warnings) std::fputs(warnings, stderr);
  return SM_OK;
}

template <typename Run>
int run_command(const Common& c, Run&& run) {
  ConfigPtr cfg;
  sm_status s = load_config(c, cfg);
  if (s == SM_OK) s = run(cfg.get());
  std::fputs(sm_last_report(), stdout);
  if (s != SM_OK) return report_failure(s);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarization-circulation speed meter toolkit"};
  app.require_subcommand(1);

  Common response_opts, fit_opts, lock_opts, noise_opts, synth_tf_opts, synth_noise_opts;

  auto* response = app.add_subcommand("response", "Evaluate a transfer function on the grid");
  add_common(response, response_opts, true);
  std::string mode = "ratio";
  response->add_option("-m,--mode", mode, "exact | firstorder | ratio")
      ->check(CLI::IsMember({"exact", "firstorder", "ratio"}));

  auto* fit = app.add_subcommand("fit", "Fit the main-cavity loss to a measured transfer function");
  add_common(fit, fit_opts, true);
  std::string fit_data;
  fit->add_option("-d,--data", fit_data, "Transfer-function CSV (f_hz,re,im)")->required();

  auto* lock = app.add_subcommand("lock", "Simulate the lock-acquisition sequence");
  add_common(lock, lock_opts, true);

  auto* noise = app.add_subcommand("noise", "ASD and accumulated RMS of a length series");
  add_common(noise, noise_opts, true);
  std::string noise_data;
  std::optional<double> rate;
  noise->add_option("-d,--data", noise_data, "Series CSV: t,length or a single column")->required();
  noise->add_option("-r,--rate", rate, "Sample rate of a single-column series, Hz");

  auto* synth = app.add_subcommand("synth", "Generate synthetic inputs");
  synth->require_subcommand(1);
  auto* synth_tf = synth->add_subcommand("tf", "Noisy transfer function from the configured model");
  add_common(synth_tf, synth_tf_opts, false);
  auto* synth_noise = synth->add_subcommand("noise", "Length-noise series with a shaped ASD");
  add_common(synth_noise, synth_noise_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (response->parsed()) {
    const sm_response_mode m = mode == "exact"        ? SM_RESPONSE_EXACT
                               : mode == "firstorder" ? SM_RESPONSE_FIRSTORDER
                                                      : SM_RESPONSE_RATIO;
    return run_command(response_opts, [&](sm_config* cfg) {
      return sm_cmd_response(cfg, m, response_opts.out.c_str(), response_opts.gnuplot);
    });
  }
  if (fit->parsed()) {
    return run_command(fit_opts, [&](sm_config* cfg) {
      return sm_cmd_fit(cfg, fit_data.c_str(), fit_opts.out.c_str(), fit_opts.gnuplot);
    });
  }
  if (lock->parsed()) {
    return run_command(lock_opts, [&](sm_config* cfg) {
      return sm_cmd_lock(cfg, lock_opts.out.c_str(), lock_opts.gnuplot);
    });
  }
  if (noise->parsed()) {
    if (rate) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "spectrum.sample_rate=%.17g", *rate);
      noise_opts.sets.push_back(buf);
    }
    return run_command(noise_opts, [&](sm_config* cfg) {
      return sm_cmd_noise(cfg, noise_data.c_str(), noise_opts.out.c_str(), noise_opts.gnuplot);
    });
  }
  if (synth_tf->parsed()) {
    return run_command(synth_tf_opts,
                       [&](sm_config* cfg) { return sm_cmd_synth_tf(cfg, synth_tf_opts.out.c_str()); });
  }
  return run_command(synth_noise_opts,
                     [&](sm_config* cfg) { return sm_cmd_synth_noise(cfg, synth_noise_opts.out.c_str()); });
}
