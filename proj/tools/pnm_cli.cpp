// Command-line front end over the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

#include "pnm/pnm.h"

namespace {

int exit_code(pnm_status s) {
  switch (s) {
    case PNM_OK: return 0;
    case PNM_ERR_SOLVER:
    case PNM_ERR_INTERNAL: return 1;
    default: return 2;
  }
}

struct Options {
  std::string config;
  std::string out;
  std::optional<unsigned long long> seed;
  std::string scheme;
  std::optional<double> delta;
};

int run_command(const std::string& cmd, const Options& o) {
  pnm_config* cfg = nullptr;
  pnm_status s = pnm_config_load(o.config.c_str(), &cfg);
  auto bail = [&](pnm_status st) {
    std::fprintf(stderr, "pnm %s: %s\n", cmd.c_str(), pnm_last_error());
    pnm_config_free(cfg);
    return exit_code(st);
  };
  if (s != PNM_OK) return bail(s);
  if (o.seed && (s = pnm_config_set_seed(cfg, *o.seed)) != PNM_OK) return bail(s);
  if (!o.scheme.empty() && (s = pnm_config_set_scheme(cfg, o.scheme.c_str())) != PNM_OK) return bail(s);
  if (o.delta && (s = pnm_config_set_delta(cfg, *o.delta)) != PNM_OK) return bail(s);
  if (!o.out.empty() && (s = pnm_config_set_output(cfg, o.out.c_str())) != PNM_OK) return bail(s);

  if (cmd == "run") s = pnm_cmd_run(cfg, nullptr);
  else if (cmd == "ensemble") s = pnm_cmd_ensemble(cfg, nullptr);
  else if (cmd == "converge") s = pnm_cmd_converge(cfg, nullptr);
  else s = pnm_cmd_network(cfg, nullptr);

  const std::string report = pnm_last_report();
  if (!report.empty()) std::printf("%s%s", report.c_str(), report.back() == '\n' ? "" : "\n");
  if (s != PNM_OK) return bail(s);
  std::printf("output: %s\n", pnm_config_output(cfg));
  pnm_config_free(cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic drainage pore-network simulator"};
  app.set_version_flag("--version", std::string(pnm_version()));
  app.require_subcommand(1);

  Options opt;
  std::string chosen;
  for (const char* name : {"run", "ensemble", "converge", "network"}) {
    const char* help = std::string(name) == "run"        ? "Single run: run.csv, events.csv"
                       : std::string(name) == "ensemble" ? "Seed ensemble on the bifurcating case: ensemble.csv"
                       : std::string(name) == "converge" ? "Time-step convergence study: errors.csv, slopes.csv"
                                                         : "Write the case network as text";
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", opt.config, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory (overrides output.directory)");
    sub->add_option("--seed", opt.seed, "Seed override (first seed for studies)");
    sub->add_option("--scheme", opt.scheme, "Scheme override")->check(CLI::IsMember({"fi-n", "fi-r", "fi-theta"}));
    sub->add_option("--delta", opt.delta, "FI-R regularization width as a fraction of p_ce");
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return run_command(chosen, opt);
}
