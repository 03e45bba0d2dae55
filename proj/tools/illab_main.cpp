#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "illab/config.hpp"
#include "illab/errors.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) illab::fail("io-error", "cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  bool svg = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON experiment configuration");
  cmd->add_option("--out", flags.out_dir, "output directory (overrides the config)");
  cmd->add_option("--seed", flags.seed, "random seed (overrides the config)");
  cmd->add_flag("--svg", flags.svg, "also write SVG plots");
}

int run(const std::string& experiment, const CommonFlags& flags) {
  illab::ExperimentConfig cfg;
  if (!flags.config_path.empty()) cfg = illab::parse_config(read_file(flags.config_path));
  cfg.experiment = experiment;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.svg) cfg.svg = true;
  illab::run_experiment(cfg);
  std::cout << "wrote " << cfg.out_dir << "/\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probes and regularization experiments for ill-posed operator equations"};
  app.require_subcommand(1);

  const struct {
    const char* name;
    const char* experiment;
    const char* help;
  } commands[] = {
      {"classify", "classify", "singular-value based operator classification"},
      {"qdist", "qdist", "preimage sets and their quasi-distance"},
      {"probe-stability", "probe_stability", "image-space stability probe"},
      {"probe-local", "probe_local", "solution-space posedness probe"},
      {"rates", "rates", "error against noise level for one source"},
      {"saturation", "saturation", "rate caps across source smoothness"},
  };

  CommonFlags flags[std::size(commands)];
  for (size_t i = 0; i < std::size(commands); ++i) {
    CLI::App* cmd = app.add_subcommand(commands[i].name, commands[i].help);
    add_common(cmd, flags[i]);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (size_t i = 0; i < std::size(commands); ++i) {
      if (app.got_subcommand(commands[i].name)) return run(commands[i].experiment, flags[i]);
    }
  } catch (const illab::Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
