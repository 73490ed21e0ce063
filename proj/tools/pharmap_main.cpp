#include <CLI11.hpp>
#include <string>

#include "pharmap/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pharmap: desk-scale laboratory for manifold-valued p-harmonic maps"};
  app.require_subcommand(1);

  std::string config_path;
  std::string outdir;
  bool strict = false;
  int threads = 0;

  const std::vector<std::string> commands = {"solve", "uniqueness", "nonuniqueness-demo",
                                             "oracles", "sweep"};
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--outdir", outdir, "output directory (overrides the config)");
    sub->add_flag("--strict", strict, "exit 3 when a solve does not converge");
    sub->add_option("--threads", threads, "concurrent trials (overrides the config)");
  }

  CLI11_PARSE(app, argc, argv);

  pharmap::CliOverrides overrides;
  overrides.command = app.get_subcommands().front()->get_name();
  if (!outdir.empty()) overrides.outdir = outdir;
  if (strict) overrides.strict = true;
  if (threads > 0) overrides.threads = threads;
  return pharmap::run(config_path, overrides);
}
