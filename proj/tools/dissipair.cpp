#include <CLI11.hpp>

#include <iostream>

#include "dissipair/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Steady states, stability and squeezing of quadratic bosonic lattices with a pairing dissipator"};
  app.set_version_flag("--version", dissipair::version_string());
  app.require_subcommand(1);

  dissipair::CommandOptions opts;
  std::string out;
  int threads = 0;
  std::uint64_t seed = 0;
  for (const std::string& name : dissipair::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "JSON run configuration")->required();
    sub->add_option("--out", out, "output directory (overrides output.directory)");
    sub->add_option("--threads", threads, "worker threads (default: DISSIPAIR_THREADS or 1)");
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    if (name == "steady") sub->add_flag("--expect-unstable", opts.expect_unstable, "succeed only if the configuration is unstable");
    sub->callback([&, sub, name] {
      opts.command = name;
      if (sub->count("--out")) opts.out = out;
      if (sub->count("--threads")) opts.threads = threads;
      if (sub->count("--seed")) opts.seed = seed;
    });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dissipair::kExitConfig;
  }
  return dissipair::execute(opts);
}
