// npat: command-line driver for the nudging time-reversal toolkit.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "npat/commands.hpp"
#include "npat/config.hpp"
#include "npat/error.hpp"
#include "npat/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Back-and-forth nudging reconstruction for 2D photoacoustic data"};
  app.require_subcommand(1);

  std::string config_path;
  npat::CommandOptions opts;
  int threads = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (INI)")->required();
    sub->add_option("--out", opts.out_dir, "Output directory");
    sub->add_option("--threads", threads, "Worker threads (outputs do not depend on it)")->check(CLI::PositiveNumber);
    sub->add_option("--stride", opts.stride, "Write every S-th iterate (reconstruct)")->check(CLI::NonNegativeNumber);
  };
  auto* forward = app.add_subcommand("forward", "Simulate the phantom and record boundary traces");
  auto* reconstruct = app.add_subcommand("reconstruct", "Recover the initial state from recorded traces");
  auto* vc = app.add_subcommand("vc", "Check the visibility condition for the region K");
  auto* doi = app.add_subcommand("doi", "Travel times and domain of influence of the measurement set");
  auto* audit = app.add_subcommand("audit", "Energy balance audit of the stabilized solver");
  for (auto* sub : {forward, reconstruct, vc, doi, audit}) add_common(sub);
  reconstruct->add_option("--data", opts.data_dir, "Output directory of a forward run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    npat::set_threads(threads);
    const npat::RunConfig cfg = npat::load_config(config_path);
    if (forward->parsed()) npat::cmd_forward(cfg, opts);
    if (reconstruct->parsed()) npat::cmd_reconstruct(cfg, opts);
    if (vc->parsed()) npat::cmd_vc(cfg, opts);
    if (doi->parsed()) npat::cmd_doi(cfg, opts);
    if (audit->parsed()) npat::cmd_audit(cfg, opts);
  } catch (const npat::Error& e) {
    std::cerr << "npat: error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "npat: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
