#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "hlx_app/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Hopf-Lax iterations and their verification"};
  app.require_subcommand(1);

  std::string config;
  hlx::app::CommandOptions opts;
  std::optional<double> eps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "Run configuration (JSON)")->required();
    sub->add_option("--eps", eps, "Target accuracy for the guarantee");
    sub->add_option("--seed", seed, "Monte Carlo seed");
    sub->add_option("--threads", threads, "Worker threads (default: OpenMP default)");
    sub->add_option("--out", out, "Output directory");
    sub->add_flag("--infimal", opts.infimal, "Use the infimal operators f -> -S(-f)");
  };
  CLI::App* iterate = app.add_subcommand("iterate", "Run the I/J iterations over the n list");
  CLI::App* verify = app.add_subcommand("verify", "Run the property suite");
  CLI::App* guarantee = app.add_subcommand("guarantee", "Pick n for a target accuracy and check it");
  for (CLI::App* sub : {iterate, verify, guarantee}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hlx::app::kExitConfig;
  }
  if (threads > 0) omp_set_num_threads(threads);
  opts.eps = eps;
  opts.seed = seed;
  if (out) opts.out = *out;

  if (iterate->parsed()) return hlx::app::cmd_iterate(config, opts, std::cout, std::cerr);
  if (verify->parsed()) return hlx::app::cmd_verify(config, opts, std::cout, std::cerr);
  return hlx::app::cmd_guarantee(config, opts, std::cout, std::cerr);
}
