// wishart_cone: parameter checks, sampling and Laplace-transform
// certification of Wishart distributions from JSON experiment configs.
//
//   wishart_cone check   --config cfg.json
//   wishart_cone sample  --config cfg.json --out samples.csv [--seed N]
//   wishart_cone certify --config cfg.json --out probes.csv [--min-samples N]
//   wishart_cone divide  --config cfg.json [--out probes.csv]
//
// Exit status: 0 success, 2 bad input, 3 parameters outside the domain,
// 4 certification failure, 1 I/O error.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wishart_cone.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Wishart distributions on the PSD cone: domain checks, sampling, certification"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  std::size_t min_samples = 0;

  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--seed", seed, "Override the config's sampling seed");
    sub->add_option("--min-samples", min_samples, "Fail certification below this sample count");
    if (with_out) sub->add_option("--out", out_path, "Output CSV path");
  };
  CLI::App* check = app.add_subcommand("check", "Rank, Gindikin branch, existence, divisibility");
  CLI::App* sample = app.add_subcommand("sample", "Draw a batch and write it as CSV");
  CLI::App* certify = app.add_subcommand("certify", "Certify the sampler against the closed-form transform");
  CLI::App* divide = app.add_subcommand("divide", "Infinite-divisibility demonstration");
  add_common(check, false);
  add_common(sample, true);
  add_common(certify, true);
  add_common(divide, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : wishart_cone::kExitParse;
  }

  wishart_cone::RunOptions opts;
  if (!out_path.empty()) opts.out_path = out_path;
  for (CLI::App* sub : {check, sample, certify, divide}) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed") > 0) opts.seed_override = seed;
    opts.min_samples = min_samples;
    return wishart_cone::run_command(sub->get_name(), config_path, opts, std::cout, std::cerr);
  }
  return wishart_cone::kExitParse;
}
