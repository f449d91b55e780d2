#include "commands.hpp"
#include "run_config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Flags {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  bool desk = false;
};

void add_common(CLI::App* sub, Flags& flags, bool config_required) {
  auto* opt = sub->add_option("--config,-c", flags.config, "run configuration (INI)");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  else opt->check(CLI::ExistingFile);
  sub->add_option("--output,-o", flags.output, "output directory (overrides run.output)");
  sub->add_option("--seed", flags.seed, "basis seed (overrides method.seed)");
  sub->add_flag("--desk", flags.desk, "apply the config's [desk] overrides");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized-neural-network collocation solver for steady neutron transport"};
  app.require_subcommand(1);
  Flags flags;
  std::string predicted, reference;

  auto* solve = app.add_subcommand("solve", "solve a benchmark and write flux.csv plus report.json");
  auto* baseline = app.add_subcommand("baseline", "discrete-ordinates reference solve (sn_flux.csv)");
  auto* verify = app.add_subcommand("verify", "manufactured-solution and graph-norm checks");
  auto* compare = app.add_subcommand("compare", "relative l2 and pointwise errors between two flux CSVs");
  add_common(solve, flags, true);
  add_common(baseline, flags, true);
  add_common(verify, flags, false);
  add_common(compare, flags, false);
  compare->add_option("predicted", predicted, "predicted flux CSV")->check(CLI::ExistingFile);
  compare->add_option("reference", reference, "reference flux CSV")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    using namespace rann::cli;
    RunConfig config = flags.config.empty() ? RunConfig{} : load_config(flags.config, flags.desk);
    if (flags.config.empty() && flags.desk) throw std::invalid_argument("--desk requires --config");
    if (!flags.output.empty()) config.output = flags.output;
    if (flags.seed) config.seed = *flags.seed;
    if (!predicted.empty()) config.predicted = predicted;
    if (!reference.empty()) config.compare_reference = reference;
    resolve(config);

    if (solve->parsed()) return run_solve(config, std::cout);
    if (baseline->parsed()) return run_baseline(config, std::cout);
    if (verify->parsed()) return run_verify(config, std::cout);
    return run_compare(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
