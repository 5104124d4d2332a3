#include "hydrosddp/commands.hpp"
#include "hydrosddp/csv.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace hydrosddp;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3 };

int run(const std::string& command, const std::string& config_path, const CommandOptions& options) {
  try {
    const RunConfig config = apply_overrides(load_config(config_path), options);
    if (command == "linearize-wind") cmd_linearize_wind(config, options, std::cout);
    else if (command == "train") cmd_train(config, options, std::cout);
    else if (command == "simulate") cmd_simulate(config, options, std::cout);
    else if (command == "enumerate") cmd_enumerate(config, options, std::cout);
    else if (command == "bound") cmd_bound(config, options, std::cout);
    return kOk;
  } catch (const InfeasibleSubproblem& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const TrainingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const lp::NumericalFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const GraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    // SystemError, WindError, InvestmentError
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SDDP capacity expansion for hydro-thermal systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out = ".";
  std::string policy;
  std::uint64_t seed = 0;
  int iterations = 0, threads = 0, cadence = 0;
  bool reproducible = false;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"linearize-wind", "fit wind block slopes and write wind_slopes.csv"},
      {"train", "train a policy; writes policy.json, training_log.csv, investments.csv"},
      {"simulate", "simulate a trained policy; writes simulation_*.csv"},
      {"enumerate", "train at every point of the enumeration grid; writes enumeration.csv"},
      {"bound", "print the lower bound of a policy file"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--iterations", iterations, "training iterations")->check(CLI::PositiveNumber);
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--eval-cadence", cadence, "iterations between investment evaluations")->check(CLI::PositiveNumber);
    sub->add_option("--policy", policy, "policy file (default <out>/policy.json)");
    sub->add_flag("--reproducible", reproducible, "write zero wall times so logs are byte-identical");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfig;
  }

  CommandOptions options;
  options.out = out;
  options.policy = policy;
  options.reproducible = reproducible;
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed")) options.seed = seed;
    if (sub->count("--iterations")) options.iterations = iterations;
    if (sub->count("--threads")) options.threads = threads;
    if (sub->count("--eval-cadence")) options.eval_cadence = cadence;
    return run(sub->get_name(), config_path, options);
  }
  return kConfig;
}
