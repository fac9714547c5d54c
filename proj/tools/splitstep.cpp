#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "splitstep/experiment.hpp"

namespace {

int dispatch(const std::string& command, const std::string& config_path) {
  const splitstep::ExperimentConfig cfg = splitstep::parse_config_file(config_path);
  if (command == "run") return splitstep::cmd_run(cfg, std::cout);
  if (command == "converge") return splitstep::cmd_converge(cfg, std::cout);
  if (command == "validate") return splitstep::cmd_validate(cfg, std::cout);
  return splitstep::cmd_monitor(cfg, std::cout);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Domain-decomposition sum splitting for nonlinear parabolic problems"};
  app.require_subcommand(1);

  std::string config_path;
  const std::pair<const char*, const char*> commands[] = {
      {"run", "march one trajectory; writes trajectory.csv and summary.txt"},
      {"converge", "step-size sweep against exact/reference; writes convergence.csv"},
      {"validate", "check structural assumptions; writes validate.txt"},
      {"monitor", "a priori stability terms across a sweep; writes monitor.csv"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "experiment config file")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    return dispatch(app.get_subcommands().front()->get_name(), config_path);
  } catch (const splitstep::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const splitstep::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what();
    if (e.step >= 0) std::cerr << " (step " << e.step << ")";
    std::cerr << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
