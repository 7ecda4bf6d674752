#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ergokit/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitUnknownComponent = 3;
constexpr int kExitSchema = 4;

int guarded(const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ergokit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ergokit::UnknownComponent& e) {
    std::cerr << "unknown component: " << e.what() << "\n";
    return kExitUnknownComponent;
  } catch (const ergokit::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergokit: non-ergodic reward process toolkit"};
  app.require_subcommand(1);

  // analyze-chain
  auto* analyze = app.add_subcommand("analyze-chain", "classify the chain induced by a policy");
  analyze->alias("chainlint");
  std::string mdp_path;
  std::string policy_path;
  std::string dot_path;
  analyze->add_option("--mdp", mdp_path, "MDP spec file (JSON)")->required();
  analyze->add_option("--policy", policy_path, "policy file (JSON)");
  analyze->add_option("--dot", dot_path, "write DOT condensation graph here");

  // run
  auto* run = app.add_subcommand("run", "run a configured experiment");
  std::string run_config;
  run->add_option("config", run_config, "experiment config (JSON)")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run a parameter-grid sweep");
  std::string sweep_config;
  sweep->add_option("config", sweep_config, "sweep config (JSON)")->required();

  // plot
  auto* plot = app.add_subcommand("plot", "render CSV outputs as SVG");
  std::vector<std::string> plot_inputs;
  std::string plot_kind = "trajectories";
  std::string plot_out;
  std::string plot_column;
  plot->add_option("inputs", plot_inputs, "input CSV files")->required();
  plot->add_option("--kind", plot_kind, "trajectories|preference|curve|transformation|gap");
  plot->add_option("--out", plot_out, "output SVG path")->required();
  plot->add_option("--column", plot_column, "y column for --kind curve");

  // list
  auto* list = app.add_subcommand("list", "list registered components");

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed()) {
    return guarded([&] {
      std::optional<std::filesystem::path> policy;
      if (!policy_path.empty()) policy = policy_path;
      const auto result = ergokit::analyze_chain_files(mdp_path, policy, !dot_path.empty());
      std::cout << result.report_text;
      if (!dot_path.empty()) {
        std::ofstream dot(dot_path);
        dot << result.dot_text;
      }
    });
  }
  if (run->parsed()) {
    return guarded([&] {
      const auto config = ergokit::ExperimentConfig::load(run_config);
      const auto result = ergokit::run_experiment(config);
      std::cout << "wrote " << result.files.size() << " files to " << result.output_dir.string()
                << "\n";
    });
  }
  if (sweep->parsed()) {
    return guarded([&] {
      const auto config = ergokit::ExperimentConfig::load(sweep_config);
      const auto result = ergokit::sweep_experiment(config);
      std::cout << "wrote " << result.files.size() << " files to " << result.output_dir.string()
                << "\n";
    });
  }
  if (plot->parsed()) {
    return guarded([&] {
      ergokit::PlotRequest req;
      for (const auto& p : plot_inputs) req.inputs.push_back(p);
      req.kind = plot_kind;
      req.output = plot_out;
      req.y_column = plot_column;
      ergokit::render_plot(req);
    });
  }
  if (list->parsed()) {
    std::cout << "environments:";
    for (const auto& e : ergokit::registered_environments()) std::cout << ' ' << e;
    std::cout << "\nalgorithms:";
    for (const auto& a : ergokit::registered_algorithms()) std::cout << ' ' << a;
    std::cout << "\n";
  }
  return kExitOk;
}
