#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "onestage/config.hpp"
#include "onestage/demo.hpp"
#include "onestage/pipeline.hpp"

namespace {

// Exit codes: 0 success, 2 configuration problem, 3 stage failure,
// 4 dataset/manifest mismatch. CLI11 reports usage errors itself.
constexpr int kExitConfigError = 2;
constexpr int kExitStageError = 3;
constexpr int kExitVerifyMismatch = 4;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  bool mock_rewriter = false;
};

void add_common_options(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "pipeline configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args->seed, "override the configured random seed");
  cmd->add_option("--jobs", args->jobs, "override the configured worker count");
  cmd->add_flag("--mock-rewriter", args->mock_rewriter,
                "force the deterministic offline rewriter regardless of config");
}

// `command` is a stage name, "run-all", or "verify".
int run_command(const CommonArgs& args, const std::string& command) {
  onestage::RunConfig cfg;
  try {
    cfg = onestage::load_run_config(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (args.jobs) cfg.jobs = *args.jobs;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    onestage::Pipeline pipeline(cfg, args.mock_rewriter);

    if (command == "verify") {
      std::vector<onestage::VerifyProblem> problems;
      if (pipeline.verify(&problems)) {
        std::cout << "verify: dataset matches its manifest\n";
        return 0;
      }
      for (const auto& p : problems) {
        std::cerr << "verify: " << p.where << ": " << p.detail << '\n';
      }
      return kExitVerifyMismatch;
    }

    std::vector<onestage::StageOutcome> outcomes;
    if (command == "run-all") {
      outcomes = pipeline.run_all();
    } else {
      outcomes.push_back(pipeline.run_stage(command));
    }
    for (const auto& outcome : outcomes) {
      if (outcome.skipped) {
        std::cout << outcome.stage << ": up to date\n";
      } else {
        char elapsed[32];
        std::snprintf(elapsed, sizeof(elapsed), "%.0f", outcome.elapsed_ms);
        std::cout << outcome.stage << ": done in " << elapsed << " ms\n";
      }
    }
    if (command == "run-all") {
      std::cout << "outputs: " << cfg.outputs_dir.string() << '\n';
      std::cout << "config hash: " << cfg.config_hash() << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStageError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bilingual corpus -> unified instruction dataset -> toy model, in one pass"};
  app.require_subcommand(0, 1);

  CommonArgs args;
  std::string top_level_stage;

  std::vector<std::string> stage_like = onestage::Pipeline::stage_names();
  stage_like.push_back("run-all");

  // Stage selection either as a subcommand (`onestage filter --config ...`)
  // or via --stage (`onestage --stage filter --config ...`).
  app.add_option("--config", args.config_path, "pipeline configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--stage", top_level_stage, "stage to run (or run-all)")
      ->check(CLI::IsMember(stage_like));
  app.add_option("--seed", args.seed, "override the configured random seed");
  app.add_option("--jobs", args.jobs, "override the configured worker count");
  app.add_flag("--mock-rewriter", args.mock_rewriter,
               "force the deterministic offline rewriter regardless of config");

  for (const auto& name : onestage::Pipeline::stage_names()) {
    auto* cmd = app.add_subcommand(name, "run the " + name + " stage");
    add_common_options(cmd, &args);
  }
  add_common_options(app.add_subcommand("run-all", "run every stage in order"), &args);
  add_common_options(
      app.add_subcommand("verify", "re-check the compiled dataset against its manifest"), &args);

  std::string demo_dir = "data/demo";
  std::uint64_t demo_seed = 7;
  auto* gen_demo = app.add_subcommand("gen-demo", "write the bundled demo corpus and config");
  gen_demo->add_option("--out", demo_dir, "output directory")->capture_default_str();
  gen_demo->add_option("--seed", demo_seed, "generator seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (gen_demo->parsed()) {
    try {
      onestage::write_demo_corpus(demo_dir, demo_seed);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitStageError;
    }
    std::cout << "demo corpus written to " << demo_dir << '\n';
    return 0;
  }

  std::string command;
  for (const auto* cmd : app.get_subcommands()) command = cmd->get_name();
  if (command.empty()) command = top_level_stage;
  if (command.empty()) {
    std::cerr << app.help();
    return kExitConfigError;
  }
  if (args.config_path.empty()) {
    std::cerr << "error: --config is required\n";
    return kExitConfigError;
  }
  return run_command(args, command);
}
