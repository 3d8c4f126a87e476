#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "onestage/compiler.hpp"
#include "onestage/config.hpp"

namespace onestage {

struct StageOutcome {
  std::string stage;
  bool skipped = false;  // inputs and config unchanged, outputs intact
  double elapsed_ms = 0.0;
};

// Runs the stages ingest -> filter -> dedup -> unify -> compile -> train
// -> eval inside the configured workdir. Each stage re-executes only when
// the hash of (config semantics + input file contents) differs from its
// stamp; a crashed stage leaves an .inprogress sentinel that forces a
// rerun. All stage outputs are free of timestamps and absolute paths, so
// equal configs and inputs give byte-identical results.
class Pipeline {
 public:
  // force_mock overrides the configured rewriter with the deterministic
  // mock backend (the --mock-rewriter flag).
  Pipeline(RunConfig config, bool force_mock);

  static const std::vector<std::string>& stage_names();

  // Throws std::runtime_error (prefixed with the stage name) on failure.
  StageOutcome run_stage(const std::string& name);
  std::vector<StageOutcome> run_all();

  // Re-checks the compiled dataset against its manifest.
  bool verify(std::vector<VerifyProblem>* problems) const;

  const RunConfig& config() const { return config_; }
  std::filesystem::path stage_dir(const std::string& name) const;

 private:
  struct StagePlan {
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
  };

  StagePlan plan_for(const std::string& name) const;
  std::string stamp_value(const std::string& name, const StagePlan& plan) const;
  bool up_to_date(const std::string& name, const StagePlan& plan) const;

  void run_ingest();
  void run_filter();
  void run_dedup();
  void run_unify();
  void run_compile();
  void run_train();
  void run_eval();

  RunConfig config_;
  bool force_mock_ = false;
  std::string config_hash_;
};

}  // namespace onestage
