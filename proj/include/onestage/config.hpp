#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "onestage/compiler.hpp"
#include "onestage/corpus.hpp"
#include "onestage/dedup.hpp"
#include "onestage/quality.hpp"
#include "onestage/trainer.hpp"

namespace onestage {

struct InputSpec {
  std::string name;
  std::filesystem::path path;
  SourceKind kind = SourceKind::web;
  std::optional<Language> language_hint;
};

enum class RewriterMode { mock, http };

struct RewriterSettings {
  RewriterMode mode = RewriterMode::mock;
  std::string endpoint;  // http mode only
  std::string model_id = "mock";
  int max_retries = 3;
  int max_in_flight = 4;
  int backoff_ms = 100;
  bool cache = true;  // disk cache under <workdir>/cache/rewrites
};

struct UnifySettings {
  std::size_t max_chunk_chars = 1000;
  std::optional<std::filesystem::path> ethics_rules;
  std::optional<std::filesystem::path> native_pairs;  // pre-existing sft pairs
};

struct LexiconPaths {
  std::map<Language, std::filesystem::path> domain;
  std::map<Language, std::filesystem::path> ads;
};

struct TrainSettings {
  TrainConfig config;  // seed is taken from the run seed at stage time
  int window = 16;
  int embed_dim = 32;
  int hidden_dim = 64;
  std::size_t max_example_tokens = 512;
};

struct EvalSettings {
  std::optional<std::filesystem::path> exam;
  std::optional<std::filesystem::path> outputs;
  std::optional<std::filesystem::path> judge;
};

// Everything a run needs, parsed from one sectioned key=value file.
// Relative paths resolve against the config file's directory.
struct RunConfig {
  std::filesystem::path workdir;
  std::filesystem::path outputs_dir;  // default <workdir>/outputs
  Language target_language = Language::zh;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::vector<InputSpec> inputs;
  FilterConfig filter;  // numeric knobs; lexicon files load at stage time
  LexiconPaths lexicons;
  DedupParams dedup;
  UnifySettings unify;
  RewriterSettings rewriter;
  MixSpec mix;  // seed is taken from the run seed at stage time
  TrainSettings train;
  EvalSettings eval;

  // Throws std::invalid_argument naming the offending section.key.
  void validate() const;

  // Sorted "section.key=value" lines covering every output-affecting
  // setting. Locations (workdir, file paths) stay out so the same run on
  // different roots hashes identically; file contents are covered by the
  // per-stage input digests instead.
  std::string canonical_semantics() const;
  std::string config_hash() const;  // sha256 of canonical_semantics()
};

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

const char* to_string(RewriterMode mode);

}  // namespace onestage
