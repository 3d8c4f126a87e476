#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "onestage/unify.hpp"

namespace onestage {

struct MixSpec {
  double weight_transformed = 1.0;
  double weight_native = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t shard_size = 10000;  // records per shard file

  void validate() const;
};

struct ShardInfo {
  std::string file;  // name relative to the manifest's directory
  std::uint64_t count = 0;
  std::string sha256;
};

struct DatasetManifest {
  std::uint64_t total = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<ShardInfo> shards;
  std::map<std::string, std::uint64_t> by_provenance;
  std::map<std::string, std::uint64_t> by_genre;
  std::map<std::string, std::uint64_t> by_language;
  std::vector<std::string> class_exhausted;  // classes empty at input time

  std::string to_json() const;
  static std::optional<DatasetManifest> from_json(std::string_view text);
};

// Shuffles each provenance class with its own seeded generator, then
// interleaves draws without replacement, picking the next class with
// probability proportional to its weight among classes that still have
// records. Writes shard-%05d.jsonl files plus manifest.json into out_dir.
// Throws std::invalid_argument when both classes are empty.
DatasetManifest compile_dataset(const std::vector<InstructionPair>& transformed,
                                const std::vector<InstructionPair>& native, const MixSpec& spec,
                                const std::filesystem::path& out_dir,
                                const std::string& config_hash);

struct VerifyProblem {
  std::string where;  // shard file name or "manifest"
  std::string detail;
};

// Recounts every shard and re-derives the cell tallies; any mismatch
// (count, hash, missing file, total, or config hash) fails verification.
bool verify_manifest(const std::filesystem::path& manifest_path,
                     const std::string& expected_config_hash, std::vector<VerifyProblem>* problems);

std::string shard_file_name(std::size_t index);

}  // namespace onestage
