#include "onestage/compiler.hpp"

#include <cstdio>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "onestage/util.hpp"

namespace onestage {

using nlohmann::ordered_json;

void MixSpec::validate() const {
  if (weight_transformed < 0.0 || weight_native < 0.0) {
    throw std::invalid_argument("mix weights must be non-negative");
  }
  if (weight_transformed + weight_native <= 0.0) {
    throw std::invalid_argument("at least one mix weight must be positive");
  }
  if (shard_size == 0) throw std::invalid_argument("shard_size must be positive");
}

std::string shard_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "shard-%05zu.jsonl", index);
  return buf;
}

namespace {

ordered_json counts_to_json(const std::map<std::string, std::uint64_t>& counts) {
  ordered_json j = ordered_json::object();
  for (const auto& [key, value] : counts) j[key] = value;
  return j;
}

std::map<std::string, std::uint64_t> counts_from_json(const nlohmann::json& j) {
  std::map<std::string, std::uint64_t> counts;
  for (auto it = j.begin(); it != j.end(); ++it) counts[it.key()] = it->get<std::uint64_t>();
  return counts;
}

void tally(const InstructionPair& pair, DatasetManifest& manifest) {
  ++manifest.by_provenance[to_string(pair.provenance)];
  ++manifest.by_genre[to_string(pair.genre)];
  ++manifest.by_language[to_string(pair.language)];
}

}  // namespace

std::string DatasetManifest::to_json() const {
  ordered_json j;
  j["total"] = total;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  ordered_json shard_list = ordered_json::array();
  for (const auto& shard : shards) {
    ordered_json s;
    s["file"] = shard.file;
    s["count"] = shard.count;
    s["sha256"] = shard.sha256;
    shard_list.push_back(std::move(s));
  }
  j["shards"] = std::move(shard_list);
  j["by_provenance"] = counts_to_json(by_provenance);
  j["by_genre"] = counts_to_json(by_genre);
  j["by_language"] = counts_to_json(by_language);
  j["class_exhausted"] = class_exhausted;
  return j.dump(2) + "\n";
}

std::optional<DatasetManifest> DatasetManifest::from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (!j.is_object()) return std::nullopt;
  DatasetManifest manifest;
  try {
    manifest.total = j.at("total").get<std::uint64_t>();
    manifest.seed = j.at("seed").get<std::uint64_t>();
    manifest.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& s : j.at("shards")) {
      ShardInfo shard;
      shard.file = s.at("file").get<std::string>();
      shard.count = s.at("count").get<std::uint64_t>();
      shard.sha256 = s.at("sha256").get<std::string>();
      manifest.shards.push_back(std::move(shard));
    }
    manifest.by_provenance = counts_from_json(j.at("by_provenance"));
    manifest.by_genre = counts_from_json(j.at("by_genre"));
    manifest.by_language = counts_from_json(j.at("by_language"));
    if (j.contains("class_exhausted")) {
      for (const auto& name : j.at("class_exhausted")) {
        manifest.class_exhausted.push_back(name.get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  return manifest;
}

DatasetManifest compile_dataset(const std::vector<InstructionPair>& transformed,
                                const std::vector<InstructionPair>& native, const MixSpec& spec,
                                const std::filesystem::path& out_dir,
                                const std::string& config_hash) {
  spec.validate();
  if (transformed.empty() && native.empty()) {
    throw std::invalid_argument("compile_dataset: no records to compile");
  }
  std::filesystem::create_directories(out_dir);

  DatasetManifest manifest;
  manifest.seed = spec.seed;
  manifest.config_hash = config_hash;
  if (transformed.empty() && spec.weight_transformed > 0.0) {
    manifest.class_exhausted.push_back(to_string(Provenance::transformed_pretrain));
  }
  if (native.empty() && spec.weight_native > 0.0) {
    manifest.class_exhausted.push_back(to_string(Provenance::native_sft));
  }

  // Per-class draw order, shuffled independently of the interleave stream.
  std::vector<std::size_t> order_t(transformed.size()), order_n(native.size());
  for (std::size_t i = 0; i < order_t.size(); ++i) order_t[i] = i;
  for (std::size_t i = 0; i < order_n.size(); ++i) order_n[i] = i;
  auto gen_t = seeded_engine(spec.seed, 1);
  auto gen_n = seeded_engine(spec.seed, 2);
  seeded_shuffle(order_t, gen_t);
  seeded_shuffle(order_n, gen_n);

  auto chooser = seeded_engine(spec.seed, 0);
  std::size_t next_t = 0;
  std::size_t next_n = 0;

  std::string shard_body;
  std::uint64_t shard_count = 0;
  auto flush_shard = [&]() {
    if (shard_count == 0) return;
    ShardInfo shard;
    shard.file = shard_file_name(manifest.shards.size());
    shard.count = shard_count;
    atomic_write_file(out_dir / shard.file, shard_body);
    shard.sha256 = sha256_hex(shard_body);
    manifest.shards.push_back(std::move(shard));
    shard_body.clear();
    shard_count = 0;
  };

  while (next_t < order_t.size() || next_n < order_n.size()) {
    double wt = next_t < order_t.size() ? spec.weight_transformed : 0.0;
    double wn = next_n < order_n.size() ? spec.weight_native : 0.0;
    // A zero-weight class still drains once the other side is exhausted, so
    // every input record lands in exactly one shard.
    if (wt + wn <= 0.0) {
      wt = next_t < order_t.size() ? 1.0 : 0.0;
      wn = next_n < order_n.size() ? 1.0 : 0.0;
    }
    bool pick_transformed;
    if (wt > 0.0 && wn > 0.0) {
      pick_transformed = uniform_unit(chooser) < wt / (wt + wn);
    } else {
      pick_transformed = wt > 0.0;
    }
    const InstructionPair& pair =
        pick_transformed ? transformed[order_t[next_t++]] : native[order_n[next_n++]];
    tally(pair, manifest);
    shard_body += pair_to_json_line(pair);
    shard_body += '\n';
    ++manifest.total;
    if (++shard_count == spec.shard_size) flush_shard();
  }
  flush_shard();

  atomic_write_file(out_dir / "manifest.json", manifest.to_json());
  return manifest;
}

namespace {

void add_problem(std::vector<VerifyProblem>* problems, std::string where, std::string detail) {
  if (problems) problems->push_back({std::move(where), std::move(detail)});
}

}  // namespace

bool verify_manifest(const std::filesystem::path& manifest_path,
                     const std::string& expected_config_hash,
                     std::vector<VerifyProblem>* problems) {
  std::string text;
  try {
    text = read_file(manifest_path);
  } catch (const std::exception& e) {
    add_problem(problems, "manifest", e.what());
    return false;
  }
  auto manifest = DatasetManifest::from_json(text);
  if (!manifest) {
    add_problem(problems, "manifest", "not a valid dataset manifest");
    return false;
  }

  bool ok = true;
  if (!expected_config_hash.empty() && manifest->config_hash != expected_config_hash) {
    add_problem(problems, "manifest",
                "config hash mismatch: manifest has " + manifest->config_hash);
    ok = false;
  }

  auto dir = manifest_path.parent_path();
  std::uint64_t recount_total = 0;
  std::map<std::string, std::uint64_t> by_provenance, by_genre, by_language;
  for (const auto& shard : manifest->shards) {
    auto path = dir / shard.file;
    if (!std::filesystem::exists(path)) {
      add_problem(problems, shard.file, "missing shard file");
      ok = false;
      continue;
    }
    std::string body;
    try {
      body = read_file(path);
    } catch (const std::exception& e) {
      add_problem(problems, shard.file, e.what());
      ok = false;
      continue;
    }
    if (sha256_hex(body) != shard.sha256) {
      add_problem(problems, shard.file, "content hash mismatch");
      ok = false;
    }
    std::uint64_t lines = 0;
    std::size_t start = 0;
    bool parse_ok = true;
    while (start < body.size()) {
      std::size_t end = body.find('\n', start);
      if (end == std::string::npos) end = body.size();
      std::string_view line(body.data() + start, end - start);
      start = end + 1;
      if (line.empty()) continue;
      ++lines;
      auto pair = pair_from_json_line(line);
      if (!pair) {
        parse_ok = false;
        continue;
      }
      ++by_provenance[to_string(pair->provenance)];
      ++by_genre[to_string(pair->genre)];
      ++by_language[to_string(pair->language)];
    }
    if (!parse_ok) {
      add_problem(problems, shard.file, "unparseable record");
      ok = false;
    }
    if (lines != shard.count) {
      add_problem(problems, shard.file,
                  "record count mismatch: manifest says " + std::to_string(shard.count) +
                      ", found " + std::to_string(lines));
      ok = false;
    }
    recount_total += lines;
  }

  if (recount_total != manifest->total) {
    add_problem(problems, "manifest",
                "total mismatch: manifest says " + std::to_string(manifest->total) + ", found " +
                    std::to_string(recount_total));
    ok = false;
  }
  if (by_provenance != manifest->by_provenance) {
    add_problem(problems, "manifest", "by_provenance tally mismatch");
    ok = false;
  }
  if (by_genre != manifest->by_genre) {
    add_problem(problems, "manifest", "by_genre tally mismatch");
    ok = false;
  }
  if (by_language != manifest->by_language) {
    add_problem(problems, "manifest", "by_language tally mismatch");
    ok = false;
  }
  return ok;
}

}  // namespace onestage
