#include "onestage/config.hpp"

#include <algorithm>
#include <stdexcept>

#include "onestage/util.hpp"

namespace onestage {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& why) {
  throw std::invalid_argument("config: " + key + ": " + why);
}

std::uint64_t parse_u64(const std::string& key, std::string_view value) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(std::string(value), &used);
    if (used != value.size()) bad_value(key, "not an integer");
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, "not an integer");
  } catch (const std::out_of_range&) {
    bad_value(key, "out of range");
  }
}

int parse_int(const std::string& key, std::string_view value) {
  try {
    std::size_t used = 0;
    int v = std::stoi(std::string(value), &used);
    if (used != value.size()) bad_value(key, "not an integer");
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, "not an integer");
  } catch (const std::out_of_range&) {
    bad_value(key, "out of range");
  }
}

double parse_real(const std::string& key, std::string_view value) {
  try {
    std::size_t used = 0;
    double v = std::stod(std::string(value), &used);
    if (used != value.size()) bad_value(key, "not a number");
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, "not a number");
  } catch (const std::out_of_range&) {
    bad_value(key, "out of range");
  }
}

bool parse_bool(const std::string& key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, "expected true or false");
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view value) {
  std::filesystem::path p{std::string(value)};
  if (p.is_absolute()) return p;
  return base / p;
}

Language parse_config_language(const std::string& key, std::string_view value) {
  auto lang = parse_language(value);
  if (!lang || *lang == Language::other) bad_value(key, "must be zh or en");
  return *lang;
}

InputSpec parse_input(const std::string& key, std::string_view value,
                      const std::filesystem::path& base) {
  // NAME = path|kind[|lang]
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t bar = value.find('|', start);
    if (bar == std::string_view::npos) bar = value.size();
    fields.push_back(trim(value.substr(start, bar - start)));
    start = bar + 1;
  }
  if (fields.size() < 2 || fields.size() > 3) bad_value(key, "expected path|kind[|lang]");
  InputSpec spec;
  spec.name = key.substr(key.find('.') + 1);
  spec.path = resolve(base, fields[0]);
  auto kind = parse_source_kind(fields[1]);
  if (!kind) bad_value(key, "unknown source kind '" + std::string(fields[1]) + "'");
  spec.kind = *kind;
  if (fields.size() == 3 && !fields[2].empty()) {
    spec.language_hint = parse_config_language(key, fields[2]);
  }
  return spec;
}

}  // namespace

const char* to_string(RewriterMode mode) { return mode == RewriterMode::mock ? "mock" : "http"; }

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  std::string section;
  std::size_t lineno = 0;
  std::size_t start = 0;

  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    bool last = end == text.size();
    start = end + 1;
    ++lineno;
    if (line.empty() || line.front() == '#' || line.front() == ';') {
      if (last) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad section header");
      }
      section = std::string(line.substr(1, line.size() - 2));
      if (last) break;
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string name(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (section.empty() || name.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": key outside a section");
    }
    const std::string key = section + "." + name;

    if (section == "paths") {
      if (name == "workdir") cfg.workdir = resolve(base_dir, value);
      else if (name == "outputs") cfg.outputs_dir = resolve(base_dir, value);
      else bad_value(key, "unknown key");
    } else if (section == "run") {
      if (name == "target_language") cfg.target_language = parse_config_language(key, value);
      else if (name == "seed") cfg.seed = parse_u64(key, value);
      else if (name == "jobs") cfg.jobs = static_cast<unsigned>(parse_u64(key, value));
      else bad_value(key, "unknown key");
    } else if (section == "inputs") {
      cfg.inputs.push_back(parse_input(key, value, base_dir));
    } else if (section == "filter") {
      if (name == "min_chars") cfg.filter.min_chars = parse_u64(key, value);
      else if (name == "max_chars") cfg.filter.max_chars = parse_u64(key, value);
      else if (name == "max_punct_error_rate") cfg.filter.max_punct_error_rate = parse_real(key, value);
      else if (name == "max_ad_density") cfg.filter.max_ad_density = parse_real(key, value);
      else if (name == "min_domain_score") cfg.filter.min_domain_score = parse_real(key, value);
      else if (name == "target_rate") cfg.filter.target_rate = parse_real(key, value);
      else if (name == "lexicon_zh") cfg.lexicons.domain[Language::zh] = resolve(base_dir, value);
      else if (name == "lexicon_en") cfg.lexicons.domain[Language::en] = resolve(base_dir, value);
      else if (name == "ads_zh") cfg.lexicons.ads[Language::zh] = resolve(base_dir, value);
      else if (name == "ads_en") cfg.lexicons.ads[Language::en] = resolve(base_dir, value);
      else bad_value(key, "unknown key");
    } else if (section == "dedup") {
      if (name == "num_perms") cfg.dedup.num_perms = static_cast<std::size_t>(parse_u64(key, value));
      else if (name == "shingle_size") cfg.dedup.shingle_size = static_cast<std::size_t>(parse_u64(key, value));
      else if (name == "bands") cfg.dedup.bands = static_cast<std::size_t>(parse_u64(key, value));
      else if (name == "rows") cfg.dedup.rows = static_cast<std::size_t>(parse_u64(key, value));
      else if (name == "threshold") cfg.dedup.threshold = parse_real(key, value);
      else bad_value(key, "unknown key");
    } else if (section == "unify") {
      if (name == "max_chunk_chars") cfg.unify.max_chunk_chars = parse_u64(key, value);
      else if (name == "ethics_rules") cfg.unify.ethics_rules = resolve(base_dir, value);
      else if (name == "native_pairs") cfg.unify.native_pairs = resolve(base_dir, value);
      else bad_value(key, "unknown key");
    } else if (section == "rewriter") {
      if (name == "mode") {
        if (value == "mock") cfg.rewriter.mode = RewriterMode::mock;
        else if (value == "http") cfg.rewriter.mode = RewriterMode::http;
        else bad_value(key, "must be mock or http");
      } else if (name == "endpoint") cfg.rewriter.endpoint = std::string(value);
      else if (name == "model_id") cfg.rewriter.model_id = std::string(value);
      else if (name == "max_retries") cfg.rewriter.max_retries = parse_int(key, value);
      else if (name == "max_in_flight") cfg.rewriter.max_in_flight = parse_int(key, value);
      else if (name == "backoff_ms") cfg.rewriter.backoff_ms = parse_int(key, value);
      else if (name == "cache") cfg.rewriter.cache = parse_bool(key, value);
      else bad_value(key, "unknown key");
    } else if (section == "compile") {
      if (name == "weight_transformed") cfg.mix.weight_transformed = parse_real(key, value);
      else if (name == "weight_native") cfg.mix.weight_native = parse_real(key, value);
      else if (name == "shard_size") cfg.mix.shard_size = parse_u64(key, value);
      else bad_value(key, "unknown key");
    } else if (section == "train") {
      if (name == "mode") {
        auto mode = parse_train_mode(value);
        if (!mode) bad_value(key, "must be one_stage or two_stage");
        cfg.train.config.mode = *mode;
      } else if (name == "learning_rate") cfg.train.config.learning_rate = parse_real(key, value);
      else if (name == "batch_size") cfg.train.config.batch_size = parse_int(key, value);
      else if (name == "total_steps") cfg.train.config.total_steps = parse_int(key, value);
      else if (name == "stage_boundary") cfg.train.config.stage_boundary = parse_int(key, value);
      else if (name == "warmup_steps") cfg.train.config.warmup_steps = parse_int(key, value);
      else if (name == "window") cfg.train.window = parse_int(key, value);
      else if (name == "embed_dim") cfg.train.embed_dim = parse_int(key, value);
      else if (name == "hidden_dim") cfg.train.hidden_dim = parse_int(key, value);
      else if (name == "max_example_tokens") cfg.train.max_example_tokens = parse_u64(key, value);
      else bad_value(key, "unknown key");
    } else if (section == "eval") {
      if (name == "exam") cfg.eval.exam = resolve(base_dir, value);
      else if (name == "outputs") cfg.eval.outputs = resolve(base_dir, value);
      else if (name == "judge") cfg.eval.judge = resolve(base_dir, value);
      else bad_value(key, "unknown key");
    } else {
      throw std::invalid_argument("config: unknown section [" + section + "]");
    }
    if (last) break;
  }

  if (cfg.outputs_dir.empty() && !cfg.workdir.empty()) cfg.outputs_dir = cfg.workdir / "outputs";
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return parse_run_config(read_file(path), base);
}

void RunConfig::validate() const {
  if (workdir.empty()) throw std::invalid_argument("config: paths.workdir is required");
  if (target_language == Language::other) {
    throw std::invalid_argument("config: run.target_language must be zh or en");
  }
  if (jobs < 1) throw std::invalid_argument("config: run.jobs must be >= 1");
  if (inputs.empty()) throw std::invalid_argument("config: [inputs] needs at least one entry");
  for (const auto& input : inputs) {
    if (!std::filesystem::exists(input.path)) {
      throw std::invalid_argument("config: inputs." + input.name + ": no such file: " +
                                  input.path.string());
    }
  }
  auto check_exists = [](const char* key, const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) {
      throw std::invalid_argument(std::string("config: ") + key + ": no such file: " + p.string());
    }
  };
  for (const auto& [lang, path] : lexicons.domain) {
    check_exists(lang == Language::zh ? "filter.lexicon_zh" : "filter.lexicon_en", path);
  }
  for (const auto& [lang, path] : lexicons.ads) {
    check_exists(lang == Language::zh ? "filter.ads_zh" : "filter.ads_en", path);
  }
  if (unify.ethics_rules) check_exists("unify.ethics_rules", *unify.ethics_rules);
  if (unify.native_pairs) check_exists("unify.native_pairs", *unify.native_pairs);
  if (eval.exam) check_exists("eval.exam", *eval.exam);
  if (eval.outputs) check_exists("eval.outputs", *eval.outputs);
  if (eval.judge) check_exists("eval.judge", *eval.judge);

  filter.validate();
  dedup.validate();
  mix.validate();
  train.config.validate();
  if (unify.max_chunk_chars < 1) {
    throw std::invalid_argument("config: unify.max_chunk_chars must be >= 1");
  }
  if (rewriter.mode == RewriterMode::http && rewriter.endpoint.empty()) {
    throw std::invalid_argument("config: rewriter.endpoint is required in http mode");
  }
  if (rewriter.max_retries < 1) {
    throw std::invalid_argument("config: rewriter.max_retries must be >= 1");
  }
  if (rewriter.max_in_flight < 1) {
    throw std::invalid_argument("config: rewriter.max_in_flight must be >= 1");
  }
  if (rewriter.backoff_ms < 0) {
    throw std::invalid_argument("config: rewriter.backoff_ms must be >= 0");
  }
  ModelDims dims{259, train.window, train.embed_dim, train.hidden_dim};
  dims.validate();
  if (train.max_example_tokens < 8) {
    throw std::invalid_argument("config: train.max_example_tokens must be >= 8");
  }
}

std::string RunConfig::canonical_semantics() const {
  std::vector<std::string> lines;
  auto put = [&](const std::string& key, const std::string& value) {
    lines.push_back(key + "=" + value);
  };
  put("run.target_language", to_string(target_language));
  put("run.seed", std::to_string(seed));
  for (const auto& input : inputs) {
    std::string value = input.path.filename().string();
    value += "|";
    value += to_string(input.kind);
    value += "|";
    value += input.language_hint ? to_string(*input.language_hint) : "auto";
    put("inputs." + input.name, value);
  }
  put("filter.min_chars", std::to_string(filter.min_chars));
  put("filter.max_chars", std::to_string(filter.max_chars));
  put("filter.max_punct_error_rate", format_double(filter.max_punct_error_rate));
  put("filter.max_ad_density", format_double(filter.max_ad_density));
  put("filter.min_domain_score", format_double(filter.min_domain_score));
  put("filter.target_rate", filter.target_rate ? format_double(*filter.target_rate) : "none");
  put("dedup.num_perms", std::to_string(dedup.num_perms));
  put("dedup.shingle_size", std::to_string(dedup.shingle_size));
  put("dedup.bands", std::to_string(dedup.bands));
  put("dedup.rows", std::to_string(dedup.rows));
  put("dedup.threshold", format_double(dedup.threshold));
  put("unify.max_chunk_chars", std::to_string(unify.max_chunk_chars));
  put("rewriter.mode", to_string(rewriter.mode));
  put("rewriter.model_id", rewriter.model_id);
  put("compile.weight_transformed", format_double(mix.weight_transformed));
  put("compile.weight_native", format_double(mix.weight_native));
  put("compile.shard_size", std::to_string(mix.shard_size));
  put("train.mode", to_string(train.config.mode));
  put("train.learning_rate", format_double(train.config.learning_rate));
  put("train.batch_size", std::to_string(train.config.batch_size));
  put("train.total_steps", std::to_string(train.config.total_steps));
  if (train.config.stage_boundary) {
    put("train.stage_boundary", std::to_string(*train.config.stage_boundary));
  }
  if (train.config.warmup_steps) {
    put("train.warmup_steps", std::to_string(*train.config.warmup_steps));
  }
  put("train.window", std::to_string(train.window));
  put("train.embed_dim", std::to_string(train.embed_dim));
  put("train.hidden_dim", std::to_string(train.hidden_dim));
  put("train.max_example_tokens", std::to_string(train.max_example_tokens));

  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& line : lines) {
    out += line;
    out += '\n';
  }
  return out;
}

std::string RunConfig::config_hash() const { return sha256_hex(canonical_semantics()); }

}  // namespace onestage
