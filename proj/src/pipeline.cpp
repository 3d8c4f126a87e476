#include "onestage/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <memory>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "onestage/eval.hpp"
#include "onestage/log.hpp"
#include "onestage/rewriter.hpp"
#include "onestage/unify.hpp"
#include "onestage/util.hpp"

namespace onestage {

namespace {

using nlohmann::ordered_json;

// Buffered line sink writing through a temp file; nothing lands on the
// real path until commit(), so interrupted stages never leave a
// half-written output behind.
class LineSink {
 public:
  explicit LineSink(std::filesystem::path path) : path_(std::move(path)) {}

  void line(std::string_view text) {
    buffer_ += text;
    buffer_ += '\n';
    ++count_;
  }

  std::uint64_t count() const { return count_; }

  void commit() { atomic_write_file(path_, buffer_); }

 private:
  std::filesystem::path path_;
  std::string buffer_;
  std::uint64_t count_ = 0;
};

std::vector<RawDocument> load_documents(const std::filesystem::path& path) {
  std::vector<RawDocument> docs;
  for_each_line(path, [&](std::string_view line, std::size_t lineno) {
    auto doc = document_from_json_line(line);
    if (!doc) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": unreadable document record");
    }
    docs.push_back(std::move(*doc));
  });
  return docs;
}

std::vector<InstructionPair> load_pairs(const std::filesystem::path& path) {
  std::vector<InstructionPair> pairs;
  for_each_line(path, [&](std::string_view line, std::size_t lineno) {
    auto pair = pair_from_json_line(line);
    if (!pair) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": unreadable pair record");
    }
    pairs.push_back(std::move(*pair));
  });
  return pairs;
}

std::string verdict_to_json_line(const QualityVerdict& verdict) {
  ordered_json j;
  j["doc_id"] = verdict.doc_id;
  j["kept"] = verdict.kept;
  if (verdict.reject_reason) j["reject_reason"] = *verdict.reject_reason;
  ordered_json scores = ordered_json::object();
  for (const auto& [name, value] : verdict.scores) scores[name] = value;
  j["scores"] = std::move(scores);
  return j.dump();
}

}  // namespace

Pipeline::Pipeline(RunConfig config, bool force_mock)
    : config_(std::move(config)), force_mock_(force_mock) {
  config_.validate();
  config_hash_ = config_.config_hash();
}

const std::vector<std::string>& Pipeline::stage_names() {
  static const std::vector<std::string> kNames = {"ingest", "filter", "dedup", "unify",
                                                  "compile", "train", "eval"};
  return kNames;
}

std::filesystem::path Pipeline::stage_dir(const std::string& name) const {
  if (name == "compile" || name == "train" || name == "eval") return config_.outputs_dir;
  return config_.workdir / name;
}

Pipeline::StagePlan Pipeline::plan_for(const std::string& name) const {
  StagePlan plan;
  const auto& workdir = config_.workdir;
  const auto& outputs = config_.outputs_dir;
  if (name == "ingest") {
    for (const auto& input : config_.inputs) plan.inputs.push_back(input.path);
    plan.outputs = {workdir / "ingest" / "docs.jsonl", workdir / "ingest" / "manifest.json"};
  } else if (name == "filter") {
    plan.inputs = {workdir / "ingest" / "docs.jsonl"};
    for (const auto& [lang, path] : config_.lexicons.domain) plan.inputs.push_back(path);
    for (const auto& [lang, path] : config_.lexicons.ads) plan.inputs.push_back(path);
    plan.outputs = {workdir / "filter" / "kept.jsonl",
                    workdir / "filter" / "selection_report.json",
                    workdir / "filter" / "verdicts.jsonl"};
  } else if (name == "dedup") {
    plan.inputs = {workdir / "filter" / "kept.jsonl"};
    plan.outputs = {workdir / "dedup" / "kept.jsonl", workdir / "dedup" / "removed_ids.txt",
                    workdir / "dedup" / "clusters.json"};
  } else if (name == "unify") {
    plan.inputs = {workdir / "dedup" / "kept.jsonl"};
    if (config_.unify.ethics_rules) plan.inputs.push_back(*config_.unify.ethics_rules);
    if (config_.unify.native_pairs) plan.inputs.push_back(*config_.unify.native_pairs);
    plan.outputs = {workdir / "unify" / "pairs.jsonl", workdir / "unify" / "native.jsonl",
                    workdir / "unify" / "unify_report.json"};
  } else if (name == "compile") {
    plan.inputs = {workdir / "unify" / "pairs.jsonl", workdir / "unify" / "native.jsonl"};
    plan.outputs = {outputs / "manifest.json"};
  } else if (name == "train") {
    if (config_.train.config.mode == TrainMode::one_stage) {
      // The manifest embeds every shard's content hash, so hashing it
      // covers the shards transitively.
      plan.inputs = {outputs / "manifest.json"};
    } else {
      plan.inputs = {workdir / "dedup" / "kept.jsonl", workdir / "unify" / "native.jsonl"};
    }
    plan.outputs = {outputs / "loss_trace.csv", outputs / "model.ckpt"};
  } else if (name == "eval") {
    if (config_.eval.exam) plan.inputs.push_back(*config_.eval.exam);
    if (config_.eval.outputs) plan.inputs.push_back(*config_.eval.outputs);
    if (config_.eval.judge) plan.inputs.push_back(*config_.eval.judge);
    plan.outputs = {outputs / "eval_report.json", outputs / "eval_report.txt"};
    if (config_.eval.judge) plan.outputs.push_back(outputs / "pairwise.json");
  } else {
    throw std::runtime_error("unknown stage: " + name);
  }
  return plan;
}

std::string Pipeline::stamp_value(const std::string& name, const StagePlan& plan) const {
  std::string composite = name;
  composite += '\n';
  composite += config_hash_;
  composite += '\n';
  composite += force_mock_ ? "mock-override\n" : "";
  std::vector<std::string> digests;
  for (const auto& input : plan.inputs) digests.push_back(sha256_file_hex(input));
  std::sort(digests.begin(), digests.end());
  for (const auto& digest : digests) {
    composite += digest;
    composite += '\n';
  }
  return sha256_hex(composite);
}

bool Pipeline::up_to_date(const std::string& name, const StagePlan& plan) const {
  auto stamp_path = config_.workdir / "stamps" / (name + ".stamp");
  auto sentinel = config_.workdir / "stamps" / (name + ".inprogress");
  if (std::filesystem::exists(sentinel)) return false;
  if (!std::filesystem::exists(stamp_path)) return false;
  for (const auto& output : plan.outputs) {
    if (!std::filesystem::exists(output)) return false;
  }
  return read_file(stamp_path) == stamp_value(name, plan);
}

StageOutcome Pipeline::run_stage(const std::string& name) {
  StageOutcome outcome;
  outcome.stage = name;
  auto plan = plan_for(name);
  for (const auto& input : plan.inputs) {
    if (!std::filesystem::exists(input)) {
      throw std::runtime_error(name + ": missing input " + input.string() +
                               " (is the upstream stage complete?)");
    }
  }

  auto stamps = config_.workdir / "stamps";
  std::filesystem::create_directories(stamps);
  if (up_to_date(name, plan)) {
    outcome.skipped = true;
    log_event(name, "up_to_date");
    return outcome;
  }

  std::filesystem::create_directories(stage_dir(name));
  auto sentinel = stamps / (name + ".inprogress");
  atomic_write_file(sentinel, "running\n");
  log_event(name, "start");
  auto t0 = std::chrono::steady_clock::now();

  try {
    if (name == "ingest") run_ingest();
    else if (name == "filter") run_filter();
    else if (name == "dedup") run_dedup();
    else if (name == "unify") run_unify();
    else if (name == "compile") run_compile();
    else if (name == "train") run_train();
    else if (name == "eval") run_eval();
  } catch (const std::exception& e) {
    log_event(name, "failed", {{"error", e.what()}});
    throw std::runtime_error(name + ": " + e.what());
  }

  auto t1 = std::chrono::steady_clock::now();
  outcome.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  atomic_write_file(stamps / (name + ".stamp"), stamp_value(name, plan));
  std::filesystem::remove(sentinel);
  log_event(name, "done", {{"elapsed_ms", format_double(outcome.elapsed_ms)}});
  return outcome;
}

std::vector<StageOutcome> Pipeline::run_all() {
  std::vector<StageOutcome> outcomes;
  for (const auto& name : stage_names()) outcomes.push_back(run_stage(name));
  return outcomes;
}

bool Pipeline::verify(std::vector<VerifyProblem>* problems) const {
  return verify_manifest(config_.outputs_dir / "manifest.json", config_hash_, problems);
}

void Pipeline::run_ingest() {
  LineSink docs(config_.workdir / "ingest" / "docs.jsonl");
  CorpusStats stats;
  std::unordered_set<std::string> seen_ids;
  std::uint64_t skipped = 0;
  std::uint64_t cross_file_duplicates = 0;

  for (const auto& input : config_.inputs) {
    IngestOptions options;
    options.source_kind = input.kind;
    options.language_hint = input.language_hint;
    IngestStream stream(input.path, options);
    while (auto doc = stream.next()) {
      doc->id = input.name + "/" + doc->id;  // namespacing keeps ids unique across inputs
      if (!seen_ids.insert(doc->id).second) {
        ++cross_file_duplicates;
        continue;
      }
      stats.add(*doc);
      docs.line(document_to_json_line(*doc));
    }
    skipped += stream.stats().skipped;
    log_event("ingest", "input_done",
              {{"input", input.name}, {"yielded", std::to_string(stream.stats().yielded)}});
  }
  if (docs.count() == 0) throw std::runtime_error("no documents survived ingestion");
  docs.commit();
  atomic_write_file(config_.workdir / "ingest" / "manifest.json", stats_to_json(stats));
  log_event("ingest", "summary",
            {{"documents", std::to_string(stats.total_documents)},
             {"skipped", std::to_string(skipped)},
             {"cross_file_duplicates", std::to_string(cross_file_duplicates)}});
}

void Pipeline::run_filter() {
  FilterConfig filter = config_.filter;
  for (const auto& [lang, path] : config_.lexicons.domain) {
    filter.domain_lexicon[lang] = load_lexicon(path);
  }
  for (const auto& [lang, path] : config_.lexicons.ads) {
    filter.ad_keywords[lang] = load_term_list(path);
  }

  auto docs_path = config_.workdir / "ingest" / "docs.jsonl";
  auto open = [docs_path]() -> DocPull {
    auto input = std::make_shared<std::ifstream>(docs_path, std::ios::binary);
    if (!*input) throw std::runtime_error("cannot open " + docs_path.string());
    return [input, docs_path]() -> std::optional<RawDocument> {
      std::string line;
      while (std::getline(*input, line)) {
        if (line.empty()) continue;
        auto doc = document_from_json_line(line);
        if (!doc) throw std::runtime_error(docs_path.string() + ": unreadable document record");
        return doc;
      }
      return std::nullopt;
    };
  };

  LineSink kept(config_.workdir / "filter" / "kept.jsonl");
  std::vector<QualityVerdict> verdicts;
  SelectionReport report = select_corpus_stream(
      open, filter, [&](const RawDocument& doc) { kept.line(document_to_json_line(doc)); },
      &verdicts, config_.jobs);
  kept.commit();

  LineSink verdict_sink(config_.workdir / "filter" / "verdicts.jsonl");
  for (const auto& verdict : verdicts) verdict_sink.line(verdict_to_json_line(verdict));
  verdict_sink.commit();
  atomic_write_file(config_.workdir / "filter" / "selection_report.json", report.to_json());
  log_event("filter", "summary",
            {{"input", std::to_string(report.input_count)},
             {"kept", std::to_string(report.kept_count)},
             {"rate", format_double(report.selection_rate)}});
}

void Pipeline::run_dedup() {
  auto docs = load_documents(config_.workdir / "filter" / "kept.jsonl");

  auto exact = exact_dedup(docs);
  std::vector<std::string> skipped_short;
  auto signatures = batch_signatures(exact.kept, config_.dedup, config_.jobs, &skipped_short);
  auto result = near_duplicates(signatures, config_.dedup.threshold, config_.dedup.bands,
                                config_.dedup.rows);
  auto near_removed = removal_list(result.clusters);

  std::set<std::string> removed(exact.removed_ids.begin(), exact.removed_ids.end());
  removed.insert(near_removed.begin(), near_removed.end());

  LineSink kept(config_.workdir / "dedup" / "kept.jsonl");
  for (const auto& doc : exact.kept) {
    if (removed.count(doc.id) == 0) kept.line(document_to_json_line(doc));
  }
  kept.commit();

  std::string removed_txt;
  for (const auto& id : removed) {
    removed_txt += id;
    removed_txt += '\n';
  }
  atomic_write_file(config_.workdir / "dedup" / "removed_ids.txt", removed_txt);

  ordered_json clusters_json;
  clusters_json["exact_removed"] = exact.removed_ids;
  ordered_json cluster_list = ordered_json::array();
  for (const auto& cluster : result.clusters) {
    ordered_json c;
    c["representative"] = cluster.representative;
    c["members"] = cluster.members;
    cluster_list.push_back(std::move(c));
  }
  clusters_json["near_clusters"] = std::move(cluster_list);
  clusters_json["short_docs_kept"] = skipped_short.size();
  atomic_write_file(config_.workdir / "dedup" / "clusters.json", clusters_json.dump(2) + "\n");
  log_event("dedup", "summary",
            {{"input", std::to_string(docs.size())},
             {"exact_removed", std::to_string(exact.removed_ids.size())},
             {"near_removed", std::to_string(near_removed.size())},
             {"kept", std::to_string(docs.size() - removed.size())}});
}

void Pipeline::run_unify() {
  std::shared_ptr<RewriteBackend> backend;
  if (force_mock_ || config_.rewriter.mode == RewriterMode::mock) {
    backend = std::make_shared<MockBackend>();
  } else {
    backend = std::make_shared<HttpBackend>(config_.rewriter.endpoint);
  }
  RewriterOptions options;
  options.model_id = force_mock_ ? "mock" : config_.rewriter.model_id;
  options.max_retries = config_.rewriter.max_retries;
  options.max_in_flight = config_.rewriter.max_in_flight;
  options.backoff_base = std::chrono::milliseconds(config_.rewriter.backoff_ms);
  if (config_.rewriter.cache) options.cache_dir = config_.workdir / "cache" / "rewrites";
  Rewriter rewriter(backend, options);

  std::vector<EthicsRule> rules;
  if (config_.unify.ethics_rules) rules = load_ethics_rules(*config_.unify.ethics_rules);

  PairOptions pair_options;
  pair_options.max_chunk_chars = config_.unify.max_chunk_chars;
  pair_options.fallback_language = config_.target_language;
  pair_options.model_id = options.model_id;

  UnifyCounters counters;
  std::uint64_t transformed_kept = 0;
  std::uint64_t native_kept = 0;

  LineSink pairs_sink(config_.workdir / "unify" / "pairs.jsonl");
  auto docs_path = config_.workdir / "dedup" / "kept.jsonl";
  for_each_line(docs_path, [&](std::string_view line, std::size_t lineno) {
    auto doc = document_from_json_line(line);
    if (!doc) {
      throw std::runtime_error(docs_path.string() + ":" + std::to_string(lineno) +
                               ": unreadable document record");
    }
    for (const auto& pair : make_instruction_pairs(*doc, rewriter, pair_options, &counters)) {
      auto unified = unify_language(pair, config_.target_language, rewriter, &counters,
                                    options.model_id);
      if (!unified) continue;
      auto verdict = ethics_gate(*unified, rules);
      if (!verdict.kept) {
        ++counters.ethics_rejected;
        log_event("unify", "ethics_reject",
                  {{"pair_id", unified->pair_id}, {"rule", *verdict.matched_rule}});
        continue;
      }
      pairs_sink.line(pair_to_json_line(*unified));
      ++transformed_kept;
    }
  });
  pairs_sink.commit();

  LineSink native_sink(config_.workdir / "unify" / "native.jsonl");
  if (config_.unify.native_pairs) {
    for (const auto& pair : load_pairs(*config_.unify.native_pairs)) {
      if (pair.provenance != Provenance::native_sft) {
        throw std::runtime_error("native pairs file: " + pair.pair_id +
                                 " is not tagged native_sft");
      }
      auto unified = unify_language(pair, config_.target_language, rewriter, &counters,
                                    options.model_id);
      if (!unified) continue;
      auto verdict = ethics_gate(*unified, rules);
      if (!verdict.kept) {
        ++counters.ethics_rejected;
        continue;
      }
      native_sink.line(pair_to_json_line(*unified));
      ++native_kept;
    }
  }
  native_sink.commit();

  ordered_json report;
  report["chunks_total"] = counters.chunks_total;
  report["chunks_dropped"] = counters.chunks_dropped;
  report["pairs_dropped"] = counters.pairs_dropped;
  report["ethics_rejected"] = counters.ethics_rejected;
  report["transformed_kept"] = transformed_kept;
  report["native_kept"] = native_kept;
  auto rewriter_counters = rewriter.counters();
  report["rewriter_cache_hits"] = rewriter_counters.cache_hits;
  report["rewriter_backend_calls"] = rewriter_counters.backend_calls;
  report["rewriter_retries"] = rewriter_counters.retries;
  atomic_write_file(config_.workdir / "unify" / "unify_report.json", report.dump(2) + "\n");
  log_event("unify", "summary",
            {{"transformed", std::to_string(transformed_kept)},
             {"native", std::to_string(native_kept)},
             {"ethics_rejected", std::to_string(counters.ethics_rejected)}});
}

void Pipeline::run_compile() {
  auto transformed = load_pairs(config_.workdir / "unify" / "pairs.jsonl");
  auto native = load_pairs(config_.workdir / "unify" / "native.jsonl");
  MixSpec spec = config_.mix;
  spec.seed = config_.seed;
  auto manifest = compile_dataset(transformed, native, spec, config_.outputs_dir, config_hash_);

  std::vector<VerifyProblem> problems;
  if (!verify_manifest(config_.outputs_dir / "manifest.json", config_hash_, &problems)) {
    std::string detail = problems.empty() ? "unknown" : problems.front().where + ": " +
                                                            problems.front().detail;
    throw std::runtime_error("freshly compiled dataset failed verification: " + detail);
  }
  log_event("compile", "summary",
            {{"total", std::to_string(manifest.total)},
             {"shards", std::to_string(manifest.shards.size())}});
}

void Pipeline::run_train() {
  ByteTokenizer tokenizer;
  ModelDims dims{tokenizer.vocab_size(), config_.train.window, config_.train.embed_dim,
                 config_.train.hidden_dim};
  TrainConfig train_config = config_.train.config;
  train_config.seed = config_.seed;
  const std::size_t max_tokens = config_.train.max_example_tokens;
  std::uint64_t dropped = 0;

  auto truncate = [&](TokenizedExample example) -> std::optional<TokenizedExample> {
    if (example.token_ids.size() > max_tokens) {
      example.token_ids.resize(max_tokens);
      example.loss_mask.resize(max_tokens);
    }
    for (auto m : example.loss_mask) {
      if (m != 0) return example;
    }
    ++dropped;
    return std::nullopt;
  };

  TrainData data;
  if (train_config.mode == TrainMode::one_stage) {
    auto manifest_text = read_file(config_.outputs_dir / "manifest.json");
    auto manifest = DatasetManifest::from_json(manifest_text);
    if (!manifest) throw std::runtime_error("unreadable dataset manifest");
    for (const auto& shard : manifest->shards) {
      for (const auto& pair : load_pairs(config_.outputs_dir / shard.file)) {
        if (auto example = truncate(tokenize_with_mask(pair, tokenizer))) {
          data.mixed.push_back(std::move(*example));
        }
      }
    }
  } else {
    for (const auto& doc : load_documents(config_.workdir / "dedup" / "kept.jsonl")) {
      TokenizedExample example;
      example.pair_id = doc.id;
      example.token_ids = tokenizer.encode(doc.text);
      example.token_ids.push_back(tokenizer.eos_id());
      example.loss_mask.assign(example.token_ids.size(), 1);
      if (auto truncated = truncate(std::move(example))) {
        data.pretrain.push_back(std::move(*truncated));
      }
    }
    for (const auto& pair : load_pairs(config_.workdir / "unify" / "native.jsonl")) {
      if (auto example = truncate(tokenize_with_mask(pair, tokenizer))) {
        data.sft.push_back(std::move(*example));
      }
    }
  }

  auto result = train(dims, data, train_config);
  atomic_write_file(config_.outputs_dir / "loss_trace.csv", result.trace.to_csv());
  save_checkpoint(result.model, config_.outputs_dir / "model.ckpt");
  log_event("train", "summary",
            {{"examples",
              std::to_string(data.mixed.size() + data.pretrain.size() + data.sft.size())},
             {"dropped", std::to_string(dropped)},
             {"final_loss", format_double(result.trace.points.back().loss)}});
}

void Pipeline::run_eval() {
  if (!config_.eval.exam || !config_.eval.outputs) {
    // Nothing to score; still emit empty reports so downstream tooling
    // can rely on the files existing.
    BenchmarkReport empty;
    atomic_write_file(config_.outputs_dir / "eval_report.json", empty.to_json());
    atomic_write_file(config_.outputs_dir / "eval_report.txt", empty.to_text_table());
    log_event("eval", "skipped", {{"reason", "no exam/outputs configured"}});
    return;
  }
  auto items = load_exam_items(*config_.eval.exam);
  auto outputs = load_outputs(*config_.eval.outputs);
  auto report = score_benchmark(items, outputs);
  atomic_write_file(config_.outputs_dir / "eval_report.json", report.to_json());
  atomic_write_file(config_.outputs_dir / "eval_report.txt", report.to_text_table());
  log_event("eval", "summary",
            {{"items", std::to_string(items.size())},
             {"overall_accuracy", format_double(report.overall_accuracy)}});

  if (config_.eval.judge) {
    auto records = load_judge_records(*config_.eval.judge);
    auto counts = aggregate_pairwise(records);
    atomic_write_file(config_.outputs_dir / "pairwise.json", counts.to_json());
    log_event("eval", "pairwise",
              {{"win", std::to_string(counts.win)},
               {"tie", std::to_string(counts.tie)},
               {"fail", std::to_string(counts.fail)}});
  }
}

}  // namespace onestage
