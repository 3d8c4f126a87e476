// Acceptance suite: eight end-to-end checks over the library and the CLI.
// Each criterion prints exactly one [PASS]/[FAIL] line; any failure (or a
// blown time budget) makes the process exit nonzero. All tolerances, seeds,
// and budgets are pinned as constants below so a regression cannot hide
// behind a loosened bound.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "onestage/compiler.hpp"
#include "onestage/corpus.hpp"
#include "onestage/dedup.hpp"
#include "onestage/eval.hpp"
#include "onestage/quality.hpp"
#include "onestage/rewriter.hpp"
#include "onestage/trainer.hpp"
#include "onestage/unify.hpp"
#include "onestage/util.hpp"

namespace {

using namespace onestage;
namespace fs = std::filesystem;

// ------------------------------------------------ pinned tolerances/budgets

// 1: selection quota on a large stream.
constexpr std::size_t kFilterInputDocs = 100000;
constexpr double kFilterTargetRate = 0.014;
constexpr std::uint64_t kFilterExpectedKept = 1400;  // ceil(rate * input)
constexpr double kFilterBudgetSeconds = 30.0;

// 2: pinned per-cell composition of the reference corpus manifest.
constexpr std::uint64_t kManifestExpectedTotal = 5203973;

// 3: duplicate sweep quality.
constexpr std::size_t kDedupUniqueDocs = 400;
constexpr std::size_t kDedupExactCopies = 50;
constexpr std::size_t kDedupNearCopies = 50;
constexpr double kDedupMaxMissRate = 0.05;     // planted near-duplicates missed
constexpr double kDedupMinTrueJaccard = 0.5;   // a confirmed pair below this is a false positive
constexpr double kDedupBudgetSeconds = 60.0;

// 4: mask invariance and gradient agreement.
constexpr std::uint64_t kMaskModelSeed = 0xacce5501u;
constexpr double kGradMaxRelError = 1e-3;
constexpr double kMaskBudgetSeconds = 10.0;

// 5: loss jump at the schedule boundary, across seeds.
constexpr std::uint64_t kBoundaryFirstSeed = 1;
constexpr int kBoundarySeedCount = 5;
constexpr int kBoundaryTotalSteps = 400;
constexpr int kBoundaryStep = 200;
constexpr int kBoundaryWindow = 20;
constexpr double kBoundaryDominance = 2.0;  // median two-stage >= 2x |median one-stage|
constexpr double kBoundaryBudgetSeconds = 300.0;

// 6: language unification purity.
constexpr std::size_t kUnifyEnglishDocs = 70;
constexpr std::size_t kUnifyChineseDocs = 30;
constexpr std::size_t kUnifyNativePairs = 20;
constexpr double kUnifyBudgetSeconds = 60.0;

// 7: exam scoring against a hand-counted oracle.
constexpr std::size_t kEvalItemCount = 500;
constexpr double kEvalAccuracyTolerance = 1e-12;
constexpr std::uint64_t kJudgeWins = 82;
constexpr std::uint64_t kJudgeTies = 13;
constexpr std::uint64_t kJudgeFails = 5;
constexpr double kEvalBudgetSeconds = 60.0;

// 8: CLI byte determinism.
constexpr double kCliBudgetSeconds = 300.0;

// ------------------------------------------------------------- scaffolding

class Failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values[values.size() / 2];  // callers pass odd-sized vectors
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path = fs::temp_directory_path() /
           ("onestage-acceptance-" + tag + "-" + std::to_string(static_cast<long long>(stamp)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

std::string shell_quote(const fs::path& p) { return "'" + p.string() + "'"; }

void run_command(const std::string& command, const fs::path& log) {
  std::string full = command + " > " + shell_quote(log) + " 2>&1";
  int status = std::system(full.c_str());
  if (status != 0) {
    std::string tail;
    try {
      tail = read_file(log);
    } catch (const std::exception&) {
    }
    if (tail.size() > 400) tail = tail.substr(tail.size() - 400);
    std::replace(tail.begin(), tail.end(), '\n', ' ');
    throw Failure("command failed (" + command + "): " + tail);
  }
}

// --------------------------------------- 1: filter keeps exactly the quota

std::string criterion_filter_quota() {
  FilterConfig cfg;
  cfg.min_chars = 20;
  cfg.max_chars = 4000;
  cfg.max_punct_error_rate = 0.3;
  cfg.max_ad_density = 0.02;
  cfg.min_domain_score = 0.01;
  cfg.ad_keywords[Language::zh] = {"点击购买"};
  cfg.domain_lexicon[Language::zh] = {{"患者", 1.0}, {"治疗", 1.0}, {"血压", 1.0}};
  cfg.target_rate = kFilterTargetRate;
  cfg.validate();

  // Per block of 100: 90 on-topic survivors, 3 too short, 3 ad-stuffed,
  // 4 off-topic. Exactly 90000 documents reach the ranking stage.
  std::vector<RawDocument> docs;
  docs.reserve(kFilterInputDocs);
  for (std::size_t i = 0; i < kFilterInputDocs; ++i) {
    RawDocument doc;
    doc.id = "doc-" + std::to_string(i);
    doc.source_kind = SourceKind::web;
    doc.language = Language::zh;
    std::size_t bucket = i % 100;
    if (bucket >= 90 && bucket < 93) {
      doc.text = "短。";
    } else if (bucket >= 93 && bucket < 96) {
      doc.text = "患者点击购买后咨询了医生。点击购买的药品需要谨慎,点击购买前请仔细阅读说明。";
    } else if (bucket >= 96) {
      doc.text = "这是一段与主题无关的普通文字记录,内容只谈天气和旅行见闻,既不涉及诊疗也不涉及健康。";
    } else {
      doc.text = "患者编号" + std::to_string(i) + "的血压记录保持稳定。经过治疗后症状缓解,随访显示恢复良好。";
      for (std::size_t k = 0; k < i % 3; ++k) doc.text += "继续治疗并按时复诊。";
    }
    docs.push_back(std::move(doc));
  }

  SelectionResult result = select_corpus(docs, cfg);
  const SelectionReport& report = result.report;
  require(report.input_count == kFilterInputDocs, "input count mismatch");
  require(report.kept_count == kFilterExpectedKept,
          "kept " + std::to_string(report.kept_count) + ", expected exactly " +
              std::to_string(kFilterExpectedKept));
  require(result.kept.size() == kFilterExpectedKept, "kept vector size disagrees with the report");
  require(!report.under_quota, "under_quota flagged despite ample survivors");

  std::uint64_t rejected = 0;
  for (const auto& [reason, count] : report.reject_histogram) rejected += count;
  require(report.kept_count + rejected == report.input_count,
          "kept + rejected does not conserve the input count");
  require(report.reject_histogram.at(kFilterLength) == 3000, "length rejects != 3000");
  require(report.reject_histogram.at(kFilterAds) == 3000, "ad rejects != 3000");
  require(report.reject_histogram.at(kFilterRelevance) == 4000, "relevance rejects != 4000");
  std::uint64_t expected_rank_cut = 90000 - kFilterExpectedKept;
  require(report.reject_histogram.at(kRejectRankCutoff) == expected_rank_cut,
          "rank cutoff rejects != " + std::to_string(expected_rank_cut));

  return "kept 1400 of 100000, rank cut " + std::to_string(expected_rank_cut);
}

// ----------------------------------- 2: corpus manifest matches pinned cells

std::string criterion_manifest_cells() {
  fs::path path = fs::path(ONESTAGE_FIXTURE_DIR) / "full_corpus_manifest.json";
  std::optional<CorpusStats> stats = stats_from_json(read_file(path));
  require(stats.has_value(), "reference manifest failed to parse");

  struct Cell {
    Language lang;
    SourceKind kind;
    std::uint64_t expect;
  };
  const Cell cells[] = {
      {Language::zh, SourceKind::web, 640621},      {Language::zh, SourceKind::book, 1835931},
      {Language::zh, SourceKind::encyclopedia, 411183}, {Language::zh, SourceKind::literature, 177261},
      {Language::en, SourceKind::web, 394490},      {Language::en, SourceKind::book, 719187},
      {Language::en, SourceKind::encyclopedia, 147059}, {Language::en, SourceKind::literature, 878241},
  };
  std::uint64_t pinned_sum = 0;
  for (const Cell& c : cells) {
    require(stats->cell(c.lang, c.kind) == c.expect,
            std::string("cell ") + to_string(c.lang) + "/" + to_string(c.kind) + " is " +
                std::to_string(stats->cell(c.lang, c.kind)) + ", expected " +
                std::to_string(c.expect));
    pinned_sum += c.expect;
  }
  require(pinned_sum == kManifestExpectedTotal, "pinned cells do not sum to the pinned total");
  require(stats->cell_total() == kManifestExpectedTotal,
          "cell total is " + std::to_string(stats->cell_total()) + ", expected " +
              std::to_string(kManifestExpectedTotal));
  require(stats->total_documents == kManifestExpectedTotal,
          "total_documents disagrees with the cell sum");
  for (SourceKind kind : {SourceKind::web, SourceKind::book, SourceKind::encyclopedia,
                          SourceKind::literature}) {
    require(stats->cell(Language::other, kind) == 0, "unexpected documents outside zh/en");
  }
  return "8 cells, total " + std::to_string(kManifestExpectedTotal);
}

// ------------------------------- 3: duplicate sweep, misses and false alarms

std::string criterion_dedup_sweep() {
  DedupParams params;
  params.num_perms = 128;
  params.shingle_size = 5;
  params.bands = 32;
  params.rows = 4;
  params.threshold = 0.7;
  params.validate();

  // Random 80-codepoint texts over a 40-glyph alphabet: unrelated documents
  // share essentially no shingles, so any confirmed cross-pair is a real
  // false positive rather than template noise.
  static const char* const kGlyphs[] = {
      "药", "病", "医", "治", "检", "查", "血", "压", "糖", "热", "咳", "嗽", "肝", "肾",
      "肺", "胃", "骨", "脑", "心", "眼", "耳", "鼻", "手", "足", "皮", "肤", "炎", "症",
      "诊", "断", "方", "剂", "针", "灸", "麻", "醉", "护", "理", "康", "复"};
  constexpr std::size_t kGlyphCount = sizeof(kGlyphs) / sizeof(kGlyphs[0]);
  constexpr std::size_t kDocCodepoints = 80;
  auto gen = seeded_engine(20260826, 0);
  auto random_text = [&]() {
    std::string text;
    for (std::size_t i = 0; i < kDocCodepoints; ++i) {
      text += kGlyphs[static_cast<std::size_t>(gen() % kGlyphCount)];
    }
    return text;
  };
  auto make_doc = [](std::string id, std::string text) {
    RawDocument doc;
    doc.id = std::move(id);
    doc.source_kind = SourceKind::web;
    doc.language = Language::zh;
    doc.text = std::move(text);
    return doc;
  };
  auto padded = [](const char* prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%04zu", prefix, n);
    return std::string(buf);
  };

  std::vector<RawDocument> docs;
  for (std::size_t i = 0; i < kDedupUniqueDocs; ++i) {
    docs.push_back(make_doc(padded("base-", i), random_text()));
  }
  // Exact copies of bases 0..49 under new ids; stream order keeps the base.
  for (std::size_t k = 0; k < kDedupExactCopies; ++k) {
    docs.push_back(make_doc(padded("copy-", k), docs[k].text));
  }
  // Near copies of bases 50..99: one substituted codepoint or a three-glyph
  // tail, either way true Jaccard stays far above the confirm threshold.
  std::set<std::string> planted_near;
  for (std::size_t k = 0; k < kDedupNearCopies; ++k) {
    std::string text = docs[kDedupExactCopies + k].text;
    if (k % 2 == 0) {
      std::size_t byte = (kDocCodepoints / 2) * 3;  // every glyph is 3 bytes
      std::string_view replacement = kGlyphs[(k + 17) % kGlyphCount];
      if (text.compare(byte, 3, replacement) == 0) replacement = kGlyphs[(k + 18) % kGlyphCount];
      text.replace(byte, 3, replacement);
    } else {
      text += kGlyphs[(k * 7) % kGlyphCount];
      text += kGlyphs[(k * 11) % kGlyphCount];
      text += kGlyphs[(k * 13) % kGlyphCount];
    }
    std::string id = padded("near-", k);
    planted_near.insert(id);
    docs.push_back(make_doc(std::move(id), std::move(text)));
  }

  ExactDedupResult exact = exact_dedup(docs);
  require(exact.removed_count == kDedupExactCopies,
          "exact stage removed " + std::to_string(exact.removed_count) + " of " +
              std::to_string(kDedupExactCopies) + " planted copies");
  for (const std::string& id : exact.removed_ids) {
    require(id.rfind("copy-", 0) == 0, "exact stage removed a non-copy document: " + id);
  }

  std::vector<std::string> skipped;
  std::vector<MinHashSignature> signatures = batch_signatures(exact.kept, params, 2, &skipped);
  require(skipped.empty(), "sketching skipped documents unexpectedly");
  NearDupResult near = near_duplicates(signatures, params.threshold, params.bands, params.rows);
  std::vector<std::string> removed = removal_list(near.clusters);

  std::size_t caught = 0;
  for (const std::string& id : removed) {
    require(planted_near.count(id) == 1, "near stage removed a non-planted document: " + id);
    ++caught;
  }
  double miss_rate =
      static_cast<double>(kDedupNearCopies - caught) / static_cast<double>(kDedupNearCopies);
  require(miss_rate <= kDedupMaxMissRate,
          "missed " + std::to_string(kDedupNearCopies - caught) + " of " +
              std::to_string(kDedupNearCopies) + " planted near-duplicates");

  // Brute-force oracle: every confirmed pair must be genuinely similar.
  std::unordered_map<std::string, const RawDocument*> by_id;
  for (const RawDocument& doc : docs) by_id[doc.id] = &doc;
  for (const auto& [a, b] : near.confirmed_pairs) {
    double true_jaccard = jaccard(shingle_set(by_id.at(a)->text, params.shingle_size),
                                  shingle_set(by_id.at(b)->text, params.shingle_size));
    require(true_jaccard >= kDedupMinTrueJaccard,
            "false positive: " + a + " / " + b + " true jaccard " + fmt(true_jaccard));
  }

  return "caught " + std::to_string(kDedupExactCopies) + "/" +
         std::to_string(kDedupExactCopies) + " exact and " + std::to_string(caught) + "/" +
         std::to_string(kDedupNearCopies) + " near duplicates, 0 false positives";
}

// ------------------------------ 4: mask blinds the loss; gradients check out

std::string criterion_mask_and_gradients() {
  ModelDims dims;
  dims.vocab = 16;
  dims.window = 4;
  dims.embed_dim = 8;
  dims.hidden_dim = 8;
  dims.validate();
  ToyModel model = ToyModel::random_init(dims, kMaskModelSeed);

  TokenizedExample masked;
  masked.pair_id = "masked";
  masked.token_ids = {5, 6, 7, 1, 9, 10, 11, 2};
  masked.loss_mask = {0, 0, 0, 0, 1, 1, 1, 1};
  TokenizedExample rewritten = masked;  // only false-mask positions differ
  rewritten.token_ids = {13, 3, 14, 1, 9, 10, 11, 2};

  TokenizedExample visible;  // all-true companion, identical in both batches
  visible.pair_id = "visible";
  visible.token_ids = {4, 8, 12, 2};
  visible.loss_mask = {1, 1, 1, 1};

  std::vector<double> grad_original;
  std::vector<double> grad_rewritten;
  double loss_original = masked_loss_and_grad(model, {masked, visible}, grad_original);
  double loss_rewritten = masked_loss_and_grad(model, {rewritten, visible}, grad_rewritten);
  require(loss_original == loss_rewritten, "loss changed under a false-mask rewrite");
  require(grad_original == grad_rewritten, "gradients changed under a false-mask rewrite");

  TokenizedExample target_changed = masked;
  target_changed.token_ids[4] = 12;  // a true-mask position must move the loss
  require(masked_loss(model, {target_changed, visible}) != loss_original,
          "editing a true-mask token left the loss unchanged");

  double err_masked = finite_diff_check(model, masked, 1e-4, 300);
  double err_visible = finite_diff_check(model, visible, 1e-4, 300);
  require(err_masked < kGradMaxRelError,
          "gradient error " + fmt(err_masked, 6) + " on the masked example");
  require(err_visible < kGradMaxRelError,
          "gradient error " + fmt(err_visible, 6) + " on the unmasked example");

  return "loss and gradients bitwise-invariant, max rel gradient error " +
         fmt(std::max(err_masked, err_visible), 6);
}

// ----------------------- 5: only the two-stage schedule jumps at the boundary

std::string criterion_boundary_jump() {
  std::vector<double> one_stage;
  std::vector<double> two_stage;
  for (int i = 0; i < kBoundarySeedCount; ++i) {
    std::uint64_t seed = kBoundaryFirstSeed + static_cast<std::uint64_t>(i);
    BoundaryExperiment experiment =
        run_boundary_experiment(seed, kBoundaryTotalSteps, kBoundaryStep, kBoundaryWindow);
    require(std::isfinite(experiment.jump_one_stage) && std::isfinite(experiment.jump_two_stage),
            "non-finite jump at seed " + std::to_string(seed));
    one_stage.push_back(experiment.jump_one_stage);
    two_stage.push_back(experiment.jump_two_stage);
  }
  double median_one = median(one_stage);
  double median_two = median(two_stage);
  require(median_two > 0.0, "two-stage median jump not positive: " + fmt(median_two));
  require(median_two >= kBoundaryDominance * std::abs(median_one),
          "two-stage median " + fmt(median_two) + " does not dominate one-stage median " +
              fmt(median_one));
  return "median jump " + fmt(median_two) + " (two-stage) vs " + fmt(median_one) +
         " (one-stage) over " + std::to_string(kBoundarySeedCount) + " seeds";
}

// ----------------------------- 6: unification yields single-language shards

std::string criterion_language_purity() {
  Rewriter rewriter(std::make_shared<MockBackend>(), RewriterOptions{});
  PairOptions options;
  options.max_chunk_chars = 400;
  options.fallback_language = Language::en;
  options.model_id = "mock";

  std::vector<RawDocument> docs;
  for (std::size_t i = 0; i < kUnifyEnglishDocs; ++i) {
    RawDocument doc;
    doc.id = "en-" + std::to_string(i);
    doc.source_kind = SourceKind::encyclopedia;
    doc.language = Language::en;
    doc.title = "Condition overview " + std::to_string(i);
    doc.text = "Patient record " + std::to_string(i) +
               " shows stable blood pressure after treatment. Follow-up visits confirmed a "
               "steady recovery without relapse.";
    docs.push_back(std::move(doc));
  }
  for (std::size_t i = 0; i < kUnifyChineseDocs; ++i) {
    RawDocument doc;
    doc.id = "zh-" + std::to_string(i);
    doc.source_kind = SourceKind::web;
    doc.language = Language::zh;
    doc.title = "病例概述" + std::to_string(i);
    doc.text = "患者编号" + std::to_string(i) + "在治疗后血压保持稳定,随访复查未见复发,恢复情况良好。";
    docs.push_back(std::move(doc));
  }

  UnifyCounters counters;
  std::vector<InstructionPair> transformed;
  std::size_t translated = 0;
  for (const RawDocument& doc : docs) {
    std::vector<InstructionPair> pairs = make_instruction_pairs(doc, rewriter, options, &counters);
    require(pairs.size() == 1, "expected one pair for the single-chunk document " + doc.id);
    for (InstructionPair& pair : pairs) {
      bool needs_translation = pair.language != Language::zh;
      std::optional<InstructionPair> unified =
          unify_language(pair, Language::zh, rewriter, &counters);
      require(unified.has_value(), "language unification dropped " + pair.pair_id);
      require(unified->language == Language::zh, "pair left in the wrong language");
      if (needs_translation) {
        ++translated;
        require(unified->output.rfind("[zh] ", 0) == 0,
                "translated output is missing the rewrite marker");
      }
      transformed.push_back(std::move(*unified));
    }
  }
  require(transformed.size() == kUnifyEnglishDocs + kUnifyChineseDocs, "pair count mismatch");
  require(translated == kUnifyEnglishDocs, "translation count mismatch");
  require(counters.chunks_dropped == 0 && counters.pairs_dropped == 0,
          "unification dropped content unexpectedly");

  std::vector<InstructionPair> native;
  for (std::size_t i = 0; i < kUnifyNativePairs; ++i) {
    InstructionPair pair;
    pair.pair_id = "native-" + std::to_string(i);
    pair.instruction = "问题" + std::to_string(i) + ":患者应如何复查血压?";
    pair.output = "回答" + std::to_string(i) + ":患者应每日定时测量血压并记录结果。";
    pair.language = Language::zh;
    pair.genre = SourceKind::web;
    pair.provenance = Provenance::native_sft;
    native.push_back(std::move(pair));
  }

  TempDir dir("unify");
  MixSpec spec;
  spec.weight_transformed = 1.0;
  spec.weight_native = 1.0;
  spec.seed = 7;
  spec.shard_size = 30;
  const std::string config_hash = "acceptance-language-purity";
  DatasetManifest manifest = compile_dataset(transformed, native, spec, dir.path, config_hash);

  std::uint64_t expected_total = transformed.size() + native.size();
  require(manifest.total == expected_total, "manifest total mismatch");
  require(manifest.by_language.size() == 1, "dataset mixes languages");
  require(manifest.by_language.count("zh") == 1 && manifest.by_language.at("zh") == expected_total,
          "language tally is not pure zh");

  std::size_t records = 0;
  for (const ShardInfo& shard : manifest.shards) {
    for_each_line(dir.path / shard.file, [&](std::string_view line, std::size_t) {
      std::optional<InstructionPair> pair = pair_from_json_line(line);
      require(pair.has_value(), "unparseable record in " + shard.file);
      require(pair->language == Language::zh, "non-target-language record in " + shard.file);
      ++records;
    });
  }
  require(records == expected_total, "shard record count mismatch");

  std::vector<VerifyProblem> problems;
  require(verify_manifest(dir.path / "manifest.json", config_hash, &problems),
          "manifest verification failed after compilation");

  return std::to_string(transformed.size()) + " unified pairs (" + std::to_string(translated) +
         " translated) + " + std::to_string(native.size()) + " native, " +
         std::to_string(manifest.shards.size()) + " shards all zh";
}

// --------------------------- 7: exam scoring matches a hand-counted oracle

std::string criterion_eval_oracle() {
  // Benchmarks of deliberately unequal size so the unweighted overall mean
  // differs from the per-item mean.
  const struct {
    const char* name;
    std::size_t count;
  } kBenches[] = {{"clinic_qa", 200}, {"pharma_qa", 150}, {"diagnosis_qa", 100}, {"triage_qa", 50}};
  const std::vector<char> labels = {'A', 'B', 'C', 'D'};

  struct Tally {
    std::uint64_t total = 0;
    std::uint64_t correct = 0;
    std::uint64_t answered = 0;
    std::uint64_t unparseable = 0;
  };
  std::map<std::string, Tally> oracle;
  std::set<std::string> expected_missing;

  std::vector<ExamItem> items;
  std::unordered_map<std::string, std::string> outputs;
  std::size_t global = 0;
  for (const auto& bench : kBenches) {
    for (std::size_t n = 0; n < bench.count; ++n, ++global) {
      ExamItem item;
      item.benchmark = bench.name;
      item.item_id = std::string(bench.name) + "-" + std::to_string(n);
      item.question = "病例 " + std::to_string(global) + " 的最佳处理是什么?";
      item.options = {{'A', "继续观察"}, {'B', "调整剂量"}, {'C', "复查指标"}, {'D', "立即转诊"}};
      std::size_t gold_index = (global * 3 + global / 7) % labels.size();
      item.gold_label = labels[gold_index];
      item.validate();

      Tally& tally = oracle[item.benchmark];
      ++tally.total;
      char gold = item.gold_label;
      char wrong = labels[(gold_index + 1) % labels.size()];
      // Output shapes cycle irregularly: correct in either phrasing, a wrong
      // pick, undecidable prose, or no output at all.
      switch ((global * 7 + global / 13) % 5) {
        case 0:
          outputs[item.item_id] = std::string("The answer is ") + gold + ".";
          ++tally.correct;
          ++tally.answered;
          break;
        case 1:
          outputs[item.item_id] = std::string("答案是") + gold + "。";
          ++tally.correct;
          ++tally.answered;
          break;
        case 2:
          outputs[item.item_id] = std::string("(") + wrong + ") 依据病史,其余选项与提示不符。";
          ++tally.answered;
          break;
        case 3:
          outputs[item.item_id] = "病史信息不足,无法在现有选项之间做出判断。";
          ++tally.unparseable;
          break;
        default:
          expected_missing.insert(item.item_id);
          ++tally.unparseable;
          break;
      }
      items.push_back(std::move(item));
    }
  }
  require(items.size() == kEvalItemCount, "fixture did not produce the pinned item count");

  BenchmarkReport report = score_benchmark(items, outputs);
  require(report.rows.size() == oracle.size(), "benchmark row count mismatch");
  double mean = 0.0;
  for (const BenchmarkRow& row : report.rows) {
    const Tally& tally = oracle.at(row.benchmark);
    require(row.total == tally.total, row.benchmark + ": total mismatch");
    require(row.correct == tally.correct,
            row.benchmark + ": correct " + std::to_string(row.correct) + ", oracle " +
                std::to_string(tally.correct));
    require(row.answered == tally.answered, row.benchmark + ": answered mismatch");
    require(row.unparseable == tally.unparseable, row.benchmark + ": unparseable mismatch");
    double expected_accuracy =
        tally.total == 0 ? 0.0
                         : static_cast<double>(tally.correct) / static_cast<double>(tally.total);
    require(std::abs(row.accuracy - expected_accuracy) <= kEvalAccuracyTolerance,
            row.benchmark + ": accuracy off the oracle");
    mean += expected_accuracy;
  }
  mean /= static_cast<double>(report.rows.size());
  require(std::abs(report.overall_accuracy - mean) <= kEvalAccuracyTolerance,
          "overall accuracy is not the unweighted benchmark mean");
  require(report.missing_outputs.size() == expected_missing.size(), "missing-output count mismatch");
  for (const std::string& id : report.missing_outputs) {
    require(expected_missing.count(id) == 1, "unexpected missing-output id " + id);
  }

  std::vector<JudgeRecord> records;
  for (std::uint64_t i = 0; i < kJudgeWins; ++i) {
    records.push_back({"q-" + std::to_string(records.size()), Verdict::win});
  }
  for (std::uint64_t i = 0; i < kJudgeTies; ++i) {
    records.push_back({"q-" + std::to_string(records.size()), Verdict::tie});
  }
  for (std::uint64_t i = 0; i < kJudgeFails; ++i) {
    records.push_back({"q-" + std::to_string(records.size()), Verdict::fail});
  }
  auto gen = seeded_engine(0x7ad6e, 3);
  seeded_shuffle(records, gen);
  PairwiseCounts counts = aggregate_pairwise(records);
  require(counts.win == kJudgeWins && counts.tie == kJudgeTies && counts.fail == kJudgeFails,
          "judge tally is not exactly " + std::to_string(kJudgeWins) + "/" +
              std::to_string(kJudgeTies) + "/" + std::to_string(kJudgeFails));
  require(counts.total() == kJudgeWins + kJudgeTies + kJudgeFails, "judge total mismatch");
  require(counts.win_percent() == 82.0, "win percent is not exactly 82.0");

  return "500 items over 4 benchmarks match the oracle; judge tally 82/13/5";
}

// ------------------------------------- 8: CLI runs are byte-for-byte equal

std::string criterion_cli_determinism() {
  fs::path cli = ONESTAGE_CLI_PATH;
  require(fs::exists(cli), "CLI binary not found: " + cli.string());

  TempDir first("cli-a");
  TempDir second("cli-b");
  auto run_once = [&](const fs::path& root) {
    fs::path demo = root / "demo";
    run_command(shell_quote(cli) + " gen-demo --out " + shell_quote(demo) + " --seed 7",
                root / "gen.log");
    run_command(shell_quote(cli) + " run-all --config " + shell_quote(demo / "demo.config") +
                    " --mock-rewriter --jobs 2",
                root / "run.log");
    return demo / "work" / "outputs";
  };
  fs::path outputs_a = run_once(first.path);
  fs::path outputs_b = run_once(second.path);

  std::vector<std::string> files = {"manifest.json",    "loss_trace.csv",  "model.ckpt",
                                    "eval_report.json", "eval_report.txt", "pairwise.json"};
  std::optional<DatasetManifest> manifest = DatasetManifest::from_json(read_file(outputs_a / "manifest.json"));
  require(manifest.has_value(), "first run produced an unparseable manifest");
  require(!manifest->shards.empty(), "first run produced no shards");
  for (const ShardInfo& shard : manifest->shards) files.push_back(shard.file);

  std::size_t compared = 0;
  for (const std::string& name : files) {
    std::string bytes_a = read_file(outputs_a / name);
    require(!bytes_a.empty(), name + " is empty");
    require(bytes_a == read_file(outputs_b / name),
            name + " differs between runs with identical seeds");
    ++compared;
  }
  return std::to_string(compared) + " output files byte-identical across independent runs";
}

// -------------------------------------------------------------------- main

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::string (*body)();
};

const Criterion kCriteria[] = {
    {1, "corpus filter keeps exactly the quota at the pinned selection rate",
     kFilterBudgetSeconds, &criterion_filter_quota},
    {2, "reference corpus manifest matches its pinned per-cell counts",
     10.0, &criterion_manifest_cells},
    {3, "duplicate sweep catches planted duplicates without false positives",
     kDedupBudgetSeconds, &criterion_dedup_sweep},
    {4, "loss mask blinds training to rewritten context and gradients match finite differences",
     kMaskBudgetSeconds, &criterion_mask_and_gradients},
    {5, "only the two-stage schedule shows a loss jump at its boundary",
     kBoundaryBudgetSeconds, &criterion_boundary_jump},
    {6, "language unification compiles into single-language shards",
     kUnifyBudgetSeconds, &criterion_language_purity},
    {7, "exam scoring matches a hand-counted oracle and judge tallies are exact",
     kEvalBudgetSeconds, &criterion_eval_oracle},
    {8, "CLI pipeline runs are byte-identical for equal seeds",
     kCliBudgetSeconds, &criterion_cli_determinism},
};

}  // namespace

int main() {
  int failed = 0;
  for (const Criterion& criterion : kCriteria) {
    auto start = std::chrono::steady_clock::now();
    std::string note;
    std::string error;
    try {
      note = criterion.body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty() && seconds > criterion.budget_seconds) {
      error = "exceeded the time budget: " + fmt(seconds, 2) + "s > " +
              fmt(criterion.budget_seconds, 2) + "s";
    }
    if (error.empty()) {
      std::cout << "[PASS] criterion " << criterion.id << ": " << criterion.title << " (" << note
                << ", " << fmt(seconds, 2) << "s)" << std::endl;
    } else {
      std::cout << "[FAIL] criterion " << criterion.id << ": " << criterion.title << " -- "
                << error << " (" << fmt(seconds, 2) << "s)" << std::endl;
      ++failed;
    }
  }
  int total = static_cast<int>(sizeof(kCriteria) / sizeof(kCriteria[0]));
  std::cout << "acceptance: " << (total - failed) << "/" << total << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
