#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "onestage/config.hpp"
#include "onestage/util.hpp"

using namespace onestage;

namespace {

std::filesystem::path temp_dir(const char* tag) {
  auto dir = std::filesystem::temp_directory_path() / (std::string("onestage_config_") + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void touch(const std::filesystem::path& path) { atomic_write_file(path, "x\n"); }

// A config exercising every section, with all referenced files relative.
const char* kFullConfig = R"(# toolkit run configuration
[paths]
workdir = work
outputs = out

[run]
target_language = zh
seed = 99
jobs = 3

[inputs]
web_zh = corpus/web_zh.jsonl | web | zh
book_en = corpus/book.txt|book|en
ency = corpus/ency.jsonl|encyclopedia

[filter]
min_chars = 40
max_chars = 9000
max_punct_error_rate = 0.25
max_ad_density = 0.05
min_domain_score = 0.01
target_rate = 0.4
lexicon_zh = lex/zh.tsv
lexicon_en = lex/en.tsv
ads_zh = lex/ads_zh.txt
ads_en = lex/ads_en.txt

[dedup]
num_perms = 64
shingle_size = 4
bands = 16
rows = 4
threshold = 0.8

[unify]
max_chunk_chars = 500
ethics_rules = rules/ethics.tsv
native_pairs = corpus/sft.jsonl

[rewriter]
mode = mock
model_id = test-model
max_retries = 2
max_in_flight = 8
backoff_ms = 50
cache = false

[compile]
weight_transformed = 2.5
weight_native = 1
shard_size = 123

[train]
mode = two_stage
learning_rate = 0.01
batch_size = 16
total_steps = 300
stage_boundary = 150
warmup_steps = 25
window = 10
embed_dim = 20
hidden_dim = 40
max_example_tokens = 256

[eval]
exam = eval/exam.jsonl
outputs = eval/outputs.jsonl
judge = eval/judge.jsonl
)";

// Creates every file kFullConfig points at, so validate() passes.
void materialise_references(const std::filesystem::path& base) {
  for (const char* rel :
       {"corpus/web_zh.jsonl", "corpus/book.txt", "corpus/ency.jsonl", "corpus/sft.jsonl",
        "lex/zh.tsv", "lex/en.tsv", "lex/ads_zh.txt", "lex/ads_en.txt", "rules/ethics.tsv",
        "eval/exam.jsonl", "eval/outputs.jsonl", "eval/judge.jsonl"}) {
    auto path = base / rel;
    std::filesystem::create_directories(path.parent_path());
    touch(path);
  }
}

}  // namespace

TEST_CASE("parse_run_config reads every section and resolves paths") {
  auto base = temp_dir("parse");
  RunConfig cfg = parse_run_config(kFullConfig, base);

  CHECK(cfg.workdir == base / "work");
  CHECK(cfg.outputs_dir == base / "out");
  CHECK(cfg.target_language == Language::zh);
  CHECK(cfg.seed == 99);
  CHECK(cfg.jobs == 3);

  REQUIRE(cfg.inputs.size() == 3);
  CHECK(cfg.inputs[0].name == "web_zh");
  CHECK(cfg.inputs[0].path == base / "corpus/web_zh.jsonl");
  CHECK(cfg.inputs[0].kind == SourceKind::web);
  CHECK(cfg.inputs[0].language_hint == Language::zh);
  CHECK(cfg.inputs[1].name == "book_en");
  CHECK(cfg.inputs[1].kind == SourceKind::book);
  CHECK(cfg.inputs[1].language_hint == Language::en);
  CHECK(cfg.inputs[2].kind == SourceKind::encyclopedia);
  CHECK_FALSE(cfg.inputs[2].language_hint.has_value());

  CHECK(cfg.filter.min_chars == 40);
  CHECK(cfg.filter.max_chars == 9000);
  CHECK(cfg.filter.max_punct_error_rate == 0.25);
  CHECK(cfg.filter.max_ad_density == 0.05);
  CHECK(cfg.filter.min_domain_score == 0.01);
  REQUIRE(cfg.filter.target_rate.has_value());
  CHECK(*cfg.filter.target_rate == 0.4);
  CHECK(cfg.lexicons.domain.at(Language::zh) == base / "lex/zh.tsv");
  CHECK(cfg.lexicons.ads.at(Language::en) == base / "lex/ads_en.txt");

  CHECK(cfg.dedup.num_perms == 64);
  CHECK(cfg.dedup.shingle_size == 4);
  CHECK(cfg.dedup.bands == 16);
  CHECK(cfg.dedup.rows == 4);
  CHECK(cfg.dedup.threshold == 0.8);

  CHECK(cfg.unify.max_chunk_chars == 500);
  CHECK(cfg.unify.ethics_rules == base / "rules/ethics.tsv");
  CHECK(cfg.unify.native_pairs == base / "corpus/sft.jsonl");

  CHECK(cfg.rewriter.mode == RewriterMode::mock);
  CHECK(cfg.rewriter.model_id == "test-model");
  CHECK(cfg.rewriter.max_retries == 2);
  CHECK(cfg.rewriter.max_in_flight == 8);
  CHECK(cfg.rewriter.backoff_ms == 50);
  CHECK_FALSE(cfg.rewriter.cache);

  CHECK(cfg.mix.weight_transformed == 2.5);
  CHECK(cfg.mix.weight_native == 1.0);
  CHECK(cfg.mix.shard_size == 123);

  CHECK(cfg.train.config.mode == TrainMode::two_stage);
  CHECK(cfg.train.config.learning_rate == 0.01);
  CHECK(cfg.train.config.batch_size == 16);
  CHECK(cfg.train.config.total_steps == 300);
  CHECK(cfg.train.config.stage_boundary == 150);
  CHECK(cfg.train.config.warmup_steps == 25);
  CHECK(cfg.train.window == 10);
  CHECK(cfg.train.embed_dim == 20);
  CHECK(cfg.train.hidden_dim == 40);
  CHECK(cfg.train.max_example_tokens == 256);

  CHECK(cfg.eval.exam == base / "eval/exam.jsonl");
  CHECK(cfg.eval.outputs == base / "eval/outputs.jsonl");
  CHECK(cfg.eval.judge == base / "eval/judge.jsonl");

  materialise_references(base);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("parser tolerates comments, blank lines, CRLF, and spacing") {
  std::string text =
      "; leading comment\r\n"
      "\r\n"
      "[paths]\r\n"
      "  workdir   =   w  \r\n"
      "# another comment\r\n"
      "[run]\r\n"
      "seed=5\r\n";
  RunConfig cfg = parse_run_config(text, "/base");
  CHECK(cfg.workdir == std::filesystem::path("/base/w"));
  CHECK(cfg.seed == 5);
  // Default outputs dir hangs off the workdir.
  CHECK(cfg.outputs_dir == std::filesystem::path("/base/w/outputs"));

  // Absolute paths are taken as-is.
  RunConfig abs = parse_run_config("[paths]\nworkdir = /somewhere/else\n", "/base");
  CHECK(abs.workdir == std::filesystem::path("/somewhere/else"));
}

TEST_CASE("parse errors name the offending key or line") {
  auto expect_error = [](const char* text, const char* needle) {
    try {
      parse_run_config(text, "/base");
      FAIL_CHECK("expected invalid_argument for: " << text);
    } catch (const std::invalid_argument& e) {
      std::string what = e.what();
      CAPTURE(text);
      CAPTURE(what);
      CHECK(what.find(needle) != std::string::npos);
    }
  };

  expect_error("[nosuch]\nkey = 1\n", "unknown section [nosuch]");
  expect_error("[run]\nbogus = 1\n", "run.bogus: unknown key");
  expect_error("[run]\nseed = twelve\n", "run.seed: not an integer");
  expect_error("[filter]\ntarget_rate = often\n", "filter.target_rate: not a number");
  expect_error("[rewriter]\ncache = maybe\n", "rewriter.cache: expected true or false");
  expect_error("[rewriter]\nmode = rpc\n", "rewriter.mode: must be mock or http");
  expect_error("[train]\nmode = three_stage\n", "train.mode: must be one_stage or two_stage");
  expect_error("key = 1\n", "line 1: key outside a section");
  expect_error("[paths\nworkdir = w\n", "line 1: bad section header");
  expect_error("[paths]\nworkdir\n", "line 2: expected key = value");
  expect_error("[inputs]\nweb = just_a_path\n", "inputs.web: expected path|kind[|lang]");
  expect_error("[inputs]\nweb = p|blog\n", "inputs.web: unknown source kind 'blog'");
  expect_error("[inputs]\nweb = p|web|fr\n", "inputs.web: must be zh or en");
  expect_error("[run]\ntarget_language = other\n", "run.target_language: must be zh or en");
}

TEST_CASE("validate names missing files and bad ranges") {
  auto base = temp_dir("validate");
  materialise_references(base);

  auto parse_full = [&]() { return parse_run_config(kFullConfig, base); };

  {
    RunConfig cfg = parse_full();
    cfg.workdir.clear();
    CHECK_THROWS_WITH_AS(cfg.validate(), "config: paths.workdir is required",
                         std::invalid_argument);
  }
  {
    RunConfig cfg = parse_full();
    cfg.inputs.clear();
    CHECK_THROWS_WITH_AS(cfg.validate(), "config: [inputs] needs at least one entry",
                         std::invalid_argument);
  }
  {
    RunConfig cfg = parse_full();
    cfg.inputs[0].path = base / "corpus/missing.jsonl";
    try {
      cfg.validate();
      FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
      std::string what = e.what();
      CHECK(what.find("inputs.web_zh") != std::string::npos);
      CHECK(what.find("no such file") != std::string::npos);
    }
  }
  {
    RunConfig cfg = parse_full();
    cfg.lexicons.domain[Language::en] = base / "lex/absent.tsv";
    try {
      cfg.validate();
      FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("filter.lexicon_en") != std::string::npos);
    }
  }
  {
    RunConfig cfg = parse_full();
    cfg.jobs = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  {
    RunConfig cfg = parse_full();
    cfg.rewriter.mode = RewriterMode::http;
    cfg.rewriter.endpoint.clear();
    CHECK_THROWS_WITH_AS(cfg.validate(), "config: rewriter.endpoint is required in http mode",
                         std::invalid_argument);
  }
  {
    RunConfig cfg = parse_full();
    cfg.unify.max_chunk_chars = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  {
    RunConfig cfg = parse_full();
    cfg.train.max_example_tokens = 4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  {
    // Nested validations surface through the same entry point.
    RunConfig cfg = parse_full();
    cfg.dedup.threshold = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = parse_full();
    cfg.train.config.warmup_steps.reset();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = parse_full();
    cfg.mix.shard_size = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}

TEST_CASE("config hash is independent of where the tree lives") {
  // The same config text parsed against two different roots must hash
  // identically: only basenames and semantics enter the canonical form.
  auto base_a = temp_dir("hash_a");
  auto base_b = temp_dir("hash_b");
  RunConfig cfg_a = parse_run_config(kFullConfig, base_a);
  RunConfig cfg_b = parse_run_config(kFullConfig, base_b);
  CHECK(cfg_a.workdir != cfg_b.workdir);
  CHECK(cfg_a.canonical_semantics() == cfg_b.canonical_semantics());
  CHECK(cfg_a.config_hash() == cfg_b.config_hash());

  // Moving an input within the tree keeps the hash (same basename) while
  // renaming the file changes it.
  RunConfig moved = cfg_a;
  moved.inputs[0].path = base_a / "elsewhere/web_zh.jsonl";
  CHECK(moved.config_hash() == cfg_a.config_hash());
  RunConfig renamed = cfg_a;
  renamed.inputs[0].path = base_a / "corpus/web_zh_v2.jsonl";
  CHECK(renamed.config_hash() != cfg_a.config_hash());

  // Every output-affecting knob must move the hash.
  auto hash_with = [&](auto mutate) {
    RunConfig cfg = parse_run_config(kFullConfig, base_a);
    mutate(cfg);
    return cfg.config_hash();
  };
  const std::string baseline = cfg_a.config_hash();
  CHECK(hash_with([](RunConfig& c) { c.seed = 100; }) != baseline);
  CHECK(hash_with([](RunConfig& c) { c.target_language = Language::en; }) != baseline);
  CHECK(hash_with([](RunConfig& c) { c.filter.min_chars = 41; }) != baseline);
  CHECK(hash_with([](RunConfig& c) { c.filter.target_rate.reset(); }) != baseline);
  CHECK(hash_with([](RunConfig& c) { c.dedup.threshold = 0.71; }) != baseline);
  CHECK(hash_with([](RunConfig& c) { c.unify.max_chunk_chars = 501; }) != baseline);
  CHECK(hash_with([](RunConfig& c) { c.rewriter.model_id = "other-model"; }) != baseline);
  CHECK(hash_with([](RunConfig& c) { c.mix.weight_native = 0.5; }) != baseline);
  CHECK(hash_with([](RunConfig& c) { c.train.config.learning_rate = 0.02; }) != baseline);
  CHECK(hash_with([](RunConfig& c) { c.train.config.stage_boundary = 151; }) != baseline);
  CHECK(hash_with([](RunConfig& c) { c.inputs[0].language_hint.reset(); }) != baseline);
  CHECK(hash_with([](RunConfig& c) { c.inputs[0].kind = SourceKind::literature; }) != baseline);

  // Location-only knobs must NOT move the hash.
  CHECK(hash_with([&](RunConfig& c) { c.workdir = base_b / "w2"; }) == baseline);
  CHECK(hash_with([&](RunConfig& c) { c.outputs_dir = base_b / "o2"; }) == baseline);
  CHECK(hash_with([&](RunConfig& c) { c.jobs = 16; }) == baseline);  // parallelism, not output
  CHECK(hash_with([&](RunConfig& c) { c.rewriter.cache = true; }) == baseline);
  CHECK(hash_with([&](RunConfig& c) {
          c.lexicons.domain[Language::zh] = base_b / "lex/zh.tsv";
        }) == baseline);
}

TEST_CASE("canonical semantics is sorted and line-oriented") {
  auto base = temp_dir("canon");
  RunConfig cfg = parse_run_config(kFullConfig, base);
  std::string canon = cfg.canonical_semantics();

  std::vector<std::string> lines;
  std::istringstream stream(canon);
  for (std::string line; std::getline(stream, line);) lines.push_back(line);
  CHECK(lines.size() >= 25);
  CHECK(std::is_sorted(lines.begin(), lines.end()));
  for (const auto& line : lines) CHECK(line.find('=') != std::string::npos);

  // Input lines carry basename, kind, and hint -- never the directory.
  CHECK(canon.find("inputs.web_zh=web_zh.jsonl|web|zh") != std::string::npos);
  CHECK(canon.find("inputs.ency=ency.jsonl|encyclopedia|auto") != std::string::npos);
  CHECK(canon.find(base.string()) == std::string::npos);

  CHECK(cfg.config_hash() == sha256_hex(canon));
  CHECK(cfg.config_hash().size() == 64);
}

TEST_CASE("load_run_config resolves paths against the file location") {
  auto base = temp_dir("load");
  std::filesystem::create_directories(base / "nested");
  atomic_write_file(base / "nested" / "run.config",
                    "[paths]\nworkdir = w\n[inputs]\nweb = ../corpus.jsonl|web\n");
  touch(base / "corpus.jsonl");

  RunConfig cfg = load_run_config(base / "nested" / "run.config");
  CHECK(cfg.workdir == base / "nested" / "w");
  REQUIRE(cfg.inputs.size() == 1);
  CHECK(cfg.inputs[0].path == base / "nested" / ".." / "corpus.jsonl");
  CHECK(std::filesystem::exists(cfg.inputs[0].path));

  CHECK_THROWS_AS((void)load_run_config(base / "nonexistent.config"), std::runtime_error);
}
