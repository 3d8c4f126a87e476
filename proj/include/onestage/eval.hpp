#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace onestage {

// One multiple-choice item. Options keep label order (labels are a subset
// of A..E); gold_label is always one of them.
struct ExamItem {
  std::string item_id;
  std::string benchmark;
  std::string question;
  std::vector<std::pair<char, std::string>> options;
  char gold_label = 'A';

  void validate() const;  // throws std::invalid_argument naming the field
};

// Question, one "X. <text>" line per option in label order, then a fixed
// answer-request line. Deterministic; contains no hint of the gold label.
std::string format_mcq_prompt(const ExamItem& item);

// Rule cascade over the model's free-text output:
//   1. standalone label tokens (uppercase, non-alphanumeric neighbours)
//   2. "answer is X" / "答案是X" markers (label case-insensitive)
//   3. "(X)" or "X." at the start of a line
// The first rule that matches anything decides; if it matched more than
// one distinct label the output is ambiguous and extraction fails.
std::optional<char> extract_answer(std::string_view output, const std::vector<char>& labels);

struct BenchmarkRow {
  std::string benchmark;
  std::uint64_t total = 0;
  std::uint64_t correct = 0;
  std::uint64_t answered = 0;     // extraction produced a label
  std::uint64_t unparseable = 0;  // no label (counted as incorrect)
  double accuracy = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;  // sorted by benchmark name
  double overall_accuracy = 0.0;   // unweighted mean over benchmarks
  std::vector<std::string> missing_outputs;  // item ids without an output

  std::string to_text_table() const;
  std::string to_json() const;
};

// Items without an output are flagged and scored unparseable; unparseable
// never counts as correct.
BenchmarkReport score_benchmark(const std::vector<ExamItem>& items,
                                const std::unordered_map<std::string, std::string>& outputs);

// Smoke-test adapter: produce outputs by calling `generate` on each
// item's formatted prompt (e.g. greedy decoding from the toy model).
std::unordered_map<std::string, std::string> generate_outputs(
    const std::vector<ExamItem>& items,
    const std::function<std::string(const ExamItem&)>& generate);

enum class Verdict { win, tie, fail };

const char* to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

struct JudgeRecord {
  std::string question_id;
  Verdict verdict = Verdict::tie;
};

struct PairwiseCounts {
  std::uint64_t win = 0;
  std::uint64_t tie = 0;
  std::uint64_t fail = 0;

  std::uint64_t total() const { return win + tie + fail; }
  double win_percent() const;
  std::string to_json() const;
};

// Order-invariant verdict tally from the candidate model's perspective.
PairwiseCounts aggregate_pairwise(const std::vector<JudgeRecord>& records);

// Line-delimited JSON loaders; malformed lines raise std::runtime_error
// with the offending line number.
// Exam items:   {"item_id", "benchmark", "question", "options": {"A": ...}, "gold": "A"}
// Outputs:      {"item_id", "output"}
// Judge records: {"question_id", "verdict": "win"|"tie"|"fail"}
std::vector<ExamItem> load_exam_items(const std::filesystem::path& path);
std::unordered_map<std::string, std::string> load_outputs(const std::filesystem::path& path);
std::vector<JudgeRecord> load_judge_records(const std::filesystem::path& path);

}  // namespace onestage
