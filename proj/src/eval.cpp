#include "onestage/eval.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "onestage/util.hpp"

namespace onestage {

using nlohmann::json;
using nlohmann::ordered_json;

void ExamItem::validate() const {
  if (item_id.empty()) throw std::invalid_argument("exam item: empty item_id");
  if (benchmark.empty()) throw std::invalid_argument("exam item " + item_id + ": empty benchmark");
  if (question.empty()) throw std::invalid_argument("exam item " + item_id + ": empty question");
  if (options.size() < 2) {
    throw std::invalid_argument("exam item " + item_id + ": needs at least 2 options");
  }
  std::set<char> seen;
  for (const auto& [label, text] : options) {
    if (label < 'A' || label > 'E') {
      throw std::invalid_argument("exam item " + item_id + ": label outside A..E");
    }
    if (!seen.insert(label).second) {
      throw std::invalid_argument("exam item " + item_id + ": duplicate label");
    }
    if (text.empty()) {
      throw std::invalid_argument("exam item " + item_id + ": empty option text");
    }
  }
  if (seen.count(gold_label) == 0) {
    throw std::invalid_argument("exam item " + item_id + ": gold label not among options");
  }
}

std::string format_mcq_prompt(const ExamItem& item) {
  std::string prompt = item.question;
  prompt += '\n';
  for (const auto& [label, text] : item.options) {
    prompt += label;
    prompt += ". ";
    prompt += text;
    prompt += '\n';
  }
  prompt += "Answer with the letter of the correct option.\n";
  return prompt;
}

namespace {

bool ascii_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool in_labels(char c, const std::vector<char>& labels) {
  char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return std::find(labels.begin(), labels.end(), upper) != labels.end();
}

// Rule 1: uppercase label with non-alphanumeric neighbours.
void standalone_labels(std::string_view text, const std::vector<char>& labels,
                       std::set<char>& found) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c < 'A' || c > 'E' || !in_labels(c, labels)) continue;
    bool left_ok = i == 0 || !ascii_alnum(text[i - 1]);
    bool right_ok = i + 1 == text.size() || !ascii_alnum(text[i + 1]);
    if (left_ok && right_ok) found.insert(c);
  }
}

bool ieq(char a, char b) {
  return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
}

// Label immediately after a marker, allowing filler like ": ' ( *".
std::optional<char> label_after(std::string_view text, std::size_t pos,
                                const std::vector<char>& labels) {
  static const std::string_view kFiller = " :\"'(*";
  while (pos < text.size()) {
    if (kFiller.find(text[pos]) != std::string_view::npos) {
      ++pos;
      continue;
    }
    // Full-width colon, common in Chinese outputs.
    if (text.substr(pos).starts_with("\xef\xbc\x9a")) {
      pos += 3;
      continue;
    }
    break;
  }
  if (pos >= text.size()) return std::nullopt;
  char c = text[pos];
  if (!in_labels(c, labels)) return std::nullopt;
  if (pos + 1 < text.size() && ascii_alnum(text[pos + 1])) return std::nullopt;
  return static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
}

// Rule 2: "answer is X" (ASCII, case-insensitive) and "答案是X".
void marker_labels(std::string_view text, const std::vector<char>& labels, std::set<char>& found) {
  static const std::string_view kAscii = "answer is";
  for (std::size_t i = 0; i + kAscii.size() <= text.size(); ++i) {
    bool hit = true;
    for (std::size_t k = 0; k < kAscii.size(); ++k) {
      if (!ieq(text[i + k], kAscii[k])) {
        hit = false;
        break;
      }
    }
    if (!hit) continue;
    if (auto label = label_after(text, i + kAscii.size(), labels)) found.insert(*label);
  }
  static const std::string_view kZh = "答案是";
  for (std::size_t i = text.find(kZh); i != std::string_view::npos; i = text.find(kZh, i + 1)) {
    if (auto label = label_after(text, i + kZh.size(), labels)) found.insert(*label);
  }
}

// Rule 3: "(X)" or "X." opening a line (after leading spaces/tabs).
void line_start_labels(std::string_view text, const std::vector<char>& labels,
                       std::set<char>& found) {
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) {
      if (end == text.size()) break;
      continue;
    }
    if (line[i] == '(' && i + 2 < line.size() && line[i + 2] == ')' &&
        line[i + 1] >= 'A' && line[i + 1] <= 'E' && in_labels(line[i + 1], labels)) {
      found.insert(line[i + 1]);
    } else if (line[i] >= 'A' && line[i] <= 'E' && in_labels(line[i], labels) &&
               i + 1 < line.size() && line[i + 1] == '.') {
      found.insert(line[i]);
    }
    if (end == text.size()) break;
  }
}

}  // namespace

std::optional<char> extract_answer(std::string_view output, const std::vector<char>& labels) {
  if (labels.empty()) throw std::invalid_argument("extract_answer: empty label set");
  using Rule = void (*)(std::string_view, const std::vector<char>&, std::set<char>&);
  static constexpr Rule kRules[] = {standalone_labels, marker_labels, line_start_labels};
  for (Rule rule : kRules) {
    std::set<char> found;
    rule(output, labels, found);
    if (found.size() == 1) return *found.begin();
    if (found.size() > 1) return std::nullopt;  // the deciding rule is ambiguous
  }
  return std::nullopt;
}

BenchmarkReport score_benchmark(const std::vector<ExamItem>& items,
                                const std::unordered_map<std::string, std::string>& outputs) {
  std::map<std::string, BenchmarkRow> by_name;
  BenchmarkReport report;
  for (const auto& item : items) {
    item.validate();
    auto& row = by_name[item.benchmark];
    row.benchmark = item.benchmark;
    ++row.total;

    std::vector<char> labels;
    labels.reserve(item.options.size());
    for (const auto& [label, text] : item.options) labels.push_back(label);

    auto it = outputs.find(item.item_id);
    std::optional<char> answer;
    if (it == outputs.end()) {
      report.missing_outputs.push_back(item.item_id);
    } else {
      answer = extract_answer(it->second, labels);
    }
    if (!answer) {
      ++row.unparseable;
      continue;
    }
    ++row.answered;
    if (*answer == item.gold_label) ++row.correct;
  }

  double sum = 0.0;
  for (auto& [name, row] : by_name) {
    row.accuracy = row.total == 0 ? 0.0 : static_cast<double>(row.correct) / row.total;
    sum += row.accuracy;
    report.rows.push_back(row);
  }
  report.overall_accuracy = report.rows.empty() ? 0.0 : sum / report.rows.size();
  std::sort(report.missing_outputs.begin(), report.missing_outputs.end());
  return report;
}

std::unordered_map<std::string, std::string> generate_outputs(
    const std::vector<ExamItem>& items,
    const std::function<std::string(const ExamItem&)>& generate) {
  std::unordered_map<std::string, std::string> outputs;
  for (const auto& item : items) outputs.emplace(item.item_id, generate(item));
  return outputs;
}

namespace {

std::string format_accuracy(double accuracy) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.4f", accuracy);
  return buf;
}

}  // namespace

std::string BenchmarkReport::to_text_table() const {
  static const std::string_view kHeaders[] = {"benchmark", "total",       "correct",
                                              "answered",  "unparseable", "accuracy"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    cells.push_back({row.benchmark, std::to_string(row.total), std::to_string(row.correct),
                     std::to_string(row.answered), std::to_string(row.unparseable),
                     format_accuracy(row.accuracy)});
  }
  cells.push_back({"overall", "-", "-", "-", "-", format_accuracy(overall_accuracy)});

  std::vector<std::size_t> widths;
  for (const auto& header : kHeaders) widths.push_back(header.size());
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  auto emit_row = [&](const std::vector<std::string>& row, std::string& out) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size()) out.append(widths[c] - row[c].size() + 2, ' ');
    }
    out += '\n';
  };
  std::string out;
  std::vector<std::string> header_row(std::begin(kHeaders), std::end(kHeaders));
  emit_row(header_row, out);
  for (const auto& row : cells) emit_row(row, out);
  return out;
}

std::string BenchmarkReport::to_json() const {
  ordered_json j;
  ordered_json benchmarks = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json r;
    r["benchmark"] = row.benchmark;
    r["total"] = row.total;
    r["correct"] = row.correct;
    r["answered"] = row.answered;
    r["unparseable"] = row.unparseable;
    r["accuracy"] = row.accuracy;
    benchmarks.push_back(std::move(r));
  }
  j["benchmarks"] = std::move(benchmarks);
  j["overall_accuracy"] = overall_accuracy;
  j["missing_outputs"] = missing_outputs;
  return j.dump(2) + "\n";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::win: return "win";
    case Verdict::tie: return "tie";
    case Verdict::fail: return "fail";
  }
  return "tie";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  if (s == "win") return Verdict::win;
  if (s == "tie") return Verdict::tie;
  if (s == "fail") return Verdict::fail;
  return std::nullopt;
}

double PairwiseCounts::win_percent() const {
  return total() == 0 ? 0.0 : 100.0 * static_cast<double>(win) / static_cast<double>(total());
}

std::string PairwiseCounts::to_json() const {
  ordered_json j;
  j["win"] = win;
  j["tie"] = tie;
  j["fail"] = fail;
  j["total"] = total();
  j["win_percent"] = win_percent();
  return j.dump(2) + "\n";
}

PairwiseCounts aggregate_pairwise(const std::vector<JudgeRecord>& records) {
  PairwiseCounts counts;
  for (const auto& record : records) {
    switch (record.verdict) {
      case Verdict::win: ++counts.win; break;
      case Verdict::tie: ++counts.tie; break;
      case Verdict::fail: ++counts.fail; break;
    }
  }
  return counts;
}

namespace {

[[noreturn]] void line_error(const std::filesystem::path& path, std::size_t lineno,
                             const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + what);
}

}  // namespace

std::vector<ExamItem> load_exam_items(const std::filesystem::path& path) {
  std::vector<ExamItem> items;
  std::set<std::string> seen;
  for_each_line(path, [&](std::string_view line, std::size_t lineno) {
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) line_error(path, lineno, "not a JSON object");
    ExamItem item;
    try {
      item.item_id = rec.at("item_id").get<std::string>();
      item.benchmark = rec.at("benchmark").get<std::string>();
      item.question = rec.at("question").get<std::string>();
      std::string gold = rec.at("gold").get<std::string>();
      if (gold.size() != 1) line_error(path, lineno, "gold must be a single letter");
      item.gold_label = gold[0];
      std::map<std::string, std::string> sorted_options =
          rec.at("options").get<std::map<std::string, std::string>>();
      for (const auto& [label, text] : sorted_options) {
        if (label.size() != 1) line_error(path, lineno, "option label must be a single letter");
        item.options.emplace_back(label[0], text);
      }
    } catch (const json::exception& e) {
      line_error(path, lineno, e.what());
    }
    try {
      item.validate();
    } catch (const std::invalid_argument& e) {
      line_error(path, lineno, e.what());
    }
    if (!seen.insert(item.item_id).second) {
      line_error(path, lineno, "duplicate item_id " + item.item_id);
    }
    items.push_back(std::move(item));
  });
  return items;
}

std::unordered_map<std::string, std::string> load_outputs(const std::filesystem::path& path) {
  std::unordered_map<std::string, std::string> outputs;
  for_each_line(path, [&](std::string_view line, std::size_t lineno) {
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) line_error(path, lineno, "not a JSON object");
    try {
      std::string id = rec.at("item_id").get<std::string>();
      if (!outputs.emplace(id, rec.at("output").get<std::string>()).second) {
        line_error(path, lineno, "duplicate item_id " + id);
      }
    } catch (const json::exception& e) {
      line_error(path, lineno, e.what());
    }
  });
  return outputs;
}

std::vector<JudgeRecord> load_judge_records(const std::filesystem::path& path) {
  std::vector<JudgeRecord> records;
  for_each_line(path, [&](std::string_view line, std::size_t lineno) {
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) line_error(path, lineno, "not a JSON object");
    try {
      JudgeRecord record;
      record.question_id = rec.at("question_id").get<std::string>();
      auto verdict = parse_verdict(rec.at("verdict").get<std::string>());
      if (!verdict) line_error(path, lineno, "verdict must be win, tie, or fail");
      record.verdict = *verdict;
      records.push_back(std::move(record));
    } catch (const json::exception& e) {
      line_error(path, lineno, e.what());
    }
  });
  return records;
}

}  // namespace onestage
