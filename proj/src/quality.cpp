#include "onestage/quality.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <json.hpp>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "onestage/util.hpp"

namespace onestage {

namespace {

using nlohmann::json;

bool is_terminal_punct(char32_t cp) {
  return cp == '.' || cp == '!' || cp == '?' || cp == 0x3002 /* 。 */ ||
         cp == 0xFF01 /* ！ */ || cp == 0xFF1F /* ？ */;
}

bool is_punct_cp(char32_t cp) {
  if (cp < 0x80) return std::ispunct(static_cast<unsigned char>(cp)) != 0;
  switch (cp) {
    case 0x3002: case 0xFF01: case 0xFF1F: case 0x3001: case 0xFF0C:
    case 0xFF1B: case 0xFF1A: case 0x300C: case 0x300D: case 0x300E:
    case 0x300F: case 0xFF08: case 0xFF09: case 0x300A: case 0x300B:
    case 0x3010: case 0x3011: case 0x2026: case 0x2014: case 0x00B7:
      return true;
    default:
      return false;
  }
}

std::string ascii_fold(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::size_t count_nonoverlapping(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0, pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

bool is_ascii_alnum_term(std::string_view term) {
  if (term.empty()) return false;
  return std::all_of(term.begin(), term.end(), [](unsigned char c) {
    return std::isalnum(c) != 0;
  });
}

// Lowercased Latin/digit tokens of the text, for whole-token term matching.
std::vector<std::string> latin_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = utf8_decode(text, pos);
    bool alnum = (cp < 0x80 && std::isalnum(static_cast<unsigned char>(cp)) != 0) ||
                 is_latin_letter(cp);
    if (alnum) {
      if (cp < 0x80) {
        current.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
      } else {
        utf8_append(current, cp);
      }
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Lexicon merged_lexicon(const FilterConfig& cfg) {
  Lexicon merged;
  for (const auto& [lang, lex] : cfg.domain_lexicon) {
    merged.insert(merged.end(), lex.begin(), lex.end());
  }
  return merged;
}

std::vector<std::string> merged_ad_keywords(const FilterConfig& cfg) {
  std::vector<std::string> merged;
  for (const auto& [lang, list] : cfg.ad_keywords) {
    merged.insert(merged.end(), list.begin(), list.end());
  }
  return merged;
}

struct RankEntry {
  std::string doc_id;
  double relevance = 0.0;
};

}  // namespace

void FilterConfig::validate() const {
  if (min_chars >= max_chars) {
    throw std::invalid_argument("filter.min_chars must be < filter.max_chars");
  }
  auto check_fraction = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(std::string(name) + " must be in [0,1]");
    }
  };
  check_fraction(max_punct_error_rate, "filter.max_punct_error_rate");
  check_fraction(max_ad_density, "filter.max_ad_density");
  check_fraction(min_domain_score, "filter.min_domain_score");
  if (target_rate) check_fraction(*target_rate, "filter.target_rate");
}

std::size_t rough_token_count(std::string_view text) {
  std::size_t tokens = 0;
  bool in_latin_run = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = utf8_decode(text, pos);
    if (is_cjk(cp)) {
      ++tokens;
      in_latin_run = false;
    } else if ((cp < 0x80 && std::isalnum(static_cast<unsigned char>(cp)) != 0) ||
               is_latin_letter(cp)) {
      if (!in_latin_run) ++tokens;
      in_latin_run = true;
    } else {
      in_latin_run = false;
    }
  }
  return tokens;
}

double domain_relevance(std::string_view text, const Lexicon& lexicon) {
  if (lexicon.empty()) {
    throw std::invalid_argument("domain_relevance: empty lexicon");
  }
  if (text.empty()) return 0.0;
  std::size_t tokens = rough_token_count(text);
  if (tokens == 0) return 0.0;

  std::string folded = ascii_fold(text);
  std::vector<std::string> toks;  // built lazily, only if a token-term exists
  double weighted_hits = 0.0;
  for (const auto& [term, weight] : lexicon) {
    if (term.empty()) continue;
    std::size_t count = 0;
    if (is_ascii_alnum_term(term)) {
      if (toks.empty()) toks = latin_tokens(text);
      std::string folded_term = ascii_fold(term);
      count = static_cast<std::size_t>(std::count(toks.begin(), toks.end(), folded_term));
    } else {
      count = count_nonoverlapping(folded, term);
    }
    weighted_hits += weight * static_cast<double>(count);
  }
  return std::min(1.0, weighted_hits / static_cast<double>(tokens));
}

double punctuation_error_rate(std::string_view text) {
  std::size_t positions = 0;
  std::size_t errors = 0;

  std::size_t segment_len = 0;      // codepoints since the last boundary
  bool segment_has_content = false;
  char32_t prev_punct = 0;
  std::size_t punct_run = 0;

  auto close_run = [&] {
    if (punct_run >= 3) ++errors;
    punct_run = 0;
    prev_punct = 0;
  };
  auto end_segment = [&](bool punctuated) {
    if (!segment_has_content) {
      segment_len = 0;
      return;
    }
    ++positions;
    if (!punctuated && segment_len > 400) ++errors;
    segment_len = 0;
    segment_has_content = false;
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = utf8_decode(text, pos);

    if (is_punct_cp(cp)) {
      if (cp == prev_punct) {
        ++punct_run;
      } else {
        close_run();
        prev_punct = cp;
        punct_run = 1;
      }
    } else {
      close_run();
    }

    if (is_terminal_punct(cp)) {
      end_segment(true);
      continue;
    }
    if (cp == '\n') {
      end_segment(false);
      continue;
    }
    ++segment_len;
    if (!is_space_cp(cp)) segment_has_content = true;
  }
  close_run();
  end_segment(false);

  if (positions == 0) return errors > 0 ? 1.0 : 0.0;
  return std::min(1.0, static_cast<double>(errors) / static_cast<double>(positions));
}

double ad_keyword_density(std::string_view text, const std::vector<std::string>& keywords) {
  if (text.empty() || keywords.empty()) return 0.0;
  std::size_t tokens = rough_token_count(text);
  if (tokens == 0) return 0.0;
  std::string folded = ascii_fold(text);
  std::size_t hits = 0;
  for (const auto& kw : keywords) {
    hits += count_nonoverlapping(folded, ascii_fold(kw));
  }
  return static_cast<double>(hits) / static_cast<double>(tokens);
}

QualityVerdict score_document(const RawDocument& doc, const FilterConfig& cfg) {
  QualityVerdict v;
  v.doc_id = doc.id;

  const std::size_t n_chars = utf8_codepoint_count(doc.text);
  const double punct = punctuation_error_rate(doc.text);

  std::vector<std::string> ad_merged;
  const std::vector<std::string>* ads = nullptr;
  if (auto it = cfg.ad_keywords.find(doc.language); it != cfg.ad_keywords.end()) {
    ads = &it->second;
  } else {
    ad_merged = merged_ad_keywords(cfg);
    ads = &ad_merged;
  }
  const double ad_density = ad_keyword_density(doc.text, *ads);

  // No lexicon for the document's language falls back to the union of all
  // configured lexicons; nothing configured at all scores 0.
  Lexicon lex_merged;
  const Lexicon* lex = nullptr;
  if (auto it = cfg.domain_lexicon.find(doc.language); it != cfg.domain_lexicon.end()) {
    lex = &it->second;
  } else {
    lex_merged = merged_lexicon(cfg);
    lex = &lex_merged;
  }
  const double relevance = lex->empty() ? 0.0 : domain_relevance(doc.text, *lex);

  v.scores[kFilterLength] = static_cast<double>(n_chars);
  v.scores[kFilterPunctuation] = punct;
  v.scores[kFilterAds] = ad_density;
  v.scores[kFilterRelevance] = relevance;

  bool whitespace_only = true;
  for (unsigned char c : doc.text) {
    if (!std::isspace(c)) {
      whitespace_only = false;
      break;
    }
  }

  if (doc.text.empty() || whitespace_only) {
    v.reject_reason = kRejectEmpty;
  } else if (n_chars < cfg.min_chars || n_chars > cfg.max_chars) {
    v.reject_reason = kFilterLength;
  } else if (punct > cfg.max_punct_error_rate) {
    v.reject_reason = kFilterPunctuation;
  } else if (ad_density > cfg.max_ad_density) {
    v.reject_reason = kFilterAds;
  } else if (relevance < cfg.min_domain_score) {
    v.reject_reason = kFilterRelevance;
  }
  v.kept = !v.reject_reason.has_value();
  return v;
}

namespace {

std::vector<QualityVerdict> score_batch(const std::vector<RawDocument>& docs,
                                        const FilterConfig& cfg, unsigned jobs) {
  std::vector<QualityVerdict> verdicts(docs.size());
  if (jobs <= 1 || docs.size() < 64) {
    for (std::size_t i = 0; i < docs.size(); ++i) verdicts[i] = score_document(docs[i], cfg);
    return verdicts;
  }
  const unsigned workers = std::min<unsigned>(jobs, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < docs.size(); i += workers) {
        verdicts[i] = score_document(docs[i], cfg);
      }
    });
  }
  for (auto& t : pool) t.join();
  return verdicts;
}

// Ranking barrier shared by the in-memory and streaming fronts. Returns the
// ids to keep; demotes rank-cut verdicts and fills the report.
std::unordered_set<std::string> apply_target_rate(std::vector<QualityVerdict>& verdicts,
                                                  std::uint64_t input_count,
                                                  const FilterConfig& cfg,
                                                  SelectionReport& report) {
  std::vector<RankEntry> survivors;
  std::unordered_map<std::string, std::size_t> verdict_index;
  verdict_index.reserve(verdicts.size());
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    verdict_index.emplace(verdicts[i].doc_id, i);
    if (verdicts[i].kept) {
      survivors.push_back({verdicts[i].doc_id, verdicts[i].scores.at(kFilterRelevance)});
    }
  }

  std::unordered_set<std::string> kept_ids;
  if (cfg.target_rate) {
    const double want = *cfg.target_rate * static_cast<double>(input_count);
    // Epsilon guards the binary representation of rates like 0.014.
    auto quota = static_cast<std::uint64_t>(std::ceil(want - 1e-9));
    if (survivors.size() < quota) {
      report.under_quota = true;
      for (auto& s : survivors) kept_ids.insert(s.doc_id);
    } else {
      std::sort(survivors.begin(), survivors.end(), [](const RankEntry& a, const RankEntry& b) {
        if (a.relevance != b.relevance) return a.relevance > b.relevance;
        return a.doc_id < b.doc_id;
      });
      for (std::uint64_t i = 0; i < quota; ++i) kept_ids.insert(survivors[i].doc_id);
      for (std::uint64_t i = quota; i < survivors.size(); ++i) {
        QualityVerdict& v = verdicts[verdict_index.at(survivors[i].doc_id)];
        v.kept = false;
        v.reject_reason = kRejectRankCutoff;
      }
    }
  } else {
    for (auto& s : survivors) kept_ids.insert(s.doc_id);
  }

  report.input_count = input_count;
  report.kept_count = kept_ids.size();
  report.selection_rate =
      input_count == 0 ? 0.0
                       : static_cast<double>(report.kept_count) / static_cast<double>(input_count);
  for (const auto& v : verdicts) {
    if (!v.kept) report.reject_histogram[*v.reject_reason] += 1;
  }
  return kept_ids;
}

}  // namespace

SelectionResult select_corpus(const std::vector<RawDocument>& docs, const FilterConfig& cfg) {
  cfg.validate();
  SelectionResult result;
  result.verdicts = score_batch(docs, cfg, 1);
  auto kept_ids = apply_target_rate(result.verdicts, docs.size(), cfg, result.report);
  for (const auto& doc : docs) {
    if (kept_ids.count(doc.id) != 0) result.kept.push_back(doc);
  }
  return result;
}

SelectionReport select_corpus_stream(const std::function<DocPull()>& open, const FilterConfig& cfg,
                                     const std::function<void(const RawDocument&)>& emit,
                                     std::vector<QualityVerdict>* verdicts_out, unsigned jobs) {
  cfg.validate();
  std::vector<QualityVerdict> verdicts;
  std::uint64_t input_count = 0;

  // Pass 1: score. Texts are not retained; only verdicts.
  {
    DocPull pull = open();
    std::vector<RawDocument> batch;
    constexpr std::size_t kBatch = 2048;
    auto flush = [&] {
      auto scored = score_batch(batch, cfg, jobs);
      verdicts.insert(verdicts.end(), std::make_move_iterator(scored.begin()),
                      std::make_move_iterator(scored.end()));
      batch.clear();
    };
    while (auto doc = pull()) {
      ++input_count;
      batch.push_back(std::move(*doc));
      if (batch.size() >= kBatch) flush();
    }
    flush();
  }

  SelectionReport report;
  auto kept_ids = apply_target_rate(verdicts, input_count, cfg, report);

  // Pass 2: emit survivors in stream order.
  {
    DocPull pull = open();
    while (auto doc = pull()) {
      if (kept_ids.count(doc->id) != 0) emit(*doc);
    }
  }

  if (verdicts_out != nullptr) *verdicts_out = std::move(verdicts);
  return report;
}

Lexicon parse_lexicon(std::string_view text) {
  Lexicon lex;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos
                                                                             : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      lex.emplace_back(std::string(line), 1.0);
    } else {
      std::string term(line.substr(0, tab));
      double weight = 1.0;
      try {
        weight = std::stod(std::string(line.substr(tab + 1)));
      } catch (const std::exception&) {
        weight = 1.0;
      }
      if (!term.empty()) lex.emplace_back(std::move(term), weight);
    }
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  return parse_lexicon(read_file(path));
}

std::vector<std::string> parse_term_list(std::string_view text) {
  std::vector<std::string> terms;
  for (const auto& [term, weight] : parse_lexicon(text)) terms.push_back(term);
  return terms;
}

std::vector<std::string> load_term_list(const std::filesystem::path& path) {
  return parse_term_list(read_file(path));
}

std::string SelectionReport::to_json() const {
  json j;
  j["input_count"] = input_count;
  j["kept_count"] = kept_count;
  j["selection_rate"] = selection_rate;
  j["reject_histogram"] = reject_histogram;
  j["under_quota"] = under_quota;
  return j.dump(2);
}

SelectionReport SelectionReport::from_json(std::string_view text) {
  json j = json::parse(text);
  SelectionReport r;
  r.input_count = j.at("input_count").get<std::uint64_t>();
  r.kept_count = j.at("kept_count").get<std::uint64_t>();
  r.selection_rate = j.at("selection_rate").get<double>();
  r.under_quota = j.at("under_quota").get<bool>();
  for (const auto& [k, v] : j.at("reject_histogram").items()) {
    r.reject_histogram[k] = v.get<std::uint64_t>();
  }
  return r;
}

}  // namespace onestage
