#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "onestage/corpus.hpp"

namespace onestage {

// Domain lexicon: term -> weight. Terms of pure-Latin script match whole
// rough tokens; other terms (CJK) match as substrings.
using Lexicon = std::vector<std::pair<std::string, double>>;

struct FilterConfig {
  std::size_t min_chars = 200;        // codepoints
  std::size_t max_chars = 100000;     // codepoints
  double max_punct_error_rate = 0.3;
  double max_ad_density = 0.2;
  double min_domain_score = 0.05;
  std::map<Language, std::vector<std::string>> ad_keywords;
  std::map<Language, Lexicon> domain_lexicon;
  std::optional<double> target_rate;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Filter names in cascade order. "empty" precedes them as a degenerate
// guard; "relevance_rank" marks survivors cut by the target-rate ranking.
inline constexpr const char* kFilterLength = "length";
inline constexpr const char* kFilterPunctuation = "punctuation";
inline constexpr const char* kFilterAds = "ads";
inline constexpr const char* kFilterRelevance = "relevance";
inline constexpr const char* kRejectEmpty = "empty";
inline constexpr const char* kRejectRankCutoff = "relevance_rank";

struct QualityVerdict {
  std::string doc_id;
  std::map<std::string, double> scores;  // one entry per configured filter
  bool kept = false;
  std::optional<std::string> reject_reason;
};

struct SelectionReport {
  std::uint64_t input_count = 0;
  std::uint64_t kept_count = 0;
  double selection_rate = 0.0;
  std::map<std::string, std::uint64_t> reject_histogram;
  bool under_quota = false;

  std::string to_json() const;
  static SelectionReport from_json(std::string_view text);
};

// Rough token count: each run of Latin letters/digits is one token, each
// CJK codepoint is one token. Denominator for ad density and relevance.
std::size_t rough_token_count(std::string_view text);

// min(1, sum_t weight(t) * count(t) / token_count). Empty text scores 0.
// Throws std::invalid_argument on an empty lexicon.
double domain_relevance(std::string_view text, const Lexicon& lexicon);

// Fraction of sentence-boundary positions carrying a punctuation error:
// unterminated segments longer than 400 codepoints, and runs of >= 3
// identical punctuation marks. Clamped to [0, 1].
double punctuation_error_rate(std::string_view text);

// Ad keyword occurrences per rough token.
double ad_keyword_density(std::string_view text, const std::vector<std::string>& keywords);

// Applies the cascade (length, punctuation, ads, relevance) in order; the
// first failing filter sets reject_reason. All scores are recorded even
// when an early filter rejects.
QualityVerdict score_document(const RawDocument& doc, const FilterConfig& cfg);

struct SelectionResult {
  std::vector<RawDocument> kept;  // original stream order
  std::vector<QualityVerdict> verdicts;
  SelectionReport report;
};

// Heuristic cascade over the whole stream; with target_rate set, survivors
// are ranked by domain relevance (ties by doc_id) and truncated to exactly
// ceil(target_rate * input_count). Fewer survivors than the quota keeps
// them all and flags under_quota.
SelectionResult select_corpus(const std::vector<RawDocument>& docs, const FilterConfig& cfg);

// Streaming variant: `open` must yield a fresh iterator over the same
// stream each call (the ranking step needs a second pass). Kept documents
// are emitted in stream order.
using DocPull = std::function<std::optional<RawDocument>()>;
SelectionReport select_corpus_stream(const std::function<DocPull()>& open, const FilterConfig& cfg,
                                     const std::function<void(const RawDocument&)>& emit,
                                     std::vector<QualityVerdict>* verdicts_out = nullptr,
                                     unsigned jobs = 1);

// One term per line; lexicons may carry "term<TAB>weight" (default 1.0).
// '#' lines and blanks are skipped.
Lexicon parse_lexicon(std::string_view text);
Lexicon load_lexicon(const std::filesystem::path& path);
std::vector<std::string> parse_term_list(std::string_view text);
std::vector<std::string> load_term_list(const std::filesystem::path& path);

}  // namespace onestage
