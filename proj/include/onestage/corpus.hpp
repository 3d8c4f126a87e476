#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace onestage {

enum class SourceKind { web, book, encyclopedia, literature };
enum class Language { zh, en, other };

const char* to_string(SourceKind kind);
const char* to_string(Language lang);
std::optional<SourceKind> parse_source_kind(std::string_view s);
std::optional<Language> parse_language(std::string_view s);

// One source record. Text is always normalized (see normalize_text) and
// non-empty; immutable by convention once yielded from ingestion.
struct RawDocument {
  std::string id;
  SourceKind source_kind = SourceKind::web;
  Language language = Language::other;
  std::optional<std::string> title;
  std::string text;
  std::map<std::string, std::string> meta;
};

// Per (language, source_kind) accounting over a document stream.
struct CorpusStats {
  std::array<std::array<std::uint64_t, 4>, 3> cells{};  // [language][source_kind]
  std::uint64_t total_documents = 0;
  std::uint64_t total_bytes = 0;

  void add(const RawDocument& doc);
  std::uint64_t cell(Language lang, SourceKind kind) const;
  // Sum over all cells; equals total_documents for stats built via add().
  std::uint64_t cell_total() const;
};

// Corpus manifest: the per-cell counts as JSON. Missing cells load as zero.
std::string stats_to_json(const CorpusStats& stats);
std::optional<CorpusStats> stats_from_json(std::string_view text);

// Canonical text cleanup, applied to every document on ingestion:
//   1. strip control characters other than newline and tab
//   2. Unicode NFC
//   3. collapse each whitespace run to '\n' if it contains a line break,
//      otherwise to ' '
//   4. trim leading/trailing whitespace
// Idempotent; total (empty in -> empty out).
std::string normalize_text(std::string_view text);

// Script-fraction classifier over non-whitespace codepoints:
// zh if CJK fraction >= 0.30; en if Latin-letter fraction >= 0.60 and
// CJK fraction < 0.05; otherwise other. Throws std::invalid_argument on
// empty input.
Language detect_language(std::string_view text);

struct IngestOptions {
  SourceKind source_kind = SourceKind::web;
  // Fallback when script detection is inconclusive (detection wins otherwise).
  std::optional<Language> language_hint;
  // Documents longer than this are split at paragraph boundaries into
  // parts sharing the base id ("<id>#p<k>").
  std::size_t max_doc_bytes = 1 << 20;
};

struct IngestStats {
  std::uint64_t yielded = 0;
  std::uint64_t skipped = 0;  // malformed, duplicate-id, or empty records
  CorpusStats corpus;
};

// Pull-based reader over one input file. Line-delimited JSON records
// {"id", "text", "title"?, "meta"?} by default; files ending in .txt are
// treated as a single plain-text document (books). Records that fail the
// schema, have duplicate ids, or normalize to empty text are skipped and
// counted. Throws std::runtime_error if the path is unreadable.
class IngestStream {
 public:
  IngestStream(std::filesystem::path path, IngestOptions options);

  std::optional<RawDocument> next();
  const IngestStats& stats() const { return stats_; }

 private:
  std::optional<RawDocument> parse_record(std::string_view line);
  void enqueue_split(RawDocument doc);

  std::filesystem::path path_;
  IngestOptions options_;
  IngestStats stats_;
  std::ifstream input_;
  bool plain_text_mode_ = false;
  bool plain_text_consumed_ = false;
  std::deque<RawDocument> pending_;
  std::unordered_set<std::string> seen_ids_;
};

std::vector<RawDocument> ingest_all(const std::filesystem::path& path, const IngestOptions& options,
                                    IngestStats* stats = nullptr);

// JSONL (de)serialization of the internal full-document record.
std::string document_to_json_line(const RawDocument& doc);
std::optional<RawDocument> document_from_json_line(std::string_view line);

}  // namespace onestage
