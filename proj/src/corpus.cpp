#include "onestage/corpus.hpp"

#include <unicode/unorm2.h>
#include <unicode/ustring.h>

#include <json.hpp>
#include <stdexcept>

#include "onestage/util.hpp"

namespace onestage {

namespace {

using nlohmann::json;

std::u16string to_utf16(std::string_view text) {
  std::u16string out;
  if (text.empty()) return out;
  UErrorCode ec = U_ZERO_ERROR;
  int32_t needed = 0;
  u_strFromUTF8(nullptr, 0, &needed, text.data(), static_cast<int32_t>(text.size()), &ec);
  if (ec != U_BUFFER_OVERFLOW_ERROR && U_FAILURE(ec)) {
    throw std::runtime_error("utf16 conversion failed");
  }
  ec = U_ZERO_ERROR;
  out.resize(static_cast<std::size_t>(needed));
  u_strFromUTF8(reinterpret_cast<UChar*>(out.data()), needed, nullptr, text.data(),
                static_cast<int32_t>(text.size()), &ec);
  if (U_FAILURE(ec)) throw std::runtime_error("utf16 conversion failed");
  return out;
}

std::string to_utf8(const std::u16string& text) {
  std::string out;
  if (text.empty()) return out;
  UErrorCode ec = U_ZERO_ERROR;
  int32_t needed = 0;
  u_strToUTF8(nullptr, 0, &needed, reinterpret_cast<const UChar*>(text.data()),
              static_cast<int32_t>(text.size()), &ec);
  if (ec != U_BUFFER_OVERFLOW_ERROR && U_FAILURE(ec)) {
    throw std::runtime_error("utf8 conversion failed");
  }
  ec = U_ZERO_ERROR;
  out.resize(static_cast<std::size_t>(needed));
  u_strToUTF8(out.data(), needed, nullptr, reinterpret_cast<const UChar*>(text.data()),
              static_cast<int32_t>(text.size()), &ec);
  if (U_FAILURE(ec)) throw std::runtime_error("utf8 conversion failed");
  return out;
}

std::string nfc(std::string_view text) {
  UErrorCode ec = U_ZERO_ERROR;
  const UNormalizer2* norm = unorm2_getNFCInstance(&ec);
  if (U_FAILURE(ec)) throw std::runtime_error("NFC normalizer unavailable");
  std::u16string in = to_utf16(text);
  std::u16string out;
  out.resize(in.size() + 16);
  int32_t len = unorm2_normalize(norm, reinterpret_cast<const UChar*>(in.data()),
                                 static_cast<int32_t>(in.size()),
                                 reinterpret_cast<UChar*>(out.data()),
                                 static_cast<int32_t>(out.size()), &ec);
  if (ec == U_BUFFER_OVERFLOW_ERROR) {
    ec = U_ZERO_ERROR;
    out.resize(static_cast<std::size_t>(len));
    len = unorm2_normalize(norm, reinterpret_cast<const UChar*>(in.data()),
                           static_cast<int32_t>(in.size()),
                           reinterpret_cast<UChar*>(out.data()),
                           static_cast<int32_t>(out.size()), &ec);
  }
  if (U_FAILURE(ec)) throw std::runtime_error("NFC normalization failed");
  out.resize(static_cast<std::size_t>(len));
  return to_utf8(out);
}

bool is_control(char32_t cp) {
  return (cp < 0x20 && cp != '\n' && cp != '\t') || cp == 0x7F ||
         (cp >= 0x80 && cp <= 0x9F);
}

// Splits raw text into parts no longer than max_bytes, preferring blank-line
// boundaries, then single newlines, then a hard byte split at a codepoint
// boundary.
std::vector<std::string> split_by_bytes(std::string_view text, std::size_t max_bytes) {
  std::vector<std::string> parts;
  while (text.size() > max_bytes) {
    std::string_view window = text.substr(0, max_bytes);
    std::size_t cut = window.rfind("\n\n");
    if (cut == std::string_view::npos || cut == 0) cut = window.rfind('\n');
    if (cut == std::string_view::npos || cut == 0) {
      // hard split; back up to a codepoint boundary
      cut = max_bytes;
      while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xc0) == 0x80) --cut;
      if (cut == 0) cut = max_bytes;
    }
    parts.emplace_back(text.substr(0, cut));
    text.remove_prefix(cut);
  }
  if (!text.empty()) parts.emplace_back(text);
  return parts;
}

}  // namespace

const char* to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::web: return "web";
    case SourceKind::book: return "book";
    case SourceKind::encyclopedia: return "encyclopedia";
    case SourceKind::literature: return "literature";
  }
  return "web";
}

const char* to_string(Language lang) {
  switch (lang) {
    case Language::zh: return "zh";
    case Language::en: return "en";
    case Language::other: return "other";
  }
  return "other";
}

std::optional<SourceKind> parse_source_kind(std::string_view s) {
  if (s == "web") return SourceKind::web;
  if (s == "book") return SourceKind::book;
  if (s == "encyclopedia") return SourceKind::encyclopedia;
  if (s == "literature") return SourceKind::literature;
  return std::nullopt;
}

std::optional<Language> parse_language(std::string_view s) {
  if (s == "zh") return Language::zh;
  if (s == "en") return Language::en;
  if (s == "other") return Language::other;
  return std::nullopt;
}

void CorpusStats::add(const RawDocument& doc) {
  cells[static_cast<std::size_t>(doc.language)][static_cast<std::size_t>(doc.source_kind)] += 1;
  total_documents += 1;
  total_bytes += doc.text.size();
}

std::uint64_t CorpusStats::cell(Language lang, SourceKind kind) const {
  return cells[static_cast<std::size_t>(lang)][static_cast<std::size_t>(kind)];
}

std::uint64_t CorpusStats::cell_total() const {
  std::uint64_t total = 0;
  for (const auto& row : cells) {
    for (auto count : row) total += count;
  }
  return total;
}

namespace {

constexpr Language kLanguages[] = {Language::zh, Language::en, Language::other};
constexpr SourceKind kKinds[] = {SourceKind::web, SourceKind::book, SourceKind::encyclopedia,
                                 SourceKind::literature};

}  // namespace

std::string stats_to_json(const CorpusStats& stats) {
  nlohmann::ordered_json j;
  j["total_documents"] = stats.total_documents;
  j["total_bytes"] = stats.total_bytes;
  nlohmann::ordered_json cells = nlohmann::ordered_json::object();
  for (Language lang : kLanguages) {
    nlohmann::ordered_json row = nlohmann::ordered_json::object();
    for (SourceKind kind : kKinds) row[to_string(kind)] = stats.cell(lang, kind);
    cells[to_string(lang)] = std::move(row);
  }
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

std::optional<CorpusStats> stats_from_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("cells") || !j["cells"].is_object()) {
    return std::nullopt;
  }
  CorpusStats stats;
  try {
    for (const auto& [lang_name, row] : j["cells"].items()) {
      auto lang = parse_language(lang_name);
      if (!lang || !row.is_object()) return std::nullopt;
      for (const auto& [kind_name, count] : row.items()) {
        auto kind = parse_source_kind(kind_name);
        if (!kind || !count.is_number_unsigned()) return std::nullopt;
        stats.cells[static_cast<std::size_t>(*lang)][static_cast<std::size_t>(*kind)] =
            count.get<std::uint64_t>();
      }
    }
    stats.total_documents = j.value("total_documents", stats.cell_total());
    stats.total_bytes = j.value("total_bytes", std::uint64_t{0});
  } catch (const json::exception&) {
    return std::nullopt;
  }
  return stats;
}

std::string normalize_text(std::string_view text) {
  // Control characters first: removing one later could expose a base +
  // combining-mark pair that NFC should have composed.
  std::string stripped;
  stripped.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t start = pos;
    char32_t cp = utf8_decode(text, pos);
    if (is_control(cp)) continue;
    stripped.append(text.substr(start, pos - start));
  }

  std::string composed = nfc(stripped);

  std::string out;
  out.reserve(composed.size());
  pos = 0;
  bool in_run = false;
  bool run_has_newline = false;
  while (pos < composed.size()) {
    std::size_t start = pos;
    char32_t cp = utf8_decode(composed, pos);
    if (is_space_cp(cp)) {
      in_run = true;
      if (cp == '\n' || cp == '\r') run_has_newline = true;
      continue;
    }
    if (in_run) {
      if (!out.empty()) out.push_back(run_has_newline ? '\n' : ' ');
      in_run = false;
      run_has_newline = false;
    }
    out.append(composed.substr(start, pos - start));
  }
  return out;
}

Language detect_language(std::string_view text) {
  if (text.empty()) {
    throw std::invalid_argument("detect_language: empty text");
  }
  std::size_t pos = 0;
  std::uint64_t cjk = 0, latin = 0, total = 0;
  while (pos < text.size()) {
    char32_t cp = utf8_decode(text, pos);
    if (is_space_cp(cp)) continue;
    ++total;
    if (is_cjk(cp)) ++cjk;
    else if (is_latin_letter(cp)) ++latin;
  }
  if (total == 0) {
    throw std::invalid_argument("detect_language: whitespace-only text");
  }
  double cjk_frac = static_cast<double>(cjk) / static_cast<double>(total);
  double latin_frac = static_cast<double>(latin) / static_cast<double>(total);
  if (cjk_frac >= 0.30) return Language::zh;
  if (latin_frac >= 0.60 && cjk_frac < 0.05) return Language::en;
  return Language::other;
}

IngestStream::IngestStream(std::filesystem::path path, IngestOptions options)
    : path_(std::move(path)), options_(options) {
  plain_text_mode_ = path_.extension() == ".txt";
  input_.open(path_, std::ios::binary);
  if (!input_) {
    throw std::runtime_error("ingest: cannot open " + path_.string());
  }
}

std::optional<RawDocument> IngestStream::parse_record(std::string_view line) {
  json rec = json::parse(line, nullptr, false);
  if (rec.is_discarded() || !rec.is_object()) return std::nullopt;
  if (!rec.contains("id") || !rec["id"].is_string()) return std::nullopt;
  if (!rec.contains("text") || !rec["text"].is_string()) return std::nullopt;

  RawDocument doc;
  doc.id = rec["id"].get<std::string>();
  if (doc.id.empty()) return std::nullopt;
  doc.text = rec["text"].get<std::string>();
  if (rec.contains("title")) {
    if (!rec["title"].is_string()) return std::nullopt;
    doc.title = rec["title"].get<std::string>();
  }
  if (rec.contains("meta")) {
    if (!rec["meta"].is_object()) return std::nullopt;
    for (const auto& [k, v] : rec["meta"].items()) {
      if (!v.is_string()) return std::nullopt;
      doc.meta[k] = v.get<std::string>();
    }
  }
  return doc;
}

void IngestStream::enqueue_split(RawDocument doc) {
  doc.source_kind = options_.source_kind;
  doc.meta.emplace("source_file", path_.filename().string());

  std::vector<std::string> parts;
  if (doc.text.size() > options_.max_doc_bytes) {
    parts = split_by_bytes(doc.text, options_.max_doc_bytes);
  } else {
    parts.push_back(doc.text);
  }

  const bool multi = parts.size() > 1;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    RawDocument part = doc;
    part.text = normalize_text(parts[i]);
    if (part.text.empty()) {
      ++stats_.skipped;
      continue;
    }
    if (multi) part.id = doc.id + "#p" + std::to_string(i);
    if (!seen_ids_.insert(part.id).second) {
      ++stats_.skipped;
      continue;
    }
    Language detected = detect_language(part.text);
    part.language = (detected == Language::other && options_.language_hint)
                        ? *options_.language_hint
                        : detected;
    pending_.push_back(std::move(part));
  }
}

std::optional<RawDocument> IngestStream::next() {
  while (pending_.empty()) {
    if (plain_text_mode_) {
      if (plain_text_consumed_) return std::nullopt;
      plain_text_consumed_ = true;
      RawDocument doc;
      doc.id = path_.stem().string();
      doc.text.assign(std::istreambuf_iterator<char>(input_), std::istreambuf_iterator<char>());
      if (doc.id.empty()) {
        ++stats_.skipped;
        return std::nullopt;
      }
      enqueue_split(std::move(doc));
      continue;
    }
    std::string line;
    if (!std::getline(input_, line)) return std::nullopt;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto doc = parse_record(line);
    if (!doc) {
      ++stats_.skipped;
      continue;
    }
    enqueue_split(std::move(*doc));
  }
  RawDocument doc = std::move(pending_.front());
  pending_.pop_front();
  ++stats_.yielded;
  stats_.corpus.add(doc);
  return doc;
}

std::vector<RawDocument> ingest_all(const std::filesystem::path& path, const IngestOptions& options,
                                    IngestStats* stats) {
  IngestStream stream(path, options);
  std::vector<RawDocument> docs;
  while (auto doc = stream.next()) docs.push_back(std::move(*doc));
  if (stats != nullptr) *stats = stream.stats();
  return docs;
}

std::string document_to_json_line(const RawDocument& doc) {
  json rec;
  rec["id"] = doc.id;
  rec["source_kind"] = to_string(doc.source_kind);
  rec["language"] = to_string(doc.language);
  if (doc.title) rec["title"] = *doc.title;
  rec["text"] = doc.text;
  rec["meta"] = doc.meta;
  return rec.dump();
}

std::optional<RawDocument> document_from_json_line(std::string_view line) {
  json rec = json::parse(line, nullptr, false);
  if (rec.is_discarded() || !rec.is_object()) return std::nullopt;
  RawDocument doc;
  try {
    doc.id = rec.at("id").get<std::string>();
    auto kind = parse_source_kind(rec.at("source_kind").get<std::string>());
    auto lang = parse_language(rec.at("language").get<std::string>());
    if (!kind || !lang || doc.id.empty()) return std::nullopt;
    doc.source_kind = *kind;
    doc.language = *lang;
    doc.text = rec.at("text").get<std::string>();
    if (rec.contains("title")) doc.title = rec["title"].get<std::string>();
    if (rec.contains("meta")) {
      for (const auto& [k, v] : rec["meta"].items()) doc.meta[k] = v.get<std::string>();
    }
  } catch (const json::exception&) {
    return std::nullopt;
  }
  if (doc.text.empty()) return std::nullopt;
  return doc;
}

}  // namespace onestage
