#include "onestage/unify.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "onestage/util.hpp"

namespace onestage {

using nlohmann::ordered_json;

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::transformed_pretrain:
      return "transformed_pretrain";
    case Provenance::native_sft:
      return "native_sft";
  }
  return "transformed_pretrain";
}

std::optional<Provenance> parse_provenance(std::string_view s) {
  if (s == "transformed_pretrain") return Provenance::transformed_pretrain;
  if (s == "native_sft") return Provenance::native_sft;
  return std::nullopt;
}

std::string pair_to_json_line(const InstructionPair& pair) {
  ordered_json j;
  j["pair_id"] = pair.pair_id;
  j["origin_doc_ids"] = pair.origin_doc_ids;
  j["instruction"] = pair.instruction;
  j["output"] = pair.output;
  j["language"] = to_string(pair.language);
  j["genre"] = to_string(pair.genre);
  j["provenance"] = to_string(pair.provenance);
  return j.dump();
}

std::optional<InstructionPair> pair_from_json_line(std::string_view line) {
  auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (!j.is_object()) return std::nullopt;
  InstructionPair pair;
  try {
    pair.pair_id = j.at("pair_id").get<std::string>();
    pair.instruction = j.at("instruction").get<std::string>();
    pair.output = j.at("output").get<std::string>();
    auto lang = parse_language(j.at("language").get<std::string>());
    auto genre = parse_source_kind(j.at("genre").get<std::string>());
    auto prov = parse_provenance(j.at("provenance").get<std::string>());
    if (!lang || !genre || !prov) return std::nullopt;
    pair.language = *lang;
    pair.genre = *genre;
    pair.provenance = *prov;
    if (j.contains("origin_doc_ids")) {
      for (const auto& id : j.at("origin_doc_ids")) {
        pair.origin_doc_ids.push_back(id.get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (pair.pair_id.empty() || pair.output.empty()) return std::nullopt;
  return pair;
}

namespace {

bool is_sentence_terminator(char32_t cp) {
  switch (cp) {
    case U'.':
    case U'!':
    case U'?':
    case U'。':
    case U'！':
    case U'？':
      return true;
    default:
      return false;
  }
}

// Codepoint-indexed view so chunking can address break positions without
// re-decoding. offsets[i] is the byte offset of codepoint i; offsets back
// is text.size().
struct CodepointIndex {
  std::vector<std::size_t> offsets;

  explicit CodepointIndex(std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size()) {
      offsets.push_back(pos);
      utf8_decode(text, pos);
    }
    offsets.push_back(text.size());
  }

  std::size_t count() const { return offsets.size() - 1; }
};

}  // namespace

std::vector<std::string> chunk_text(std::string_view text, std::size_t max_chars) {
  if (max_chars == 0) throw std::invalid_argument("chunk_text: max_chars must be positive");
  std::vector<std::string> chunks;
  if (text.empty()) return chunks;

  CodepointIndex index(text);
  std::size_t begin = 0;  // codepoint index of the current chunk start
  while (begin < index.count()) {
    std::size_t remaining = index.count() - begin;
    if (remaining <= max_chars) {
      chunks.emplace_back(text.substr(index.offsets[begin]));
      break;
    }
    // Prefer the latest sentence terminator or newline within the window;
    // fall back to a hard cut at the window edge.
    std::size_t cut = begin + max_chars;  // exclusive
    std::size_t best = 0;
    for (std::size_t i = begin; i < begin + max_chars; ++i) {
      std::size_t pos = index.offsets[i];
      char32_t cp = utf8_decode(text, pos);
      if (is_sentence_terminator(cp) || cp == U'\n') best = i + 1;
    }
    if (best > begin) cut = best;
    chunks.emplace_back(
        text.substr(index.offsets[begin], index.offsets[cut] - index.offsets[begin]));
    begin = cut;
  }
  return chunks;
}

namespace {

// Question seed for an untitled document: the chunk's first sentence,
// capped so prompts stay short.
std::string first_sentence(std::string_view chunk) {
  constexpr std::size_t kMaxSeedChars = 80;
  std::size_t pos = 0;
  std::size_t taken = 0;
  std::size_t end = 0;
  while (pos < chunk.size() && taken < kMaxSeedChars) {
    char32_t cp = utf8_decode(chunk, pos);
    ++taken;
    end = pos;
    if (is_sentence_terminator(cp) || cp == U'\n') break;
  }
  std::string seed(chunk.substr(0, end));
  while (!seed.empty() && (seed.back() == '\n' || seed.back() == ' ')) seed.pop_back();
  return seed;
}

Language pair_language(const RawDocument& doc, const PairOptions& options) {
  if (doc.language == Language::zh || doc.language == Language::en) return doc.language;
  return options.fallback_language;
}

}  // namespace

std::vector<InstructionPair> make_instruction_pairs(const RawDocument& doc, Rewriter& rewriter,
                                                    const PairOptions& options,
                                                    UnifyCounters* counters) {
  std::vector<InstructionPair> pairs;
  Language lang = pair_language(doc, options);
  auto chunks = chunk_text(doc.text, options.max_chunk_chars);
  for (std::size_t k = 0; k < chunks.size(); ++k) {
    if (counters) ++counters->chunks_total;
    const std::string& chunk = chunks[k];
    std::string question_seed =
        doc.title && !doc.title->empty() ? *doc.title : first_sentence(chunk);
    if (question_seed.empty()) question_seed = chunk;
    try {
      RewriteRequest question_req{RewriteTemplate::gen_question, question_seed, lang,
                                  options.model_id};
      RewriteRequest answer_req{RewriteTemplate::gen_answer, chunk, lang, options.model_id};
      InstructionPair pair;
      pair.pair_id = doc.id + "#c" + std::to_string(k);
      pair.origin_doc_ids = {doc.id};
      pair.instruction = rewriter.rewrite(question_req);
      pair.output = rewriter.rewrite(answer_req);
      pair.language = lang;
      pair.genre = doc.source_kind;
      pair.provenance = Provenance::transformed_pretrain;
      pairs.push_back(std::move(pair));
    } catch (const RewriterUnavailable&) {
      if (counters) ++counters->chunks_dropped;
    } catch (const EmptyRewrite&) {
      if (counters) ++counters->chunks_dropped;
    }
  }
  return pairs;
}

std::optional<InstructionPair> unify_language(const InstructionPair& pair, Language target,
                                              Rewriter& rewriter, UnifyCounters* counters,
                                              const std::string& model_id) {
  if (target != Language::zh && target != Language::en) {
    throw std::invalid_argument("unify_language: target must be zh or en");
  }
  if (pair.language == target) return pair;
  try {
    InstructionPair out = pair;
    RewriteRequest instr_req{RewriteTemplate::translate_unify, pair.instruction, target, model_id};
    RewriteRequest output_req{RewriteTemplate::translate_unify, pair.output, target, model_id};
    out.instruction = rewriter.rewrite(instr_req);
    out.output = rewriter.rewrite(output_req);
    out.language = target;
    return out;
  } catch (const RewriterUnavailable&) {
    if (counters) ++counters->pairs_dropped;
    return std::nullopt;
  } catch (const EmptyRewrite&) {
    if (counters) ++counters->pairs_dropped;
    return std::nullopt;
  }
}

std::vector<EthicsRule> parse_ethics_rules(std::string_view text) {
  std::vector<EthicsRule> rules;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 >= line.size()) {
      throw std::invalid_argument("ethics rules line " + std::to_string(lineno) +
                                  ": expected rule_id<TAB>pattern");
    }
    EthicsRule rule;
    rule.rule_id = std::string(line.substr(0, tab));
    rule.pattern_text = std::string(line.substr(tab + 1));
    try {
      rule.pattern = std::regex(rule.pattern_text, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw std::invalid_argument("ethics rules line " + std::to_string(lineno) +
                                  ": bad pattern: " + e.what());
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<EthicsRule> load_ethics_rules(const std::filesystem::path& path) {
  return parse_ethics_rules(read_file(path));
}

EthicsVerdict ethics_gate(const InstructionPair& pair, const std::vector<EthicsRule>& rules) {
  EthicsVerdict verdict;
  verdict.pair_id = pair.pair_id;
  for (const auto& rule : rules) {
    if (std::regex_search(pair.instruction, rule.pattern) ||
        std::regex_search(pair.output, rule.pattern)) {
      verdict.kept = false;
      verdict.matched_rule = rule.rule_id;
      return verdict;
    }
  }
  return verdict;
}

std::vector<int> ByteTokenizer::encode(std::string_view text) const {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (unsigned char b : text) ids.push_back(static_cast<int>(b) + 3);
  return ids;
}

std::string ByteTokenizer::decode(const std::vector<int>& ids) const {
  std::string out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id >= 3 && id < vocab_size()) out.push_back(static_cast<char>(id - 3));
  }
  return out;
}

TokenizedExample tokenize_with_mask(const InstructionPair& pair, const Tokenizer& tokenizer) {
  auto instruction_ids = tokenizer.encode(pair.instruction);
  auto output_ids = tokenizer.encode(pair.output);
  if (output_ids.empty()) {
    throw std::invalid_argument("tokenize_with_mask: empty output for pair " + pair.pair_id);
  }
  TokenizedExample example;
  example.pair_id = pair.pair_id;
  example.token_ids.reserve(instruction_ids.size() + output_ids.size() + 2);
  example.loss_mask.reserve(instruction_ids.size() + output_ids.size() + 2);
  for (int id : instruction_ids) {
    example.token_ids.push_back(id);
    example.loss_mask.push_back(0);
  }
  example.token_ids.push_back(tokenizer.sep_id());
  example.loss_mask.push_back(0);
  for (int id : output_ids) {
    example.token_ids.push_back(id);
    example.loss_mask.push_back(1);
  }
  example.token_ids.push_back(tokenizer.eos_id());
  example.loss_mask.push_back(1);
  return example;
}

}  // namespace onestage
