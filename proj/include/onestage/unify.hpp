#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "onestage/corpus.hpp"
#include "onestage/rewriter.hpp"

namespace onestage {

enum class Provenance { transformed_pretrain, native_sft };

const char* to_string(Provenance p);
std::optional<Provenance> parse_provenance(std::string_view s);

// Unified (instruction, output) record in a single language.
struct InstructionPair {
  std::string pair_id;
  std::vector<std::string> origin_doc_ids;
  std::string instruction;
  std::string output;
  Language language = Language::zh;  // zh or en only
  SourceKind genre = SourceKind::web;
  Provenance provenance = Provenance::transformed_pretrain;
};

std::string pair_to_json_line(const InstructionPair& pair);
std::optional<InstructionPair> pair_from_json_line(std::string_view line);

struct UnifyCounters {
  std::uint64_t chunks_total = 0;
  std::uint64_t chunks_dropped = 0;    // rewriter failure or empty rewrite
  std::uint64_t pairs_dropped = 0;     // language unification failure
  std::uint64_t ethics_rejected = 0;
};

// Splits text into chunks of at most max_chars codepoints, cutting after
// sentence terminators or newlines where possible. Concatenating the
// chunks reproduces the input exactly.
std::vector<std::string> chunk_text(std::string_view text, std::size_t max_chars);

struct PairOptions {
  std::size_t max_chunk_chars = 1000;
  // Pair language for documents whose own language is not zh/en.
  Language fallback_language = Language::en;
  std::string model_id = "mock";
};

// One pair per chunk: the question is grounded in the document title (or
// the chunk's first sentence when untitled), the answer restates the
// chunk. Pairs come out in the document's language; unify_language moves
// them to the run target. Failed chunks are dropped and counted.
std::vector<InstructionPair> make_instruction_pairs(const RawDocument& doc, Rewriter& rewriter,
                                                    const PairOptions& options,
                                                    UnifyCounters* counters = nullptr);

// Identity when the pair already carries the target language; otherwise
// both fields are rewritten via translate_unify. Returns nullopt (and
// counts) when the rewriter fails, so no wrong-language pair escapes.
std::optional<InstructionPair> unify_language(const InstructionPair& pair, Language target,
                                              Rewriter& rewriter, UnifyCounters* counters = nullptr,
                                              const std::string& model_id = "mock");

struct EthicsRule {
  std::string rule_id;
  std::string pattern_text;
  std::regex pattern;
};

struct EthicsVerdict {
  std::string pair_id;
  bool kept = true;
  std::optional<std::string> matched_rule;
};

// Blocklist file: one rule per line, "rule_id<TAB>pattern" (ECMAScript
// regex). Throws std::invalid_argument on a malformed line or pattern.
std::vector<EthicsRule> parse_ethics_rules(std::string_view text);
std::vector<EthicsRule> load_ethics_rules(const std::filesystem::path& path);

// First matching rule (file order) on instruction or output rejects.
EthicsVerdict ethics_gate(const InstructionPair& pair, const std::vector<EthicsRule>& rules);

// ------------------------------------------------------------ tokenizer

// Injective text -> id mapping with reserved pad/separator/end ids.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<int> encode(std::string_view text) const = 0;
  virtual int pad_id() const = 0;
  virtual int sep_id() const = 0;
  virtual int eos_id() const = 0;
  virtual int vocab_size() const = 0;
};

// Byte-level tokenizer: ids 0/1/2 are pad/sep/eos, byte b maps to b + 3.
class ByteTokenizer final : public Tokenizer {
 public:
  std::vector<int> encode(std::string_view text) const override;
  std::string decode(const std::vector<int>& ids) const;
  int pad_id() const override { return 0; }
  int sep_id() const override { return 1; }
  int eos_id() const override { return 2; }
  int vocab_size() const override { return 259; }
};

// Token sequence plus per-position loss mask (1 = contributes to loss).
struct TokenizedExample {
  std::vector<int> token_ids;
  std::vector<std::uint8_t> loss_mask;
  std::string pair_id;
};

// Layout: tokens(instruction) SEP tokens(output) EOS, mask 0 over the
// instruction and SEP, 1 over the output and EOS. Throws
// std::invalid_argument when the output tokenizes to zero tokens.
TokenizedExample tokenize_with_mask(const InstructionPair& pair, const Tokenizer& tokenizer);

}  // namespace onestage
