#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "onestage/corpus.hpp"

namespace onestage {

struct DedupParams {
  std::size_t num_perms = 128;
  std::size_t shingle_size = 5;  // character (codepoint) shingles
  std::size_t bands = 32;
  std::size_t rows = 4;
  double threshold = 0.8;
  std::uint64_t seed = 0x0ed5a1u;  // seeds the permutation family

  void validate() const;  // bands*rows == num_perms, threshold in (0,1), num_perms >= 16
};

/**
 * @brief MinHash sketch of one document's character-shingle set.
 *
 * values[i] is the minimum of permutation i over the shingle hashes; the
 * fraction of agreeing slots between two signatures estimates the Jaccard
 * similarity of the underlying shingle sets.
 */
struct MinHashSignature {
  std::string doc_id;
  std::vector<std::uint64_t> values;
};

// Deterministic for a fixed seed family. Throws std::invalid_argument when
// the text has fewer codepoints than shingle_size or num_perms < 16.
MinHashSignature minhash_signature(std::string_view doc_id, std::string_view text,
                                   std::size_t num_perms, std::size_t shingle_size,
                                   std::uint64_t seed = DedupParams{}.seed);

// Fraction of agreeing slots; exactly 1.0 for identical texts.
double signature_agreement(const MinHashSignature& a, const MinHashSignature& b);

// Exact shingle set, for brute-force Jaccard oracles and tests.
std::set<std::string> shingle_set(std::string_view text, std::size_t shingle_size);
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/**
 * @brief Connected group of near-duplicate documents.
 *
 * representative is the lexicographically smallest member id; every other
 * member is flagged for removal.
 */
struct DuplicateCluster {
  std::string representative;
  std::vector<std::string> members;  // sorted, includes representative
};

struct NearDupResult {
  std::vector<DuplicateCluster> clusters;  // sorted by representative
  // Candidate pairs that passed the signature-agreement confirmation.
  std::vector<std::pair<std::string, std::string>> confirmed_pairs;
};

// LSH banding proposes candidates; signature agreement >= threshold
// confirms; union-find merges confirmed pairs into clusters. Throws
// std::invalid_argument if bands*rows != signature length.
NearDupResult near_duplicates(const std::vector<MinHashSignature>& signatures, double threshold,
                              std::size_t bands, std::size_t rows);

// Ids flagged for removal (all non-representative members).
std::vector<std::string> removal_list(const std::vector<DuplicateCluster>& clusters);

/**
 * @brief Streaming exact-duplicate filter keyed on the content hash of
 * normalized text. First occurrence wins.
 */
class ExactDeduper {
 public:
  // True when the text was not seen before (document should be kept).
  bool keep(std::string_view text);
  std::uint64_t removed_count() const { return removed_; }

 private:
  std::unordered_set<std::string> seen_;
  std::uint64_t removed_ = 0;
};

struct ExactDedupResult {
  std::vector<RawDocument> kept;  // input order preserved
  std::vector<std::string> removed_ids;
  std::uint64_t removed_count = 0;
};

ExactDedupResult exact_dedup(const std::vector<RawDocument>& docs);

// Signatures for a batch of documents; deterministic order, parallel when
// jobs > 1. Documents shorter than shingle_size are skipped (too short to
// sketch) and reported in `skipped`.
std::vector<MinHashSignature> batch_signatures(const std::vector<RawDocument>& docs,
                                               const DedupParams& params, unsigned jobs = 1,
                                               std::vector<std::string>* skipped = nullptr);

}  // namespace onestage
