#include "onestage/dedup.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "onestage/util.hpp"

namespace onestage {

namespace {

constexpr std::uint64_t kMersenne61 = (1ull << 61) - 1;

// (a*x + b) mod 2^61-1 without __int128 overflow concerns: split multiply.
std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) {
  __uint128_t prod = static_cast<__uint128_t>(a) * b;
  std::uint64_t lo = static_cast<std::uint64_t>(prod & kMersenne61);
  std::uint64_t hi = static_cast<std::uint64_t>(prod >> 61);
  std::uint64_t r = lo + hi;
  if (r >= kMersenne61) r -= kMersenne61;
  return r;
}

struct PermutationFamily {
  std::vector<std::uint64_t> a;
  std::vector<std::uint64_t> b;

  PermutationFamily(std::size_t n, std::uint64_t seed) : a(n), b(n) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng() % (kMersenne61 - 1) + 1;  // nonzero
      b[i] = rng() % kMersenne61;
    }
  }
};

// Hashes of the codepoint n-gram shingles (multiset collapsed to a set).
std::vector<std::uint64_t> shingle_hashes(std::string_view text, std::size_t shingle_size) {
  // Byte offsets of each codepoint start, plus end sentinel.
  std::vector<std::size_t> offsets;
  std::size_t pos = 0;
  while (pos < text.size()) {
    offsets.push_back(pos);
    utf8_decode(text, pos);
  }
  offsets.push_back(text.size());

  const std::size_t cps = offsets.size() - 1;
  if (cps < shingle_size) {
    throw std::invalid_argument("minhash: text shorter than shingle size");
  }
  std::vector<std::uint64_t> hashes;
  hashes.reserve(cps - shingle_size + 1);
  for (std::size_t i = 0; i + shingle_size <= cps; ++i) {
    std::string_view shingle =
        text.substr(offsets[i], offsets[i + shingle_size] - offsets[i]);
    hashes.push_back(fnv1a64(shingle));
  }
  std::sort(hashes.begin(), hashes.end());
  hashes.erase(std::unique(hashes.begin(), hashes.end()), hashes.end());
  return hashes;
}

struct UnionFind {
  std::vector<std::size_t> parent;

  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t x, std::size_t y) {
    x = find(x);
    y = find(y);
    if (x != y) parent[std::max(x, y)] = std::min(x, y);
  }
};

}  // namespace

void DedupParams::validate() const {
  if (num_perms < 16) {
    throw std::invalid_argument("dedup.num_perms must be >= 16");
  }
  if (bands * rows != num_perms) {
    throw std::invalid_argument("dedup.bands * dedup.rows must equal dedup.num_perms");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("dedup.threshold must be in (0,1)");
  }
  if (shingle_size == 0) {
    throw std::invalid_argument("dedup.shingle_size must be >= 1");
  }
}

MinHashSignature minhash_signature(std::string_view doc_id, std::string_view text,
                                   std::size_t num_perms, std::size_t shingle_size,
                                   std::uint64_t seed) {
  if (num_perms < 16) {
    throw std::invalid_argument("minhash: num_perms must be >= 16");
  }
  PermutationFamily family(num_perms, seed);
  std::vector<std::uint64_t> hashes = shingle_hashes(text, shingle_size);

  MinHashSignature sig;
  sig.doc_id = std::string(doc_id);
  sig.values.assign(num_perms, kMersenne61);
  for (std::uint64_t h : hashes) {
    std::uint64_t x = h % kMersenne61;
    for (std::size_t i = 0; i < num_perms; ++i) {
      std::uint64_t v = mulmod61(family.a[i], x);
      v += family.b[i];
      if (v >= kMersenne61) v -= kMersenne61;
      if (v < sig.values[i]) sig.values[i] = v;
    }
  }
  return sig;
}

double signature_agreement(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.values.size() != b.values.size() || a.values.empty()) {
    throw std::invalid_argument("signature_agreement: size mismatch");
  }
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (a.values[i] == b.values[i]) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(a.values.size());
}

std::set<std::string> shingle_set(std::string_view text, std::size_t shingle_size) {
  std::vector<std::size_t> offsets;
  std::size_t pos = 0;
  while (pos < text.size()) {
    offsets.push_back(pos);
    utf8_decode(text, pos);
  }
  offsets.push_back(text.size());
  std::set<std::string> out;
  if (offsets.size() - 1 < shingle_size) return out;
  for (std::size_t i = 0; i + shingle_size + 1 <= offsets.size(); ++i) {
    out.emplace(text.substr(offsets[i], offsets[i + shingle_size] - offsets[i]));
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (const auto& s : small) {
    if (large.count(s) != 0) ++inter;
  }
  return static_cast<double>(inter) /
         static_cast<double>(a.size() + b.size() - inter);
}

NearDupResult near_duplicates(const std::vector<MinHashSignature>& signatures, double threshold,
                              std::size_t bands, std::size_t rows) {
  NearDupResult result;
  if (signatures.empty()) return result;
  const std::size_t num_perms = signatures.front().values.size();
  if (bands * rows != num_perms) {
    throw std::invalid_argument("near_duplicates: bands * rows must equal num_perms");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("near_duplicates: threshold must be in (0,1)");
  }
  for (const auto& sig : signatures) {
    if (sig.values.size() != num_perms) {
      throw std::invalid_argument("near_duplicates: inconsistent signature lengths");
    }
  }

  // Banding: equal band content -> candidate bucket.
  std::set<std::pair<std::size_t, std::size_t>> candidates;
  {
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
    for (std::size_t band = 0; band < bands; ++band) {
      buckets.clear();
      for (std::size_t i = 0; i < signatures.size(); ++i) {
        std::string_view raw(
            reinterpret_cast<const char*>(signatures[i].values.data() + band * rows),
            rows * sizeof(std::uint64_t));
        std::uint64_t key = fnv1a64(raw) ^ (band * 0x9e3779b97f4a7c15ull);
        buckets[key].push_back(i);
      }
      for (const auto& [key, members] : buckets) {
        for (std::size_t x = 0; x < members.size(); ++x) {
          for (std::size_t y = x + 1; y < members.size(); ++y) {
            candidates.emplace(std::min(members[x], members[y]),
                               std::max(members[x], members[y]));
          }
        }
      }
    }
  }

  UnionFind uf(signatures.size());
  for (const auto& [i, j] : candidates) {
    if (signature_agreement(signatures[i], signatures[j]) >= threshold) {
      uf.unite(i, j);
      result.confirmed_pairs.emplace_back(
          std::min(signatures[i].doc_id, signatures[j].doc_id),
          std::max(signatures[i].doc_id, signatures[j].doc_id));
    }
  }

  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < signatures.size(); ++i) {
    groups[uf.find(i)].push_back(signatures[i].doc_id);
  }
  for (auto& [root, members] : groups) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end());
    DuplicateCluster cluster;
    cluster.representative = members.front();
    cluster.members = std::move(members);
    result.clusters.push_back(std::move(cluster));
  }
  std::sort(result.clusters.begin(), result.clusters.end(),
            [](const DuplicateCluster& a, const DuplicateCluster& b) {
              return a.representative < b.representative;
            });
  std::sort(result.confirmed_pairs.begin(), result.confirmed_pairs.end());
  result.confirmed_pairs.erase(
      std::unique(result.confirmed_pairs.begin(), result.confirmed_pairs.end()),
      result.confirmed_pairs.end());
  return result;
}

std::vector<std::string> removal_list(const std::vector<DuplicateCluster>& clusters) {
  std::vector<std::string> removed;
  for (const auto& cluster : clusters) {
    for (const auto& id : cluster.members) {
      if (id != cluster.representative) removed.push_back(id);
    }
  }
  return removed;
}

bool ExactDeduper::keep(std::string_view text) {
  auto [it, inserted] = seen_.insert(sha256_hex(text));
  if (!inserted) ++removed_;
  return inserted;
}

ExactDedupResult exact_dedup(const std::vector<RawDocument>& docs) {
  ExactDedupResult result;
  ExactDeduper deduper;
  for (const auto& doc : docs) {
    if (deduper.keep(doc.text)) {
      result.kept.push_back(doc);
    } else {
      result.removed_ids.push_back(doc.id);
    }
  }
  result.removed_count = deduper.removed_count();
  return result;
}

std::vector<MinHashSignature> batch_signatures(const std::vector<RawDocument>& docs,
                                               const DedupParams& params, unsigned jobs,
                                               std::vector<std::string>* skipped) {
  params.validate();
  std::vector<std::optional<MinHashSignature>> slots(docs.size());
  auto work = [&](std::size_t i) {
    try {
      slots[i] = minhash_signature(docs[i].id, docs[i].text, params.num_perms,
                                   params.shingle_size, params.seed);
    } catch (const std::invalid_argument&) {
      slots[i] = std::nullopt;  // too short to sketch
    }
  };
  if (jobs <= 1 || docs.size() < 64) {
    for (std::size_t i = 0; i < docs.size(); ++i) work(i);
  } else {
    const unsigned workers = std::min<unsigned>(jobs, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < docs.size(); i += workers) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  std::vector<MinHashSignature> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (slots[i]) {
      out.push_back(std::move(*slots[i]));
    } else if (skipped != nullptr) {
      skipped->push_back(docs[i].id);
    }
  }
  return out;
}

}  // namespace onestage
