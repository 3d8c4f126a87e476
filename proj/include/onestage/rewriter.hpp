#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "onestage/corpus.hpp"
#include "onestage/util.hpp"

namespace onestage {

enum class RewriteTemplate { gen_question, gen_answer, translate_unify };

const char* to_string(RewriteTemplate t);

struct RewriteRequest {
  RewriteTemplate template_id = RewriteTemplate::gen_question;
  std::string passage;
  Language target_language = Language::zh;
  std::string model_id;
};

// 256-bit content hash of (template_id, target_language, model_id, passage).
// Equal requests always map to equal keys.
Digest256 cache_key(const RewriteRequest& req);

class RewriterUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyRewrite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RewriteBackend {
 public:
  virtual ~RewriteBackend() = default;
  virtual std::string complete(const RewriteRequest& req) = 0;
};

// Fixed pure templates, for tests and offline runs:
//   gen_question    -> "Q[lang]: <first 8 codepoints of passage>?"
//   gen_answer      -> "A[lang]: <passage>"
//   translate_unify -> "[lang] <passage>"
std::string mock_backend(const RewriteRequest& req);

class MockBackend final : public RewriteBackend {
 public:
  std::string complete(const RewriteRequest& req) override { return mock_backend(req); }
};

// Minimal chat-completion wire shape (single user message, temperature 0).
// Reads the bearer credential from the ONESTAGE_API_KEY environment
// variable when present.
class HttpBackend final : public RewriteBackend {
 public:
  HttpBackend(std::string endpoint_url, std::chrono::seconds timeout = std::chrono::seconds(60));
  std::string complete(const RewriteRequest& req) override;

  static std::string render_prompt(const RewriteRequest& req);

 private:
  std::string endpoint_url_;
  std::chrono::seconds timeout_;
};

inline constexpr const char* kApiKeyEnvVar = "ONESTAGE_API_KEY";

struct RewriterOptions {
  std::string model_id = "mock";
  int max_retries = 3;                    // total attempts per request
  int max_in_flight = 4;                  // bound on concurrent backend calls
  std::chrono::milliseconds backoff_base{100};
  std::optional<std::filesystem::path> cache_dir;
};

struct RewriterCounters {
  std::uint64_t cache_hits = 0;
  std::uint64_t backend_calls = 0;
  std::uint64_t retries = 0;
};

// Thread-safe caching/retrying front over a backend. Disk cache entries are
// one file per key under a two-level hex fan-out, written atomically; a
// populated cache survives process restarts.
class Rewriter {
 public:
  Rewriter(std::shared_ptr<RewriteBackend> backend, RewriterOptions options);

  // Cache first; on miss calls the backend with exponential backoff.
  // Throws RewriterUnavailable after max_retries failed attempts and
  // EmptyRewrite on an empty backend response (not retried).
  std::string rewrite(const RewriteRequest& req);

  RewriterCounters counters() const;

 private:
  std::optional<std::string> cache_lookup(const Digest256& key) const;
  void cache_store(const Digest256& key, std::string_view response) const;
  std::filesystem::path cache_path(const Digest256& key) const;

  std::shared_ptr<RewriteBackend> backend_;
  RewriterOptions options_;
  class Semaphore;
  std::shared_ptr<Semaphore> slots_;
  mutable std::mutex mutex_;
  RewriterCounters counters_;
};

}  // namespace onestage
