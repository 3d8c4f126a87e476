#include "onestage/rewriter.hpp"

#include <condition_variable>
#include <cstdlib>
#include <httplib.h>
#include <json.hpp>
#include <thread>

namespace onestage {

namespace {

using nlohmann::json;

std::string language_word(Language lang) {
  switch (lang) {
    case Language::zh: return "Chinese";
    case Language::en: return "English";
    case Language::other: return "the source language";
  }
  return "the source language";
}

}  // namespace

const char* to_string(RewriteTemplate t) {
  switch (t) {
    case RewriteTemplate::gen_question: return "gen_question";
    case RewriteTemplate::gen_answer: return "gen_answer";
    case RewriteTemplate::translate_unify: return "translate_unify";
  }
  return "gen_question";
}

Digest256 cache_key(const RewriteRequest& req) {
  std::string blob;
  blob.reserve(req.passage.size() + req.model_id.size() + 16);
  blob += to_string(req.template_id);
  blob.push_back('\0');
  blob += to_string(req.target_language);
  blob.push_back('\0');
  blob += req.model_id;
  blob.push_back('\0');
  blob += req.passage;
  return sha256_bytes(blob);
}

std::string mock_backend(const RewriteRequest& req) {
  const std::string lang = to_string(req.target_language);
  switch (req.template_id) {
    case RewriteTemplate::gen_question:
      return "Q[" + lang + "]: " + utf8_prefix(req.passage, 8) + "?";
    case RewriteTemplate::gen_answer:
      return "A[" + lang + "]: " + req.passage;
    case RewriteTemplate::translate_unify:
      return "[" + lang + "] " + req.passage;
  }
  return req.passage;
}

HttpBackend::HttpBackend(std::string endpoint_url, std::chrono::seconds timeout)
    : endpoint_url_(std::move(endpoint_url)), timeout_(timeout) {}

std::string HttpBackend::render_prompt(const RewriteRequest& req) {
  const std::string lang = language_word(req.target_language);
  switch (req.template_id) {
    case RewriteTemplate::gen_question:
      return "Write one " + lang +
             " question grounded strictly in the passage below. Reply with the question only.\n\n" +
             req.passage;
    case RewriteTemplate::gen_answer:
      return "Restate the knowledge in the passage below as one self-contained " + lang +
             " answer. Reply with the answer only.\n\n" + req.passage;
    case RewriteTemplate::translate_unify:
      return "Rewrite the text below in " + lang +
             ", preserving all of its meaning. Reply with the rewritten text only.\n\n" +
             req.passage;
  }
  return req.passage;
}

std::string HttpBackend::complete(const RewriteRequest& req) {
  // Split "http://host:port/path" into client base and path.
  std::string base = endpoint_url_;
  std::string path = "/";
  auto scheme_end = base.find("://");
  auto path_start = base.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start != std::string::npos) {
    path = base.substr(path_start);
    base = base.substr(0, path_start);
  }

  httplib::Client client(base);
  client.set_read_timeout(timeout_.count(), 0);
  client.set_connection_timeout(timeout_.count(), 0);
  if (const char* key = std::getenv(kApiKeyEnvVar); key != nullptr && key[0] != '\0') {
    client.set_default_headers({{"Authorization", std::string("Bearer ") + key}});
  }

  json body;
  body["model"] = req.model_id;
  body["temperature"] = 0;
  body["messages"] = json::array({json{{"role", "user"}, {"content", render_prompt(req)}}});

  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw RewriterUnavailable("rewriter backend: transport error contacting " + endpoint_url_);
  }
  if (res->status != 200) {
    throw RewriterUnavailable("rewriter backend: HTTP " + std::to_string(res->status));
  }
  json parsed = json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) {
    throw RewriterUnavailable("rewriter backend: malformed JSON response");
  }
  try {
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw RewriterUnavailable("rewriter backend: response missing choices[0].message.content");
  }
}

// Counting semaphore with a runtime bound.
class Rewriter::Semaphore {
 public:
  explicit Semaphore(int count) : count_(count) {}

  void acquire() {
    std::unique_lock lock(m_);
    cv_.wait(lock, [&] { return count_ > 0; });
    --count_;
  }
  void release() {
    {
      std::lock_guard lock(m_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  int count_;
};

Rewriter::Rewriter(std::shared_ptr<RewriteBackend> backend, RewriterOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
  if (backend_ == nullptr) {
    throw std::invalid_argument("rewriter: backend must not be null");
  }
  if (options_.max_retries < 1) {
    throw std::invalid_argument("rewriter: max_retries must be >= 1");
  }
  if (options_.max_in_flight < 1) {
    throw std::invalid_argument("rewriter: max_in_flight must be >= 1");
  }
  slots_ = std::make_shared<Semaphore>(options_.max_in_flight);
  if (options_.cache_dir) {
    std::filesystem::create_directories(*options_.cache_dir);
  }
}

std::filesystem::path Rewriter::cache_path(const Digest256& key) const {
  const std::string hex = to_hex(key);
  return *options_.cache_dir / hex.substr(0, 2) / hex.substr(2, 2) / hex;
}

std::optional<std::string> Rewriter::cache_lookup(const Digest256& key) const {
  if (!options_.cache_dir) return std::nullopt;
  const auto path = cache_path(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  return read_file(path);
}

void Rewriter::cache_store(const Digest256& key, std::string_view response) const {
  if (!options_.cache_dir) return;
  const auto path = cache_path(key);
  std::filesystem::create_directories(path.parent_path());
  atomic_write_file(path, response);
}

std::string Rewriter::rewrite(const RewriteRequest& req) {
  if (req.passage.empty()) {
    throw std::invalid_argument("rewrite: empty passage");
  }
  const Digest256 key = cache_key(req);
  if (auto cached = cache_lookup(key)) {
    std::lock_guard lock(mutex_);
    ++counters_.cache_hits;
    return *cached;
  }

  slots_->acquire();
  struct SlotGuard {
    Semaphore* s;
    ~SlotGuard() { s->release(); }
  } guard{slots_.get()};

  std::string last_error;
  for (int attempt = 0; attempt < options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::lock_guard lock(mutex_);
      ++counters_.retries;
    }
    try {
      {
        std::lock_guard lock(mutex_);
        ++counters_.backend_calls;
      }
      std::string response = backend_->complete(req);
      if (response.empty()) {
        throw EmptyRewrite("rewrite: backend returned empty response");
      }
      cache_store(key, response);
      return response;
    } catch (const EmptyRewrite&) {
      throw;  // an empty response is a content failure, not a transient
    } catch (const std::exception& e) {
      last_error = e.what();
      if (attempt + 1 < options_.max_retries) {
        auto delay = options_.backoff_base * (1 << attempt);
        std::this_thread::sleep_for(delay);
      }
    }
  }
  throw RewriterUnavailable("rewrite: giving up after " + std::to_string(options_.max_retries) +
                            " attempts: " + last_error);
}

RewriterCounters Rewriter::counters() const {
  std::lock_guard lock(mutex_);
  return counters_;
}

}  // namespace onestage
