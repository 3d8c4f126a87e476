#include "onestage/util.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace onestage {

namespace {

class EvpDigest {
 public:
  EvpDigest() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256: failed to initialize digest");
    }
  }
  ~EvpDigest() { EVP_MD_CTX_free(ctx_); }
  EvpDigest(const EvpDigest&) = delete;
  EvpDigest& operator=(const EvpDigest&) = delete;

  void update(const void* data, std::size_t len) {
    if (EVP_DigestUpdate(ctx_, data, len) != 1) {
      throw std::runtime_error("sha256: digest update failed");
    }
  }

  Digest256 finish() {
    Digest256 out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, out.data(), &len) != 1 || len != out.size()) {
      throw std::runtime_error("sha256: digest finalize failed");
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

constexpr char kHexDigits[] = "0123456789abcdef";

}  // namespace

Digest256 sha256_bytes(std::string_view data) {
  EvpDigest d;
  d.update(data.data(), data.size());
  return d.finish();
}

std::string to_hex(const Digest256& digest) {
  std::string out;
  out.reserve(digest.size() * 2);
  for (unsigned char b : digest) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xf]);
  }
  return out;
}

std::string sha256_hex(std::string_view data) { return to_hex(sha256_bytes(data)); }

std::string sha256_file_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file for hashing: " + path.string());
  }
  EvpDigest d;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    if (got > 0) d.update(buf, static_cast<std::size_t>(got));
  }
  if (in.bad()) {
    throw std::runtime_error("read error while hashing: " + path.string());
  }
  return to_hex(d.finish());
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

char32_t utf8_decode(std::string_view text, std::size_t& pos) {
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  unsigned char b0 = s[pos];
  if (b0 < 0x80) {
    pos += 1;
    return b0;
  }
  auto cont = [&](std::size_t i) { return i < n && (s[i] & 0xc0) == 0x80; };
  if ((b0 & 0xe0) == 0xc0 && cont(pos + 1)) {
    char32_t cp = ((b0 & 0x1fu) << 6) | (s[pos + 1] & 0x3fu);
    pos += 2;
    return cp < 0x80 ? 0xFFFD : cp;
  }
  if ((b0 & 0xf0) == 0xe0 && cont(pos + 1) && cont(pos + 2)) {
    char32_t cp = ((b0 & 0x0fu) << 12) | ((s[pos + 1] & 0x3fu) << 6) | (s[pos + 2] & 0x3fu);
    pos += 3;
    return (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) ? 0xFFFD : cp;
  }
  if ((b0 & 0xf8) == 0xf0 && cont(pos + 1) && cont(pos + 2) && cont(pos + 3)) {
    char32_t cp = ((b0 & 0x07u) << 18) | ((s[pos + 1] & 0x3fu) << 12) |
                  ((s[pos + 2] & 0x3fu) << 6) | (s[pos + 3] & 0x3fu);
    pos += 4;
    return (cp < 0x10000 || cp > 0x10FFFF) ? 0xFFFD : cp;
  }
  pos += 1;
  return 0xFFFD;
}

void utf8_append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

std::size_t utf8_codepoint_count(std::string_view text) {
  std::size_t pos = 0, count = 0;
  while (pos < text.size()) {
    utf8_decode(text, pos);
    ++count;
  }
  return count;
}

std::string utf8_prefix(std::string_view text, std::size_t n) {
  std::size_t pos = 0, count = 0;
  while (pos < text.size() && count < n) {
    utf8_decode(text, pos);
    ++count;
  }
  return std::string(text.substr(0, pos));
}

bool is_cjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // unified ideographs
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // extension A
         (cp >= 0xF900 && cp <= 0xFAFF) ||    // compatibility ideographs
         (cp >= 0x20000 && cp <= 0x2A6DF);    // extension B
}

bool is_latin_letter(char32_t cp) {
  if ((cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z')) return true;
  if (cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) return true;
  return cp >= 0x100 && cp <= 0x24F;  // Latin Extended-A/B
}

bool is_space_cp(char32_t cp) {
  switch (cp) {
    case ' ':
    case '\t':
    case '\n':
    case '\r':
    case '\f':
    case '\v':
    case 0xA0:     // no-break space
    case 0x3000:   // ideographic space
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;  // en/em/thin spaces
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::string out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw std::runtime_error("read error: " + path.string());
  }
  return out;
}

void atomic_write_file(const std::filesystem::path& path, std::string_view data) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open file for writing: " + tmp.string());
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) {
      throw std::runtime_error("write error: " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

std::size_t for_each_line(const std::filesystem::path& path,
                          const std::function<void(std::string_view, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(line, lineno);
  }
  return lineno;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  // seed_seq keeps only 32 bits per entry, so split the inputs explicitly.
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace onestage
