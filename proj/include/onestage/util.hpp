#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace onestage {

// ---------------------------------------------------------------- hashing

using Digest256 = std::array<unsigned char, 32>;

Digest256 sha256_bytes(std::string_view data);
std::string sha256_hex(std::string_view data);
// Streams the file through the hash; throws std::runtime_error if unreadable.
std::string sha256_file_hex(const std::filesystem::path& path);
std::string to_hex(const Digest256& digest);

// 64-bit FNV-1a, used as the base hash for shingles and LSH band keys.
std::uint64_t fnv1a64(std::string_view data);

// ---------------------------------------------------------------- UTF-8

// Decodes the codepoint starting at byte offset `pos`. Returns the codepoint
// and advances `pos` past it. Invalid sequences decode as U+FFFD, one byte
// at a time, so iteration always terminates.
char32_t utf8_decode(std::string_view text, std::size_t& pos);
void utf8_append(std::string& out, char32_t cp);
std::size_t utf8_codepoint_count(std::string_view text);
// First `n` codepoints of `text` (whole string if shorter).
std::string utf8_prefix(std::string_view text, std::size_t n);

bool is_cjk(char32_t cp);
bool is_latin_letter(char32_t cp);
bool is_space_cp(char32_t cp);

// ---------------------------------------------------------------- files

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temp file and renames over the target.
void atomic_write_file(const std::filesystem::path& path, std::string_view data);

// Calls `fn` for every non-empty line (without trailing newline).
// Returns the number of lines seen. Throws std::runtime_error if unreadable.
std::size_t for_each_line(const std::filesystem::path& path,
                          const std::function<void(std::string_view, std::size_t)>& fn);

// Deterministic double formatting (round-trip precision, C locale).
std::string format_double(double v);

// ---------------------------------------------------------------- RNG

// std::shuffle and the standard distributions are implementation-defined;
// these keep sampling reproducible across standard libraries.

// Independent deterministic stream `stream` of the master `seed`.
std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream);

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
template <typename Engine>
double uniform_unit(Engine& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Fisher-Yates with modulo reduction.
template <typename T, typename Engine>
void seeded_shuffle(std::vector<T>& values, Engine& gen) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace onestage
