#pragma once

#include <cstdint>
#include <filesystem>

namespace onestage {

// Writes the bundled demo corpus: six JSONL document files and two
// plain-text books (~950 documents total, bilingual, with planted
// rejects and duplicates), a native sft pair file, domain/ad lexicons,
// an ethics blocklist, a small exam with scripted model outputs and
// judge verdicts, and a ready-to-run config file. Deterministic for a
// fixed seed.
void write_demo_corpus(const std::filesystem::path& out_dir, std::uint64_t seed);

}  // namespace onestage
