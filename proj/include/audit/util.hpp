#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace audit {

/// 128-bit FNV-1a. Stable across platforms and runs; used for prompt ids and
/// bundle digests, not for anything adversarial.
struct Hash128 {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    std::string hex() const;
};

Hash128 fnv1a_128(std::string_view data);

/// 64-bit FNV-1a, for seeding deterministic RNG streams.
std::uint64_t fnv1a_64(std::string_view data);

/// SplitMix64 step; decorrelates nearby seeds.
std::uint64_t splitmix64(std::uint64_t x);

std::string to_lower_ascii(std::string_view s);

/// Trims ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

/// Lowercase, trim, collapse runs of internal whitespace to single spaces.
std::string canonicalize_spaces(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

bool starts_with(std::string_view s, std::string_view prefix);

/// Counts whole-word occurrences of `phrase` (itself one or more words) in
/// `text`; boundaries are non-alphabetic characters.
int count_word_occurrences(std::string_view text, std::string_view phrase);

/// Current UTC time as ISO-8601 ("2025-01-01T00:00:00Z").
std::string iso8601_now();

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace audit
