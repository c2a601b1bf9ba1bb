#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace statefulrec {

// Lowercases ASCII letters and splits on every byte that is not an ASCII
// letter or digit. Non-ASCII bytes act as separators.
std::vector<std::string> tokenize(std::string_view text);

std::string_view trim(std::string_view text);

bool is_blank(std::string_view text);

// 64-bit FNV-1a over the raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);

std::string to_hex(std::uint64_t value);

// Whole-file read; throws Error(kIo) when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes through a temporary sibling file and rename, so readers never observe
// a partial file and a failed write leaves the previous content intact.
// Throws Error(kIo).
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// One token per line; blank lines and lines starting with '#' are skipped.
// Tokens are lowercased.
std::vector<std::string> parse_word_list(std::string_view content);

}  // namespace statefulrec
