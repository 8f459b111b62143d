#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace kgroot {

class EmbeddingTable;

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Hash of vocabulary and raw vector bytes; pairs a similarity model with
// the table it was trained on.
std::uint64_t embedding_checksum(const EmbeddingTable& table);

std::string hex64(std::uint64_t v);
std::uint64_t file_checksum(const std::filesystem::path& path);

}  // namespace kgroot
