#include "kgroot/checksum.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "kgroot/embedding.hpp"
#include "kgroot/error.hpp"

namespace kgroot {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t embedding_checksum(const EmbeddingTable& table) {
    std::uint64_t h = fnv1a64(std::to_string(table.dim()));
    for (const auto& t : table.vocab()) h = fnv1a64(t + '\n', h);
    for (double v : table.vectors().values()) {
        char buf[sizeof(double)];
        std::memcpy(buf, &v, sizeof(double));
        h = fnv1a64(std::string_view(buf, sizeof(double)), h);
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[i] = kDigits[v & 0xf];
    return out;
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a64(bytes);
}

}  // namespace kgroot
