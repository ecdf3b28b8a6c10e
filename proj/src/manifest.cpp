#include "pairrank/manifest.hpp"

#include "pairrank/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>

namespace pairrank {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state)
{
    for (unsigned char c : bytes) {
        state ^= c;
        state *= 0x100000001b3ULL;
    }
    return state;
}

std::string file_checksum(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

void RunManifest::write(std::ostream& out) const
{
    out << "manifest.command=" << command << '\n';
    for (const auto& [name, value] : flags) {
        out << "manifest.flag." << name << '=' << value << '\n';
    }
    if (!dataset_checksum.empty()) {
        out << "manifest.dataset_fnv1a64=" << dataset_checksum << '\n';
    }
    out << "manifest.version=" << version << '\n';
}

} // namespace pairrank
