#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

namespace pairrank {

inline constexpr std::string_view kToolVersion = "1.0.0";

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

/// Checksum of a file's bytes, as 16 lowercase hex digits.
std::string file_checksum(const std::string& path);

/// Everything needed to rerun a command. No clocks, no hostnames: two runs
/// with the same inputs print the same manifest.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> flags;
    std::string dataset_checksum;
    std::string version{kToolVersion};

    /// `manifest.` prefixed key=value lines, flags sorted by name.
    void write(std::ostream& out) const;
};

} // namespace pairrank
