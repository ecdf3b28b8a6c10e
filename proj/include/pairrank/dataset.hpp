#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pairrank {

/// Integer architecture encoding. Difference vectors share the type.
using FeatureVector = std::vector<std::int32_t>;

/// Raised for malformed or unusable input data. Carries the 1-based line
/// number when the problem can be pinned to one row.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what, std::optional<std::size_t> line = std::nullopt);

    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    std::optional<std::size_t> line_;
};

struct ArchitectureRecord {
    FeatureVector features;
    double performance = 0.0;

    bool operator==(const ArchitectureRecord&) const = default;
};

/// Immutable set of vectorized architectures with measured accuracy.
class ArchitectureDataset {
public:
    /// Validates every record: equal feature length, 0 < performance <= 1,
    /// non-empty. Throws DataError otherwise.
    explicit ArchitectureDataset(std::vector<ArchitectureRecord> records);

    std::size_t size() const noexcept { return records_.size(); }
    std::size_t feature_len() const noexcept { return feature_len_; }
    const std::vector<ArchitectureRecord>& records() const noexcept { return records_; }
    const ArchitectureRecord& operator[](std::size_t i) const { return records_[i]; }

    std::vector<FeatureVector> feature_vectors() const;
    std::vector<double> performances() const;

    /// Records at the given positions, in the given order.
    ArchitectureDataset subset(std::span<const std::size_t> indices) const;

    bool operator==(const ArchitectureDataset&) const = default;

private:
    std::vector<ArchitectureRecord> records_;
    std::size_t feature_len_ = 0;
};

/// Parses the comma-separated record format: feature_len integers then one
/// performance value per line, no header. Rows with performance exactly 0
/// are dropped; feature_len is inferred from the first row.
ArchitectureDataset parse_dataset(std::istream& in);
ArchitectureDataset load_dataset(const std::filesystem::path& path);

/// Writes records in the same format parse_dataset reads. Performance is
/// printed with the shortest representation that round-trips exactly.
void write_dataset(std::ostream& out, const ArchitectureDataset& dataset);
void save_dataset(const std::filesystem::path& path, const ArchitectureDataset& dataset);

struct Split {
    ArchitectureDataset train;
    ArchitectureDataset test;
};

/// Stable ascending sort by performance; the lowest floor(fraction * n)
/// records train, the rest test.
Split sorted_split(const ArchitectureDataset& dataset, double train_fraction = 0.7);

struct Histogram {
    double bin_width = 0.001;
    double origin = 0.0;
    std::map<std::int64_t, std::size_t> counts;

    std::size_t total() const;
    std::int64_t bin_of(double value) const;
    double lower_edge(std::int64_t bin) const { return origin + static_cast<double>(bin) * bin_width; }
};

Histogram histogram_of(std::span<const double> values, double bin_width = 0.001, double origin = 0.0);
Histogram performance_histogram(const ArchitectureDataset& dataset, double bin_width = 0.001, double origin = 0.0);

/// Two columns per line: `bin_lower_edge,count`.
void write_histogram(std::ostream& out, const Histogram& histogram);

/// Hidden ground truth behind synthetic datasets: integer bounds per
/// position and a monotone link `sigmoid(weights . x + bias)`.
struct SyntheticLandscape {
    std::vector<std::int32_t> lower;
    std::vector<std::int32_t> upper;
    std::vector<double> weights;
    double bias = 0.0;

    std::size_t feature_len() const noexcept { return weights.size(); }
    double linear_score(std::span<const std::int32_t> x) const;
    /// Noise-free performance, clamped into (0, 1].
    double performance(std::span<const std::int32_t> x) const;
    bool contains(std::span<const std::int32_t> x) const;
    /// Exhaustive-free optimum: each coordinate sits at the bound favoured
    /// by the sign of its weight.
    FeatureVector optimum() const;
};

SyntheticLandscape make_landscape(std::size_t feature_len, std::uint64_t seed);

/// n records drawn uniformly inside the landscape bounds with performance
/// `landscape.performance(x)` plus uniform noise of half-width `noise`.
ArchitectureDataset generate_synthetic(std::size_t n, std::size_t feature_len, std::uint64_t seed, double noise);

/// Smallest performance a synthetic record may take after clamping.
inline constexpr double kMinSyntheticPerformance = 1e-6;

} // namespace pairrank
