#include "pairrank/dataset.hpp"

#include "pairrank/random.hpp"
#include "pairrank/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace pairrank {

namespace {

std::string with_line(const std::string& what, std::optional<std::size_t> line)
{
    if (!line) {
        return what;
    }
    return "line " + std::to_string(*line) + ": " + what;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out)
{
    text = trim(text);
    if (text.empty()) {
        return false;
    }
    if (text.front() == '+') {
        text.remove_prefix(1);
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}
} // namespace

DataError::DataError(const std::string& what, std::optional<std::size_t> line)
    : std::runtime_error(with_line(what, line)), line_(line)
{
}

ArchitectureDataset::ArchitectureDataset(std::vector<ArchitectureRecord> records) : records_(std::move(records))
{
    if (records_.empty()) {
        throw DataError("dataset is empty");
    }
    feature_len_ = records_.front().features.size();
    if (feature_len_ == 0) {
        throw DataError("feature vectors must have at least one entry");
    }
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.features.size() != feature_len_) {
            throw DataError("record " + std::to_string(i) + " has " + std::to_string(r.features.size())
                            + " features, expected " + std::to_string(feature_len_));
        }
        if (!(r.performance > 0.0 && r.performance <= 1.0)) {
            throw DataError("record " + std::to_string(i) + " has performance outside (0, 1]");
        }
    }
}

std::vector<FeatureVector> ArchitectureDataset::feature_vectors() const
{
    std::vector<FeatureVector> out;
    out.reserve(records_.size());
    for (const auto& r : records_) {
        out.push_back(r.features);
    }
    return out;
}

std::vector<double> ArchitectureDataset::performances() const
{
    std::vector<double> out;
    out.reserve(records_.size());
    for (const auto& r : records_) {
        out.push_back(r.performance);
    }
    return out;
}

ArchitectureDataset ArchitectureDataset::subset(std::span<const std::size_t> indices) const
{
    std::vector<ArchitectureRecord> out;
    out.reserve(indices.size());
    for (auto i : indices) {
        out.push_back(records_.at(i));
    }
    return ArchitectureDataset(std::move(out));
}

ArchitectureDataset parse_dataset(std::istream& in)
{
    std::vector<ArchitectureRecord> records;
    std::optional<std::size_t> feature_len;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto view = trim(line);
        if (view.empty()) {
            continue;
        }
        auto fields = split_on(view, ',');
        if (fields.size() < 2) {
            throw DataError("expected at least one feature and a performance value", line_no);
        }
        if (!feature_len) {
            feature_len = fields.size() - 1;
        } else if (fields.size() != *feature_len + 1) {
            throw DataError("expected " + std::to_string(*feature_len + 1) + " fields, found "
                                + std::to_string(fields.size()),
                            line_no);
        }
        ArchitectureRecord record;
        record.features.resize(*feature_len);
        for (std::size_t k = 0; k < *feature_len; ++k) {
            if (!parse_number(fields[k], record.features[k])) {
                throw DataError("field " + std::to_string(k + 1) + " is not an integer: '"
                                    + std::string(trim(fields[k])) + "'",
                                line_no);
            }
        }
        if (!parse_number(fields.back(), record.performance) || !std::isfinite(record.performance)) {
            throw DataError("performance is not a number: '" + std::string(trim(fields.back())) + "'", line_no);
        }
        if (record.performance < 0.0 || record.performance > 1.0) {
            throw DataError("performance " + std::string(trim(fields.back())) + " outside [0, 1]", line_no);
        }
        if (record.performance == 0.0) {
            continue;
        }
        records.push_back(std::move(record));
    }
    if (records.empty()) {
        throw DataError("no records with positive performance");
    }
    return ArchitectureDataset(std::move(records));
}

ArchitectureDataset load_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open dataset file '" + path.string() + "'");
    }
    try {
        return parse_dataset(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what(), e.line());
    }
}

void write_dataset(std::ostream& out, const ArchitectureDataset& dataset)
{
    for (const auto& r : dataset.records()) {
        for (auto f : r.features) {
            out << f << ',';
        }
        out << format_real(r.performance) << '\n';
    }
}

void save_dataset(const std::filesystem::path& path, const ArchitectureDataset& dataset)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    write_dataset(out, dataset);
}

Split sorted_split(const ArchitectureDataset& dataset, double train_fraction)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train fraction must lie in (0, 1)");
    }
    const auto n = dataset.size();
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
    if (n_train == 0 || n_train >= n) {
        throw DataError("cannot split " + std::to_string(n) + " records with fraction "
                        + format_real(train_fraction) + " into non-empty parts");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dataset[a].performance < dataset[b].performance;
    });
    std::span<const std::size_t> all(order);
    return Split{dataset.subset(all.first(n_train)), dataset.subset(all.subspan(n_train))};
}

std::size_t Histogram::total() const
{
    std::size_t sum = 0;
    for (const auto& [bin, count] : counts) {
        sum += count;
    }
    return sum;
}

std::int64_t Histogram::bin_of(double value) const
{
    // 0.951 / 0.001 is 950.999...; a value within rounding of an edge
    // belongs to the bin that starts there.
    const double q = (value - origin) / bin_width;
    const double r = std::nearbyint(q);
    if (std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q))) {
        return static_cast<std::int64_t>(r);
    }
    return static_cast<std::int64_t>(std::floor(q));
}

Histogram histogram_of(std::span<const double> values, double bin_width, double origin)
{
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
        throw std::invalid_argument("histogram bin width must be positive");
    }
    Histogram h;
    h.bin_width = bin_width;
    h.origin = origin;
    for (double v : values) {
        ++h.counts[h.bin_of(v)];
    }
    return h;
}

Histogram performance_histogram(const ArchitectureDataset& dataset, double bin_width, double origin)
{
    auto values = dataset.performances();
    return histogram_of(values, bin_width, origin);
}

void write_histogram(std::ostream& out, const Histogram& histogram)
{
    for (const auto& [bin, count] : histogram.counts) {
        out << format_real(histogram.lower_edge(bin)) << ',' << count << '\n';
    }
}

double SyntheticLandscape::linear_score(std::span<const std::int32_t> x) const
{
    double s = bias;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        s += weights[k] * static_cast<double>(x[k]);
    }
    return s;
}

double SyntheticLandscape::performance(std::span<const std::int32_t> x) const
{
    const double p = 1.0 / (1.0 + std::exp(-linear_score(x)));
    return std::clamp(p, kMinSyntheticPerformance, 1.0);
}

bool SyntheticLandscape::contains(std::span<const std::int32_t> x) const
{
    if (x.size() != lower.size()) {
        return false;
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] < lower[k] || x[k] > upper[k]) {
            return false;
        }
    }
    return true;
}

FeatureVector SyntheticLandscape::optimum() const
{
    FeatureVector best(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) {
        best[k] = weights[k] > 0.0 ? upper[k] : lower[k];
    }
    return best;
}

// Per-position ranges are small like real block-count encodings. Weights are
// scaled so the linear score has standard deviation about kScoreSpread over
// uniformly drawn architectures.
SyntheticLandscape make_landscape(std::size_t feature_len, std::uint64_t seed)
{
    constexpr double kScoreSpread = 2.0;
    if (feature_len == 0) {
        throw std::invalid_argument("feature_len must be positive");
    }
    auto rng = make_rng(seed, {0x1a4d5ca9e});
    std::uniform_int_distribution<std::int32_t> upper_dist(2, 8);
    std::normal_distribution<double> weight_dist(0.0, 1.0);

    SyntheticLandscape land;
    land.lower.assign(feature_len, 0);
    land.upper.resize(feature_len);
    land.weights.resize(feature_len);
    double centre = 0.0;
    const double norm = kScoreSpread / std::sqrt(static_cast<double>(feature_len));
    for (std::size_t k = 0; k < feature_len; ++k) {
        land.upper[k] = upper_dist(rng);
        const double width = static_cast<double>(land.upper[k] - land.lower[k] + 1);
        const double sd = std::sqrt((width * width - 1.0) / 12.0);
        land.weights[k] = weight_dist(rng) * norm / sd;
        centre += land.weights[k] * 0.5 * static_cast<double>(land.lower[k] + land.upper[k]);
    }
    land.bias = -centre;
    return land;
}

ArchitectureDataset generate_synthetic(std::size_t n, std::size_t feature_len, std::uint64_t seed, double noise)
{
    if (n < 2) {
        throw std::invalid_argument("synthetic datasets need at least two records");
    }
    if (!(noise >= 0.0)) {
        throw std::invalid_argument("noise must be non-negative");
    }
    const auto land = make_landscape(feature_len, seed);
    auto rng = make_rng(seed, {0x5a3b1e});
    std::uniform_real_distribution<double> noise_dist(-noise, noise);
    std::vector<ArchitectureRecord> records(n);
    for (auto& r : records) {
        r.features.resize(feature_len);
        for (std::size_t k = 0; k < feature_len; ++k) {
            r.features[k] = std::uniform_int_distribution<std::int32_t>(land.lower[k], land.upper[k])(rng);
        }
        double p = land.performance(r.features);
        if (noise > 0.0) {
            p = std::clamp(p + noise_dist(rng), kMinSyntheticPerformance, 1.0);
        }
        r.performance = p;
    }
    return ArchitectureDataset(std::move(records));
}

} // namespace pairrank
