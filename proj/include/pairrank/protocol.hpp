#pragma once

#include "pairrank/dataset.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace pairrank {

/// Training regimes compared in the experiments.
///   Proposed - difference instances, ranking-indicator labels, classifier.
///   Baseline - raw features against accuracy, regressor.
///   G1       - difference instances against signed accuracy gaps, regressor.
///   G2       - as Proposed but one of each mirrored pair, chosen at random.
enum class Protocol { Proposed, Baseline, G1, G2 };

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view name);

/// Ordered source pair, 0-based into the input sequence.
using SourcePair = std::pair<std::size_t, std::size_t>;

struct PairInstance {
    FeatureVector diff;
    SourcePair source;

    bool operator==(const PairInstance&) const = default;
};

struct PairSample {
    FeatureVector diff;
    int label = 0;
    SourcePair source;

    bool operator==(const PairSample&) const = default;
};

struct PairDataset {
    std::vector<PairSample> samples;
    std::size_t feature_len = 0;

    std::size_t size() const noexcept { return samples.size(); }
};

struct RegressionDataset {
    std::vector<FeatureVector> inputs;
    std::vector<double> targets;
    std::size_t feature_len = 0;

    std::size_t size() const noexcept { return inputs.size(); }
};

/// v - w, elementwise.
FeatureVector difference(std::span<const std::int32_t> v, std::span<const std::int32_t> w);

/// For every i < j emits (v_i - v_j, (i, j)) then (v_j - v_i, (j, i)),
/// i ascending then j ascending. Yields n(n-1) instances.
std::vector<PairInstance> build_pair_instances(std::span<const FeatureVector> vectors);

/// Same traversal as build_pair_instances: (1, 0) when p_i >= p_j,
/// otherwise (0, 1).
std::vector<int> build_pair_labels(std::span<const double> performances);

PairDataset build_training_data(const ArchitectureDataset& dataset);
RegressionDataset build_baseline_data(const ArchitectureDataset& dataset);
RegressionDataset build_ablation_g1(const ArchitectureDataset& dataset);
PairDataset build_ablation_g2(const ArchitectureDataset& dataset, std::uint64_t seed);

/// Comma-separated export: diff fields then the label or target.
void write_pairs(std::ostream& out, const PairDataset& pairs);
void write_regression(std::ostream& out, const RegressionDataset& data);

} // namespace pairrank
