#include "pairrank/protocol.hpp"

#include "pairrank/random.hpp"
#include "pairrank/text.hpp"

#include <ostream>
#include <stdexcept>
#include <string>

namespace pairrank {

namespace {

void require_pairs(std::size_t n)
{
    if (n < 2) {
        throw std::invalid_argument("pair construction needs at least two records, got " + std::to_string(n));
    }
}
} // namespace

std::string_view to_string(Protocol p)
{
    switch (p) {
    case Protocol::Proposed:
        return "proposed";
    case Protocol::Baseline:
        return "baseline";
    case Protocol::G1:
        return "g1";
    case Protocol::G2:
        return "g2";
    }
    return "?";
}

Protocol parse_protocol(std::string_view name)
{
    for (auto p : {Protocol::Proposed, Protocol::Baseline, Protocol::G1, Protocol::G2}) {
        if (name == to_string(p)) {
            return p;
        }
    }
    throw std::invalid_argument("unknown protocol '" + std::string(name) + "'");
}

FeatureVector difference(std::span<const std::int32_t> v, std::span<const std::int32_t> w)
{
    if (v.size() != w.size()) {
        throw std::invalid_argument("feature vectors differ in length");
    }
    FeatureVector d(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        d[k] = v[k] - w[k];
    }
    return d;
}

std::vector<PairInstance> build_pair_instances(std::span<const FeatureVector> vectors)
{
    const auto n = vectors.size();
    require_pairs(n);
    for (const auto& v : vectors) {
        if (v.size() != vectors.front().size()) {
            throw std::invalid_argument("feature vectors differ in length");
        }
    }
    std::vector<PairInstance> out;
    out.reserve(n * (n - 1));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            out.push_back({difference(vectors[i], vectors[j]), {i, j}});
            out.push_back({difference(vectors[j], vectors[i]), {j, i}});
        }
    }
    return out;
}

std::vector<int> build_pair_labels(std::span<const double> performances)
{
    const auto n = performances.size();
    require_pairs(n);
    std::vector<int> labels;
    labels.reserve(n * (n - 1));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool first_better = performances[i] - performances[j] >= 0.0;
            labels.push_back(first_better ? 1 : 0);
            labels.push_back(first_better ? 0 : 1);
        }
    }
    return labels;
}

PairDataset build_training_data(const ArchitectureDataset& dataset)
{
    const auto vectors = dataset.feature_vectors();
    const auto perf = dataset.performances();
    auto instances = build_pair_instances(vectors);
    const auto labels = build_pair_labels(perf);

    PairDataset out;
    out.feature_len = dataset.feature_len();
    out.samples.reserve(instances.size());
    for (std::size_t k = 0; k < instances.size(); ++k) {
        out.samples.push_back({std::move(instances[k].diff), labels[k], instances[k].source});
    }
    return out;
}

RegressionDataset build_baseline_data(const ArchitectureDataset& dataset)
{
    RegressionDataset out;
    out.feature_len = dataset.feature_len();
    out.inputs = dataset.feature_vectors();
    out.targets = dataset.performances();
    return out;
}

RegressionDataset build_ablation_g1(const ArchitectureDataset& dataset)
{
    require_pairs(dataset.size());
    const auto vectors = dataset.feature_vectors();
    auto instances = build_pair_instances(vectors);
    RegressionDataset out;
    out.feature_len = dataset.feature_len();
    out.inputs.reserve(instances.size());
    out.targets.reserve(instances.size());
    for (auto& inst : instances) {
        const auto [i, j] = inst.source;
        out.inputs.push_back(std::move(inst.diff));
        out.targets.push_back(dataset[i].performance - dataset[j].performance);
    }
    return out;
}

PairDataset build_ablation_g2(const ArchitectureDataset& dataset, std::uint64_t seed)
{
    auto full = build_training_data(dataset);
    auto rng = make_rng(seed, {0x62});
    std::bernoulli_distribution coin(0.5);
    PairDataset out;
    out.feature_len = full.feature_len;
    out.samples.reserve(full.samples.size() / 2);
    for (std::size_t k = 0; k + 1 < full.samples.size(); k += 2) {
        out.samples.push_back(std::move(full.samples[coin(rng) ? k : k + 1]));
    }
    return out;
}

void write_pairs(std::ostream& out, const PairDataset& pairs)
{
    for (const auto& s : pairs.samples) {
        for (auto f : s.diff) {
            out << f << ',';
        }
        out << s.label << '\n';
    }
}

void write_regression(std::ostream& out, const RegressionDataset& data)
{
    for (std::size_t r = 0; r < data.inputs.size(); ++r) {
        for (auto f : data.inputs[r]) {
            out << f << ',';
        }
        out << format_real(data.targets[r]) << '\n';
    }
}

} // namespace pairrank
