#pragma once

#include "pairrank/dataset.hpp"
#include "pairrank/params.hpp"
#include "pairrank/protocol.hpp"
#include "pairrank/svm.hpp"
#include "pairrank/tree.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace pairrank {

/// Bagged CART trees. Scores are the mean of member leaf values.
struct ForestModel {
    std::vector<DecisionTree> trees;

    double predict(std::span<const double> x) const;
    bool operator==(const ForestModel&) const = default;
};

/// Additive model F(x) = init + sum_k tree_k(x); leaf values already carry
/// the learning-rate shrinkage.
struct BoostedModel {
    double init = 0.0;
    std::vector<DecisionTree> trees;

    double raw(std::span<const double> x) const { return staged_raw(x, trees.size()); }
    /// F(x) using only the first `rounds` trees.
    double staged_raw(std::span<const double> x, std::size_t rounds) const;
    bool operator==(const BoostedModel&) const = default;
};

/// Immutable fitted model behind the common score interface.
class TrainedPredictor {
public:
    using Backend = std::variant<DecisionTree, ForestModel, BoostedModel, SvmModel>;

    TrainedPredictor(ModelKind kind, ModelMode mode, ParamConfig config, std::size_t feature_len, Backend backend);

    ModelKind kind() const noexcept { return kind_; }
    ModelMode mode() const noexcept { return mode_; }
    const ParamConfig& config() const noexcept { return config_; }
    std::size_t feature_len() const noexcept { return feature_len_; }
    const Backend& backend() const noexcept { return backend_; }

    /// Classifier: score in [0, 1] for class 1. Regressor: unbounded.
    double predict_score(std::span<const std::int32_t> x) const;
    double predict_score_real(std::span<const double> x) const;

    /// Self-describing text form; reloading reproduces scores bit-exactly.
    void save(std::ostream& out) const;
    static TrainedPredictor load(std::istream& in);

    bool operator==(const TrainedPredictor&) const = default;

private:
    ModelKind kind_;
    ModelMode mode_;
    ParamConfig config_;
    std::size_t feature_len_;
    Backend backend_;
};

/// Checks that `config` names exactly the parameters `kind` uses with
/// admissible values for `mode`. Throws std::invalid_argument otherwise.
void validate_config(ModelKind kind, ModelMode mode, const ParamConfig& config);

TrainedPredictor fit(ModelKind kind, ModelMode mode, const ParamConfig& config, std::span<const FeatureVector> inputs,
                     std::span<const double> targets, std::uint64_t seed);

/// Parameters the pieces of a forest use, so a one-tree forest without
/// bootstrap can be checked against a plain tree.
TreeOptions tree_options(ModelKind kind, ModelMode mode, const ParamConfig& config);

/// Model mode a protocol trains in: Proposed/G2 classify, Baseline/G1 regress.
ModelMode mode_for(Protocol protocol);

/// Builds the protocol's training data from the records and fits.
TrainedPredictor fit_protocol(ModelKind kind, Protocol protocol, const ParamConfig& config,
                              const ArchitectureDataset& train, std::uint64_t seed);

enum class Ordering { First, Second };

/// Orders two architectures: First when a is predicted at least as good as b.
/// Identical vectors are a tie and give First under every protocol.
///   Proposed/G2: classify a - b, First iff score >= 0.5.
///   G1:          First iff predicted gap on a - b >= 0.
///   Baseline:    First iff score(a) >= score(b).
Ordering predict_order(const TrainedPredictor& predictor, Protocol protocol, std::span<const std::int32_t> a,
                       std::span<const std::int32_t> b);

/// Anything that can answer "is a at least as good as b".
class PairwiseRanker {
public:
    virtual ~PairwiseRanker() = default;
    virtual Ordering order(std::span<const std::int32_t> a, std::span<const std::int32_t> b) const = 0;
};

class PredictorRanker final : public PairwiseRanker {
public:
    PredictorRanker(TrainedPredictor predictor, Protocol protocol);

    Ordering order(std::span<const std::int32_t> a, std::span<const std::int32_t> b) const override;
    const TrainedPredictor& predictor() const noexcept { return predictor_; }
    Protocol protocol() const noexcept { return protocol_; }

private:
    TrainedPredictor predictor_;
    Protocol protocol_;
};

} // namespace pairrank
