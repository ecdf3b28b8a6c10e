#pragma once

#include "pairrank/dataset.hpp"
#include "pairrank/models.hpp"
#include "pairrank/params.hpp"
#include "pairrank/protocol.hpp"
#include "pairrank/random.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace pairrank {

struct IntRange {
    std::int64_t lo;
    std::int64_t hi;

    bool contains(std::int64_t v) const noexcept { return lo <= v && v <= hi; }
};

/// Hyperparameter ranges searched for each model. Integer ranges are
/// inclusive; learning_rate, C and gamma follow an exponential
/// distribution with the given scale (its mean).
struct ParamSpace {
    IntRange min_samples_split{2, 200};
    IntRange max_depth{2, 200};
    IntRange min_samples_leaf{1, 300};
    IntRange n_estimators{1, 200};
    std::vector<std::string> max_features{"sqrt", "log2"};
    std::vector<std::string> classifier_criteria{"gini", "info_gain"};
    std::vector<std::string> regressor_criteria{"mse", "mae"};
    double exponential_scale = 10.0;

    /// True when `config` carries exactly the keys sample_config would give
    /// `kind` and every value lies inside its range.
    bool contains(ModelKind kind, ModelMode mode, const ParamConfig& config) const;
};

ParamConfig sample_config(const ParamSpace& space, ModelKind kind, ModelMode mode, Rng& rng);

/// Shuffled partition of [0, n) into k folds whose sizes differ by at most
/// one; the first n % k folds take the extra element.
std::vector<std::vector<std::size_t>> k_fold_split(std::size_t n, std::size_t k, Rng& rng);

struct CvResult {
    ParamConfig config;
    std::vector<double> fold_scores;
    double mean_score = 0.0;
};

/// Fits a ranker on the records of one training fold.
using RankerTrainer =
    std::function<std::unique_ptr<PairwiseRanker>(const ArchitectureDataset& train, std::uint64_t seed)>;

/// Folds are over records; pairs are only ever formed inside a fold. Each
/// fold score is the pairwise ranking accuracy on the held-out records.
CvResult cross_validate(const RankerTrainer& trainer, const ArchitectureDataset& data, std::size_t k,
                        std::uint64_t seed);

CvResult cross_validate(ModelKind kind, ModelMode mode, const ParamConfig& config, Protocol protocol,
                        const ArchitectureDataset& data, std::size_t k, std::uint64_t seed);

struct SearchResult {
    ParamConfig best;
    std::size_t best_trial = 0;
    std::vector<CvResult> history;
};

/// Produces the configuration tried at a given trial.
using ConfigSource = std::function<ParamConfig(std::size_t trial, Rng& rng)>;

/// Random search scored by k-fold cross-validation. The best trial is the
/// highest mean score, earliest on ties. All trials share the same folds.
SearchResult random_search(ModelKind kind, ModelMode mode, Protocol protocol, const ArchitectureDataset& data,
                           std::size_t trials, std::size_t k, std::uint64_t seed, const ParamSpace& space = {});

SearchResult random_search(ModelKind kind, ModelMode mode, Protocol protocol, const ArchitectureDataset& data,
                           std::size_t trials, std::size_t k, std::uint64_t seed, const ConfigSource& source);

/// One tab-separated line per trial: index, config, fold scores, mean.
void write_history(std::ostream& out, const SearchResult& result);

} // namespace pairrank
