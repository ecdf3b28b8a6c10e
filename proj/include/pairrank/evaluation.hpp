#pragma once

#include "pairrank/dataset.hpp"
#include "pairrank/models.hpp"
#include "pairrank/params.hpp"
#include "pairrank/protocol.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pairrank {

/// Fraction of ordered test pairs (i, j), i != j, for which the ranker says
/// First exactly when p_i >= p_j. Pairs are visited in the same order the
/// training pairs are built.
double pairwise_accuracy(const PairwiseRanker& ranker, const ArchitectureDataset& test);
double pairwise_accuracy(const TrainedPredictor& predictor, Protocol protocol, const ArchitectureDataset& test);

struct ExperimentOptions {
    std::size_t trials = 100;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    double train_fraction = 0.7;
};

struct CellResult {
    ModelKind kind = ModelKind::Svm;
    Protocol protocol = Protocol::Proposed;
    double accuracy = 0.0;
    double cv_score = 0.0;
    std::uint64_t model_seed = 0;
    ParamConfig config;
};

struct EvaluationReport {
    std::string dataset_name;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::size_t folds = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::vector<ModelKind> kinds;
    std::vector<Protocol> protocols;
    std::vector<CellResult> cells;

    std::optional<double> accuracy(ModelKind kind, Protocol protocol) const;
    /// Arithmetic mean over the report's models.
    double average(Protocol protocol) const;
};

using CellCallback = std::function<void(const CellResult&)>;

/// For every model and protocol: sorted split, random search with k-fold
/// cross-validation on the training part, refit on the whole training
/// part, pairwise accuracy on the test part. A cell's seeds depend only on
/// the base seed, the model and the protocol.
EvaluationReport run_protocols(const ArchitectureDataset& dataset, std::string dataset_name,
                               std::span<const ModelKind> kinds, std::span<const Protocol> protocols,
                               const ExperimentOptions& options, const CellCallback& on_cell = {});

/// Baseline against proposed.
EvaluationReport run_comparison(const ArchitectureDataset& dataset, std::string dataset_name,
                                std::span<const ModelKind> kinds, const ExperimentOptions& options,
                                const CellCallback& on_cell = {});

/// Proposed against the G1 and G2 ablations.
EvaluationReport run_ablation(const ArchitectureDataset& dataset, std::string dataset_name,
                              std::span<const ModelKind> kinds, const ExperimentOptions& options,
                              const CellCallback& on_cell = {});

/// `key=value` lines, one per cell plus one per protocol average.
void write_report_kv(std::ostream& out, const EvaluationReport& report);
/// Aligned table: one row per model, one column per protocol, plus Avg.
void write_report_table(std::ostream& out, const EvaluationReport& report);

} // namespace pairrank
