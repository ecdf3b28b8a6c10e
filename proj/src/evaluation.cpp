#include "pairrank/evaluation.hpp"

#include "pairrank/random.hpp"
#include "pairrank/text.hpp"
#include "pairrank/tuning.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace pairrank {

namespace {

/// Scores every ordered pair of `test` with `first(i, j)`, which says
/// whether record i is ranked at least as good as record j.
template <class FirstFn>
double ordered_pair_accuracy(const ArchitectureDataset& test, FirstFn first)
{
    const auto n = test.size();
    if (n < 2) {
        throw std::invalid_argument("pairwise accuracy needs at least two test records");
    }
    std::size_t correct = 0;
    auto score = [&](std::size_t i, std::size_t j) {
        const bool truth = test[i].performance - test[j].performance >= 0.0;
        correct += truth == first(i, j) ? 1 : 0;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            score(i, j);
            score(j, i);
        }
    }
    return static_cast<double>(correct) / static_cast<double>(n * (n - 1));
}

} // namespace

double pairwise_accuracy(const PairwiseRanker& ranker, const ArchitectureDataset& test)
{
    return ordered_pair_accuracy(test, [&](std::size_t i, std::size_t j) {
        return ranker.order(test[i].features, test[j].features) == Ordering::First;
    });
}

double pairwise_accuracy(const TrainedPredictor& predictor, Protocol protocol, const ArchitectureDataset& test)
{
    if (predictor.mode() != mode_for(protocol)) {
        throw std::invalid_argument("predictor mode does not match the " + std::string(to_string(protocol))
                                    + " protocol");
    }
    if (protocol == Protocol::Baseline) {
        // Same answers as predict_order, one prediction per record.
        std::vector<double> scores;
        scores.reserve(test.size());
        for (const auto& r : test.records()) {
            scores.push_back(predictor.predict_score(r.features));
        }
        return ordered_pair_accuracy(test, [&](std::size_t i, std::size_t j) { return scores[i] >= scores[j]; });
    }
    PredictorRanker ranker(predictor, protocol);
    return pairwise_accuracy(ranker, test);
}

std::optional<double> EvaluationReport::accuracy(ModelKind kind, Protocol protocol) const
{
    for (const auto& c : cells) {
        if (c.kind == kind && c.protocol == protocol) {
            return c.accuracy;
        }
    }
    return std::nullopt;
}

double EvaluationReport::average(Protocol protocol) const
{
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& c : cells) {
        if (c.protocol == protocol) {
            sum += c.accuracy;
            ++count;
        }
    }
    if (count == 0) {
        throw std::invalid_argument("report has no cells for the " + std::string(to_string(protocol)) + " protocol");
    }
    return sum / static_cast<double>(count);
}

EvaluationReport run_protocols(const ArchitectureDataset& dataset, std::string dataset_name,
                               std::span<const ModelKind> kinds, std::span<const Protocol> protocols,
                               const ExperimentOptions& options, const CellCallback& on_cell)
{
    const auto split = sorted_split(dataset, options.train_fraction);
    EvaluationReport report;
    report.dataset_name = std::move(dataset_name);
    report.seed = options.seed;
    report.trials = options.trials;
    report.folds = options.folds;
    report.train_size = split.train.size();
    report.test_size = split.test.size();
    report.kinds.assign(kinds.begin(), kinds.end());
    report.protocols.assign(protocols.begin(), protocols.end());
    for (auto kind : kinds) {
        for (auto protocol : protocols) {
            auto rng = make_rng(options.seed,
                                {static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(protocol), 0xce11});
            const auto search_seed = next_seed(rng);
            const auto model_seed = next_seed(rng);
            const auto mode = mode_for(protocol);
            const auto search =
                random_search(kind, mode, protocol, split.train, options.trials, options.folds, search_seed);
            const auto predictor = fit_protocol(kind, protocol, search.best, split.train, model_seed);
            CellResult cell;
            cell.kind = kind;
            cell.protocol = protocol;
            cell.accuracy = pairwise_accuracy(predictor, protocol, split.test);
            cell.cv_score = search.history[search.best_trial].mean_score;
            cell.model_seed = model_seed;
            cell.config = search.best;
            if (on_cell) {
                on_cell(cell);
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

EvaluationReport run_comparison(const ArchitectureDataset& dataset, std::string dataset_name,
                                std::span<const ModelKind> kinds, const ExperimentOptions& options,
                                const CellCallback& on_cell)
{
    static constexpr Protocol kProtocols[] = {Protocol::Baseline, Protocol::Proposed};
    return run_protocols(dataset, std::move(dataset_name), kinds, kProtocols, options, on_cell);
}

EvaluationReport run_ablation(const ArchitectureDataset& dataset, std::string dataset_name,
                              std::span<const ModelKind> kinds, const ExperimentOptions& options,
                              const CellCallback& on_cell)
{
    static constexpr Protocol kProtocols[] = {Protocol::Proposed, Protocol::G1, Protocol::G2};
    return run_protocols(dataset, std::move(dataset_name), kinds, kProtocols, options, on_cell);
}

void write_report_kv(std::ostream& out, const EvaluationReport& report)
{
    out << "dataset=" << report.dataset_name << '\n';
    out << "seed=" << report.seed << '\n';
    out << "trials=" << report.trials << '\n';
    out << "folds=" << report.folds << '\n';
    out << "train_size=" << report.train_size << '\n';
    out << "test_size=" << report.test_size << '\n';
    for (const auto& c : report.cells) {
        const auto prefix = std::string(to_string(c.kind)) + "." + std::string(to_string(c.protocol));
        out << prefix << ".accuracy=" << format_real(c.accuracy) << '\n';
        out << prefix << ".cv_score=" << format_real(c.cv_score) << '\n';
        out << prefix << ".model_seed=" << c.model_seed << '\n';
        out << prefix << ".config=" << c.config.to_text() << '\n';
    }
    for (auto p : report.protocols) {
        out << "avg." << to_string(p) << "=" << format_real(report.average(p)) << '\n';
    }
}

void write_report_table(std::ostream& out, const EvaluationReport& report)
{
    constexpr int kName = 10;
    constexpr int kCol = 10;
    auto pct = [](double v) { return format_fixed(100.0 * v, 2) + "%"; };
    out << std::left << std::setw(kName) << "Model";
    for (auto p : report.protocols) {
        out << std::right << std::setw(kCol) << to_string(p);
    }
    out << '\n';
    for (auto kind : report.kinds) {
        out << std::left << std::setw(kName) << to_string(kind);
        for (auto p : report.protocols) {
            const auto acc = report.accuracy(kind, p);
            out << std::right << std::setw(kCol) << (acc ? pct(*acc) : std::string("-"));
        }
        out << '\n';
    }
    out << std::left << std::setw(kName) << "Avg";
    for (auto p : report.protocols) {
        out << std::right << std::setw(kCol) << pct(report.average(p));
    }
    out << '\n';
}

} // namespace pairrank
