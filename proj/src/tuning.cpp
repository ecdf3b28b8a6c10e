#include "pairrank/tuning.hpp"

#include "pairrank/evaluation.hpp"
#include "pairrank/text.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace pairrank {

namespace {

const std::string& pick(const std::vector<std::string>& options, Rng& rng)
{
    std::uniform_int_distribution<std::size_t> d(0, options.size() - 1);
    return options[d(rng)];
}

std::int64_t draw(IntRange r, Rng& rng) { return std::uniform_int_distribution<std::int64_t>(r.lo, r.hi)(rng); }

double draw_positive(double scale, Rng& rng)
{
    std::exponential_distribution<double> d(1.0 / scale);
    double v = 0.0;
    while (!(v > 0.0)) {
        v = d(rng);
    }
    return v;
}

bool has_choice(const std::vector<std::string>& options, const std::string& value)
{
    return std::find(options.begin(), options.end(), value) != options.end();
}

} // namespace

bool ParamSpace::contains(ModelKind kind, ModelMode mode, const ParamConfig& config) const
{
    try {
        Rng probe(0);
        const auto shape = sample_config(*this, kind, mode, probe);
        if (shape.size() != config.size()) {
            return false;
        }
        for (const auto& [key, value] : shape.values()) {
            if (!config.contains(key)) {
                return false;
            }
        }
        if (kind == ModelKind::Svm) {
            return config.real("C") > 0.0 && config.real("gamma") > 0.0;
        }
        const auto& criteria = mode == ModelMode::Classifier ? classifier_criteria : regressor_criteria;
        bool ok = min_samples_split.contains(config.integer("min_samples_split"))
            && max_depth.contains(config.integer("max_depth"))
            && min_samples_leaf.contains(config.integer("min_samples_leaf"))
            && has_choice(max_features, config.choice("max_features"))
            && has_choice(criteria, config.choice("criterion"));
        if (kind != ModelKind::DecisionTree) {
            ok = ok && n_estimators.contains(config.integer("n_estimators"));
        }
        if (kind == ModelKind::Gbdt) {
            ok = ok && config.real("learning_rate") > 0.0;
        }
        return ok;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

ParamConfig sample_config(const ParamSpace& space, ModelKind kind, ModelMode mode, Rng& rng)
{
    ParamConfig config;
    if (kind == ModelKind::Svm) {
        config.set("C", draw_positive(space.exponential_scale, rng));
        config.set("gamma", draw_positive(space.exponential_scale, rng));
        return config;
    }
    config.set("min_samples_split", draw(space.min_samples_split, rng));
    config.set("min_samples_leaf", draw(space.min_samples_leaf, rng));
    config.set("max_depth", draw(space.max_depth, rng));
    config.set("max_features", pick(space.max_features, rng));
    config.set("criterion",
               pick(mode == ModelMode::Classifier ? space.classifier_criteria : space.regressor_criteria, rng));
    if (kind != ModelKind::DecisionTree) {
        config.set("n_estimators", draw(space.n_estimators, rng));
    }
    if (kind == ModelKind::Gbdt) {
        config.set("learning_rate", draw_positive(space.exponential_scale, rng));
    }
    return config;
}

std::vector<std::vector<std::size_t>> k_fold_split(std::size_t n, std::size_t k, Rng& rng)
{
    if (k == 0 || k > n) {
        throw std::invalid_argument("cannot split " + std::to_string(n) + " records into " + std::to_string(k)
                                    + " folds");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const auto size = n / k + (f < n % k ? 1 : 0);
        folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::sort(folds[f].begin(), folds[f].end());
        pos += size;
    }
    return folds;
}

CvResult cross_validate(const RankerTrainer& trainer, const ArchitectureDataset& data, std::size_t k,
                        std::uint64_t seed)
{
    if (k < 2) {
        throw std::invalid_argument("cross-validation needs at least two folds");
    }
    auto split_rng = make_rng(seed, {0xf01d});
    const auto folds = k_fold_split(data.size(), k, split_rng);
    for (const auto& fold : folds) {
        if (fold.size() < 2 || data.size() - fold.size() < 2) {
            throw DataError("cross-validation fold too small to form pairs: " + std::to_string(data.size())
                            + " records in " + std::to_string(k) + " folds");
        }
    }
    CvResult result;
    std::vector<char> held_out(data.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::fill(held_out.begin(), held_out.end(), 0);
        for (auto i : folds[f]) {
            held_out[i] = 1;
        }
        std::vector<std::size_t> train_idx;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (!held_out[i]) {
                train_idx.push_back(i);
            }
        }
        const auto train = data.subset(train_idx);
        const auto valid = data.subset(folds[f]);
        const auto ranker = trainer(train, next_seed(split_rng));
        result.fold_scores.push_back(pairwise_accuracy(*ranker, valid));
    }
    result.mean_score = std::accumulate(result.fold_scores.begin(), result.fold_scores.end(), 0.0)
        / static_cast<double>(result.fold_scores.size());
    return result;
}

CvResult cross_validate(ModelKind kind, ModelMode mode, const ParamConfig& config, Protocol protocol,
                        const ArchitectureDataset& data, std::size_t k, std::uint64_t seed)
{
    if (mode != mode_for(protocol)) {
        throw std::invalid_argument("model mode does not match the " + std::string(to_string(protocol)) + " protocol");
    }
    validate_config(kind, mode, config);
    auto trainer = [&](const ArchitectureDataset& train, std::uint64_t fold_seed) -> std::unique_ptr<PairwiseRanker> {
        return std::make_unique<PredictorRanker>(fit_protocol(kind, protocol, config, train, fold_seed), protocol);
    };
    auto result = cross_validate(trainer, data, k, seed);
    result.config = config;
    return result;
}

SearchResult random_search(ModelKind kind, ModelMode mode, Protocol protocol, const ArchitectureDataset& data,
                           std::size_t trials, std::size_t k, std::uint64_t seed, const ParamSpace& space)
{
    return random_search(kind, mode, protocol, data, trials, k, seed,
                         [&](std::size_t, Rng& rng) { return sample_config(space, kind, mode, rng); });
}

SearchResult random_search(ModelKind kind, ModelMode mode, Protocol protocol, const ArchitectureDataset& data,
                           std::size_t trials, std::size_t k, std::uint64_t seed, const ConfigSource& source)
{
    if (trials == 0) {
        throw std::invalid_argument("random search needs at least one trial");
    }
    SearchResult result;
    result.history.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        auto trial_rng = make_rng(seed, {t, 0x7e1a1});
        const auto config = source(t, trial_rng);
        result.history.push_back(cross_validate(kind, mode, config, protocol, data, k, seed));
        if (t == 0 || result.history[t].mean_score > result.history[result.best_trial].mean_score) {
            result.best_trial = t;
        }
    }
    result.best = result.history[result.best_trial].config;
    return result;
}

void write_history(std::ostream& out, const SearchResult& result)
{
    for (std::size_t t = 0; t < result.history.size(); ++t) {
        const auto& h = result.history[t];
        out << t << '\t' << h.config.to_text() << '\t';
        for (std::size_t f = 0; f < h.fold_scores.size(); ++f) {
            out << (f ? "," : "") << format_real(h.fold_scores[f]);
        }
        out << '\t' << format_real(h.mean_score) << '\n';
    }
}

} // namespace pairrank
