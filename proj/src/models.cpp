#include "pairrank/models.hpp"

#include "pairrank/random.hpp"
#include "pairrank/text.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

namespace pairrank {

namespace {

const std::set<std::string> kTreeKeys = {"min_samples_split", "min_samples_leaf", "max_depth", "max_features",
                                         "criterion"};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// log(1 + e^f) - y f, stable for large |f|.
double logistic_loss(double y, double f)
{
    const double softplus = f > 0.0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f));
    return softplus - y * f;
}

std::span<const double> as_real(std::span<const std::int32_t> x)
{
    thread_local std::vector<double> buffer;
    buffer.assign(x.begin(), x.end());
    return buffer;
}

void require_int_at_least(const ParamConfig& c, const std::string& key, std::int64_t lo)
{
    if (c.integer(key) < lo) {
        throw std::invalid_argument("parameter '" + key + "' must be at least " + std::to_string(lo));
    }
}

void require_positive_real(const ParamConfig& c, const std::string& key)
{
    const double v = c.real(key);
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("parameter '" + key + "' must be a positive finite number");
    }
}

std::set<std::string> required_keys(ModelKind kind)
{
    switch (kind) {
    case ModelKind::DecisionTree:
        return kTreeKeys;
    case ModelKind::RandomForest: {
        auto keys = kTreeKeys;
        keys.insert("n_estimators");
        return keys;
    }
    case ModelKind::Gbdt: {
        auto keys = kTreeKeys;
        keys.insert("n_estimators");
        keys.insert("learning_rate");
        return keys;
    }
    case ModelKind::Svm:
        return {"C", "gamma"};
    }
    return {};
}

bool forest_bootstrap(const ParamConfig& config)
{
    return !config.contains("bootstrap") || config.choice("bootstrap") == "true";
}

DecisionTree fit_tree(const BinnedMatrix& binned, std::span<const double> targets, const TreeOptions& options,
                      std::uint64_t seed)
{
    std::vector<std::size_t> rows(binned.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    auto rng = make_rng(seed, {0});
    return DecisionTree::fit(binned, targets, rows, options, rng);
}

ForestModel fit_forest(const BinnedMatrix& binned, std::span<const double> targets, const TreeOptions& options,
                       std::size_t n_estimators, bool bootstrap, std::uint64_t seed)
{
    ForestModel forest;
    forest.trees.reserve(n_estimators);
    const auto n = binned.rows();
    std::vector<std::size_t> rows(n);
    for (std::size_t m = 0; m < n_estimators; ++m) {
        if (bootstrap) {
            auto boot_rng = make_rng(seed, {m, 0xb0075742});
            std::uniform_int_distribution<std::size_t> draw(0, n - 1);
            for (auto& r : rows) {
                r = draw(boot_rng);
            }
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        // Member m grows from stream m; member 0 matches a lone tree.
        auto tree_rng = make_rng(seed, {m});
        forest.trees.push_back(DecisionTree::fit(binned, targets, rows, options, tree_rng));
    }
    return forest;
}

BoostedModel fit_boosted(const BinnedMatrix& binned, std::span<const double> targets, ModelMode mode,
                         TreeOptions options, std::size_t rounds, double learning_rate, std::uint64_t seed)
{
    const auto n = binned.rows();
    const bool classify = mode == ModelMode::Classifier;
    if (classify) {
        // Base learners fit real-valued gradients.
        options.criterion = Criterion::Mse;
    }
    BoostedModel model;
    const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);
    if (classify) {
        const double p = std::clamp(mean, 1e-12, 1.0 - 1e-12);
        model.init = std::log(p / (1.0 - p));
    } else {
        model.init = mean;
    }
    std::vector<double> raw(n, model.init);
    std::vector<double> residual(n);
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::vector<int> leaf_of_row;
    std::vector<std::vector<std::size_t>> members;

    auto member_loss = [&](const std::vector<std::size_t>& idx, double step) {
        double loss = 0.0;
        for (auto r : idx) {
            const double f = raw[r] + step;
            if (classify) {
                loss += logistic_loss(targets[r], f);
            } else {
                const double e = targets[r] - f;
                loss += 0.5 * e * e;
            }
        }
        return loss;
    };

    model.trees.reserve(rounds);
    for (std::size_t m = 0; m < rounds; ++m) {
        for (std::size_t r = 0; r < n; ++r) {
            residual[r] = classify ? targets[r] - sigmoid(raw[r]) : targets[r] - raw[r];
        }
        auto rng = make_rng(seed, {m});
        auto tree = DecisionTree::fit(binned, residual, rows, options, rng, &leaf_of_row);

        members.assign(tree.nodes().size(), {});
        for (std::size_t r = 0; r < n; ++r) {
            members[static_cast<std::size_t>(leaf_of_row[r])].push_back(r);
        }
        for (std::size_t leaf = 0; leaf < members.size(); ++leaf) {
            const auto& idx = members[leaf];
            if (idx.empty()) {
                continue;
            }
            double num = 0.0;
            double den = 0.0;
            for (auto r : idx) {
                num += residual[r];
                if (classify) {
                    const double p = sigmoid(raw[r]);
                    den += p * (1.0 - p);
                } else {
                    den += 1.0;
                }
            }
            double step = den > 1e-12 ? num / den : (num > 0.0 ? 1.0 : (num < 0.0 ? -1.0 : 0.0));
            step *= learning_rate;
            // Shrink the step until this leaf's loss does not go up, so the
            // training loss never increases whatever the learning rate.
            const double base = member_loss(idx, 0.0);
            int halvings = 0;
            while (step != 0.0 && member_loss(idx, step) > base) {
                step *= 0.5;
                if (++halvings > 64) {
                    step = 0.0;
                }
            }
            tree.set_leaf_value(leaf, step);
            for (auto r : idx) {
                raw[r] += step;
            }
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

void expect_token(std::istream& in, const std::string& expected)
{
    std::string t;
    if (!(in >> t) || t != expected) {
        throw std::runtime_error("model file: expected '" + expected + "'");
    }
}

std::string read_word(std::istream& in)
{
    std::string t;
    if (!(in >> t)) {
        throw std::runtime_error("model file truncated");
    }
    return t;
}

} // namespace

double ForestModel::predict(std::span<const double> x) const
{
    double sum = 0.0;
    for (const auto& t : trees) {
        sum += t.predict(x);
    }
    return sum / static_cast<double>(trees.size());
}

double BoostedModel::staged_raw(std::span<const double> x, std::size_t rounds) const
{
    double f = init;
    const auto limit = std::min(rounds, trees.size());
    for (std::size_t k = 0; k < limit; ++k) {
        f += trees[k].predict(x);
    }
    return f;
}

TrainedPredictor::TrainedPredictor(ModelKind kind, ModelMode mode, ParamConfig config, std::size_t feature_len,
                                   Backend backend)
    : kind_(kind), mode_(mode), config_(std::move(config)), feature_len_(feature_len), backend_(std::move(backend))
{
}

double TrainedPredictor::predict_score(std::span<const std::int32_t> x) const
{
    if (x.size() != feature_len_) {
        throw std::invalid_argument("predictor expects " + std::to_string(feature_len_) + " features, got "
                                    + std::to_string(x.size()));
    }
    return predict_score_real(as_real(x));
}

double TrainedPredictor::predict_score_real(std::span<const double> x) const
{
    if (x.size() != feature_len_) {
        throw std::invalid_argument("predictor expects " + std::to_string(feature_len_) + " features");
    }
    const bool classify = mode_ == ModelMode::Classifier;
    return std::visit(
        [&](const auto& model) -> double {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, DecisionTree> || std::is_same_v<T, ForestModel>) {
                return model.predict(x);
            } else if constexpr (std::is_same_v<T, BoostedModel>) {
                const double f = model.raw(x);
                return classify ? sigmoid(f) : f;
            } else {
                const double f = model.decision_value(x);
                return classify ? sigmoid(f) : f;
            }
        },
        backend_);
}

void TrainedPredictor::save(std::ostream& out) const
{
    out << "pairrank-predictor 1\n";
    out << "kind " << to_string(kind_) << '\n';
    out << "mode " << to_string(mode_) << '\n';
    out << "feature_len " << feature_len_ << '\n';
    out << "config " << config_.size() << ' ' << config_.to_text() << '\n';
    std::visit(
        [&](const auto& model) {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, DecisionTree>) {
                model.save(out);
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                out << "forest " << model.trees.size() << '\n';
                for (const auto& t : model.trees) {
                    t.save(out);
                }
            } else if constexpr (std::is_same_v<T, BoostedModel>) {
                out << "boosted " << format_real(model.init) << ' ' << model.trees.size() << '\n';
                for (const auto& t : model.trees) {
                    t.save(out);
                }
            } else {
                model.save(out);
            }
        },
        backend_);
}

TrainedPredictor TrainedPredictor::load(std::istream& in)
{
    expect_token(in, "pairrank-predictor");
    expect_token(in, "1");
    expect_token(in, "kind");
    const auto kind = parse_model_kind(read_word(in));
    expect_token(in, "mode");
    const auto mode = parse_model_mode(read_word(in));
    expect_token(in, "feature_len");
    const auto feature_len = static_cast<std::size_t>(std::stoull(read_word(in)));
    expect_token(in, "config");
    const auto entries = static_cast<std::size_t>(std::stoull(read_word(in)));
    std::string text;
    for (std::size_t k = 0; k < entries; ++k) {
        if (!text.empty()) {
            text += ' ';
        }
        text += read_word(in);
    }
    auto config = ParamConfig::parse(text);
    validate_config(kind, mode, config);

    auto read_trees = [&](std::size_t count) {
        std::vector<DecisionTree> trees;
        trees.reserve(count);
        for (std::size_t k = 0; k < count; ++k) {
            trees.push_back(DecisionTree::load(in));
        }
        return trees;
    };

    switch (kind) {
    case ModelKind::DecisionTree:
        return {kind, mode, std::move(config), feature_len, DecisionTree::load(in)};
    case ModelKind::RandomForest: {
        expect_token(in, "forest");
        ForestModel forest;
        forest.trees = read_trees(std::stoull(read_word(in)));
        return {kind, mode, std::move(config), feature_len, std::move(forest)};
    }
    case ModelKind::Gbdt: {
        expect_token(in, "boosted");
        BoostedModel boosted;
        const auto init = read_word(in);
        auto [p, ec] = std::from_chars(init.data(), init.data() + init.size(), boosted.init);
        if (ec != std::errc()) {
            throw std::runtime_error("model file: malformed boosting offset");
        }
        boosted.trees = read_trees(std::stoull(read_word(in)));
        return {kind, mode, std::move(config), feature_len, std::move(boosted)};
    }
    case ModelKind::Svm:
        return {kind, mode, std::move(config), feature_len, SvmModel::load(in)};
    }
    throw std::runtime_error("model file: unknown model kind");
}

void validate_config(ModelKind kind, ModelMode mode, const ParamConfig& config)
{
    auto keys = required_keys(kind);
    for (const auto& key : keys) {
        if (!config.contains(key)) {
            throw std::invalid_argument(std::string(to_string(kind)) + " config is missing '" + key + "'");
        }
    }
    for (const auto& [key, value] : config.values()) {
        const bool optional_bootstrap = kind == ModelKind::RandomForest && key == "bootstrap";
        if (!keys.count(key) && !optional_bootstrap) {
            throw std::invalid_argument(std::string(to_string(kind)) + " does not take parameter '" + key + "'");
        }
    }
    if (kind == ModelKind::Svm) {
        require_positive_real(config, "C");
        require_positive_real(config, "gamma");
        return;
    }
    require_int_at_least(config, "min_samples_split", 2);
    require_int_at_least(config, "min_samples_leaf", 1);
    require_int_at_least(config, "max_depth", 1);
    parse_max_features(config.choice("max_features"));
    const auto criterion = parse_criterion(config.choice("criterion"));
    const bool class_criterion = criterion == Criterion::Gini || criterion == Criterion::InfoGain;
    if (class_criterion != (mode == ModelMode::Classifier)) {
        throw std::invalid_argument("criterion '" + config.choice("criterion") + "' does not fit "
                                    + std::string(to_string(mode)) + " mode");
    }
    if (kind != ModelKind::DecisionTree) {
        require_int_at_least(config, "n_estimators", 1);
    }
    if (kind == ModelKind::Gbdt) {
        require_positive_real(config, "learning_rate");
    }
    if (kind == ModelKind::RandomForest && config.contains("bootstrap")) {
        const auto& b = config.choice("bootstrap");
        if (b != "true" && b != "false") {
            throw std::invalid_argument("bootstrap must be true or false");
        }
    }
}

TreeOptions tree_options(ModelKind kind, ModelMode mode, const ParamConfig& config)
{
    validate_config(kind, mode, config);
    if (kind == ModelKind::Svm) {
        throw std::invalid_argument("svm has no tree options");
    }
    TreeOptions o;
    o.criterion = parse_criterion(config.choice("criterion"));
    o.max_depth = static_cast<int>(std::min<std::int64_t>(config.integer("max_depth"), 1 << 20));
    o.min_samples_split = static_cast<int>(std::min<std::int64_t>(config.integer("min_samples_split"), 1 << 30));
    o.min_samples_leaf = static_cast<int>(std::min<std::int64_t>(config.integer("min_samples_leaf"), 1 << 30));
    o.max_features = parse_max_features(config.choice("max_features"));
    return o;
}

TrainedPredictor fit(ModelKind kind, ModelMode mode, const ParamConfig& config, std::span<const FeatureVector> inputs,
                     std::span<const double> targets, std::uint64_t seed)
{
    validate_config(kind, mode, config);
    if (inputs.size() != targets.size()) {
        throw std::invalid_argument("inputs and targets differ in length");
    }
    if (inputs.size() < 2) {
        throw std::invalid_argument("training needs at least two rows");
    }
    if (mode == ModelMode::Classifier) {
        bool seen[2] = {false, false};
        for (double t : targets) {
            if (t != 0.0 && t != 1.0) {
                throw std::invalid_argument("classifier targets must be 0 or 1");
            }
            seen[t == 1.0 ? 1 : 0] = true;
        }
        if (!seen[0] || !seen[1]) {
            throw std::invalid_argument("classifier training data contains a single class");
        }
    } else {
        for (double t : targets) {
            if (!std::isfinite(t)) {
                throw std::invalid_argument("regression targets must be finite");
            }
        }
    }
    const auto x = FeatureMatrix::from_vectors(inputs);
    const auto feature_len = x.cols();
    if (feature_len == 0) {
        throw std::invalid_argument("feature vectors are empty");
    }

    if (kind == ModelKind::Svm) {
        auto svm = SvmModel::fit(x, targets, mode, config.real("C"), config.real("gamma"));
        return {kind, mode, config, feature_len, std::move(svm)};
    }
    const BinnedMatrix binned(x);
    const auto options = tree_options(kind, mode, config);
    switch (kind) {
    case ModelKind::DecisionTree:
        return {kind, mode, config, feature_len, fit_tree(binned, targets, options, seed)};
    case ModelKind::RandomForest:
        return {kind,
                mode,
                config,
                feature_len,
                fit_forest(binned, targets, options, static_cast<std::size_t>(config.integer("n_estimators")),
                           forest_bootstrap(config), seed)};
    case ModelKind::Gbdt:
        return {kind,
                mode,
                config,
                feature_len,
                fit_boosted(binned, targets, mode, options, static_cast<std::size_t>(config.integer("n_estimators")),
                            config.real("learning_rate"), seed)};
    case ModelKind::Svm:
        break;
    }
    throw std::logic_error("unreachable model kind");
}

ModelMode mode_for(Protocol protocol)
{
    return protocol == Protocol::Proposed || protocol == Protocol::G2 ? ModelMode::Classifier : ModelMode::Regressor;
}

TrainedPredictor fit_protocol(ModelKind kind, Protocol protocol, const ParamConfig& config,
                              const ArchitectureDataset& train, std::uint64_t seed)
{
    const auto mode = mode_for(protocol);
    std::vector<FeatureVector> inputs;
    std::vector<double> targets;
    auto take_pairs = [&](PairDataset pairs) {
        inputs.reserve(pairs.size());
        targets.reserve(pairs.size());
        for (auto& s : pairs.samples) {
            inputs.push_back(std::move(s.diff));
            targets.push_back(static_cast<double>(s.label));
        }
    };
    auto take_regression = [&](RegressionDataset data) {
        inputs = std::move(data.inputs);
        targets = std::move(data.targets);
    };
    switch (protocol) {
    case Protocol::Proposed:
        take_pairs(build_training_data(train));
        break;
    case Protocol::G2:
        take_pairs(build_ablation_g2(train, seed));
        break;
    case Protocol::Baseline:
        take_regression(build_baseline_data(train));
        break;
    case Protocol::G1:
        take_regression(build_ablation_g1(train));
        break;
    }
    return fit(kind, mode, config, inputs, targets, seed);
}

Ordering predict_order(const TrainedPredictor& predictor, Protocol protocol, std::span<const std::int32_t> a,
                       std::span<const std::int32_t> b)
{
    if (predictor.mode() != mode_for(protocol)) {
        throw std::invalid_argument("a " + std::string(to_string(predictor.mode())) + " cannot rank under the "
                                    + std::string(to_string(protocol)) + " protocol");
    }
    if (a.size() != predictor.feature_len() || b.size() != predictor.feature_len()) {
        throw std::invalid_argument("feature vector length does not match the predictor");
    }
    // Identical architectures tie, and ties go to the first argument.
    if (std::equal(a.begin(), a.end(), b.begin(), b.end())) {
        return Ordering::First;
    }
    switch (protocol) {
    case Protocol::Proposed:
    case Protocol::G2:
        return predictor.predict_score(difference(a, b)) >= 0.5 ? Ordering::First : Ordering::Second;
    case Protocol::G1:
        return predictor.predict_score(difference(a, b)) >= 0.0 ? Ordering::First : Ordering::Second;
    case Protocol::Baseline:
        return predictor.predict_score(a) >= predictor.predict_score(b) ? Ordering::First : Ordering::Second;
    }
    throw std::logic_error("unreachable protocol");
}

PredictorRanker::PredictorRanker(TrainedPredictor predictor, Protocol protocol)
    : predictor_(std::move(predictor)), protocol_(protocol)
{
    if (predictor_.mode() != mode_for(protocol_)) {
        throw std::invalid_argument("predictor mode does not match the " + std::string(to_string(protocol_))
                                    + " protocol");
    }
}

Ordering PredictorRanker::order(std::span<const std::int32_t> a, std::span<const std::int32_t> b) const
{
    return predict_order(predictor_, protocol_, a, b);
}

} // namespace pairrank
