#include "cli.hpp"

#include "pairrank/dataset.hpp"
#include "pairrank/enas_sim.hpp"
#include "pairrank/evaluation.hpp"
#include "pairrank/manifest.hpp"
#include "pairrank/models.hpp"
#include "pairrank/text.hpp"
#include "pairrank/tuning.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <stdexcept>

namespace pairrank {

namespace {

struct Options {
    std::string data;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t trials = 100;
    std::size_t folds = 5;
    std::string protocol = "proposed";
    std::string models = "svm,gbdt,dtree,rforest";
    std::string model = "svm";
    std::string config;
    std::string format = "both";
    double fraction = 0.7;
    double width = 0.001;
    double origin = 0.0;
    std::size_t n = 0;
    std::size_t features = 31;
    double noise = 0.0;
    std::size_t population = 20;
    std::size_t generations = 30;
    double mutation = 0.1;
    double crossover = 0.9;
    std::uint64_t landscape_seed = 0;
    std::string predictor;
    std::int64_t samples = 50000;
    std::int64_t batch = 128;
    std::int64_t epochs = 500;
    double minutes = 2.0;
    std::int64_t individuals = 1000;
    std::int64_t gpus = 1;
};

RunManifest manifest_for(const CLI::App& sub, const Options& o)
{
    RunManifest m;
    m.command = sub.get_name();
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt == sub.get_help_ptr()) {
            continue;
        }
        m.flags[opt->get_single_name()] = opt->count() ? opt->as<std::string>() : opt->get_default_str();
    }
    if (!o.data.empty()) {
        m.dataset_checksum = file_checksum(o.data);
    }
    return m;
}

/// Sends `write` to the --out file when one is given, else to `out`.
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write)
{
    if (path.empty()) {
        write(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw DataError("cannot write " + path);
    }
    write(file);
    if (!file) {
        throw DataError("failed while writing " + path);
    }
}

std::vector<ModelKind> parse_models(const std::string& list)
{
    std::vector<ModelKind> kinds;
    for (auto name : split_on(list, ',')) {
        const auto kind = parse_model_kind(name);
        if (std::find(kinds.begin(), kinds.end(), kind) != kinds.end()) {
            throw std::invalid_argument("model '" + std::string(name) + "' listed twice");
        }
        kinds.push_back(kind);
    }
    return kinds;
}

std::string dataset_name(const std::string& path) { return std::filesystem::path(path).stem().string(); }

std::string join_ints(std::span<const std::int32_t> v)
{
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        s += (k ? "," : "") + std::to_string(v[k]);
    }
    return s;
}

void cmd_split(const CLI::App& sub, const Options& o, std::ostream& out)
{
    const auto ds = load_dataset(o.data);
    const auto split = sorted_split(ds, o.fraction);
    save_dataset(o.out + ".train.csv", split.train);
    save_dataset(o.out + ".test.csv", split.test);
    manifest_for(sub, o).write(out);
    out << "train=" << o.out << ".train.csv\n";
    out << "train_size=" << split.train.size() << '\n';
    out << "test=" << o.out << ".test.csv\n";
    out << "test_size=" << split.test.size() << '\n';
}

void cmd_hist(const CLI::App& sub, const Options& o, std::ostream& out)
{
    const auto hist = performance_histogram(load_dataset(o.data), o.width, o.origin);
    if (o.out.empty()) {
        write_histogram(out, hist);
        return;
    }
    emit(o.out, out, [&](std::ostream& s) { write_histogram(s, hist); });
    manifest_for(sub, o).write(out);
}

void cmd_gen(const CLI::App& sub, const Options& o, std::ostream& out)
{
    const auto ds = generate_synthetic(o.n, o.features, o.seed, o.noise);
    if (o.out.empty()) {
        write_dataset(out, ds);
        return;
    }
    save_dataset(o.out, ds);
    manifest_for(sub, o).write(out);
    out << "records=" << ds.size() << '\n';
}

void cmd_tune(const CLI::App& sub, const Options& o, std::ostream& out)
{
    const auto ds = load_dataset(o.data);
    const auto kind = parse_model_kind(o.model);
    const auto protocol = parse_protocol(o.protocol);
    const auto search = random_search(kind, mode_for(protocol), protocol, ds, o.trials, o.folds, o.seed);
    if (!o.out.empty()) {
        emit(o.out, out, [&](std::ostream& s) { write_history(s, search); });
    }
    manifest_for(sub, o).write(out);
    out << "best_trial=" << search.best_trial << '\n';
    out << "best.config=" << search.best.to_text() << '\n';
    out << "best.cv_score=" << format_real(search.history[search.best_trial].mean_score) << '\n';
    if (o.out.empty()) {
        write_history(out, search);
    }
}

void cmd_train(const CLI::App& sub, const Options& o, std::ostream& out)
{
    const auto ds = load_dataset(o.data);
    const auto kind = parse_model_kind(o.model);
    const auto protocol = parse_protocol(o.protocol);
    ParamConfig config;
    if (o.config.empty()) {
        config = random_search(kind, mode_for(protocol), protocol, ds, o.trials, o.folds, o.seed).best;
    } else {
        config = ParamConfig::parse(o.config);
    }
    const auto predictor = fit_protocol(kind, protocol, config, ds, o.seed);
    emit(o.out, out, [&](std::ostream& s) { predictor.save(s); });
    manifest_for(sub, o).write(out);
    out << "model=" << to_string(kind) << '\n';
    out << "mode=" << to_string(predictor.mode()) << '\n';
    out << "config=" << config.to_text() << '\n';
}

void cmd_report(const CLI::App& sub, const Options& o, std::ostream& out, bool ablation)
{
    if (o.format != "kv" && o.format != "table" && o.format != "both") {
        throw std::invalid_argument("--format must be kv, table or both");
    }
    const auto ds = load_dataset(o.data);
    const auto kinds = parse_models(o.models);
    ExperimentOptions ex;
    ex.trials = o.trials;
    ex.folds = o.folds;
    ex.seed = o.seed;
    const auto report = ablation ? run_ablation(ds, dataset_name(o.data), kinds, ex)
                                 : run_comparison(ds, dataset_name(o.data), kinds, ex);
    const auto manifest = manifest_for(sub, o);
    emit(o.out, out, [&](std::ostream& s) {
        manifest.write(s);
        if (o.format != "table") {
            write_report_kv(s, report);
        }
        if (o.format == "both") {
            s << '\n';
        }
        if (o.format != "kv") {
            write_report_table(s, report);
        }
    });
}

void cmd_simulate(const CLI::App& sub, const Options& o, std::ostream& out)
{
    SearchConfig config;
    config.population = o.population;
    config.generations = o.generations;
    config.mutation = o.mutation;
    config.crossover = o.crossover;
    config.seed = o.seed;
    config.validate();
    if (o.features == 0) {
        throw std::invalid_argument("--features must be positive");
    }
    const auto space = make_landscape(o.features, o.landscape_seed);
    const LandscapeOracle truth(space);

    std::unique_ptr<PairwiseRanker> comparator;
    if (o.predictor.empty()) {
        comparator = std::make_unique<OracleComparator>(truth);
    } else {
        std::ifstream in(o.predictor, std::ios::binary);
        if (!in) {
            throw DataError("cannot open " + o.predictor);
        }
        auto predictor = TrainedPredictor::load(in);
        if (predictor.feature_len() != o.features) {
            throw std::invalid_argument("predictor expects " + std::to_string(predictor.feature_len())
                                        + " features but --features is " + std::to_string(o.features));
        }
        comparator = std::make_unique<PredictorRanker>(std::move(predictor), parse_protocol(o.protocol));
    }
    const auto result = evolve(config, space, *comparator, truth);

    auto manifest = manifest_for(sub, o);
    if (!o.predictor.empty()) {
        manifest.dataset_checksum = file_checksum(o.predictor);
    }
    const auto optimum = space.optimum();
    emit(o.out, out, [&](std::ostream& s) {
        manifest.write(s);
        s << "comparator=" << (o.predictor.empty() ? "oracle" : "predictor") << '\n';
        s << "best.genotype=" << join_ints(result.best.genotype) << '\n';
        s << "best.fitness=" << format_real(*result.best.true_fitness) << '\n';
        s << "optimum.genotype=" << join_ints(optimum) << '\n';
        s << "optimum.fitness=" << format_real(space.performance(optimum)) << '\n';
        s << "comparator_calls=" << result.comparator_calls << '\n';
        s << '\n';
        write_generation_log(s, result.log);
    });
}

void cmd_cost(const CLI::App& sub, const Options& o, std::ostream& out)
{
    const auto c = estimate_cost(o.samples, o.batch, o.epochs, o.minutes, o.individuals, o.gpus);
    manifest_for(sub, o).write(out);
    out << "batches_per_epoch=" << c.batches_per_epoch << '\n';
    out << "train_steps_per_individual=" << c.train_steps_per_individual << '\n';
    out << "hours_per_individual=" << format_fixed(c.hours_per_individual, 2) << '\n';
    out << "total_days=" << format_fixed(c.total_days, 2) << '\n';
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Pairwise performance predictors for architecture search", "pairrank"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    Options o;

    auto data = [&](CLI::App* s) { s->add_option("--data", o.data, "Dataset CSV")->required(); };
    auto seed = [&](CLI::App* s) { s->add_option("--seed", o.seed, "Base seed"); };
    auto search = [&](CLI::App* s) {
        s->add_option("--trials", o.trials, "Random-search trials")->check(CLI::PositiveNumber);
        s->add_option("--folds", o.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
    };

    auto* split = app.add_subcommand("split", "Sorted train/test split; writes <out>.train.csv and <out>.test.csv");
    data(split);
    split->add_option("--out", o.out, "Output prefix")->required();
    split->add_option("--fraction", o.fraction, "Training fraction");

    auto* hist = app.add_subcommand("hist", "Performance histogram");
    data(hist);
    hist->add_option("--out", o.out, "Output file (default stdout)");
    hist->add_option("--width", o.width, "Bin width");
    hist->add_option("--origin", o.origin, "Bin origin");

    auto* gen = app.add_subcommand("gen", "Synthetic dataset");
    gen->add_option("--n", o.n, "Record count")->required();
    gen->add_option("--features", o.features, "Feature vector length");
    gen->add_option("--noise", o.noise, "Half-width of uniform performance noise");
    seed(gen);
    gen->add_option("--out", o.out, "Output file (default stdout)");

    auto* tune = app.add_subcommand("tune", "Random search with k-fold cross-validation");
    data(tune);
    tune->add_option("--model", o.model, "svm, gbdt, dtree or rforest");
    tune->add_option("--protocol", o.protocol, "proposed, baseline, g1 or g2");
    search(tune);
    seed(tune);
    tune->add_option("--out", o.out, "Trial history file (default stdout)");

    auto* train = app.add_subcommand("train", "Fit one predictor and save it");
    data(train);
    train->add_option("--model", o.model, "svm, gbdt, dtree or rforest");
    train->add_option("--protocol", o.protocol, "proposed, baseline, g1 or g2");
    train->add_option("--config", o.config, "Hyperparameters as 'key=value ...'; tuned when omitted");
    search(train);
    seed(train);
    train->add_option("--out", o.out, "Predictor file")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Baseline vs proposed on a sorted split");
    auto* ablate = app.add_subcommand("ablate", "Proposed vs the G1 and G2 ablations on a sorted split");
    for (auto* s : {evaluate, ablate}) {
        data(s);
        s->add_option("--models", o.models, "Comma-separated model list");
        search(s);
        seed(s);
        s->add_option("--format", o.format, "kv, table or both");
        s->add_option("--out", o.out, "Report file (default stdout)");
    }

    auto* simulate = app.add_subcommand("simulate", "Evolutionary search on a synthetic landscape");
    simulate->add_option("--features", o.features, "Genotype length");
    simulate->add_option("--landscape-seed", o.landscape_seed, "Seed of the landscape (as used by gen)");
    simulate->add_option("--population", o.population, "Population size");
    simulate->add_option("--generations", o.generations, "Generation count");
    simulate->add_option("--mutation", o.mutation, "Per-gene mutation rate");
    simulate->add_option("--crossover", o.crossover, "Crossover probability");
    simulate->add_option("--predictor", o.predictor, "Predictor file; the true fitness decides when omitted");
    simulate->add_option("--protocol", o.protocol, "Protocol the predictor was trained under");
    seed(simulate);
    simulate->add_option("--out", o.out, "Report file (default stdout)");

    auto* cost = app.add_subcommand("cost", "Cost of fully training every candidate");
    cost->add_option("--samples", o.samples, "Training images");
    cost->add_option("--batch", o.batch, "Batch size");
    cost->add_option("--epochs", o.epochs, "Epochs per individual");
    cost->add_option("--minutes", o.minutes, "Minutes per epoch");
    cost->add_option("--individuals", o.individuals, "Individuals evaluated");
    cost->add_option("--gpus", o.gpus, "GPUs in parallel");

    std::vector<const char*> argv{"pairrank"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (split->parsed()) {
            cmd_split(*split, o, out);
        } else if (hist->parsed()) {
            cmd_hist(*hist, o, out);
        } else if (gen->parsed()) {
            cmd_gen(*gen, o, out);
        } else if (tune->parsed()) {
            cmd_tune(*tune, o, out);
        } else if (train->parsed()) {
            cmd_train(*train, o, out);
        } else if (evaluate->parsed()) {
            cmd_report(*evaluate, o, out, false);
        } else if (ablate->parsed()) {
            cmd_report(*ablate, o, out, true);
        } else if (simulate->parsed()) {
            cmd_simulate(*simulate, o, out);
        } else if (cost->parsed()) {
            cmd_cost(*cost, o, out);
        }
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

} // namespace pairrank
