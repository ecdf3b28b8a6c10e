#include "pairrank/enas_sim.hpp"

#include "pairrank/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace pairrank {

namespace {

FeatureVector random_genotype(const SyntheticLandscape& space, Rng& rng)
{
    FeatureVector g(space.feature_len());
    for (std::size_t k = 0; k < g.size(); ++k) {
        g[k] = std::uniform_int_distribution<std::int32_t>(space.lower[k], space.upper[k])(rng);
    }
    return g;
}

void mutate(FeatureVector& g, const SyntheticLandscape& space, double rate, Rng& rng)
{
    std::bernoulli_distribution hit(rate);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (hit(rng)) {
            g[k] = std::uniform_int_distribution<std::int32_t>(space.lower[k], space.upper[k])(rng);
        }
    }
}

// Median of the measured fitness values; mean of the middle two for even sizes.
double median_of(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

GenerationLog measure_generation(Population& pop, const FitnessOracle& measure, std::size_t generation)
{
    std::vector<double> f;
    f.reserve(pop.size());
    for (auto& ind : pop) {
        ind.true_fitness = measure.fitness(ind.genotype);
        f.push_back(*ind.true_fitness);
    }
    GenerationLog entry;
    entry.generation = generation;
    entry.best = *std::max_element(f.begin(), f.end());
    entry.median = median_of(std::move(f));
    return entry;
}

} // namespace

const Individual& compare(const PairwiseRanker& comparator, const Individual& a, const Individual& b)
{
    return comparator.order(a.genotype, b.genotype) == Ordering::First ? a : b;
}

std::size_t tournament_select(const Population& population, const PairwiseRanker& comparator, std::size_t k,
                              Rng& rng)
{
    if (k < 2 || k > population.size()) {
        throw std::invalid_argument("tournament size " + std::to_string(k) + " needs 2 <= k <= population size "
                                    + std::to_string(population.size()));
    }
    // Partial Fisher-Yates: the first k slots are a uniform draw in order.
    std::vector<std::size_t> idx(population.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> d(i, idx.size() - 1);
        std::swap(idx[i], idx[d(rng)]);
    }
    std::size_t winner = idx[0];
    for (std::size_t i = 1; i < k; ++i) {
        if (comparator.order(population[winner].genotype, population[idx[i]].genotype) == Ordering::Second) {
            winner = idx[i];
        }
    }
    return winner;
}

std::size_t elitism_select(const Population& population, const PairwiseRanker& comparator)
{
    if (population.empty()) {
        throw std::invalid_argument("elitism needs a non-empty population");
    }
    std::size_t winner = 0;
    for (std::size_t i = 1; i < population.size(); ++i) {
        if (comparator.order(population[winner].genotype, population[i].genotype) == Ordering::Second) {
            winner = i;
        }
    }
    return winner;
}

void SearchConfig::validate() const
{
    if (population < 2) {
        throw std::invalid_argument("population must be at least 2");
    }
    if (generations < 1) {
        throw std::invalid_argument("need at least one generation");
    }
    if (!(mutation >= 0.0 && mutation <= 1.0) || !(crossover >= 0.0 && crossover <= 1.0)) {
        throw std::invalid_argument("mutation and crossover rates must lie in [0, 1]");
    }
}

EvolveResult evolve(const SearchConfig& config, const SyntheticLandscape& space, const PairwiseRanker& comparator,
                    const FitnessOracle& measure)
{
    config.validate();
    CountingRanker counted(comparator);
    auto rng = make_rng(config.seed, {0xe70});
    const auto size = config.population;

    Population pop(size);
    for (auto& ind : pop) {
        ind.genotype = random_genotype(space, rng);
    }
    EvolveResult result;
    result.log.push_back(measure_generation(pop, measure, 0));

    std::bernoulli_distribution do_cross(config.crossover);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t gen = 1; gen <= config.generations; ++gen) {
        GenerationLog calls;
        counted.reset();
        Population offspring;
        offspring.reserve(size + 1);
        while (offspring.size() < size) {
            auto a = pop[tournament_select(pop, counted, 2, rng)].genotype;
            auto b = pop[tournament_select(pop, counted, 2, rng)].genotype;
            if (do_cross(rng)) {
                for (std::size_t k = 0; k < a.size(); ++k) {
                    if (coin(rng)) {
                        std::swap(a[k], b[k]);
                    }
                }
            }
            mutate(a, space, config.mutation, rng);
            mutate(b, space, config.mutation, rng);
            offspring.push_back({std::move(a), std::nullopt});
            offspring.push_back({std::move(b), std::nullopt});
        }
        offspring.resize(size);
        calls.selection_calls = counted.calls();

        counted.reset();
        Population pool;
        pool.reserve(2 * size);
        for (auto& ind : pop) {
            pool.push_back({std::move(ind.genotype), std::nullopt});
        }
        for (auto& ind : offspring) {
            pool.push_back(std::move(ind));
        }
        Population next;
        next.reserve(size);
        const auto champion = elitism_select(pool, counted);
        next.push_back(std::move(pool[champion]));
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(champion));
        while (next.size() < size) {
            const auto w = tournament_select(pool, counted, 2, rng);
            next.push_back(std::move(pool[w]));
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(w));
        }
        calls.environmental_calls = counted.calls();
        pop = std::move(next);

        auto entry = measure_generation(pop, measure, gen);
        entry.selection_calls = calls.selection_calls;
        entry.environmental_calls = calls.environmental_calls;
        result.comparator_calls += calls.selection_calls + calls.environmental_calls;
        result.log.push_back(entry);
    }
    counted.reset();
    result.best = pop[elitism_select(pop, counted)];
    result.comparator_calls += counted.calls();
    return result;
}

Individual random_sampling(const SearchConfig& config, const SyntheticLandscape& space,
                           const PairwiseRanker& comparator, const FitnessOracle& measure)
{
    config.validate();
    auto rng = make_rng(config.seed, {0x5a3e});
    Population pool(config.population * (config.generations + 1));
    for (auto& ind : pool) {
        ind.genotype = random_genotype(space, rng);
    }
    auto best = pool[elitism_select(pool, comparator)];
    best.true_fitness = measure.fitness(best.genotype);
    return best;
}

void write_generation_log(std::ostream& out, std::span<const GenerationLog> log)
{
    out << "generation\tbest\tmedian\tselection_calls\tenvironmental_calls\n";
    for (const auto& g : log) {
        out << g.generation << '\t' << format_real(g.best) << '\t' << format_real(g.median) << '\t'
            << g.selection_calls << '\t' << g.environmental_calls << '\n';
    }
}

CostEstimate estimate_cost(std::int64_t samples, std::int64_t batch_size, std::int64_t epochs,
                           double minutes_per_epoch, std::int64_t individuals, std::int64_t gpus)
{
    if (samples <= 0 || batch_size <= 0 || epochs <= 0 || !(minutes_per_epoch > 0.0) || individuals <= 0
        || gpus <= 0) {
        throw std::invalid_argument("cost inputs must all be positive");
    }
    CostEstimate c;
    c.batches_per_epoch = (samples + batch_size - 1) / batch_size;
    c.train_steps_per_individual = epochs * c.batches_per_epoch;
    c.hours_per_individual = static_cast<double>(epochs) * minutes_per_epoch / 60.0;
    c.total_days = c.hours_per_individual * static_cast<double>(individuals) / 24.0 / static_cast<double>(gpus);
    return c;
}

} // namespace pairrank
