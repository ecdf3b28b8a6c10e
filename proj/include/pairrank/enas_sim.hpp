#pragma once

#include "pairrank/dataset.hpp"
#include "pairrank/models.hpp"
#include "pairrank/random.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace pairrank {

struct Individual {
    FeatureVector genotype;
    /// Filled by the measuring oracle for logging only. Selection works on
    /// genotypes through a PairwiseRanker and never looks at this.
    std::optional<double> true_fitness;
};

using Population = std::vector<Individual>;

/// Ground-truth fitness, the thing a real search would pay to train for.
class FitnessOracle {
public:
    virtual ~FitnessOracle() = default;
    virtual double fitness(std::span<const std::int32_t> genotype) const = 0;
};

class LandscapeOracle final : public FitnessOracle {
public:
    explicit LandscapeOracle(const SyntheticLandscape& land) : land_(&land) {}
    double fitness(std::span<const std::int32_t> genotype) const override { return land_->performance(genotype); }

private:
    const SyntheticLandscape* land_;
};

/// Wraps an oracle and counts every read.
class CountingOracle final : public FitnessOracle {
public:
    explicit CountingOracle(const FitnessOracle& inner) : inner_(&inner) {}
    double fitness(std::span<const std::int32_t> genotype) const override
    {
        ++reads_;
        return inner_->fitness(genotype);
    }
    std::size_t reads() const noexcept { return reads_; }
    void reset() noexcept { reads_ = 0; }

private:
    const FitnessOracle* inner_;
    mutable std::size_t reads_ = 0;
};

/// The ORACLE comparator: First when fitness(a) >= fitness(b).
class OracleComparator final : public PairwiseRanker {
public:
    explicit OracleComparator(const FitnessOracle& oracle) : oracle_(&oracle) {}
    Ordering order(std::span<const std::int32_t> a, std::span<const std::int32_t> b) const override
    {
        return oracle_->fitness(a) >= oracle_->fitness(b) ? Ordering::First : Ordering::Second;
    }

private:
    const FitnessOracle* oracle_;
};

/// Counts comparator invocations.
class CountingRanker final : public PairwiseRanker {
public:
    explicit CountingRanker(const PairwiseRanker& inner) : inner_(&inner) {}
    Ordering order(std::span<const std::int32_t> a, std::span<const std::int32_t> b) const override
    {
        ++calls_;
        return inner_->order(a, b);
    }
    std::size_t calls() const noexcept { return calls_; }
    void reset() noexcept { calls_ = 0; }

private:
    const PairwiseRanker* inner_;
    mutable std::size_t calls_ = 0;
};

/// Winner of a and b; a on ties.
const Individual& compare(const PairwiseRanker& comparator, const Individual& a, const Individual& b);

/// Draws k distinct members uniformly and runs a single-elimination chain
/// over them in draw order: k - 1 comparisons. Returns the winner's index.
std::size_t tournament_select(const Population& population, const PairwiseRanker& comparator, std::size_t k,
                              Rng& rng);

/// Left fold of compare over the members: size - 1 comparisons.
std::size_t elitism_select(const Population& population, const PairwiseRanker& comparator);

struct SearchConfig {
    std::size_t population = 20;
    std::size_t generations = 30;
    double mutation = 0.1;
    double crossover = 0.9;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GenerationLog {
    std::size_t generation = 0;
    double best = 0.0;
    double median = 0.0;
    std::size_t selection_calls = 0;
    std::size_t environmental_calls = 0;

    bool operator==(const GenerationLog&) const = default;
};

struct EvolveResult {
    Individual best;
    std::vector<GenerationLog> log;
    std::size_t comparator_calls = 0;
};

/// Generational search inside the landscape bounds. Parents come from binary
/// tournaments, offspring from uniform crossover and uniform-reset mutation.
/// The next population keeps the elitist winner of parents + offspring and
/// fills the rest with binary tournaments drawn without replacement. The
/// answer is the elitist winner of the last population.
///
/// `measure` is read once per member per logged generation (generation 0
/// is the initial population) and nowhere else.
EvolveResult evolve(const SearchConfig& config, const SyntheticLandscape& space, const PairwiseRanker& comparator,
                    const FitnessOracle& measure);

/// Equal-budget reference: population * (generations + 1) uniform
/// genotypes, the comparator's elitist pick among them, measured once.
Individual random_sampling(const SearchConfig& config, const SyntheticLandscape& space,
                           const PairwiseRanker& comparator, const FitnessOracle& measure);

void write_generation_log(std::ostream& out, std::span<const GenerationLog> log);

struct CostEstimate {
    std::int64_t batches_per_epoch = 0;
    std::int64_t train_steps_per_individual = 0;
    double hours_per_individual = 0.0;
    double total_days = 0.0;
};

/// What fully training every candidate would cost. Throws
/// std::invalid_argument on any non-positive input.
CostEstimate estimate_cost(std::int64_t samples, std::int64_t batch_size, std::int64_t epochs,
                           double minutes_per_epoch, std::int64_t individuals, std::int64_t gpus);

} // namespace pairrank
