#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flnip/patterns.hpp"

namespace flnip {

// A candidate set of four fusion weights, each gene in [0,1].
struct WeightChromosome {
    std::array<double, 4> genes{};

    bool operator==(const WeightChromosome&) const = default;
};

struct GAConfig {
    int population_size = 20;
    int generations = 50;
    double mutation_rate = 0.01;
    double crossover_rate = 0.9;
    int elite_count = 1;
    std::uint64_t rng_seed = 42;
    // 0 retrieves per query as many images as its category holds; a
    // positive value fixes the cutoff instead.
    int fixed_top_k = 0;
    // The query itself stays in its own ranking (and counts as relevant)
    // unless this is cleared.
    bool include_self = true;
    int threads = 1;

    void validate() const;
};

// Per scale block, the full matrix of pairwise d1 block distances between
// database records. Fitness evaluation then reduces to weighted sums of
// stored entries.
struct DistanceTensor {
    std::size_t count = 0;
    std::array<std::vector<double>, kScaleBlocks> scales;

    double at(std::size_t scale, std::size_t a, std::size_t b) const {
        return scales[scale][a * count + b];
    }
};

DistanceTensor precompute_tensor(std::span<const FeatureRecord> records, int threads = 1);

// Mean over categories of the mean retrieval precision of their members,
// ranking every record against the whole collection with the chromosome's
// weights. Always in [0,1]. Uniformly rescaling the genes rescales every
// score without reordering anything, so fitness is constant along rays
// from the origin; the search effectively explores a projective space.
double fitness(const WeightChromosome& chromosome, const DistanceTensor& tensor,
               std::span<const int> labels, const GAConfig& config);

// Samples an index with probability proportional to its fitness; uniform
// when every fitness is zero.
std::size_t roulette_select(std::span<const double> fitnesses, std::mt19937_64& rng);

// Exchanges the gene segment between two cut points drawn from the three
// interior gene boundaries.
std::pair<WeightChromosome, WeightChromosome> two_point_crossover(
    const WeightChromosome& p1, const WeightChromosome& p2, std::mt19937_64& rng);

// Deterministic core of two_point_crossover; cut points are 1-based gene
// boundaries with cut1 < cut2.
std::pair<WeightChromosome, WeightChromosome> crossover_segments(
    const WeightChromosome& p1, const WeightChromosome& p2, int cut1, int cut2);

// Each gene is independently redrawn uniformly from [0,1] with the given
// probability.
WeightChromosome mutate(const WeightChromosome& c, double rate, std::mt19937_64& rng);

struct EvolveResult {
    WeightChromosome best;
    double best_fitness = 0.0;
    std::vector<double> history;  // best fitness per generation
};

// Roulette selection, two-point crossover, uniform-redraw mutation, with
// the top elite_count chromosomes copied unchanged each generation. All
// stochastic decisions run on one serial RNG stream; fitness evaluation
// may be parallel without perturbing results.
EvolveResult evolve(const DistanceTensor& tensor, std::span<const int> labels,
                    const GAConfig& config,
                    std::span<const WeightChromosome> initial = {});

// Weights file: header line "FLNIPW 1", then one weight per line with
// 9 significant digits.
std::string weights_to_text(const std::array<double, 4>& weights);
std::array<double, 4> weights_from_text(std::string_view text);

} // namespace flnip
