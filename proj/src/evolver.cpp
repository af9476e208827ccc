#include "flnip/evolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "flnip/errors.hpp"
#include "flnip/metrics.hpp"
#include "flnip/parallel.hpp"

namespace flnip {

namespace {

double uniform01(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Category sizes keyed by label id (labels must be >= 0).
std::vector<int> category_sizes(std::span<const int> labels) {
    int max_label = -1;
    for (int l : labels) {
        if (l < 0) {
            throw Error("labels must be nonnegative");
        }
        max_label = std::max(max_label, l);
    }
    std::vector<int> sizes(static_cast<std::size_t>(max_label) + 1, 0);
    for (int l : labels) {
        ++sizes[l];
    }
    for (int s : sizes) {
        if (s == 0) {
            throw EmptyCategory("a category in 0..max(label) has no records");
        }
    }
    return sizes;
}

} // namespace

void GAConfig::validate() const {
    if (population_size < 2) {
        throw Error("population size must be at least 2");
    }
    if (generations < 1) {
        throw Error("generation count must be at least 1");
    }
    if (mutation_rate < 0.0 || mutation_rate > 1.0 || crossover_rate < 0.0 ||
        crossover_rate > 1.0) {
        throw Error("rates must lie in [0,1]");
    }
    if (elite_count < 0 || elite_count >= population_size) {
        throw Error("elite count must lie in [0, population size)");
    }
    if (fixed_top_k < 0) {
        throw Error("fixed top-k must be nonnegative");
    }
}

DistanceTensor precompute_tensor(std::span<const FeatureRecord> records, int threads) {
    const std::size_t n = records.size();
    if (n < 2) {
        throw TooFewRecords("distance tensor needs at least 2 records, got " +
                            std::to_string(n));
    }
    for (const FeatureRecord& r : records) {
        if (r.feature.size() != kFeatureLength) {
            throw LengthMismatch("record '" + r.id + "' has feature length " +
                                 std::to_string(r.feature.size()));
        }
    }
    DistanceTensor t;
    t.count = n;
    for (auto& m : t.scales) {
        m.assign(n * n, 0.0);
    }
    parallel_for(n, threads, [&](std::size_t a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            for (std::size_t j = 0; j < kScaleBlocks; ++j) {
                const double d = block_distance(
                    std::span<const double>(records[a].feature).subspan(j * kBlockBins, kBlockBins),
                    std::span<const double>(records[b].feature).subspan(j * kBlockBins, kBlockBins),
                    MetricId::d1);
                t.scales[j][a * n + b] = d;
                t.scales[j][b * n + a] = d;
            }
        }
    });
    return t;
}

double fitness(const WeightChromosome& chromosome, const DistanceTensor& tensor,
               std::span<const int> labels, const GAConfig& config) {
    const std::size_t n = tensor.count;
    if (labels.size() != n) {
        throw Error("label count " + std::to_string(labels.size()) +
                    " does not match tensor size " + std::to_string(n));
    }
    const std::vector<int> sizes = category_sizes(labels);

    std::vector<double> precision_sum(sizes.size(), 0.0);
    std::vector<double> scores(n);
    std::vector<std::size_t> order(n);

    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < kScaleBlocks; ++j) {
                s += chromosome.genes[j] * tensor.at(j, q, i);
            }
            scores[i] = s;
        }
        order.resize(0);
        for (std::size_t i = 0; i < n; ++i) {
            if (config.include_self || i != q) {
                order.push_back(i);
            }
        }
        const int k = config.fixed_top_k > 0 ? config.fixed_top_k : sizes[labels[q]];
        const std::size_t take = std::min<std::size_t>(order.size(), k);
        // Ties resolve to insertion order.
        std::partial_sort(order.begin(), order.begin() + take, order.end(),
                          [&scores](std::size_t a, std::size_t b) {
                              return scores[a] != scores[b] ? scores[a] < scores[b] : a < b;
                          });
        int relevant = 0;
        for (std::size_t r = 0; r < take; ++r) {
            if (labels[order[r]] == labels[q]) {
                ++relevant;
            }
        }
        precision_sum[labels[q]] += static_cast<double>(relevant) / k;
    }

    double total = 0.0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        total += precision_sum[c] / sizes[c];
    }
    return total / static_cast<double>(sizes.size());
}

std::size_t roulette_select(std::span<const double> fitnesses, std::mt19937_64& rng) {
    if (fitnesses.empty()) {
        throw EmptyPopulation("cannot select from an empty population");
    }
    double total = 0.0;
    for (double f : fitnesses) {
        if (!(f >= 0.0)) {
            throw Error("fitness values must be nonnegative");
        }
        total += f;
    }
    const double u = uniform01(rng);
    if (total <= 0.0) {
        return std::min<std::size_t>(static_cast<std::size_t>(u * fitnesses.size()),
                                     fitnesses.size() - 1);
    }
    const double target = u * total;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < fitnesses.size(); ++i) {
        cumulative += fitnesses[i];
        if (target < cumulative) {
            return i;
        }
    }
    return fitnesses.size() - 1;
}

std::pair<WeightChromosome, WeightChromosome> crossover_segments(
    const WeightChromosome& p1, const WeightChromosome& p2, int cut1, int cut2) {
    if (cut1 < 1 || cut2 > 3 || cut1 >= cut2) {
        throw Error("cut points must satisfy 1 <= cut1 < cut2 <= 3");
    }
    WeightChromosome c1 = p1;
    WeightChromosome c2 = p2;
    for (int i = cut1; i < cut2; ++i) {
        std::swap(c1.genes[i], c2.genes[i]);
    }
    return {c1, c2};
}

std::pair<WeightChromosome, WeightChromosome> two_point_crossover(
    const WeightChromosome& p1, const WeightChromosome& p2, std::mt19937_64& rng) {
    const int first = std::uniform_int_distribution<int>(1, 3)(rng);
    int second = std::uniform_int_distribution<int>(1, 2)(rng);
    if (second >= first) {
        ++second;  // uniform over the two remaining boundaries
    }
    return crossover_segments(p1, p2, std::min(first, second), std::max(first, second));
}

WeightChromosome mutate(const WeightChromosome& c, double rate, std::mt19937_64& rng) {
    WeightChromosome out = c;
    for (double& gene : out.genes) {
        if (uniform01(rng) < rate) {
            gene = uniform01(rng);
        }
    }
    return out;
}

EvolveResult evolve(const DistanceTensor& tensor, std::span<const int> labels,
                    const GAConfig& config, std::span<const WeightChromosome> initial) {
    config.validate();
    std::mt19937_64 rng(config.rng_seed);

    std::vector<WeightChromosome> population;
    if (!initial.empty()) {
        if (initial.size() != static_cast<std::size_t>(config.population_size)) {
            throw Error("initial population size does not match config");
        }
        population.assign(initial.begin(), initial.end());
    } else {
        population.resize(config.population_size);
        for (WeightChromosome& c : population) {
            for (double& g : c.genes) {
                g = uniform01(rng);
            }
        }
    }

    EvolveResult result;
    result.best_fitness = -1.0;
    std::vector<double> fits(population.size());
    std::vector<std::size_t> order(population.size());

    for (int gen = 0; gen < config.generations; ++gen) {
        parallel_for(population.size(), config.threads, [&](std::size_t i) {
            fits[i] = fitness(population[i], tensor, labels, config);
        });

        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&fits](std::size_t a, std::size_t b) {
            return fits[a] != fits[b] ? fits[a] > fits[b] : a < b;
        });
        result.history.push_back(fits[order[0]]);
        if (fits[order[0]] > result.best_fitness) {
            result.best_fitness = fits[order[0]];
            result.best = population[order[0]];
        }

        if (gen + 1 == config.generations) {
            break;
        }

        std::vector<WeightChromosome> next;
        next.reserve(population.size());
        for (int e = 0; e < config.elite_count; ++e) {
            next.push_back(population[order[e]]);
        }
        while (next.size() < population.size()) {
            const WeightChromosome& p1 = population[roulette_select(fits, rng)];
            const WeightChromosome& p2 = population[roulette_select(fits, rng)];
            auto [c1, c2] = uniform01(rng) < config.crossover_rate
                                ? two_point_crossover(p1, p2, rng)
                                : std::make_pair(p1, p2);
            next.push_back(mutate(c1, config.mutation_rate, rng));
            if (next.size() < population.size()) {
                next.push_back(mutate(c2, config.mutation_rate, rng));
            }
        }
        population = std::move(next);
    }
    return result;
}

std::string weights_to_text(const std::array<double, 4>& weights) {
    std::string out = "FLNIPW 1\n";
    char buf[64];
    for (double w : weights) {
        std::snprintf(buf, sizeof(buf), "%.9g\n", w);
        out += buf;
    }
    return out;
}

std::array<double, 4> weights_from_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string header;
    std::getline(in, header);
    if (header != "FLNIPW 1") {
        throw BadMagic("weights file must start with 'FLNIPW 1'");
    }
    std::array<double, 4> weights{};
    for (double& w : weights) {
        if (!(in >> w) || !std::isfinite(w) || w < 0.0) {
            throw CorruptRecord("weights file must hold 4 nonnegative finite values");
        }
    }
    return weights;
}

} // namespace flnip
