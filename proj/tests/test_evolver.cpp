#include <doctest.h>

#include <algorithm>
#include <random>

#include "flnip/errors.hpp"
#include "flnip/evolver.hpp"
#include "flnip/metrics.hpp"
#include "test_support.hpp"

using namespace flnip;

namespace {

std::vector<FeatureRecord> random_records(std::mt19937_64& rng, int n) {
    std::vector<FeatureRecord> recs;
    for (int i = 0; i < n; ++i) {
        recs.push_back(testsup::make_record("r" + std::to_string(i), "c",
                                            testsup::random_feature(rng)));
    }
    return recs;
}

// Class-discriminative scale 0 (distance 0 within class, 1 across) and
// pure-noise scales 1..3.
DistanceTensor toy_tensor(std::mt19937_64& rng, const std::vector<int>& labels) {
    const std::size_t n = labels.size();
    DistanceTensor t;
    t.count = n;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& m : t.scales) {
        m.assign(n * n, 0.0);
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            t.scales[0][a * n + b] = t.scales[0][b * n + a] =
                labels[a] == labels[b] ? 0.0 : 1.0;
            for (int j = 1; j < 4; ++j) {
                const double v = u(rng);
                t.scales[j][a * n + b] = t.scales[j][b * n + a] = v;
            }
        }
    }
    return t;
}

} // namespace

TEST_CASE("distance tensor of identical records is zero") {
    std::mt19937_64 rng(101);
    const std::vector<double> f = testsup::random_feature(rng);
    const std::vector<FeatureRecord> recs = {testsup::make_record("a", "c", f),
                                             testsup::make_record("b", "c", f)};
    const DistanceTensor t = precompute_tensor(recs);
    for (const auto& m : t.scales) {
        for (double v : m) {
            CHECK(v == 0.0);
        }
    }
}

TEST_CASE("distance tensor is symmetric with zero diagonal") {
    std::mt19937_64 rng(103);
    const auto recs = random_records(rng, 5);
    const DistanceTensor t = precompute_tensor(recs);
    for (std::size_t j = 0; j < kScaleBlocks; ++j) {
        for (std::size_t a = 0; a < 5; ++a) {
            CHECK(t.at(j, a, a) == 0.0);
            for (std::size_t b = 0; b < 5; ++b) {
                CHECK(t.at(j, a, b) == t.at(j, b, a));
                CHECK(t.at(j, a, b) >= 0.0);
            }
        }
    }
}

TEST_CASE("tensor entries equal direct block distances") {
    std::mt19937_64 rng(107);
    const auto recs = random_records(rng, 5);
    const DistanceTensor t = precompute_tensor(recs);
    for (std::size_t j = 0; j < kScaleBlocks; ++j) {
        for (std::size_t a = 0; a < 5; ++a) {
            for (std::size_t b = 0; b < 5; ++b) {
                const double direct = block_distance(
                    std::span<const double>(recs[a].feature.data() + j * kBlockBins,
                                            kBlockBins),
                    std::span<const double>(recs[b].feature.data() + j * kBlockBins,
                                            kBlockBins),
                    MetricId::d1);
                CHECK(t.at(j, a, b) == direct);
            }
        }
    }
}

TEST_CASE("tensor needs at least two records") {
    std::mt19937_64 rng(109);
    const auto recs = random_records(rng, 1);
    CHECK_THROWS_AS(precompute_tensor(recs), TooFewRecords);
}

TEST_CASE("orthogonal classes give perfect fitness") {
    const std::vector<FeatureRecord> recs = {
        testsup::make_record("a0", "a", testsup::one_hot_feature(0)),
        testsup::make_record("a1", "a", testsup::one_hot_feature(0)),
        testsup::make_record("b0", "b", testsup::one_hot_feature(1)),
        testsup::make_record("b1", "b", testsup::one_hot_feature(1)),
    };
    const DistanceTensor t = precompute_tensor(recs);
    const std::vector<int> labels = {0, 0, 1, 1};
    GAConfig config;
    CHECK(fitness({{0.4, 0.1, 0.9, 0.2}}, t, labels, config) == 1.0);
    CHECK(fitness({{1.0, 1.0, 1.0, 1.0}}, t, labels, config) == 1.0);
}

TEST_CASE("identical records rank by insertion order") {
    // With every distance zero the ranking is 0,1,2,3 for all queries.
    // Labels a,b,a,b: each query grabs records 0 and 1, one relevant,
    // so every precision is 1/2.
    std::mt19937_64 rng(113);
    const std::vector<double> f = testsup::random_feature(rng);
    std::vector<FeatureRecord> recs;
    const char* cats[] = {"a", "b", "a", "b"};
    for (int i = 0; i < 4; ++i) {
        recs.push_back(testsup::make_record("r" + std::to_string(i), cats[i], f));
    }
    const DistanceTensor t = precompute_tensor(recs);
    const std::vector<int> labels = {0, 1, 0, 1};
    GAConfig config;
    CHECK(fitness({{1.0, 1.0, 1.0, 1.0}}, t, labels, config) == 0.5);
}

TEST_CASE("fitness is invariant under uniform chromosome scaling") {
    std::mt19937_64 rng(127);
    const auto recs = random_records(rng, 8);
    const DistanceTensor t = precompute_tensor(recs);
    const std::vector<int> labels = {0, 0, 1, 1, 2, 2, 3, 3};
    GAConfig config;
    CHECK(fitness({{0.5, 0.5, 0.5, 0.5}}, t, labels, config) ==
          fitness({{1.0, 1.0, 1.0, 1.0}}, t, labels, config));
}

TEST_CASE("roulette selection is proportional to fitness") {
    std::mt19937_64 rng(131);

    const std::array<double, 4> flat = {1.0, 1.0, 1.0, 1.0};
    std::array<int, 4> counts{};
    for (int i = 0; i < 10000; ++i) {
        ++counts[roulette_select(flat, rng)];
    }
    for (int c : counts) {
        CHECK(std::abs(c / 10000.0 - 0.25) < 0.02);
    }

    const std::array<double, 2> skewed = {1.0, 3.0};
    std::array<int, 2> counts2{};
    for (int i = 0; i < 10000; ++i) {
        ++counts2[roulette_select(skewed, rng)];
    }
    CHECK(std::abs(counts2[0] / 10000.0 - 0.25) < 0.02);
    CHECK(std::abs(counts2[1] / 10000.0 - 0.75) < 0.02);

    const std::array<double, 3> degenerate = {0.0, 0.0, 5.0};
    for (int i = 0; i < 100; ++i) {
        CHECK(roulette_select(degenerate, rng) == 2);
    }
}

TEST_CASE("all-zero fitness falls back to uniform selection") {
    std::mt19937_64 rng(137);
    const std::array<double, 4> zeros = {0.0, 0.0, 0.0, 0.0};
    std::array<int, 4> counts{};
    for (int i = 0; i < 10000; ++i) {
        ++counts[roulette_select(zeros, rng)];
    }
    for (int c : counts) {
        CHECK(std::abs(c / 10000.0 - 0.25) < 0.02);
    }
    CHECK_THROWS_AS(roulette_select({}, rng), EmptyPopulation);
}

TEST_CASE("two-point crossover exchanges the middle segment") {
    const WeightChromosome p1{{0.1, 0.2, 0.3, 0.4}};
    const WeightChromosome p2{{0.5, 0.6, 0.7, 0.8}};
    const auto [c1, c2] = crossover_segments(p1, p2, 1, 3);
    CHECK(c1.genes == std::array<double, 4>{0.1, 0.6, 0.7, 0.4});
    CHECK(c2.genes == std::array<double, 4>{0.5, 0.2, 0.3, 0.8});
    CHECK_THROWS_AS(crossover_segments(p1, p2, 2, 2), Error);
}

TEST_CASE("crossover of identical parents reproduces them") {
    std::mt19937_64 rng(139);
    const WeightChromosome p{{0.3, 0.5, 0.7, 0.9}};
    for (int i = 0; i < 50; ++i) {
        const auto [c1, c2] = two_point_crossover(p, p, rng);
        CHECK(c1 == p);
        CHECK(c2 == p);
    }
}

TEST_CASE("crossover permutes genes without inventing values") {
    std::mt19937_64 rng(149);
    const WeightChromosome p1{{0.1, 0.2, 0.3, 0.4}};
    const WeightChromosome p2{{0.5, 0.6, 0.7, 0.8}};
    for (int i = 0; i < 200; ++i) {
        const auto [c1, c2] = two_point_crossover(p1, p2, rng);
        for (int g = 0; g < 4; ++g) {
            const bool straight = c1.genes[g] == p1.genes[g] && c2.genes[g] == p2.genes[g];
            const bool swapped = c1.genes[g] == p2.genes[g] && c2.genes[g] == p1.genes[g];
            CHECK((straight || swapped));
        }
    }
}

TEST_CASE("mutation at rate zero is the identity") {
    std::mt19937_64 rng(151);
    const WeightChromosome c{{0.1, 0.4, 0.6, 0.9}};
    CHECK(mutate(c, 0.0, rng) == c);
}

TEST_CASE("mutation at rate one redraws every gene from the stream") {
    std::mt19937_64 rng(157);
    std::mt19937_64 shadow = rng;
    const WeightChromosome c{{0.1, 0.4, 0.6, 0.9}};
    const WeightChromosome m = mutate(c, 1.0, rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int g = 0; g < 4; ++g) {
        u(shadow);  // the per-gene coin flip
        CHECK(m.genes[g] == u(shadow));
    }
}

TEST_CASE("mutation flip rate matches its probability") {
    std::mt19937_64 rng(163);
    const WeightChromosome c{{0.5, 0.5, 0.5, 0.5}};
    long flips = 0;
    const long trials = 250000;  // 1e6 gene draws
    for (long i = 0; i < trials; ++i) {
        const WeightChromosome m = mutate(c, 0.01, rng);
        for (int g = 0; g < 4; ++g) {
            if (m.genes[g] != c.genes[g]) {
                ++flips;
            }
        }
    }
    const double rate = double(flips) / (4.0 * trials);
    CHECK(rate > 0.009);
    CHECK(rate < 0.011);
}

TEST_CASE("a clone population without mutation is a fixed point") {
    std::mt19937_64 rng(167);
    const auto recs = random_records(rng, 6);
    const DistanceTensor t = precompute_tensor(recs);
    const std::vector<int> labels = {0, 0, 0, 1, 1, 1};

    GAConfig config;
    config.population_size = 6;
    config.generations = 10;
    config.mutation_rate = 0.0;
    const WeightChromosome clone{{0.25, 0.5, 0.75, 1.0}};
    const std::vector<WeightChromosome> initial(6, clone);

    const EvolveResult r = evolve(t, labels, config, initial);
    CHECK(r.best == clone);
    for (double f : r.history) {
        CHECK(f == r.history.front());
    }
}

TEST_CASE("elitist history is nondecreasing and genes stay in the box") {
    std::mt19937_64 rng(173);
    const auto recs = random_records(rng, 10);
    const DistanceTensor t = precompute_tensor(recs);
    const std::vector<int> labels = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};

    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        GAConfig config;
        config.population_size = 8;
        config.generations = 20;
        config.rng_seed = seed;
        const EvolveResult r = evolve(t, labels, config);
        REQUIRE(r.history.size() == 20);
        for (std::size_t g = 1; g < r.history.size(); ++g) {
            CHECK(r.history[g] >= r.history[g - 1]);
        }
        for (double gene : r.best.genes) {
            CHECK(gene >= 0.0);
            CHECK(gene <= 1.0);
        }
        CHECK(r.best_fitness >= 0.0);
        CHECK(r.best_fitness <= 1.0);
    }
}

TEST_CASE("evolution is deterministic and thread-count independent") {
    std::mt19937_64 rng(179);
    const auto recs = random_records(rng, 8);
    const DistanceTensor t = precompute_tensor(recs);
    const std::vector<int> labels = {0, 0, 1, 1, 2, 2, 3, 3};

    GAConfig config;
    config.population_size = 10;
    config.generations = 15;
    config.rng_seed = 99;

    const EvolveResult a = evolve(t, labels, config);
    const EvolveResult b = evolve(t, labels, config);
    CHECK(a.best == b.best);
    CHECK(a.history == b.history);

    config.threads = 4;
    const EvolveResult c = evolve(t, labels, config);
    CHECK(a.best == c.best);
    CHECK(a.history == c.history);
}

TEST_CASE("the discriminative scale wins the weight race") {
    std::mt19937_64 noise_rng(181);
    std::vector<int> labels;
    for (int c = 0; c < 4; ++c) {
        for (int s = 0; s < 5; ++s) {
            labels.push_back(c);
        }
    }
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const DistanceTensor t = toy_tensor(noise_rng, labels);
        GAConfig config;
        config.rng_seed = seed;
        const EvolveResult r = evolve(t, labels, config);
        const auto max_it = std::max_element(r.best.genes.begin(), r.best.genes.end());
        if (max_it == r.best.genes.begin()) {
            ++wins;
        }
    }
    CHECK(wins >= 18);
}

TEST_CASE("weights files round trip and reject corruption") {
    const std::array<double, 4> w = {0.123456789, 0.0, 1.0, 0.5};
    const std::string text = weights_to_text(w);
    CHECK(text.substr(0, 9) == "FLNIPW 1\n");
    CHECK(weights_from_text(text) == w);

    CHECK_THROWS_AS(weights_from_text("FLNIPW 2\n1\n1\n1\n1\n"), BadMagic);
    CHECK_THROWS_AS(weights_from_text("FLNIPW 1\n1\n1\n1\n"), CorruptRecord);
    CHECK_THROWS_AS(weights_from_text("FLNIPW 1\n1\n1\n-2\n1\n"), CorruptRecord);
}

TEST_CASE("config validation catches bad parameters") {
    GAConfig config;
    config.population_size = 1;
    CHECK_THROWS_AS(config.validate(), Error);
    config = GAConfig{};
    config.mutation_rate = 1.5;
    CHECK_THROWS_AS(config.validate(), Error);
    config = GAConfig{};
    config.elite_count = 20;
    CHECK_THROWS_AS(config.validate(), Error);
}
