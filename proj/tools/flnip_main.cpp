// Command-line frontend: indexing, weight training, querying, evaluation,
// synthetic corpus generation and timing. Machine-readable output goes to
// stdout; configuration echoes and diagnostics go to stderr.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "flnip/datasets.hpp"
#include "flnip/errors.hpp"
#include "flnip/evolver.hpp"
#include "flnip/gaussian.hpp"
#include "flnip/metrics.hpp"
#include "flnip/retrieval.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::vector<double> parse_sigma_list(const std::string& list) {
    std::vector<double> sigmas;
    std::size_t start = 0;
    while (start <= list.size()) {
        const std::size_t comma = list.find(',', start);
        const std::string token =
            list.substr(start, comma == std::string::npos ? comma : comma - start);
        try {
            std::size_t used = 0;
            const double v = std::stod(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
            sigmas.push_back(v);
        } catch (const std::exception&) {
            throw flnip::Error("bad sigma token '" + token + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return sigmas;
}

flnip::Labeling parse_labeling(const std::string& mode) {
    if (mode == "folder") return flnip::Labeling::folder_per_class;
    if (mode == "prefix") return flnip::Labeling::filename_prefix;
    throw flnip::Error("labeling must be 'folder' or 'prefix', got '" + mode + "'");
}

void echo_config(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::fputs("config:", stderr);
    for (const auto& [k, v] : kv) {
        std::fprintf(stderr, " %s=%s", k.c_str(), v.c_str());
    }
    std::fputc('\n', stderr);
}

void report_failures(const std::vector<std::string>& failures) {
    for (const std::string& f : failures) {
        std::fprintf(stderr, "skipped: %s\n", f.c_str());
    }
}

flnip::WeightVector load_weight_vector(const std::string& path) {
    const auto w = flnip::weights_from_text(flnip::read_binary_file(path));
    return flnip::WeightVector(w);
}

int default_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

struct IndexArgs {
    std::string input;
    std::string labeling = "folder";
    int tile = 0;
    std::string sigmas = "0.5,0.8,1.0";
    std::string output;
    int threads = default_threads();
};

int cmd_index(const IndexArgs& a) {
    echo_config({{"command", "index"},
                 {"input", a.input},
                 {"labeling", a.labeling},
                 {"tile", std::to_string(a.tile)},
                 {"sigmas", a.sigmas},
                 {"output", a.output},
                 {"threads", std::to_string(a.threads)}});
    const flnip::ScaleBank bank(parse_sigma_list(a.sigmas));
    if (bank.sigmas.size() != 3) {
        throw flnip::Error("--sigmas must list exactly 3 scales");
    }
    flnip::CorpusSpec spec{a.input, parse_labeling(a.labeling), a.tile};
    std::vector<std::string> failures;
    const auto corpus = flnip::load_corpus(spec, &failures, a.threads);
    report_failures(failures);

    const auto start = Clock::now();
    const flnip::FeatureDatabase db = flnip::build_index(corpus, bank, a.threads);
    const double per_image = seconds_since(start) / static_cast<double>(corpus.size());

    flnip::write_binary_file(a.output, flnip::save_db(db));
    std::printf("records\t%zu\n", db.size());
    std::printf("feature_extraction_time\t%s\n", g9(per_image).c_str());
    return 0;
}

struct TrainArgs {
    std::string db;
    std::string output;
    int population = 20;
    int generations = 50;
    double mutation = 0.01;
    double crossover = 0.9;
    int elite = 1;
    std::uint64_t seed = 42;
    int top_k = 0;
    bool exclude_self = false;
    int threads = default_threads();
};

int cmd_train(const TrainArgs& a) {
    echo_config({{"command", "train"},
                 {"db", a.db},
                 {"output", a.output},
                 {"pop", std::to_string(a.population)},
                 {"gens", std::to_string(a.generations)},
                 {"mutation", g9(a.mutation)},
                 {"crossover", g9(a.crossover)},
                 {"elite", std::to_string(a.elite)},
                 {"seed", std::to_string(a.seed)},
                 {"top-k", std::to_string(a.top_k)},
                 {"exclude-self", a.exclude_self ? "true" : "false"},
                 {"threads", std::to_string(a.threads)}});
    const flnip::FeatureDatabase db = flnip::load_db(flnip::read_binary_file(a.db));

    std::vector<int> labels(db.size());
    for (std::size_t c = 0; c < db.categories.size(); ++c) {
        for (std::size_t idx : db.categories[c].second) {
            labels[idx] = static_cast<int>(c);
        }
    }
    const flnip::DistanceTensor tensor = flnip::precompute_tensor(db.records, a.threads);

    flnip::GAConfig config;
    config.population_size = a.population;
    config.generations = a.generations;
    config.mutation_rate = a.mutation;
    config.crossover_rate = a.crossover;
    config.elite_count = a.elite;
    config.rng_seed = a.seed;
    config.fixed_top_k = a.top_k;
    config.include_self = !a.exclude_self;
    config.threads = a.threads;

    const flnip::EvolveResult result = flnip::evolve(tensor, labels, config);
    flnip::write_binary_file(a.output, flnip::weights_to_text(result.best.genes));
    for (std::size_t gen = 0; gen < result.history.size(); ++gen) {
        std::printf("%zu\t%s\n", gen, g9(result.history[gen]).c_str());
    }
    std::printf("best_fitness\t%s\n", g9(result.best_fitness).c_str());
    return 0;
}

struct QueryArgs {
    std::string db;
    std::string image;
    std::string weights;
    int top_k = 10;
};

int cmd_query(const QueryArgs& a) {
    echo_config({{"command", "query"},
                 {"db", a.db},
                 {"image", a.image},
                 {"weights", a.weights.empty() ? "(uniform)" : a.weights},
                 {"top-k", std::to_string(a.top_k)}});
    if (a.top_k < 1) {
        throw flnip::Error("top-k must be at least 1");
    }
    const flnip::FeatureDatabase db = flnip::load_db(flnip::read_binary_file(a.db));
    const flnip::WeightVector w = a.weights.empty() ? flnip::WeightVector::uniform()
                                                    : load_weight_vector(a.weights);
    const flnip::GrayImage img = flnip::decode_pgm(flnip::read_binary_file(a.image));
    const flnip::ScaleBank bank(db.sigmas);
    // Canonicalized to the database file precision: an indexed image then
    // matches its own record at distance exactly 0.
    const flnip::FeatureRecord q =
        flnip::canonicalize_precision(flnip::extract_feature(img, bank, a.image, ""));

    const auto start = Clock::now();
    const flnip::QueryResult result =
        flnip::query(db, q, w, static_cast<std::size_t>(a.top_k));
    std::fprintf(stderr, "retrieval_time\t%s\n", g9(seconds_since(start)).c_str());

    for (std::size_t r = 0; r < result.ranked.size(); ++r) {
        const flnip::RankedMatch& m = result.ranked[r];
        std::printf("%zu\t%s\t%s\t%s\n", r + 1, m.id.c_str(), m.category.c_str(),
                    g9(m.distance).c_str());
    }
    return 0;
}

struct EvaluateArgs {
    std::string db;
    std::string weights;
    bool uniform = false;
    bool raw_only = false;
    std::string n_list;
    std::string metric = "d1";
    bool exclude_self = false;
    int threads = default_threads();
};

int cmd_evaluate(const EvaluateArgs& a) {
    echo_config({{"command", "evaluate"},
                 {"db", a.db},
                 {"weights", a.raw_only ? "(raw-only)"
                                        : a.weights.empty() ? "(uniform)" : a.weights},
                 {"n-list", a.n_list},
                 {"metric", a.metric},
                 {"exclude-self", a.exclude_self ? "true" : "false"},
                 {"threads", std::to_string(a.threads)}});
    const auto metric = flnip::metric_from_name(a.metric);
    if (!metric) {
        throw flnip::Error("unknown metric '" + a.metric + "'");
    }
    const flnip::FeatureDatabase db = flnip::load_db(flnip::read_binary_file(a.db));

    flnip::WeightVector w = flnip::WeightVector::uniform();
    if (a.raw_only) {
        w = flnip::WeightVector::raw_only();
    } else if (!a.weights.empty()) {
        w = load_weight_vector(a.weights);
    }

    std::vector<int> n_values;
    for (double v : parse_sigma_list(a.n_list)) {
        if (v < 1.0 || v != std::floor(v)) {
            throw flnip::Error("--n-list entries must be positive integers");
        }
        n_values.push_back(static_cast<int>(v));
    }

    flnip::EvalOptions options;
    options.exclude_self = a.exclude_self;
    options.metric = *metric;
    options.threads = a.threads;
    const flnip::EvalReport report = flnip::evaluate(db, w, n_values, options);

    for (std::size_t i = 0; i < report.n_values.size(); ++i) {
        std::printf("%d\t%s\t%s\t%s\n", report.n_values[i],
                    g9(report.precision_total[i]).c_str(),
                    g9(report.recall_total[i]).c_str(), g9(report.f_score[i]).c_str());
    }
    std::printf("ARR\t%s\n", g9(report.arr).c_str());
    return 0;
}

struct SynthArgs {
    int classes = 10;
    int samples = 20;
    int size = 64;
    double noise = 0.0;
    std::uint64_t seed = 42;
    std::string output;
};

int cmd_synth(const SynthArgs& a) {
    echo_config({{"command", "synth"},
                 {"classes", std::to_string(a.classes)},
                 {"samples", std::to_string(a.samples)},
                 {"size", std::to_string(a.size)},
                 {"noise", g9(a.noise)},
                 {"seed", std::to_string(a.seed)},
                 {"output", a.output}});
    flnip::SynthSpec spec;
    spec.class_count = a.classes;
    spec.samples_per_class = a.samples;
    spec.image_size = a.size;
    spec.noise_sigma = a.noise;
    spec.rng_seed = a.seed;
    const auto corpus = flnip::generate_synthetic(spec);
    flnip::write_corpus(corpus, a.output);
    std::printf("images\t%zu\n", corpus.size());
    return 0;
}

struct BenchArgs {
    std::string db;
    std::string weights;
    std::string input;
    std::string labeling = "folder";
    int top_k = 10;
    int threads = default_threads();
};

int cmd_bench(const BenchArgs& a) {
    echo_config({{"command", "bench"},
                 {"db", a.db},
                 {"weights", a.weights.empty() ? "(uniform)" : a.weights},
                 {"input", a.input.empty() ? "(none)" : a.input},
                 {"top-k", std::to_string(a.top_k)},
                 {"threads", std::to_string(a.threads)}});
    const flnip::FeatureDatabase db = flnip::load_db(flnip::read_binary_file(a.db));
    const flnip::WeightVector w = a.weights.empty() ? flnip::WeightVector::uniform()
                                                    : load_weight_vector(a.weights);

    if (!a.input.empty()) {
        flnip::CorpusSpec spec{a.input, parse_labeling(a.labeling), 0};
        std::vector<std::string> failures;
        const auto corpus = flnip::load_corpus(spec, &failures, a.threads);
        report_failures(failures);
        const flnip::ScaleBank bank(db.sigmas);
        const auto start = Clock::now();
        for (const flnip::LabeledImage& rec : corpus) {
            flnip::extract_feature(rec.image, bank, rec.id, rec.category);
        }
        std::printf("feature_extraction_time\t%s\n",
                    g9(seconds_since(start) / corpus.size()).c_str());
    }

    const auto start = Clock::now();
    for (const flnip::FeatureRecord& rec : db.records) {
        flnip::query(db, rec, w, static_cast<std::size_t>(a.top_k));
    }
    std::printf("retrieval_time\t%s\n",
                g9(seconds_since(start) / db.size()).c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FLNIP texture descriptor image retrieval"};
    app.require_subcommand(1);

    IndexArgs index_args;
    auto* index = app.add_subcommand("index", "Extract features from a corpus into a database");
    index->add_option("--input", index_args.input, "Corpus root directory")->required();
    index->add_option("--labeling", index_args.labeling, "Category source: folder|prefix");
    index->add_option("--tile", index_args.tile, "Split images into NxN tiles");
    index->add_option("--sigmas", index_args.sigmas, "Comma-separated filter scales");
    index->add_option("--output", index_args.output, "Database file to write")->required();
    index->add_option("--threads", index_args.threads, "Worker thread cap");

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Learn fusion weights with the genetic algorithm");
    train->add_option("--db", train_args.db, "Database file")->required();
    train->add_option("--output", train_args.output, "Weights file to write")->required();
    train->add_option("--pop", train_args.population, "Population size");
    train->add_option("--gens", train_args.generations, "Generation count");
    train->add_option("--mutation", train_args.mutation, "Mutation rate");
    train->add_option("--crossover", train_args.crossover, "Crossover rate");
    train->add_option("--elite", train_args.elite, "Elite count");
    train->add_option("--seed", train_args.seed, "RNG seed");
    train->add_option("--top-k", train_args.top_k, "Fixed retrieval cutoff (0 = category size)");
    train->add_flag("--exclude-self", train_args.exclude_self, "Drop the query from its own ranking");
    train->add_option("--threads", train_args.threads, "Worker thread cap");

    QueryArgs query_args;
    auto* query = app.add_subcommand("query", "Rank database images against a query image");
    query->add_option("--db", query_args.db, "Database file")->required();
    query->add_option("--image", query_args.image, "Query PGM image")->required();
    query->add_option("--weights", query_args.weights, "Weights file (default uniform)");
    query->add_option("--top-k", query_args.top_k, "Number of results");

    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "Precision/recall/F-score over the whole database");
    evaluate->add_option("--db", eval_args.db, "Database file")->required();
    auto* eval_weights = evaluate->add_option("--weights", eval_args.weights, "Weights file");
    auto* eval_uniform = evaluate->add_flag("--uniform", eval_args.uniform, "Weights (1,1,1,1)");
    auto* eval_raw = evaluate->add_flag("--raw-only", eval_args.raw_only, "Weights (1,0,0,0)");
    eval_weights->excludes(eval_uniform);
    eval_weights->excludes(eval_raw);
    eval_uniform->excludes(eval_raw);
    evaluate->add_option("--n-list", eval_args.n_list, "Comma-separated retrieval depths")->required();
    evaluate->add_option("--metric", eval_args.metric, "d1|euclidean|manhattan|canberra|chi_square");
    evaluate->add_flag("--exclude-self", eval_args.exclude_self, "Drop each query from its own ranking");
    evaluate->add_option("--threads", eval_args.threads, "Worker thread cap");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic texture corpus on disk");
    synth->add_option("--classes", synth_args.classes, "Class count");
    synth->add_option("--samples", synth_args.samples, "Samples per class");
    synth->add_option("--size", synth_args.size, "Image side length");
    synth->add_option("--noise", synth_args.noise, "Gaussian pixel noise sigma");
    synth->add_option("--seed", synth_args.seed, "RNG seed");
    synth->add_option("--output", synth_args.output, "Directory to write")->required();

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Time feature extraction and retrieval");
    bench->add_option("--db", bench_args.db, "Database file")->required();
    bench->add_option("--weights", bench_args.weights, "Weights file (default uniform)");
    bench->add_option("--input", bench_args.input, "Corpus to time extraction on");
    bench->add_option("--labeling", bench_args.labeling, "Category source: folder|prefix");
    bench->add_option("--top-k", bench_args.top_k, "Results per timed query");
    bench->add_option("--threads", bench_args.threads, "Worker thread cap");

    CLI11_PARSE(app, argc, argv);

    try {
        if (index->parsed()) return cmd_index(index_args);
        if (train->parsed()) return cmd_train(train_args);
        if (query->parsed()) return cmd_query(query_args);
        if (evaluate->parsed()) return cmd_evaluate(eval_args);
        if (synth->parsed()) return cmd_synth(synth_args);
        if (bench->parsed()) return cmd_bench(bench_args);
    } catch (const flnip::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const flnip::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
