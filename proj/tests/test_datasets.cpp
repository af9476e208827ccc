#include <doctest.h>

#include <filesystem>
#include <random>

#include "flnip/datasets.hpp"
#include "flnip/errors.hpp"
#include "flnip/retrieval.hpp"
#include "test_support.hpp"

using namespace flnip;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("flnip_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

void write_pgm(const fs::path& p, const GrayImage& img) {
    fs::create_directories(p.parent_path());
    write_binary_file(p, encode_pgm(img));
}

} // namespace

TEST_CASE("folder labeling takes a census of the class directories") {
    TempDir tmp;
    std::mt19937_64 rng(239);
    write_pgm(tmp.path / "a" / "one.pgm", testsup::random_image(rng, 8, 8));
    write_pgm(tmp.path / "a" / "two.pgm", testsup::random_image(rng, 8, 8));
    write_pgm(tmp.path / "b" / "one.pgm", testsup::random_image(rng, 8, 8));
    write_pgm(tmp.path / "b" / "two.pgm", testsup::random_image(rng, 8, 8));
    write_pgm(tmp.path / "b" / "three.pgm", testsup::random_image(rng, 8, 8));

    const auto corpus = load_corpus({tmp.path, Labeling::folder_per_class, 0});
    REQUIRE(corpus.size() == 5);
    int a = 0;
    int b = 0;
    for (const LabeledImage& rec : corpus) {
        if (rec.category == "a") ++a;
        if (rec.category == "b") ++b;
    }
    CHECK(a == 2);
    CHECK(b == 3);
    CHECK(corpus.front().id == "a/one.pgm");
}

TEST_CASE("prefix labeling takes the id text before the first underscore") {
    TempDir tmp;
    std::mt19937_64 rng(241);
    write_pgm(tmp.path / "D1_03.pgm", testsup::random_image(rng, 8, 8));
    write_pgm(tmp.path / "D1_04.pgm", testsup::random_image(rng, 8, 8));
    write_pgm(tmp.path / "D2_03.pgm", testsup::random_image(rng, 8, 8));

    const auto corpus = load_corpus({tmp.path, Labeling::filename_prefix, 0});
    REQUIRE(corpus.size() == 3);
    CHECK(corpus[0].category == "D1");
    CHECK(corpus[1].category == "D1");
    CHECK(corpus[2].category == "D2");
}

TEST_CASE("scanning the same tree twice yields the identical order") {
    TempDir tmp;
    std::mt19937_64 rng(251);
    for (int i = 0; i < 6; ++i) {
        write_pgm(tmp.path / ("c" + std::to_string(i % 2)) /
                      ("img" + std::to_string(i) + ".pgm"),
                  testsup::random_image(rng, 8, 8));
    }
    const auto first = load_corpus({tmp.path, Labeling::folder_per_class, 0}, nullptr, 4);
    const auto second = load_corpus({tmp.path, Labeling::folder_per_class, 0}, nullptr, 1);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].id == second[i].id);
        CHECK(first[i].image == second[i].image);
    }
}

TEST_CASE("tiling splits each image into its full sub-grids") {
    TempDir tmp;
    std::mt19937_64 rng(257);
    const GrayImage img = testsup::random_image(rng, 8, 8);
    write_pgm(tmp.path / "cls" / "big.pgm", img);

    const auto corpus = load_corpus({tmp.path, Labeling::folder_per_class, 4});
    REQUIRE(corpus.size() == 4);
    for (const LabeledImage& rec : corpus) {
        CHECK(rec.category == "cls");
        CHECK(rec.image.width == 4);
        CHECK(rec.image.height == 4);
    }
    // Tile 0 is the top-left quadrant.
    CHECK(corpus[0].id == "cls/big.pgm#t000");
    CHECK(corpus[0].image.at(1, 1) == img.at(1, 1));
}

TEST_CASE("undecodable files are skipped with a report") {
    TempDir tmp;
    std::mt19937_64 rng(263);
    write_pgm(tmp.path / "x" / "good.pgm", testsup::random_image(rng, 8, 8));
    write_binary_file(tmp.path / "x" / "bad.pgm", "not a pgm");

    std::vector<std::string> failures;
    const auto corpus = load_corpus({tmp.path, Labeling::folder_per_class, 0}, &failures);
    CHECK(corpus.size() == 1);
    REQUIRE(failures.size() == 1);
    CHECK(failures[0].find("bad.pgm") != std::string::npos);
}

TEST_CASE("a corpus where nothing decodes is an error") {
    TempDir tmp;
    fs::create_directories(tmp.path / "c");
    write_binary_file(tmp.path / "c" / "junk.pgm", "junk");
    CHECK_THROWS_AS(load_corpus({tmp.path, Labeling::folder_per_class, 0}),
                    UndecodableFile);
}

TEST_CASE("an empty or missing root is an empty corpus") {
    TempDir tmp;
    CHECK_THROWS_AS(load_corpus({tmp.path, Labeling::folder_per_class, 0}), EmptyCorpus);
    CHECK_THROWS_AS(load_corpus({tmp.path / "nope", Labeling::folder_per_class, 0}),
                    EmptyCorpus);
}

TEST_CASE("zero noise makes the samples of a class identical") {
    SynthSpec spec;
    spec.class_count = 3;
    spec.samples_per_class = 4;
    spec.image_size = 16;
    spec.noise_sigma = 0.0;
    const auto corpus = generate_synthetic(spec);
    REQUIRE(corpus.size() == 12);
    for (int c = 0; c < 3; ++c) {
        for (int s = 1; s < 4; ++s) {
            CHECK(corpus[c * 4 + s].image == corpus[c * 4].image);
        }
    }
    CHECK(corpus[0].id == "synth_000_000");
    CHECK(corpus[0].category == "c000");
}

TEST_CASE("the synthetic corpus is seed-deterministic") {
    SynthSpec spec;
    spec.class_count = 4;
    spec.samples_per_class = 3;
    spec.image_size = 16;
    spec.noise_sigma = 12.0;
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].image == b[i].image);
    }

    spec.rng_seed = 43;
    const auto c = generate_synthetic(spec);
    bool any_difference = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        any_difference = any_difference || !(a[i].image == c[i].image);
    }
    CHECK(any_difference);
}

TEST_CASE("degenerate synthetic specs are rejected") {
    SynthSpec spec;
    spec.class_count = 1;
    CHECK_THROWS_AS(generate_synthetic(spec), Error);
    spec = SynthSpec{};
    spec.image_size = 8;
    CHECK_THROWS_AS(generate_synthetic(spec), Error);
}

TEST_CASE("a noise-free synthetic corpus retrieves perfectly") {
    SynthSpec spec;
    spec.class_count = 3;
    spec.samples_per_class = 3;
    spec.image_size = 32;
    spec.noise_sigma = 0.0;
    const auto corpus = generate_synthetic(spec);
    const FeatureDatabase db = build_index(corpus, ScaleBank::defaults(), 2);
    const std::vector<int> depths = {spec.samples_per_class};
    const EvalReport report = evaluate(db, WeightVector(0.7, 0.1, 0.9, 0.3), depths);
    CHECK(report.precision_total[0] == 1.0);
    CHECK(report.recall_total[0] == 1.0);
    CHECK(report.arr == 100.0);
}

TEST_CASE("written corpora reload with the same images and categories") {
    TempDir tmp;
    SynthSpec spec;
    spec.class_count = 2;
    spec.samples_per_class = 2;
    spec.image_size = 16;
    const auto corpus = generate_synthetic(spec);
    write_corpus(corpus, tmp.path);

    const auto reloaded = load_corpus({tmp.path, Labeling::folder_per_class, 0});
    REQUIRE(reloaded.size() == corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        CHECK(reloaded[i].category == corpus[i].category);
        CHECK(reloaded[i].image == corpus[i].image);
    }
}
