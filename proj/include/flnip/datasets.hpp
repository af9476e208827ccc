#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flnip/pixelgrid.hpp"

namespace flnip {

enum class Labeling { folder_per_class, filename_prefix };

// A directory tree of PGM files. id = path relative to root; the category
// is the top-level folder (folder_per_class) or the id text before the
// first '_' (filename_prefix). tile > 0 splits each image into
// non-overlapping tile x tile sub-images.
struct CorpusSpec {
    std::filesystem::path root;
    Labeling labeling = Labeling::folder_per_class;
    int tile = 0;
};

// Deterministic lexicographic order regardless of load parallelism.
// Undecodable files are appended to `failures` (with their path) and
// skipped; the load only fails outright when nothing decodes.
std::vector<LabeledImage> load_corpus(const CorpusSpec& spec,
                                      std::vector<std::string>* failures = nullptr,
                                      int threads = 1);

// Seeded texture corpus: per class, a sinusoidal grating at a
// class-specific orientation and frequency, plus per-sample Gaussian
// pixel noise.
struct SynthSpec {
    int class_count = 10;
    int samples_per_class = 20;
    int image_size = 64;
    double noise_sigma = 0.0;
    std::uint64_t rng_seed = 42;
};

std::vector<LabeledImage> generate_synthetic(const SynthSpec& spec);

// Writes a corpus to disk as <dir>/<category>/<id>.pgm.
void write_corpus(const std::vector<LabeledImage>& corpus,
                  const std::filesystem::path& dir);

std::string read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, std::string_view bytes);

} // namespace flnip
