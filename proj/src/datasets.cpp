#include "flnip/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>

#include "flnip/errors.hpp"
#include "flnip/parallel.hpp"

namespace fs = std::filesystem;

namespace flnip {

namespace {

bool has_pgm_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == ".pgm";
}

std::string derive_category(const std::string& id, Labeling labeling) {
    if (labeling == Labeling::filename_prefix) {
        const std::size_t underscore = id.find('_');
        return underscore == std::string::npos ? id : id.substr(0, underscore);
    }
    const std::size_t slash = id.find('/');
    return slash == std::string::npos ? std::string() : id.substr(0, slash);
}

std::vector<GrayImage> split_tiles(const GrayImage& img, int tile) {
    std::vector<GrayImage> tiles;
    const int rows = img.height / tile;
    const int cols = img.width / tile;
    tiles.reserve(static_cast<std::size_t>(rows) * cols);
    for (int tr = 0; tr < rows; ++tr) {
        for (int tc = 0; tc < cols; ++tc) {
            std::vector<std::uint8_t> px(static_cast<std::size_t>(tile) * tile);
            for (int y = 0; y < tile; ++y) {
                for (int x = 0; x < tile; ++x) {
                    px[static_cast<std::size_t>(y) * tile + x] =
                        img.at(tc * tile + x, tr * tile + y);
                }
            }
            tiles.emplace_back(tile, tile, std::move(px));
        }
    }
    return tiles;
}

} // namespace

std::vector<LabeledImage> load_corpus(const CorpusSpec& spec,
                                      std::vector<std::string>* failures, int threads) {
    if (spec.tile != 0 && spec.tile < 3) {
        throw Error("tile size must be at least 3");
    }
    if (!fs::is_directory(spec.root)) {
        throw EmptyCorpus("corpus root '" + spec.root.string() + "' is not a directory");
    }

    std::vector<std::string> rel_paths;
    for (const auto& entry : fs::recursive_directory_iterator(spec.root)) {
        if (entry.is_regular_file() && has_pgm_extension(entry.path())) {
            rel_paths.push_back(entry.path().lexically_relative(spec.root).generic_string());
        }
    }
    std::sort(rel_paths.begin(), rel_paths.end());
    if (rel_paths.empty()) {
        throw EmptyCorpus("no .pgm files under '" + spec.root.string() + "'");
    }

    struct Slot {
        std::vector<LabeledImage> records;
        std::string failure;
    };
    std::vector<Slot> slots(rel_paths.size());

    parallel_for(rel_paths.size(), threads, [&](std::size_t i) {
        Slot& slot = slots[i];
        const std::string& id = rel_paths[i];
        const std::string category = derive_category(id, spec.labeling);
        if (category.empty()) {
            slot.failure = id + ": cannot derive a category";
            return;
        }
        try {
            GrayImage img = decode_pgm(read_binary_file(spec.root / id));
            if (spec.tile > 0) {
                std::vector<GrayImage> tiles = split_tiles(img, spec.tile);
                if (tiles.empty()) {
                    slot.failure = id + ": smaller than one tile";
                    return;
                }
                char suffix[32];
                for (std::size_t t = 0; t < tiles.size(); ++t) {
                    std::snprintf(suffix, sizeof(suffix), "#t%03zu", t);
                    slot.records.push_back({id + suffix, category, std::move(tiles[t])});
                }
            } else {
                slot.records.push_back({id, category, std::move(img)});
            }
        } catch (const Error& e) {
            slot.failure = id + ": " + e.what();
        }
    });

    std::vector<LabeledImage> corpus;
    std::size_t failed = 0;
    for (Slot& slot : slots) {
        if (!slot.failure.empty()) {
            ++failed;
            if (failures) {
                failures->push_back(slot.failure);
            }
            continue;
        }
        for (LabeledImage& rec : slot.records) {
            corpus.push_back(std::move(rec));
        }
    }
    if (corpus.empty()) {
        throw UndecodableFile("all " + std::to_string(failed) +
                              " corpus files failed to load");
    }
    return corpus;
}

std::vector<LabeledImage> generate_synthetic(const SynthSpec& spec) {
    if (spec.class_count < 2 || spec.samples_per_class < 2 || spec.image_size < 16) {
        throw Error("synthetic spec needs >= 2 classes, >= 2 samples, size >= 16");
    }
    std::mt19937_64 rng(spec.rng_seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);

    const int size = spec.image_size;
    std::vector<LabeledImage> corpus;
    corpus.reserve(static_cast<std::size_t>(spec.class_count) * spec.samples_per_class);

    char name[48];
    for (int c = 0; c < spec.class_count; ++c) {
        const double theta = c * std::numbers::pi / spec.class_count;
        const double freq = 2.0 + c % 5;
        const double kx = std::cos(theta) * 2.0 * std::numbers::pi * freq / size;
        const double ky = std::sin(theta) * 2.0 * std::numbers::pi * freq / size;

        std::vector<std::uint8_t> base(static_cast<std::size_t>(size) * size);
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                const double s = std::sin(kx * x + ky * y);
                const double v = std::floor(255.0 * 0.5 * (1.0 + s) + 0.5);
                base[static_cast<std::size_t>(y) * size + x] =
                    static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            }
        }

        std::snprintf(name, sizeof(name), "c%03d", c);
        const std::string category = name;
        for (int s = 0; s < spec.samples_per_class; ++s) {
            std::vector<std::uint8_t> px = base;
            if (spec.noise_sigma > 0.0) {
                for (std::uint8_t& p : px) {
                    const long v = p + std::lround(noise(rng));
                    p = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
                }
            }
            std::snprintf(name, sizeof(name), "synth_%03d_%03d", c, s);
            corpus.push_back({name, category, GrayImage(size, size, std::move(px))});
        }
    }
    return corpus;
}

void write_corpus(const std::vector<LabeledImage>& corpus, const fs::path& dir) {
    for (const LabeledImage& rec : corpus) {
        const fs::path target = dir / rec.category / (rec.id + ".pgm");
        fs::create_directories(target.parent_path());
        write_binary_file(target, encode_pgm(rec.image));
    }
}

std::string read_binary_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("read failed for '" + path.string() + "'");
    }
    return bytes;
}

void write_binary_file(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed for '" + path.string() + "'");
    }
}

} // namespace flnip
