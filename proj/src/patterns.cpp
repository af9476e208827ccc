#include "flnip/patterns.hpp"

#include <cmath>

#include "flnip/errors.hpp"

namespace flnip {

namespace {

int wrap_ring(int k) {
    return (k - 1 + 8) % 8 + 1;
}

struct AdjacentEntry {
    int count;
    std::array<int, 4> members;
};

// adjacent_set(k) for k = 1..8, lifted to a table so the per-pixel coder
// does not allocate.
const std::array<AdjacentEntry, 8>& adjacent_table() {
    static const std::array<AdjacentEntry, 8> table = [] {
        std::array<AdjacentEntry, 8> t{};
        for (int k = 1; k <= 8; ++k) {
            AdjacentEntry& e = t[k - 1];
            if (k % 2 == 1) {
                e.count = 4;
                e.members = {wrap_ring(k - 2), wrap_ring(k - 1), wrap_ring(k + 1),
                             wrap_ring(k + 2)};
            } else {
                e.count = 2;
                e.members = {k - 1, wrap_ring(k + 1), 0, 0};
            }
        }
        return t;
    }();
    return table;
}

void check_window(const std::array<int, 9>& window) {
    for (int v : window) {
        if (v < 0 || v > 255) {
            throw Error("window intensity " + std::to_string(v) + " outside [0,255]");
        }
    }
}

} // namespace

int lbp_code(const std::array<int, 9>& window) {
    check_window(window);
    const int center = window[kCenterCell];
    int code = 0;
    for (int k = 1; k <= 8; ++k) {
        if (window[kNeighborCell[k - 1]] >= center) {
            code |= 1 << (k - 1);
        }
    }
    return code;
}

std::vector<int> adjacent_set(int k) {
    if (k < 1 || k > 8) {
        throw IndexOutOfRange("neighbor index " + std::to_string(k) + " outside 1..8");
    }
    const AdjacentEntry& e = adjacent_table()[k - 1];
    return std::vector<int>(e.members.begin(), e.members.begin() + e.count);
}

double fractional_change(std::span<const double> adjacent, double reference) {
    if (!(reference > 0.0)) {
        throw ZeroReference("reference " + std::to_string(reference) +
                            " is not positive; values must be domain-shifted");
    }
    if (adjacent.empty()) {
        throw Error("adjacent set must not be empty");
    }
    double sum = 0.0;
    for (double a : adjacent) {
        sum += std::abs(a - reference);
    }
    return sum / (static_cast<double>(adjacent.size()) * reference);
}

int flnip_code_shifted(const std::array<double, 9>& shifted) {
    const double center = shifted[kCenterCell];
    int code = 0;
    for (int k = 1; k <= 8; ++k) {
        const AdjacentEntry& adj = adjacent_table()[k - 1];
        std::array<double, 4> values;
        for (int m = 0; m < adj.count; ++m) {
            values[m] = shifted[kNeighborCell[adj.members[m] - 1]];
        }
        const std::span<const double> span(values.data(), static_cast<std::size_t>(adj.count));
        const double mu_k = fractional_change(span, shifted[kNeighborCell[k - 1]]);
        const double mu_c = fractional_change(span, center);
        if (mu_k >= mu_c) {
            code |= 1 << (k - 1);
        }
    }
    return code;
}

int flnip_code(const std::array<int, 9>& window) {
    check_window(window);
    std::array<double, 9> shifted;
    for (int i = 0; i < 9; ++i) {
        shifted[i] = window[i] + 1;  // [0,255] -> [1,256], keeps references nonzero
    }
    return flnip_code_shifted(shifted);
}

PatternMap pattern_map(const GrayImage& img, Coder coder) {
    PatternMap map;
    map.width = img.width - 2;
    map.height = img.height - 2;
    map.codes.resize(static_cast<std::size_t>(map.width) * map.height);

    std::array<int, 9> window;
    for (int y = 1; y + 1 < img.height; ++y) {
        for (int x = 1; x + 1 < img.width; ++x) {
            int i = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    window[i++] = img.at(x + dx, y + dy);
                }
            }
            const int code = coder == Coder::lbp ? lbp_code(window) : flnip_code(window);
            map.codes[static_cast<std::size_t>(y - 1) * map.width + (x - 1)] =
                static_cast<std::uint8_t>(code);
        }
    }
    return map;
}

DescriptorHistogram histogram(const PatternMap& map, bool normalize) {
    if (map.codes.empty()) {
        throw EmptyMap("pattern map holds no codes");
    }
    DescriptorHistogram h;
    for (std::uint8_t code : map.codes) {
        h.bins[code] += 1.0;
    }
    if (normalize) {
        const double total = static_cast<double>(map.codes.size());
        for (double& b : h.bins) {
            b /= total;
        }
        h.normalized = true;
    }
    return h;
}

FeatureRecord extract_feature(const GrayImage& img, const ScaleBank& bank,
                              std::string id, std::string category) {
    if (bank.sigmas.size() != kScaleBlocks - 1) {
        throw Error("feature extraction needs exactly 3 sigmas, got " +
                    std::to_string(bank.sigmas.size()));
    }
    FeatureRecord rec;
    rec.id = std::move(id);
    rec.category = std::move(category);
    rec.feature.reserve(kFeatureLength);

    auto append_block = [&rec](const GrayImage& source) {
        const DescriptorHistogram h = histogram(pattern_map(source, Coder::flnip), true);
        rec.feature.insert(rec.feature.end(), h.bins.begin(), h.bins.end());
    };

    append_block(img);
    for (const GrayImage& filtered : scale_stack(img, bank)) {
        append_block(filtered);
    }
    return rec;
}

} // namespace flnip
