#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flnip/gaussian.hpp"
#include "flnip/pixelgrid.hpp"

namespace flnip {

// 3x3 windows are passed as 9 values in raster order. The eight ring
// neighbors I1..I8 of the center Ic sit at fixed cells:
//
//     I6 I7 I8        cell 0 1 2
//     I5 Ic I1   <->       3 4 5
//     I4 I3 I2             6 7 8
//
// Index k and k+-1 (mod 8) are spatially adjacent on the ring.
inline constexpr int kCenterCell = 4;
inline constexpr std::array<int, 8> kNeighborCell = {5, 8, 7, 6, 3, 0, 1, 2};

enum class Coder { lbp, flnip };

// Classic 8-neighbor local binary pattern: bit k-1 is set iff I_k >= Ic.
int lbp_code(const std::array<int, 9>& window);

// Ring neighbors of neighbor I_k inside the window: the four members
// {k-2, k-1, k+1, k+2} (circular on 1..8) when k is odd, the two members
// {k-1, k+1} when k is even.
std::vector<int> adjacent_set(int k);

// Mean absolute difference of the adjacent values from a reference pixel,
// divided by that reference. Inputs are expected in the shifted domain
// (intensities mapped [0,255] -> [1,256]) so the reference is never zero.
double fractional_change(std::span<const double> adjacent, double reference);

// The fractional local neighborhood intensity pattern code. For each
// neighbor I_k, the fractional change of I_k's adjacent set is measured
// twice, against I_k and against the center; bit k-1 is set iff the
// neighbor-relative change is at least the center-relative change.
int flnip_code(const std::array<int, 9>& window);

// Same code over values already shifted into the positive domain. Exposed
// so callers can work directly on the shifted ring.
int flnip_code_shifted(const std::array<double, 9>& shifted);

// Codes of all interior pixels (border pixels lack a full window and are
// excluded). Dimensions are (image width - 2) x (image height - 2).
struct PatternMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> codes;
};

PatternMap pattern_map(const GrayImage& img, Coder coder);

// 256-bin occurrence histogram of a pattern map. Unnormalized bins are
// integer counts summing to the interior pixel count; normalized bins sum
// to 1.
struct DescriptorHistogram {
    std::array<double, 256> bins{};
    bool normalized = false;
};

DescriptorHistogram histogram(const PatternMap& map, bool normalize);

inline constexpr std::size_t kBlockBins = 256;
inline constexpr std::size_t kScaleBlocks = 4;
inline constexpr std::size_t kFeatureLength = kBlockBins * kScaleBlocks;

// Concatenation of the normalized FLNIP histograms of the raw image and
// its three Gaussian-filtered versions, in bank order. Always 1024 wide.
struct FeatureRecord {
    std::string id;
    std::string category;
    std::vector<double> feature;
};

FeatureRecord extract_feature(const GrayImage& img, const ScaleBank& bank,
                              std::string id, std::string category);

} // namespace flnip
