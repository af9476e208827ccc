#pragma once

#include <vector>

#include "flnip/pixelgrid.hpp"

namespace flnip {

// Sampled isotropic Gaussian, normalized to unit sum. weights is the
// (2*radius+1)^2 square stored row-major with (dx,dy) in [-radius,radius].
struct GaussianKernel {
    double sigma = 0.0;
    int radius = 0;
    std::vector<double> weights;

    int side() const { return 2 * radius + 1; }
    double at(int dx, int dy) const {
        return weights[static_cast<std::size_t>(dy + radius) * side() + (dx + radius)];
    }
};

// Ordered set of filter scales. Strictly increasing, all positive.
struct ScaleBank {
    std::vector<double> sigmas;

    explicit ScaleBank(std::vector<double> s);
    static ScaleBank defaults() { return ScaleBank({0.5, 0.8, 1.0}); }
};

// radius = ceil(3*sigma); weight(dx,dy) proportional to
// exp(-(dx^2+dy^2)/(2*sigma^2)), renormalized to sum 1.
GaussianKernel build_kernel(double sigma);

// 2D convolution with replicate border padding. Each output value is
// rounded half to even and clamped to [0,255]; dimensions are preserved.
GrayImage filter(const GrayImage& img, const GaussianKernel& kernel);

// One filtered image per sigma, in bank order.
std::vector<GrayImage> scale_stack(const GrayImage& img, const ScaleBank& bank);

} // namespace flnip
