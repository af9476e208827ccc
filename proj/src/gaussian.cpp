#include "flnip/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include "flnip/errors.hpp"

namespace flnip {

namespace {

int round_half_even(double v) {
    const double f = std::floor(v);
    const double frac = v - f;
    const long long base = static_cast<long long>(f);
    if (frac > 0.5) return static_cast<int>(base + 1);
    if (frac < 0.5) return static_cast<int>(base);
    return static_cast<int>(base % 2 == 0 ? base : base + 1);
}

} // namespace

ScaleBank::ScaleBank(std::vector<double> s) : sigmas(std::move(s)) {
    if (sigmas.empty()) {
        throw Error("scale bank must not be empty");
    }
    double prev = 0.0;
    for (double sigma : sigmas) {
        if (!(sigma > 0.0)) {
            throw NonPositiveSigma("sigma must be positive, got " + std::to_string(sigma));
        }
        if (sigma <= prev) {
            throw Error("sigmas must be strictly increasing");
        }
        prev = sigma;
    }
}

GaussianKernel build_kernel(double sigma) {
    if (!(sigma > 0.0)) {
        throw NonPositiveSigma("sigma must be positive, got " + std::to_string(sigma));
    }
    GaussianKernel k;
    k.sigma = sigma;
    k.radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int side = k.side();
    k.weights.resize(static_cast<std::size_t>(side) * side);

    const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
    double sum = 0.0;
    for (int dy = -k.radius; dy <= k.radius; ++dy) {
        for (int dx = -k.radius; dx <= k.radius; ++dx) {
            const double w = std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq);
            k.weights[static_cast<std::size_t>(dy + k.radius) * side + (dx + k.radius)] = w;
            sum += w;
        }
    }
    for (double& w : k.weights) {
        w /= sum;
    }
    return k;
}

GrayImage filter(const GrayImage& img, const GaussianKernel& kernel) {
    const int w = img.width;
    const int h = img.height;
    const int r = kernel.radius;
    std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                const int sy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -r; dx <= r; ++dx) {
                    const int sx = std::clamp(x + dx, 0, w - 1);
                    acc += kernel.at(dx, dy) * img.at(sx, sy);
                }
            }
            out[static_cast<std::size_t>(y) * w + x] =
                static_cast<std::uint8_t>(std::clamp(round_half_even(acc), 0, 255));
        }
    }
    return GrayImage(w, h, std::move(out));
}

std::vector<GrayImage> scale_stack(const GrayImage& img, const ScaleBank& bank) {
    std::vector<GrayImage> stack;
    stack.reserve(bank.sigmas.size());
    for (double sigma : bank.sigmas) {
        stack.push_back(filter(img, build_kernel(sigma)));
    }
    return stack;
}

} // namespace flnip
