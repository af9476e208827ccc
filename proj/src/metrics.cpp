#include "flnip/metrics.hpp"

#include <cmath>
#include <string>

#include "flnip/errors.hpp"

namespace flnip {

std::optional<MetricId> metric_from_name(std::string_view name) {
    if (name == "d1") return MetricId::d1;
    if (name == "euclidean") return MetricId::euclidean;
    if (name == "manhattan") return MetricId::manhattan;
    if (name == "canberra") return MetricId::canberra;
    if (name == "chi_square") return MetricId::chi_square;
    return std::nullopt;
}

std::string_view metric_name(MetricId metric) {
    switch (metric) {
        case MetricId::d1: return "d1";
        case MetricId::euclidean: return "euclidean";
        case MetricId::manhattan: return "manhattan";
        case MetricId::canberra: return "canberra";
        case MetricId::chi_square: return "chi_square";
    }
    return "?";
}

double block_distance(std::span<const double> a, std::span<const double> b,
                      MetricId metric) {
    if (a.size() != b.size()) {
        throw LengthMismatch("block lengths differ: " + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()));
    }
    double sum = 0.0;
    switch (metric) {
        case MetricId::d1:
            for (std::size_t i = 0; i < a.size(); ++i) {
                // (a+b) groups first so the term is bitwise symmetric.
                sum += std::abs((a[i] - b[i]) / (1.0 + (a[i] + b[i])));
            }
            return sum;
        case MetricId::euclidean:
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double d = a[i] - b[i];
                sum += d * d;
            }
            return std::sqrt(sum);
        case MetricId::manhattan:
            for (std::size_t i = 0; i < a.size(); ++i) {
                sum += std::abs(a[i] - b[i]);
            }
            return sum;
        case MetricId::canberra:
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double den = a[i] + b[i];
                if (den != 0.0) {
                    sum += std::abs((a[i] - b[i]) / den);
                }
            }
            return sum;
        case MetricId::chi_square:
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double den = a[i] + b[i];
                if (den != 0.0) {
                    const double d = a[i] - b[i];
                    sum += d * d / den;
                }
            }
            return 0.5 * sum;
    }
    throw Error("unknown metric");
}

WeightVector::WeightVector(std::array<double, 4> weights) : w(weights) {
    bool any_positive = false;
    for (double v : w) {
        if (!(v >= 0.0)) {
            throw Error("fusion weights must be nonnegative, got " + std::to_string(v));
        }
        any_positive = any_positive || v > 0.0;
    }
    if (!any_positive) {
        throw AllZeroWeights("at least one fusion weight must be positive");
    }
}

double combined_distance(std::span<const double> query, std::span<const double> target,
                         const WeightVector& weights, MetricId metric) {
    if (query.size() != kFeatureLength || target.size() != kFeatureLength) {
        throw LengthMismatch("features must be " + std::to_string(kFeatureLength) +
                             " wide, got " + std::to_string(query.size()) + " and " +
                             std::to_string(target.size()));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < kScaleBlocks; ++j) {
        sum += weights.w[j] * block_distance(query.subspan(j * kBlockBins, kBlockBins),
                                             target.subspan(j * kBlockBins, kBlockBins),
                                             metric);
    }
    return sum;
}

} // namespace flnip
