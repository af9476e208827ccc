#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "flnip/patterns.hpp"

namespace flnip {

enum class MetricId { d1, euclidean, manhattan, canberra, chi_square };

std::optional<MetricId> metric_from_name(std::string_view name);
std::string_view metric_name(MetricId metric);

// Distance between two equal-length histogram blocks. Terms with a zero
// denominator (both bins empty) contribute 0 for canberra and chi_square.
double block_distance(std::span<const double> a, std::span<const double> b,
                      MetricId metric);

// Four nonnegative fusion weights, one per scale block; at least one
// must be positive.
struct WeightVector {
    std::array<double, 4> w{};

    explicit WeightVector(std::array<double, 4> weights);
    WeightVector(double w1, double w2, double w3, double w4)
        : WeightVector(std::array<double, 4>{w1, w2, w3, w4}) {}

    static WeightVector uniform() { return WeightVector(1.0, 1.0, 1.0, 1.0); }
    static WeightVector raw_only() { return WeightVector(1.0, 0.0, 0.0, 0.0); }
};

// Weighted sum over the four 256-bin scale blocks of the per-block
// distance. The canonical combination uses the d1 metric per block.
double combined_distance(std::span<const double> query, std::span<const double> target,
                         const WeightVector& weights, MetricId metric = MetricId::d1);

} // namespace flnip
