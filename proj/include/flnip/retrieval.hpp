#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flnip/metrics.hpp"
#include "flnip/patterns.hpp"

namespace flnip {

// Labeled collection of feature records. Record order is the tie-break
// order for every ranking; ids are unique; the categories index lists
// record positions per category in first-appearance order.
struct FeatureDatabase {
    std::vector<FeatureRecord> records;
    std::vector<double> sigmas;
    std::vector<std::pair<std::string, std::vector<std::size_t>>> categories;

    std::size_t size() const { return records.size(); }
    const std::vector<std::size_t>* find_category(std::string_view name) const;
    std::size_t category_size(std::string_view name) const;

    // Validates invariants and derives the category index. block_sum_tol
    // bounds how far each 256-bin block may drift from unit sum (freshly
    // extracted features are exact to 1e-9; reloaded ones carry decimal
    // quantization).
    static FeatureDatabase assemble(std::vector<FeatureRecord> records,
                                    std::vector<double> sigmas,
                                    double block_sum_tol = 1e-9);
};

FeatureDatabase build_index(std::span<const LabeledImage> images, const ScaleBank& bank,
                            int threads = 1);

struct RankedMatch {
    std::string id;
    std::string category;
    double distance = 0.0;
};

struct QueryResult {
    std::string query_id;
    std::vector<RankedMatch> ranked;  // distances nondecreasing
};

// Ranks every record by combined distance ascending (ties in insertion
// order) and returns the first top_k (or all, if the database is smaller).
QueryResult query(const FeatureDatabase& db, const FeatureRecord& q,
                  const WeightVector& weights, std::size_t top_k,
                  MetricId metric = MetricId::d1);

double precision_at(const QueryResult& result, std::string_view truth_category,
                    std::size_t n);
double recall_at(const QueryResult& result, std::string_view truth_category,
                 std::size_t category_size, std::size_t n);

struct EvalOptions {
    // Removes the query from its own ranking; relevant counts and the
    // recall denominator then drop to category size - 1.
    bool exclude_self = false;
    MetricId metric = MetricId::d1;
    int threads = 1;
};

struct EvalReport {
    std::vector<int> n_values;
    std::vector<double> precision_total;  // parallel to n_values
    std::vector<double> recall_total;
    std::vector<double> f_score;
    std::vector<std::pair<std::string, std::vector<double>>> category_precision;
    double arr = 0.0;  // mean recall x100 at per-query cutoff = category size
};

// Runs every record as a query and aggregates precision/recall/F per
// category and in total, at each requested retrieval depth.
EvalReport evaluate(const FeatureDatabase& db, const WeightVector& weights,
                    std::span<const int> n_list, const EvalOptions& options = {});

// Line-oriented text format with a trailing CRC32 over the canonical
// serialization. save_db(load_db(bytes)) == bytes for files it wrote.
std::string save_db(const FeatureDatabase& db);
FeatureDatabase load_db(std::string_view bytes);

// Rounds feature values through the file precision (9 significant
// digits). A fresh extraction canonicalized this way compares bit-exactly
// against the same image's record reloaded from disk.
FeatureRecord canonicalize_precision(FeatureRecord rec);

} // namespace flnip
