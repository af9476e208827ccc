#include "flnip/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <unordered_map>
#include <unordered_set>

#include "flnip/errors.hpp"
#include "flnip/parallel.hpp"

namespace flnip {

namespace {

std::uint32_t crc32(std::string_view bytes) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int bit = 0; bit < 8; ++bit) {
                c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            }
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (unsigned char b : bytes) {
        crc = table[(crc ^ b) & 0xFF] ^ (crc >> 8);
    }
    return crc ^ 0xFFFFFFFFu;
}

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

// (distance, insertion index) ranking of the whole database.
std::vector<std::size_t> rank_all(const FeatureDatabase& db, std::span<const double> feature,
                                  const WeightVector& weights, MetricId metric,
                                  std::ptrdiff_t exclude_index = -1) {
    std::vector<double> dist(db.size());
    for (std::size_t i = 0; i < db.size(); ++i) {
        dist[i] = combined_distance(feature, db.records[i].feature, weights, metric);
    }
    std::vector<std::size_t> order;
    order.reserve(db.size());
    for (std::size_t i = 0; i < db.size(); ++i) {
        if (static_cast<std::ptrdiff_t>(i) != exclude_index) {
            order.push_back(i);
        }
    }
    std::sort(order.begin(), order.end(), [&dist](std::size_t a, std::size_t b) {
        return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
    });
    return order;
}

std::string serialize_body(const std::vector<FeatureRecord>& records,
                           const std::vector<double>& sigmas) {
    std::string out = "FLNIPDB 1\n";
    out += std::to_string(records.size());
    out += ' ';
    out += std::to_string(kFeatureLength);
    out += ' ';
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (i > 0) out += ',';
        out += format_g9(sigmas[i]);
    }
    out += '\n';
    for (const FeatureRecord& rec : records) {
        out += rec.id;
        out += '\t';
        out += rec.category;
        out += '\t';
        for (std::size_t i = 0; i < rec.feature.size(); ++i) {
            if (i > 0) out += ' ';
            out += format_g9(rec.feature[i]);
        }
        out += '\n';
    }
    return out;
}

} // namespace

const std::vector<std::size_t>* FeatureDatabase::find_category(std::string_view name) const {
    for (const auto& [cat, members] : categories) {
        if (cat == name) {
            return &members;
        }
    }
    return nullptr;
}

std::size_t FeatureDatabase::category_size(std::string_view name) const {
    const auto* members = find_category(name);
    return members ? members->size() : 0;
}

FeatureDatabase FeatureDatabase::assemble(std::vector<FeatureRecord> records,
                                          std::vector<double> sigmas,
                                          double block_sum_tol) {
    if (records.empty()) {
        throw Error("database must hold at least one record");
    }
    FeatureDatabase db;
    db.sigmas = std::move(sigmas);
    db.records = std::move(records);

    std::unordered_set<std::string_view> seen;
    std::unordered_map<std::string_view, std::size_t> category_pos;
    for (std::size_t i = 0; i < db.records.size(); ++i) {
        const FeatureRecord& rec = db.records[i];
        if (!seen.insert(rec.id).second) {
            throw DuplicateId("duplicate record id '" + rec.id + "'");
        }
        if (rec.category.empty()) {
            throw Error("record '" + rec.id + "' has an empty category");
        }
        if (rec.id.find_first_of("\t\n") != std::string::npos ||
            rec.category.find_first_of("\t\n") != std::string::npos) {
            throw Error("record ids and categories must not contain tabs or newlines");
        }
        if (rec.feature.size() != kFeatureLength) {
            throw LengthMismatch("record '" + rec.id + "' has feature length " +
                                 std::to_string(rec.feature.size()));
        }
        for (std::size_t j = 0; j < kScaleBlocks; ++j) {
            double sum = 0.0;
            for (std::size_t b = 0; b < kBlockBins; ++b) {
                const double v = rec.feature[j * kBlockBins + b];
                if (!(v >= 0.0 && v <= 1.0)) {
                    throw Error("record '" + rec.id + "' has a feature value outside [0,1]");
                }
                sum += v;
            }
            if (std::abs(sum - 1.0) > block_sum_tol) {
                throw Error("record '" + rec.id + "' block " + std::to_string(j) +
                            " sums to " + std::to_string(sum));
            }
        }
        auto [it, inserted] = category_pos.try_emplace(rec.category, db.categories.size());
        if (inserted) {
            db.categories.emplace_back(rec.category, std::vector<std::size_t>{});
        }
        db.categories[it->second].second.push_back(i);
    }
    return db;
}

FeatureDatabase build_index(std::span<const LabeledImage> images, const ScaleBank& bank,
                            int threads) {
    if (images.empty()) {
        throw Error("cannot index an empty image list");
    }
    std::vector<FeatureRecord> records(images.size());
    parallel_for(images.size(), threads, [&](std::size_t i) {
        records[i] = extract_feature(images[i].image, bank, images[i].id,
                                     images[i].category);
    });
    return FeatureDatabase::assemble(std::move(records), bank.sigmas);
}

QueryResult query(const FeatureDatabase& db, const FeatureRecord& q,
                  const WeightVector& weights, std::size_t top_k, MetricId metric) {
    if (top_k == 0) {
        throw Error("top_k must be at least 1");
    }
    const std::vector<std::size_t> order = rank_all(db, q.feature, weights, metric);
    QueryResult result;
    result.query_id = q.id;
    const std::size_t take = std::min(top_k, order.size());
    result.ranked.reserve(take);
    for (std::size_t r = 0; r < take; ++r) {
        const FeatureRecord& rec = db.records[order[r]];
        result.ranked.push_back(
            {rec.id, rec.category,
             combined_distance(q.feature, rec.feature, weights, metric)});
    }
    return result;
}

double precision_at(const QueryResult& result, std::string_view truth_category,
                    std::size_t n) {
    if (n == 0 || n > result.ranked.size()) {
        throw NOutOfRange("n = " + std::to_string(n) + " outside 1.." +
                          std::to_string(result.ranked.size()));
    }
    std::size_t relevant = 0;
    for (std::size_t r = 0; r < n; ++r) {
        if (result.ranked[r].category == truth_category) {
            ++relevant;
        }
    }
    return static_cast<double>(relevant) / static_cast<double>(n);
}

double recall_at(const QueryResult& result, std::string_view truth_category,
                 std::size_t category_size, std::size_t n) {
    if (n == 0 || n > result.ranked.size()) {
        throw NOutOfRange("n = " + std::to_string(n) + " outside 1.." +
                          std::to_string(result.ranked.size()));
    }
    if (category_size == 0) {
        throw Error("category size must be positive");
    }
    std::size_t relevant = 0;
    for (std::size_t r = 0; r < n; ++r) {
        if (result.ranked[r].category == truth_category) {
            ++relevant;
        }
    }
    return static_cast<double>(relevant) / static_cast<double>(category_size);
}

EvalReport evaluate(const FeatureDatabase& db, const WeightVector& weights,
                    std::span<const int> n_list, const EvalOptions& options) {
    const std::size_t n_records = db.size();
    for (int n : n_list) {
        if (n < 1 || static_cast<std::size_t>(n) > n_records) {
            throw NOutOfRange("retrieval depth " + std::to_string(n) + " outside 1.." +
                              std::to_string(n_records));
        }
    }

    // Category id per record, matching db.categories order.
    std::vector<int> label(n_records);
    std::vector<std::size_t> cat_count(db.categories.size());
    for (std::size_t c = 0; c < db.categories.size(); ++c) {
        cat_count[c] = db.categories[c].second.size();
        for (std::size_t idx : db.categories[c].second) {
            label[idx] = static_cast<int>(c);
        }
    }

    // Per query: precision and recall at each n, plus recall at the
    // category-size cutoff feeding ARR.
    struct QueryRow {
        std::vector<double> precision;
        std::vector<double> recall;
        double arr_recall = 0.0;
    };
    std::vector<QueryRow> rows(n_records);

    parallel_for(n_records, options.threads, [&](std::size_t q) {
        const std::vector<std::size_t> order =
            rank_all(db, db.records[q].feature, weights, options.metric,
                     options.exclude_self ? static_cast<std::ptrdiff_t>(q) : -1);
        const std::size_t relevant_total =
            cat_count[label[q]] - (options.exclude_self ? 1 : 0);

        std::vector<std::size_t> relevant_prefix(order.size() + 1, 0);
        for (std::size_t r = 0; r < order.size(); ++r) {
            relevant_prefix[r + 1] =
                relevant_prefix[r] + (label[order[r]] == label[q] ? 1 : 0);
        }
        QueryRow& row = rows[q];
        row.precision.reserve(n_list.size());
        row.recall.reserve(n_list.size());
        for (int n : n_list) {
            const std::size_t depth = std::min<std::size_t>(n, order.size());
            row.precision.push_back(static_cast<double>(relevant_prefix[depth]) / n);
            row.recall.push_back(relevant_total == 0
                                     ? 1.0
                                     : static_cast<double>(relevant_prefix[depth]) /
                                           relevant_total);
        }
        const std::size_t arr_depth = std::min(relevant_total, order.size());
        row.arr_recall = relevant_total == 0
                             ? 1.0
                             : static_cast<double>(relevant_prefix[arr_depth]) /
                                   relevant_total;
    });

    EvalReport report;
    report.n_values.assign(n_list.begin(), n_list.end());
    report.precision_total.assign(n_list.size(), 0.0);
    report.recall_total.assign(n_list.size(), 0.0);
    report.f_score.assign(n_list.size(), 0.0);

    // Per-category means first, then the grand mean over categories.
    double arr_sum = 0.0;
    for (std::size_t c = 0; c < db.categories.size(); ++c) {
        const auto& members = db.categories[c].second;
        std::vector<double> cat_precision(n_list.size(), 0.0);
        std::vector<double> cat_recall(n_list.size(), 0.0);
        double cat_arr = 0.0;
        for (std::size_t idx : members) {
            for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
                cat_precision[ni] += rows[idx].precision[ni];
                cat_recall[ni] += rows[idx].recall[ni];
            }
            cat_arr += rows[idx].arr_recall;
        }
        for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
            cat_precision[ni] /= members.size();
            cat_recall[ni] /= members.size();
            report.precision_total[ni] += cat_precision[ni];
            report.recall_total[ni] += cat_recall[ni];
        }
        arr_sum += cat_arr / members.size();
        report.category_precision.emplace_back(db.categories[c].first,
                                               std::move(cat_precision));
    }
    const double k_categories = static_cast<double>(db.categories.size());
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        report.precision_total[ni] /= k_categories;
        report.recall_total[ni] /= k_categories;
        const double p = report.precision_total[ni];
        const double r = report.recall_total[ni];
        report.f_score[ni] = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }
    report.arr = 100.0 * arr_sum / k_categories;
    return report;
}

FeatureRecord canonicalize_precision(FeatureRecord rec) {
    for (double& v : rec.feature) {
        v = std::strtod(format_g9(v).c_str(), nullptr);
    }
    return rec;
}

std::string save_db(const FeatureDatabase& db) {
    std::string body = serialize_body(db.records, db.sigmas);
    char crc_line[24];
    std::snprintf(crc_line, sizeof(crc_line), "CRC32 %08x\n", crc32(body));
    return body + crc_line;
}

FeatureDatabase load_db(std::string_view bytes) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < bytes.size()) {
        std::size_t end = bytes.find('\n', start);
        if (end == std::string_view::npos) {
            end = bytes.size();
        }
        lines.push_back(bytes.substr(start, end - start));
        start = end + 1;
    }
    if (lines.empty() || lines[0].substr(0, 7) != "FLNIPDB") {
        throw BadMagic("not a FLNIPDB file");
    }
    if (lines[0] != "FLNIPDB 1") {
        throw VersionUnsupported("unsupported database version '" + std::string(lines[0]) +
                                 "'");
    }
    if (lines.size() < 2) {
        throw CorruptRecord("missing database header line");
    }

    const std::string header{lines[1]};
    std::size_t count = 0;
    std::size_t feature_len = 0;
    char sigma_buf[128] = {0};
    if (std::sscanf(header.c_str(), "%zu %zu %127s", &count, &feature_len, sigma_buf) != 3) {
        throw CorruptRecord("bad database header '" + header + "'");
    }
    if (count == 0 || feature_len != kFeatureLength) {
        throw CorruptRecord("unsupported record count or feature length in header");
    }

    std::vector<double> sigmas;
    {
        std::string_view list = sigma_buf;
        while (!list.empty()) {
            const std::size_t comma = list.find(',');
            const std::string token{list.substr(0, comma)};
            char* tail = nullptr;
            const double s = std::strtod(token.c_str(), &tail);
            if (tail == token.c_str() || *tail != '\0' || !std::isfinite(s) || s <= 0.0) {
                throw CorruptRecord("bad sigma value '" + token + "'");
            }
            sigmas.push_back(s);
            if (comma == std::string_view::npos) break;
            list.remove_prefix(comma + 1);
        }
        if (sigmas.size() != 3) {
            throw CorruptRecord("header must list exactly 3 sigmas");
        }
    }

    if (lines.size() < 2 + count + 1) {
        throw CorruptRecord("file truncated: expected " + std::to_string(count) +
                            " records");
    }
    std::vector<FeatureRecord> records;
    records.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        const std::string_view line = lines[2 + r];
        const std::size_t tab1 = line.find('\t');
        const std::size_t tab2 = tab1 == std::string_view::npos
                                     ? std::string_view::npos
                                     : line.find('\t', tab1 + 1);
        if (tab2 == std::string_view::npos) {
            throw CorruptRecord("record line " + std::to_string(r) + " lacks two tabs");
        }
        FeatureRecord rec;
        rec.id = std::string(line.substr(0, tab1));
        rec.category = std::string(line.substr(tab1 + 1, tab2 - tab1 - 1));
        rec.feature.reserve(feature_len);

        const std::string values{line.substr(tab2 + 1)};
        const char* p = values.c_str();
        for (std::size_t i = 0; i < feature_len; ++i) {
            char* tail = nullptr;
            const double v = std::strtod(p, &tail);
            if (tail == p || !std::isfinite(v) || v < 0.0 || v > 1.0) {
                throw CorruptRecord("record '" + rec.id + "' value " + std::to_string(i) +
                                    " is invalid");
            }
            rec.feature.push_back(v);
            p = tail;
        }
        while (*p == ' ') ++p;
        if (*p != '\0') {
            throw CorruptRecord("record '" + rec.id + "' has trailing data");
        }
        records.push_back(std::move(rec));
    }

    const std::string_view crc_line = lines[2 + count];
    if (crc_line.substr(0, 6) != "CRC32 " || crc_line.size() != 14) {
        throw CorruptRecord("missing CRC32 trailer");
    }
    for (std::size_t extra = 3 + count; extra < lines.size(); ++extra) {
        if (!lines[extra].empty()) {
            throw CorruptRecord("unexpected data after CRC32 trailer");
        }
    }
    const std::uint32_t stored =
        static_cast<std::uint32_t>(std::strtoul(std::string(crc_line.substr(6)).c_str(),
                                                nullptr, 16));

    // The checksum covers the canonical re-encoding of the parsed values,
    // so any byte that survives parsing but alters content is caught.
    if (crc32(serialize_body(records, sigmas)) != stored) {
        throw ChecksumMismatch("stored CRC32 does not match content");
    }

    try {
        return FeatureDatabase::assemble(std::move(records), std::move(sigmas), 1e-6);
    } catch (const DuplicateId&) {
        throw;
    } catch (const Error& e) {
        throw CorruptRecord(e.what());
    }
}

} // namespace flnip
