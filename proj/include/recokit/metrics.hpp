#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"

namespace recokit {

inline constexpr std::array<const char*, 4> kRatingMetricNames = {
    "rmse", "mae", "r_squared", "explained_variance"};
inline constexpr std::array<const char*, 5> kRankingMetricNames = {
    "precision_at_k", "recall_at_k", "ndcg_at_k", "map_at_k", "catalog_coverage"};

inline bool is_rating_metric(const std::string& name) {
    for (const char* m : kRatingMetricNames)
        if (name == m) return true;
    return false;
}

inline bool is_ranking_metric(const std::string& name) {
    for (const char* m : kRankingMetricNames)
        if (name == m) return true;
    return false;
}

/// Metric name -> value. A metric can be undefined on a given input (for
/// example r_squared under constant truth); that is an explicit absent
/// marker, never NaN.
struct MetricReport {
    std::map<std::string, std::optional<double>> values;
    int k = 0;
    std::size_t n_users_evaluated = 0;

    std::optional<double> get(const std::string& name) const {
        auto it = values.find(name);
        if (it == values.end()) return std::nullopt;
        return it->second;
    }
};

/// All nine metric keys are always present; undefined ones serialize as null.
inline nlohmann::json report_to_json(const MetricReport& report) {
    nlohmann::json j;
    auto put = [&](const char* name) {
        const auto v = report.get(name);
        if (v)
            j[name] = *v;
        else
            j[name] = nullptr;
    };
    for (const char* name : kRatingMetricNames) put(name);
    for (const char* name : kRankingMetricNames) put(name);
    j["k"] = report.k;
    j["n_users_evaluated"] = report.n_users_evaluated;
    return j;
}

// ---- rating metrics -------------------------------------------------------

/// A scored (user, item) pair keyed by external ids.
struct ScoredPair {
    std::string user;
    std::string item;
    double score = 0.0;
};

/// Inner join of truth against predictions on (user, item), carried in the
/// truth set's dense ids.
struct RatingPairs {
    struct Pair {
        std::size_t user;
        std::size_t item;
        double truth;
        double predicted;
    };
    std::vector<Pair> pairs;
    std::size_t dropped_truth = 0;
    std::size_t dropped_predictions = 0;
};

namespace detail {
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};
}  // namespace detail

/// Unmatched rows on either side are dropped and counted. Duplicate keys on
/// either side keep the last occurrence.
inline RatingPairs join_rating_pairs(const InteractionSet& truth,
                                     const std::vector<ScoredPair>& predictions) {
    const std::size_t n_items = truth.n_items();
    std::unordered_map<std::uint64_t, double> truth_values;
    truth_values.reserve(truth.size());
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const std::uint64_t key =
            static_cast<std::uint64_t>(truth.user_of(k)) * n_items + truth.item_of(k);
        truth_values[key] = truth.interactions()[k].rating;
    }

    std::unordered_map<std::uint64_t, double> pred_values;
    pred_values.reserve(predictions.size());
    std::size_t unmatched_preds = 0;
    for (const auto& p : predictions) {
        const auto u = truth.user_index().find(p.user);
        const auto i = truth.item_index().find(p.item);
        if (!u || !i) {
            ++unmatched_preds;
            continue;
        }
        const std::uint64_t key = static_cast<std::uint64_t>(*u) * n_items + *i;
        if (truth_values.find(key) == truth_values.end()) {
            ++unmatched_preds;
            continue;
        }
        auto [it, inserted] = pred_values.try_emplace(key, p.score);
        if (!inserted) it->second = p.score;  // keep last
    }

    RatingPairs out;
    out.pairs.reserve(pred_values.size());
    for (const auto& [key, t] : truth_values) {
        auto it = pred_values.find(key);
        if (it == pred_values.end()) {
            ++out.dropped_truth;
            continue;
        }
        out.pairs.push_back(RatingPairs::Pair{static_cast<std::size_t>(key / n_items),
                                              static_cast<std::size_t>(key % n_items), t,
                                              it->second});
    }
    out.dropped_predictions = unmatched_preds;
    if (out.pairs.empty()) throw EmptyJoinError("no (user, item) keys matched");

    // canonical order for bit-stable accumulation downstream
    std::sort(out.pairs.begin(), out.pairs.end(), [](const auto& a, const auto& b) {
        return a.user != b.user ? a.user < b.user : a.item < b.item;
    });
    return out;
}

/// rmse, mae, r_squared, explained_variance over matched pairs.
/// Accumulation is compensated two-pass, so pair order perturbs nothing
/// beyond ~1e-15. r_squared and explained_variance need at least two pairs
/// and non-constant truth; otherwise they come back undefined.
inline MetricReport evaluate_rating(const RatingPairs& joined) {
    const auto& pairs = joined.pairs;
    if (pairs.empty()) throw EmptyJoinError("evaluate_rating: no pairs");
    const double n = static_cast<double>(pairs.size());

    detail::KahanSum sum_truth, sum_err;
    for (const auto& p : pairs) {
        sum_truth.add(p.truth);
        sum_err.add(p.truth - p.predicted);
    }
    const double mean_truth = sum_truth.value() / n;
    const double mean_err = sum_err.value() / n;

    detail::KahanSum sq_err, abs_err, sq_dev_truth, sq_dev_err;
    for (const auto& p : pairs) {
        const double e = p.truth - p.predicted;
        sq_err.add(e * e);
        abs_err.add(std::abs(e));
        sq_dev_truth.add((p.truth - mean_truth) * (p.truth - mean_truth));
        sq_dev_err.add((e - mean_err) * (e - mean_err));
    }

    MetricReport report;
    report.values["rmse"] = std::sqrt(sq_err.value() / n);
    report.values["mae"] = abs_err.value() / n;
    if (pairs.size() >= 2 && sq_dev_truth.value() > 0.0) {
        report.values["r_squared"] = 1.0 - sq_err.value() / sq_dev_truth.value();
        report.values["explained_variance"] = 1.0 - sq_dev_err.value() / sq_dev_truth.value();
    } else {
        report.values["r_squared"] = std::nullopt;
        report.values["explained_variance"] = std::nullopt;
    }
    return report;
}

// ---- ranking metrics ------------------------------------------------------

/// One recommendation row as it appears on disk: rank is 1-based within the
/// user's list.
struct RecRow {
    std::string user;
    std::string item;
    double score = 0.0;
    int rank = 0;
};

/// Per-user ranked recommendation lists plus the relevant-item sets they are
/// judged against. Users are held in ascending dense-id order and each has
/// at least one relevant item.
struct RankedLists {
    struct UserList {
        std::size_t user;
        std::vector<std::size_t> ranked;            // item ids, best first
        std::vector<std::size_t> relevant_sorted;   // ascending item ids
    };
    std::vector<UserList> users;
    std::size_t n_items = 0;            // catalog size for coverage
    std::size_t n_users_excluded = 0;   // had a list but no relevant items
};

/**
 * Assembles RankedLists from a truth set and recommendation rows.
 *
 * The evaluation id universe is truth first, then recommendations, in first
 * appearance order. An item is relevant when any truth rating for it
 * reaches `relevance_threshold` (every truth item when the threshold is
 * absent). Users whose lists have no relevant counterpart are excluded and
 * counted.
 */
inline RankedLists build_ranked_lists(const InteractionSet& truth,
                                      const std::vector<RecRow>& recommendations,
                                      std::optional<double> relevance_threshold = std::nullopt) {
    IdIndex users;
    IdIndex items;
    for (const auto& inter : truth.interactions()) {
        users.intern(inter.user);
        items.intern(inter.item);
    }
    for (const auto& row : recommendations) {
        users.intern(row.user);
        items.intern(row.item);
    }

    // relevant items per user (max rating across duplicates decides)
    std::unordered_map<std::uint64_t, double> best_rating;
    const std::size_t n_items = items.size();
    for (const auto& inter : truth.interactions()) {
        const std::uint64_t key =
            static_cast<std::uint64_t>(*users.find(inter.user)) * n_items + *items.find(inter.item);
        auto [it, inserted] = best_rating.try_emplace(key, inter.rating);
        if (!inserted) it->second = std::max(it->second, inter.rating);
    }
    std::vector<std::vector<std::size_t>> relevant(users.size());
    for (const auto& [key, rating] : best_rating) {
        if (relevance_threshold && rating < *relevance_threshold) continue;
        relevant[key / n_items].push_back(key % n_items);
    }
    for (auto& r : relevant) std::sort(r.begin(), r.end());

    // lists per user, ordered by the rank column
    std::vector<std::vector<std::pair<int, std::size_t>>> lists(users.size());
    for (const auto& row : recommendations) {
        lists[*users.find(row.user)].emplace_back(row.rank, *items.find(row.item));
    }

    RankedLists out;
    out.n_items = n_items;
    for (std::size_t u = 0; u < users.size(); ++u) {
        if (lists[u].empty()) continue;
        if (relevant[u].empty()) {
            ++out.n_users_excluded;
            continue;
        }
        std::stable_sort(lists[u].begin(), lists[u].end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        RankedLists::UserList ul;
        ul.user = u;
        ul.ranked.reserve(lists[u].size());
        for (const auto& [rank, item] : lists[u]) {
            if (std::find(ul.ranked.begin(), ul.ranked.end(), item) != ul.ranked.end())
                throw Error("duplicate item in recommendation list for user " + users.id_of(u));
            ul.ranked.push_back(item);
        }
        ul.relevant_sorted = relevant[u];
        out.users.push_back(std::move(ul));
    }
    return out;  // users already ascend by dense id
}

/**
 * Macro-averaged ranking metrics at cutoff k with binary relevance.
 *
 *   precision@k = |top_k intersect rel| / k
 *   recall@k    = |top_k intersect rel| / |rel|
 *   ndcg@k      = sum_hits 1/log2(rank+1, normalized by the ideal placement
 *                 of min(|rel|, k) hits
 *   map@k       = mean of precision@rank over hit ranks / min(|rel|, k)
 *
 * catalog_coverage is the fraction of the catalog appearing in any top-k
 * list; it is not per-user averaged.
 */
inline MetricReport evaluate_ranking(const RankedLists& lists, int k) {
    if (k < 1) throw InvalidCutoffError("k must be >= 1, got " + std::to_string(k));
    if (lists.users.empty()) throw NoEvaluableUsersError("no users with relevant items");

    detail::KahanSum precision_sum, recall_sum, ndcg_sum, map_sum;
    std::vector<bool> recommended(lists.n_items, false);

    for (const auto& ul : lists.users) {
        const std::size_t cutoff = std::min<std::size_t>(ul.ranked.size(), static_cast<std::size_t>(k));
        const std::size_t n_rel = ul.relevant_sorted.size();
        std::size_t hits = 0;
        double dcg = 0.0;
        double ap_sum = 0.0;
        for (std::size_t j = 0; j < cutoff; ++j) {
            const std::size_t item = ul.ranked[j];
            recommended[item] = true;
            const bool hit = std::binary_search(ul.relevant_sorted.begin(),
                                                ul.relevant_sorted.end(), item);
            if (!hit) continue;
            ++hits;
            dcg += 1.0 / std::log2(static_cast<double>(j) + 2.0);
            ap_sum += static_cast<double>(hits) / static_cast<double>(j + 1);
        }
        const std::size_t ideal = std::min<std::size_t>(n_rel, static_cast<std::size_t>(k));
        double idcg = 0.0;
        for (std::size_t j = 0; j < ideal; ++j) idcg += 1.0 / std::log2(static_cast<double>(j) + 2.0);

        precision_sum.add(static_cast<double>(hits) / static_cast<double>(k));
        recall_sum.add(static_cast<double>(hits) / static_cast<double>(n_rel));
        ndcg_sum.add(idcg > 0.0 ? dcg / idcg : 0.0);
        map_sum.add(ap_sum / static_cast<double>(ideal));
    }

    const double n = static_cast<double>(lists.users.size());
    std::size_t distinct = 0;
    for (bool b : recommended) distinct += b ? 1 : 0;

    MetricReport report;
    report.k = k;
    report.n_users_evaluated = lists.users.size();
    report.values["precision_at_k"] = precision_sum.value() / n;
    report.values["recall_at_k"] = recall_sum.value() / n;
    report.values["ndcg_at_k"] = ndcg_sum.value() / n;
    report.values["map_at_k"] = map_sum.value() / n;
    report.values["catalog_coverage"] =
        lists.n_items > 0 ? static_cast<double>(distinct) / static_cast<double>(lists.n_items) : 0.0;
    return report;
}

/// One report carrying both families; either side may be absent (undefined).
inline MetricReport merge_reports(const std::optional<MetricReport>& rating,
                                  const std::optional<MetricReport>& ranking, int k) {
    MetricReport merged;
    merged.k = k;
    for (const char* name : kRatingMetricNames)
        merged.values[name] = rating ? rating->get(name) : std::nullopt;
    for (const char* name : kRankingMetricNames)
        merged.values[name] = ranking ? ranking->get(name) : std::nullopt;
    merged.n_users_evaluated = ranking ? ranking->n_users_evaluated : 0;
    return merged;
}

}  // namespace recokit
