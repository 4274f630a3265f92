#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/model.hpp"

namespace recokit {

enum class SarSimilarity { count, jaccard, lift };

inline const char* to_string(SarSimilarity s) {
    switch (s) {
        case SarSimilarity::count: return "count";
        case SarSimilarity::jaccard: return "jaccard";
        case SarSimilarity::lift: return "lift";
    }
    return "?";
}

inline std::optional<SarSimilarity> parse_sar_similarity(const std::string& s) {
    if (s == "count") return SarSimilarity::count;
    if (s == "jaccard") return SarSimilarity::jaccard;
    if (s == "lift") return SarSimilarity::lift;
    return std::nullopt;
}

struct SarParams {
    SarSimilarity similarity = SarSimilarity::jaccard;
    std::optional<double> half_life_seconds;   // absent: no decay
    std::optional<std::int64_t> reference_time;  // absent: max train timestamp
    bool rating_as_weight = false;
};

/// Dense item-item co-occurrence C = B^T B over the binarized incidence B
/// (b_ui = 1 iff the user touched the item at least once). Row-major
/// n_items x n_items; c_ii is item i's distinct-user count.
inline std::vector<double> sar_cooccurrence(const InteractionSet& train) {
    if (train.empty()) throw EmptyDatasetError("sar_cooccurrence: empty training set");
    const std::size_t n_items = train.n_items();
    std::vector<std::vector<std::size_t>> by_user(train.n_users());
    for (std::size_t k = 0; k < train.size(); ++k) by_user[train.user_of(k)].push_back(train.item_of(k));
    std::vector<double> c(n_items * n_items, 0.0);
    for (auto& items : by_user) {
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
        for (std::size_t a : items)
            for (std::size_t b : items) c[a * n_items + b] += 1.0;
    }
    return c;
}

/// count: S = C. jaccard: s_ij = c_ij / (c_ii + c_jj - c_ij).
/// lift: s_ij = c_ij / (c_ii * c_jj). Zero denominators give 0.
inline std::vector<double> sar_similarity(const std::vector<double>& c, std::size_t n_items,
                                          SarSimilarity kind) {
    if (kind == SarSimilarity::count) return c;
    std::vector<double> s(c.size(), 0.0);
    for (std::size_t i = 0; i < n_items; ++i) {
        for (std::size_t j = 0; j < n_items; ++j) {
            const double cij = c[i * n_items + j];
            const double denom = kind == SarSimilarity::jaccard
                                     ? c[i * n_items + i] + c[j * n_items + j] - cij
                                     : c[i * n_items + i] * c[j * n_items + j];
            s[i * n_items + j] = denom != 0.0 ? cij / denom : 0.0;
        }
    }
    return s;
}

/// Affinity a_ui = sum over u's events on i of w * 2^(-(t_ref - t) / half_life),
/// w = rating when rating_as_weight, else 1. No half_life: plain weighted
/// event count. Every event contributes, duplicates included.
inline std::vector<double> sar_affinity(const InteractionSet& train, const SarParams& params) {
    if (train.empty()) throw EmptyDatasetError("sar_affinity: empty training set");
    if (params.half_life_seconds && *params.half_life_seconds <= 0.0)
        throw InvalidSpecError("sar: half_life_seconds must be > 0");

    std::int64_t t_ref = 0;
    if (params.half_life_seconds) {
        std::int64_t t_max = train.interactions().front().timestamp;
        for (const auto& inter : train.interactions()) t_max = std::max(t_max, inter.timestamp);
        t_ref = params.reference_time.value_or(t_max);
        if (t_ref < t_max)
            throw InvalidReferenceTimeError("reference_time " + std::to_string(t_ref) +
                                            " precedes max train timestamp " + std::to_string(t_max));
    }

    const std::size_t n_items = train.n_items();
    std::vector<double> a(train.n_users() * n_items, 0.0);
    for (const auto& inter : train.interactions()) {
        const std::size_t u = *train.user_index().find(inter.user);
        const std::size_t i = *train.item_index().find(inter.item);
        const double w = params.rating_as_weight ? inter.rating : 1.0;
        double decay = 1.0;
        if (params.half_life_seconds)
            decay = std::exp2(-static_cast<double>(t_ref - inter.timestamp) / *params.half_life_seconds);
        a[u * n_items + i] += w * decay;
    }
    return a;
}

/**
 * SAR: predict(u, i) = (A * S)_ui with A the user-item affinity and S the
 * item-item similarity. A cold user predicts 0 for every item but is
 * recommended the popularity ordering instead, so recommend never goes
 * degenerate.
 */
class SarModel final : public Model {
public:
    std::string algorithm() const override { return "sar"; }

    double predict(std::size_t user, std::size_t item) const override {
        const std::size_t n_items = this->n_items();
        if (user >= n_users() || item >= n_items) return 0.0;
        double score = 0.0;
        for (std::size_t j = 0; j < n_items; ++j)
            score += affinity_[user * n_items + j] * similarity_[j * n_items + item];
        return score;
    }

    void score_user(std::size_t user, std::vector<double>& scores) const override {
        const std::size_t n_items = this->n_items();
        if (user >= n_users()) {
            scores = popularity_;  // cold fallback
            return;
        }
        scores.assign(n_items, 0.0);
        for (std::size_t j = 0; j < n_items; ++j) {
            const double a = affinity_[user * n_items + j];
            if (a == 0.0) continue;
            const double* srow = similarity_.data() + j * n_items;
            for (std::size_t i = 0; i < n_items; ++i) scores[i] += a * srow[i];
        }
    }

    const SarParams& params() const { return params_; }
    const std::vector<double>& affinity() const { return affinity_; }
    const std::vector<double>& similarity() const { return similarity_; }
    const std::vector<double>& popularity() const { return popularity_; }

    static SarModel fit(const InteractionSet& train, const SarParams& params = {}) {
        if (train.empty()) throw EmptyDatasetError("sar: empty training set");
        SarModel model;
        model.capture_base(train);
        model.params_ = params;
        const auto c = sar_cooccurrence(train);
        model.similarity_ = sar_similarity(c, train.n_items(), params.similarity);
        model.affinity_ = sar_affinity(train, params);
        model.popularity_.assign(train.n_items(), 0.0);
        for (std::size_t k = 0; k < train.size(); ++k) model.popularity_[train.item_of(k)] += 1.0;
        return model;
    }

private:
    friend struct ModelCodec;
    SarParams params_;
    std::vector<double> affinity_;    // n_users x n_items
    std::vector<double> similarity_;  // n_items x n_items
    std::vector<double> popularity_;  // cold-user scores
};

}  // namespace recokit
