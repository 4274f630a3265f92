#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/metrics.hpp"

namespace recokit {

struct ScoredItem {
    std::size_t item;
    double score;
};

namespace detail {

/// Top-k by score descending, ties by ascending item id. `skip_sorted` is an
/// ascending id list to exclude. Returns at most k entries.
inline std::vector<ScoredItem> top_k_items(const std::vector<double>& scores, std::size_t k,
                                           const std::vector<std::size_t>& skip_sorted) {
    std::vector<std::size_t> eligible;
    eligible.reserve(scores.size());
    std::size_t skip_pos = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        while (skip_pos < skip_sorted.size() && skip_sorted[skip_pos] < i) ++skip_pos;
        if (skip_pos < skip_sorted.size() && skip_sorted[skip_pos] == i) continue;
        eligible.push_back(i);
    }
    const auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    };
    const std::size_t take = std::min(k, eligible.size());
    std::partial_sort(eligible.begin(), eligible.begin() + take, eligible.end(), better);
    std::vector<ScoredItem> out;
    out.reserve(take);
    for (std::size_t j = 0; j < take; ++j) out.push_back({eligible[j], scores[eligible[j]]});
    return out;
}

}  // namespace detail

/**
 * A fitted recommender. Dense user/item ids refer to the training set's
 * interning order; ids at or past the index size take the model's cold
 * path instead of faulting. recommend() is always consistent with
 * predict(): it ranks the same scores that score_user() produces.
 */
class Model {
public:
    virtual ~Model() = default;

    virtual std::string algorithm() const = 0;
    virtual double predict(std::size_t user, std::size_t item) const = 0;
    virtual void score_user(std::size_t user, std::vector<double>& scores) const = 0;

    std::size_t n_users() const { return users_ ? users_->size() : 0; }
    std::size_t n_items() const { return items_ ? items_->size() : 0; }
    const IdIndex& user_index() const { return *users_; }
    const IdIndex& item_index() const { return *items_; }
    std::shared_ptr<const IdIndex> user_index_ptr() const { return users_; }
    std::shared_ptr<const IdIndex> item_index_ptr() const { return items_; }

    const std::vector<std::size_t>& seen_items(std::size_t user) const {
        static const std::vector<std::size_t> kNone;
        return user < seen_.size() ? seen_[user] : kNone;
    }

    /// Top-k by descending score, ties to the lower item id. With
    /// remove_seen, training items of that user are excluded first; an
    /// unknown user has nothing to exclude.
    std::vector<ScoredItem> recommend(std::size_t user, std::size_t k,
                                      bool remove_seen = true) const {
        static const std::vector<std::size_t> kNone;
        std::vector<double> scores;
        score_user(user, scores);
        const auto& skip = remove_seen ? seen_items(user) : kNone;
        return detail::top_k_items(scores, k, skip);
    }

    double predict_id(const std::string& user, const std::string& item) const {
        const auto u = users_->find(user);
        const auto i = items_->find(item);
        return predict(u.value_or(n_users()), i.value_or(n_items()));
    }

    std::vector<ScoredItem> recommend_id(const std::string& user, std::size_t k,
                                         bool remove_seen = true) const {
        const auto u = users_->find(user);
        return recommend(u.value_or(n_users()), k, remove_seen);
    }

protected:
    std::shared_ptr<const IdIndex> users_;
    std::shared_ptr<const IdIndex> items_;
    std::vector<std::vector<std::size_t>> seen_;

    /// Captures the id universe and per-user seen sets from the training set.
    void capture_base(const InteractionSet& train) {
        users_ = train.user_index_ptr();
        items_ = train.item_index_ptr();
        seen_.assign(users_->size(), {});
        for (std::size_t k = 0; k < train.size(); ++k) seen_[train.user_of(k)].push_back(train.item_of(k));
        for (auto& s : seen_) {
            std::sort(s.begin(), s.end());
            s.erase(std::unique(s.begin(), s.end()), s.end());
        }
    }
};

/// Scores external-id pairs; unknown ids route through the cold path.
inline std::vector<ScoredPair> predict_batch(
    const Model& model, const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<ScoredPair> out;
    out.reserve(pairs.size());
    for (const auto& [user, item] : pairs)
        out.push_back({user, item, model.predict_id(user, item)});
    return out;
}

/// Top-k rows for the given external users, rank starting at 1 per user.
inline std::vector<RecRow> recommend_rows(const Model& model,
                                          const std::vector<std::string>& users, std::size_t k,
                                          bool remove_seen = true) {
    std::vector<RecRow> out;
    for (const auto& user : users) {
        const auto scored = model.recommend_id(user, k, remove_seen);
        int rank = 1;
        for (const auto& s : scored)
            out.push_back({user, model.item_index().id_of(s.item), s.score, rank++});
    }
    return out;
}

/// Top-k rows for every training user in dense-id order.
inline std::vector<RecRow> recommend_rows(const Model& model, std::size_t k,
                                          bool remove_seen = true) {
    return recommend_rows(model, model.user_index().ids(), k, remove_seen);
}

}  // namespace recokit
