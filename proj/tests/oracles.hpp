#pragma once

// Independent brute-force reference implementations used to cross-check the
// library. Everything here is written naively on purpose: triple loops,
// textbook formulas, no shared code with the implementations under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "recokit/interactions.hpp"
#include "recokit/rng.hpp"

namespace oracle {

// ---- rating metrics -------------------------------------------------------

struct RatingMetrics {
    double rmse = 0.0;
    double mae = 0.0;
    bool defined_r2 = false;
    double r_squared = 0.0;
    double explained_variance = 0.0;
};

inline RatingMetrics rating_metrics(const std::vector<double>& truth,
                                    const std::vector<double>& pred) {
    const std::size_t n = truth.size();
    RatingMetrics m;
    double sse = 0.0, sae = 0.0, mean_t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = truth[i] - pred[i];
        sse += e * e;
        sae += std::abs(e);
        mean_t += truth[i];
    }
    mean_t /= static_cast<double>(n);
    m.rmse = std::sqrt(sse / static_cast<double>(n));
    m.mae = sae / static_cast<double>(n);
    double sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) sst += (truth[i] - mean_t) * (truth[i] - mean_t);
    if (n >= 2 && sst > 0.0) {
        m.defined_r2 = true;
        m.r_squared = 1.0 - sse / sst;
        double mean_e = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean_e += truth[i] - pred[i];
        mean_e /= static_cast<double>(n);
        double var_e = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (truth[i] - pred[i]) - mean_e;
            var_e += d * d;
        }
        m.explained_variance = 1.0 - var_e / sst;
    }
    return m;
}

// ---- ranking metrics ------------------------------------------------------

struct RankedUser {
    std::vector<int> ranked;  // item ids, best first
    std::set<int> relevant;
};

struct RankingMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double ndcg = 0.0;
    double map = 0.0;
    double coverage = 0.0;
};

inline RankingMetrics ranking_metrics(const std::vector<RankedUser>& users, int k, int n_items) {
    RankingMetrics m;
    std::set<int> recommended;
    for (const auto& u : users) {
        int hits = 0;
        double dcg = 0.0, ap = 0.0;
        for (int j = 0; j < k && j < static_cast<int>(u.ranked.size()); ++j) {
            recommended.insert(u.ranked[j]);
            if (u.relevant.count(u.ranked[j])) {
                ++hits;
                dcg += 1.0 / std::log2(j + 2.0);
                ap += static_cast<double>(hits) / (j + 1);
            }
        }
        const int ideal = std::min<int>(static_cast<int>(u.relevant.size()), k);
        double idcg = 0.0;
        for (int j = 0; j < ideal; ++j) idcg += 1.0 / std::log2(j + 2.0);
        m.precision += static_cast<double>(hits) / k;
        m.recall += static_cast<double>(hits) / static_cast<double>(u.relevant.size());
        m.ndcg += idcg > 0.0 ? dcg / idcg : 0.0;
        m.map += ap / ideal;
    }
    const double n = static_cast<double>(users.size());
    m.precision /= n;
    m.recall /= n;
    m.ndcg /= n;
    m.map /= n;
    m.coverage = static_cast<double>(recommended.size()) / n_items;
    return m;
}

// ---- SAR ------------------------------------------------------------------

/// predict(u, i) by the definition: binarize, count co-occurrences with a
/// triple loop, apply the similarity formula, multiply by raw affinity.
struct SarOracle {
    std::vector<std::vector<int>> b;       // n_users x n_items, 0/1
    std::vector<std::vector<double>> a;    // raw affinity
    std::vector<std::vector<double>> s;    // similarity

    SarOracle(const std::vector<recokit::Interaction>& events, int n_users, int n_items,
              const std::string& kind, double half_life, std::int64_t t_ref,
              bool rating_as_weight,
              const std::map<std::string, int>& user_ids,
              const std::map<std::string, int>& item_ids) {
        b.assign(n_users, std::vector<int>(n_items, 0));
        a.assign(n_users, std::vector<double>(n_items, 0.0));
        for (const auto& ev : events) {
            const int u = user_ids.at(ev.user);
            const int i = item_ids.at(ev.item);
            b[u][i] = 1;
            const double w = rating_as_weight ? ev.rating : 1.0;
            const double decay =
                half_life > 0.0
                    ? std::pow(2.0, -static_cast<double>(t_ref - ev.timestamp) / half_life)
                    : 1.0;
            a[u][i] += w * decay;
        }
        std::vector<std::vector<double>> c(n_items, std::vector<double>(n_items, 0.0));
        for (int i = 0; i < n_items; ++i)
            for (int j = 0; j < n_items; ++j)
                for (int u = 0; u < n_users; ++u) c[i][j] += b[u][i] * b[u][j];
        s.assign(n_items, std::vector<double>(n_items, 0.0));
        for (int i = 0; i < n_items; ++i) {
            for (int j = 0; j < n_items; ++j) {
                if (kind == "count") {
                    s[i][j] = c[i][j];
                } else if (kind == "jaccard") {
                    const double d = c[i][i] + c[j][j] - c[i][j];
                    s[i][j] = d != 0.0 ? c[i][j] / d : 0.0;
                } else {
                    const double d = c[i][i] * c[j][j];
                    s[i][j] = d != 0.0 ? c[i][j] / d : 0.0;
                }
            }
        }
    }

    double predict(int u, int i) const {
        double score = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j) score += a[u][j] * s[j][i];
        return score;
    }
};

// ---- dense linear solve ---------------------------------------------------

/// Gaussian elimination with partial pivoting; solves A x = rhs in place.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double acc = rhs[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

// ---- random instances -----------------------------------------------------

/// Random interaction list over u<n_users>, i<n_items> external ids.
/// Duplicate (user, item) pairs allowed.
inline std::vector<recokit::Interaction> random_interactions(recokit::Rng& rng,
                                                             std::size_t n_users,
                                                             std::size_t n_items, std::size_t n,
                                                             double rating_lo = 1.0,
                                                             double rating_hi = 5.0) {
    std::vector<recokit::Interaction> events;
    events.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        recokit::Interaction ev;
        ev.user = "u" + std::to_string(rng.bounded(n_users));
        ev.item = "i" + std::to_string(rng.bounded(n_items));
        ev.rating = rng.uniform(rating_lo, rating_hi);
        ev.timestamp = static_cast<std::int64_t>(rng.bounded(1000000));
        events.push_back(ev);
    }
    return events;
}

}  // namespace oracle
