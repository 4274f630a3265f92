#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "recokit/interactions.hpp"
#include "recokit/model.hpp"
#include "recokit/models/als.hpp"
#include "recokit/models/popularity.hpp"
#include "recokit/models/sar.hpp"
#include "recokit/models/sgd_mf.hpp"
#include "recokit/rng.hpp"
#include "oracles.hpp"

using namespace recokit;

namespace {

InteractionSet counts_set(const std::vector<std::size_t>& per_item) {
    // distinct users per event keep co-occurrence out of the picture
    std::vector<Interaction> rows;
    int u = 0;
    for (std::size_t i = 0; i < per_item.size(); ++i)
        for (std::size_t c = 0; c < per_item[i]; ++c)
            rows.push_back({"u" + std::to_string(u++), "i" + std::to_string(i), 1.0, 0});
    return InteractionSet::build(rows);
}

TEST(PopularityTest, RanksByInteractionCount) {
    const auto train = counts_set({5, 2, 7});
    const auto model = PopularityModel::fit(train);
    EXPECT_DOUBLE_EQ(model.predict(0, 0), 5.0);
    EXPECT_DOUBLE_EQ(model.predict(99, 1), 2.0);  // user-independent
    EXPECT_DOUBLE_EQ(model.predict(0, 2), 7.0);
    const auto top = model.recommend(0, 3, false);
    ASSERT_EQ(top.size(), 3u);
    EXPECT_EQ(top[0].item, 2u);
    EXPECT_EQ(top[1].item, 0u);
    EXPECT_EQ(top[2].item, 1u);
}

TEST(PopularityTest, CountsIgnoreRatings) {
    const auto train = InteractionSet::build({
        {"u0", "i0", 5.0, 0},
        {"u1", "i0", 5.0, 0},
        {"u2", "i1", 0.5, 0},  // low rating, but 3 events
        {"u3", "i1", 0.5, 0},
        {"u4", "i1", 0.5, 0},
    });
    const auto model = PopularityModel::fit(train);
    EXPECT_DOUBLE_EQ(model.predict(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(model.predict(0, 1), 3.0);
    EXPECT_EQ(model.recommend(0, 1, false)[0].item, 1u);
}

TEST(PopularityTest, TiesGoToTheLowerItemId) {
    const auto train = counts_set({3, 3, 3});
    const auto model = PopularityModel::fit(train);
    const auto top = model.recommend(0, 3, false);
    EXPECT_EQ(top[0].item, 0u);
    EXPECT_EQ(top[1].item, 1u);
    EXPECT_EQ(top[2].item, 2u);
}

TEST(PopularityTest, RemoveSeenMasksTrainingItems) {
    const auto train = InteractionSet::build({
        {"u0", "i0", 1.0, 0},
        {"u0", "i1", 1.0, 0},
        {"u1", "i0", 1.0, 0},
        {"u1", "i2", 1.0, 0},
    });
    const auto model = PopularityModel::fit(train);
    const auto top = model.recommend(0, 3, true);  // u0 saw i0, i1
    ASSERT_EQ(top.size(), 1u);
    EXPECT_EQ(top[0].item, 2u);
}

TEST(SarTest, CooccurrenceCountsDistinctUsers) {
    // u0:{i0,i1}, u1:{i0,i2}, u2:{i0}; duplicates binarized
    const auto train = InteractionSet::build({
        {"u0", "i0", 1.0, 0},
        {"u0", "i0", 1.0, 5},  // duplicate event, still one user
        {"u0", "i1", 1.0, 0},
        {"u1", "i0", 1.0, 0},
        {"u1", "i2", 1.0, 0},
        {"u2", "i0", 1.0, 0},
    });
    const auto c = sar_cooccurrence(train);
    const std::size_t n = 3;
    EXPECT_DOUBLE_EQ(c[0 * n + 0], 3.0);
    EXPECT_DOUBLE_EQ(c[1 * n + 1], 1.0);
    EXPECT_DOUBLE_EQ(c[2 * n + 2], 1.0);
    EXPECT_DOUBLE_EQ(c[0 * n + 1], 1.0);
    EXPECT_DOUBLE_EQ(c[1 * n + 0], 1.0);
    EXPECT_DOUBLE_EQ(c[0 * n + 2], 1.0);
    EXPECT_DOUBLE_EQ(c[1 * n + 2], 0.0);
}

TEST(SarTest, SimilarityKindsMatchHandValues) {
    // c_00=2, c_11=1, c_01=1
    const std::vector<double> c = {2.0, 1.0, 1.0, 1.0};
    const auto jac = sar_similarity(c, 2, SarSimilarity::jaccard);
    EXPECT_DOUBLE_EQ(jac[0 * 2 + 1], 0.5);  // 1/(2+1-1)
    EXPECT_DOUBLE_EQ(jac[0 * 2 + 0], 1.0);  // jaccard diagonal
    EXPECT_DOUBLE_EQ(jac[1 * 2 + 1], 1.0);
    const auto lift = sar_similarity(c, 2, SarSimilarity::lift);
    EXPECT_DOUBLE_EQ(lift[0 * 2 + 1], 0.5);  // 1/(2*1)
    EXPECT_DOUBLE_EQ(lift[0 * 2 + 0], 0.5);  // 2/4
    const auto count = sar_similarity(c, 2, SarSimilarity::count);
    EXPECT_TRUE(count == c);
}

TEST(SarTest, ZeroDenominatorsGiveZeroSimilarity) {
    // item 1 never interacts: c_11 = 0
    const std::vector<double> c = {2.0, 0.0, 0.0, 0.0};
    const auto jac = sar_similarity(c, 2, SarSimilarity::jaccard);
    EXPECT_DOUBLE_EQ(jac[1 * 2 + 1], 0.0);
    const auto lift = sar_similarity(c, 2, SarSimilarity::lift);
    EXPECT_DOUBLE_EQ(lift[0 * 2 + 1], 0.0);
    EXPECT_DOUBLE_EQ(lift[1 * 2 + 1], 0.0);
}

TEST(SarTest, AffinityWithoutDecayIsWeightedEventCount) {
    const auto train = InteractionSet::build({
        {"u0", "i0", 2.0, 10},
        {"u0", "i0", 3.0, 20},
        {"u0", "i0", 4.0, 30},
    });
    SarParams params;
    const auto plain = sar_affinity(train, params);
    EXPECT_DOUBLE_EQ(plain[0], 3.0);  // three events
    params.rating_as_weight = true;
    const auto weighted = sar_affinity(train, params);
    EXPECT_DOUBLE_EQ(weighted[0], 9.0);  // 2+3+4
}

TEST(SarTest, HalfLifeDecayExamples) {
    SarParams params;
    params.half_life_seconds = 86400.0;
    params.reference_time = 2 * 86400;

    // single event exactly one half-life old: factor 0.5
    const auto one = sar_affinity(InteractionSet::build({{"u0", "i0", 1.0, 86400}}), params);
    EXPECT_NEAR(one[0], 0.5, 1e-12);

    // events at t_ref and t_ref - 2 half-lives: 1 + 0.25
    const auto two = sar_affinity(
        InteractionSet::build({{"u0", "i0", 1.0, 2 * 86400}, {"u0", "i0", 1.0, 0}}), params);
    EXPECT_NEAR(two[0], 1.25, 1e-12);

    // weights multiply the decay factor
    params.rating_as_weight = true;
    const auto w = sar_affinity(InteractionSet::build({{"u0", "i0", 2.5, 86400}}), params);
    EXPECT_NEAR(w[0], 1.25, 1e-12);
}

TEST(SarTest, ReferenceTimeBeforeMaxTimestampThrows) {
    const auto train = InteractionSet::build({{"u0", "i0", 1.0, 100}, {"u0", "i1", 1.0, 200}});
    SarParams params;
    params.half_life_seconds = 50.0;
    params.reference_time = 150;  // before the newest event
    EXPECT_THROW(sar_affinity(train, params), InvalidReferenceTimeError);
    params.reference_time = 200;
    EXPECT_NO_THROW(sar_affinity(train, params));
    params.reference_time.reset();  // defaults to max timestamp
    const auto a = sar_affinity(train, params);
    EXPECT_NEAR(a[1], 1.0, 1e-12);  // i1 at t_ref decays by 2^0
    EXPECT_NEAR(a[0], std::exp2(-2.0), 1e-12);
    params.half_life_seconds = -1.0;
    EXPECT_THROW(sar_affinity(train, params), InvalidSpecError);
}

TEST(SarTest, SingleCellPredictIsOne) {
    const auto train = InteractionSet::build({{"u0", "i0", 1.0, 0}});
    SarParams params;
    params.similarity = SarSimilarity::count;
    const auto model = SarModel::fit(train, params);
    EXPECT_DOUBLE_EQ(model.predict(0, 0), 1.0);
}

TEST(SarTest, ThreeUserToyScores) {
    // u0:{i0,i1}, u1:{i0,i2}, u2:{i0}
    const auto train = InteractionSet::build({
        {"u0", "i0", 1.0, 0},
        {"u0", "i1", 1.0, 0},
        {"u1", "i0", 1.0, 0},
        {"u1", "i2", 1.0, 0},
        {"u2", "i0", 1.0, 0},
    });
    SarParams params;
    params.similarity = SarSimilarity::count;
    const auto model = SarModel::fit(train, params);
    EXPECT_DOUBLE_EQ(model.predict(2, 1), 1.0);  // a_{u2,i0} * c_{01}
    EXPECT_DOUBLE_EQ(model.predict(2, 2), 1.0);
    EXPECT_DOUBLE_EQ(model.predict(2, 0), 3.0);
    const auto top = model.recommend(2, 3, true);  // i0 is seen
    ASSERT_EQ(top.size(), 2u);
    EXPECT_EQ(top[0].item, 1u);  // tie at 1.0 breaks to lower id
    EXPECT_EQ(top[1].item, 2u);
}

TEST(SarTest, ColdUserPredictsZeroButRecommendsPopularity) {
    const auto train = counts_set({4, 1, 2});
    const auto model = SarModel::fit(train);
    const std::size_t cold = model.n_users();
    EXPECT_DOUBLE_EQ(model.predict(cold, 0), 0.0);
    EXPECT_DOUBLE_EQ(model.predict(cold, 2), 0.0);
    const auto top = model.recommend_id("stranger", 3, true);
    ASSERT_EQ(top.size(), 3u);
    EXPECT_EQ(top[0].item, 0u);  // popularity order: counts 4, 2, 1
    EXPECT_EQ(top[1].item, 2u);
    EXPECT_EQ(top[2].item, 1u);
    const auto pop = PopularityModel::fit(train).recommend(model.n_users(), 3, true);
    for (std::size_t k = 0; k < top.size(); ++k) EXPECT_EQ(top[k].item, pop[k].item);
}

TEST(SarTest, MatchesTripleLoopOracleOnRandomInstances) {
    Rng rng(303);
    const char* kinds[] = {"count", "jaccard", "lift"};
    for (int trial = 0; trial < 40; ++trial) {
        const int n_users = 1 + static_cast<int>(rng.bounded(10));
        const int n_items = 1 + static_cast<int>(rng.bounded(10));
        const auto events = oracle::random_interactions(rng, n_users, n_items,
                                                        1 + rng.bounded(60));
        const auto train = InteractionSet::build(events);
        const std::string kind = kinds[trial % 3];
        const bool weight = trial % 2 == 0;
        SarParams params;
        params.similarity = *parse_sar_similarity(kind);
        params.rating_as_weight = weight;
        const bool decay = trial % 5 == 0;
        double half_life = 0.0;
        std::int64_t t_ref = 0;
        if (decay) {
            half_life = 1000.0;
            for (const auto& ev : events) t_ref = std::max(t_ref, ev.timestamp);
            params.half_life_seconds = half_life;
            params.reference_time = t_ref;
        }
        const auto model = SarModel::fit(train, params);

        std::map<std::string, int> user_ids, item_ids;
        for (std::size_t u = 0; u < train.n_users(); ++u)
            user_ids[train.user_index().id_of(u)] = static_cast<int>(u);
        for (std::size_t i = 0; i < train.n_items(); ++i)
            item_ids[train.item_index().id_of(i)] = static_cast<int>(i);
        const oracle::SarOracle expect(events, static_cast<int>(train.n_users()),
                                       static_cast<int>(train.n_items()), kind,
                                       decay ? half_life : 0.0, t_ref, weight, user_ids, item_ids);
        for (std::size_t u = 0; u < train.n_users(); ++u)
            for (std::size_t i = 0; i < train.n_items(); ++i)
                EXPECT_NEAR(model.predict(u, i),
                            expect.predict(static_cast<int>(u), static_cast<int>(i)), 1e-9)
                    << "trial " << trial << " u" << u << " i" << i;
    }
}

std::vector<std::unique_ptr<Model>> fit_all(const InteractionSet& train) {
    std::vector<std::unique_ptr<Model>> models;
    models.push_back(std::make_unique<PopularityModel>(PopularityModel::fit(train)));
    models.push_back(std::make_unique<SarModel>(SarModel::fit(train)));
    AlsParams als;
    als.factors = 4;
    als.iterations = 3;
    als.seed = 1;
    models.push_back(std::make_unique<AlsModel>(AlsModel::fit(train, als)));
    SgdMfParams sgd;
    sgd.factors = 4;
    sgd.epochs = 3;
    sgd.seed = 1;
    models.push_back(std::make_unique<SgdMfModel>(SgdMfModel::fit(train, sgd)));
    return models;
}

TEST(ModelContractTest, RecommendationsAreSortedBoundedAndMasked) {
    Rng rng(404);
    for (int trial = 0; trial < 15; ++trial) {
        const auto train = InteractionSet::build(oracle::random_interactions(
            rng, 2 + rng.bounded(10), 2 + rng.bounded(12), 5 + rng.bounded(80)));
        for (const auto& model : fit_all(train)) {
            for (const std::size_t k : {std::size_t{1}, std::size_t{3}, train.n_items(),
                                        train.n_items() + 7}) {
                for (const bool remove_seen : {false, true}) {
                    for (std::size_t u = 0; u <= train.n_users(); ++u) {  // includes one cold id
                        const auto recs = model->recommend(u, k, remove_seen);
                        const auto& seen = model->seen_items(u);
                        const std::size_t candidates =
                            train.n_items() - (remove_seen ? seen.size() : 0);
                        EXPECT_EQ(recs.size(), std::min(k, candidates))
                            << model->algorithm() << " u" << u << " k" << k;
                        // exact agreement with a sort of score_user output
                        std::vector<double> scores;
                        model->score_user(u, scores);
                        std::vector<std::size_t> cand;
                        for (std::size_t i = 0; i < scores.size(); ++i) {
                            if (remove_seen &&
                                std::binary_search(seen.begin(), seen.end(), i))
                                continue;
                            cand.push_back(i);
                        }
                        std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
                            return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                        });
                        for (std::size_t j = 0; j < recs.size(); ++j) {
                            EXPECT_EQ(recs[j].item, cand[j]) << model->algorithm();
                            EXPECT_DOUBLE_EQ(recs[j].score, scores[cand[j]]);
                        }
                    }
                }
            }
        }
    }
}

TEST(ModelContractTest, UnknownIdsNeverFault) {
    Rng rng(505);
    const auto train = InteractionSet::build(oracle::random_interactions(rng, 6, 8, 40));
    for (const auto& model : fit_all(train)) {
        EXPECT_NO_THROW(model->predict_id("ghost_user", "i0"));
        EXPECT_NO_THROW(model->predict_id("u0", "ghost_item"));
        EXPECT_NO_THROW(model->predict_id("ghost_user", "ghost_item"));
        const auto recs = model->recommend_id("ghost_user", 5, true);
        EXPECT_EQ(recs.size(), 5u) << model->algorithm() << ": cold users see the full catalog";
    }
}

TEST(ModelContractTest, PredictBatchAgreesWithLoopedPredict) {
    Rng rng(606);
    const auto train = InteractionSet::build(oracle::random_interactions(rng, 8, 10, 60));
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int n = 0; n < 50; ++n)
        pairs.emplace_back("u" + std::to_string(rng.bounded(10)),
                           "i" + std::to_string(rng.bounded(12)));
    pairs.emplace_back("nobody", "i0");
    for (const auto& model : fit_all(train)) {
        const auto batch = predict_batch(*model, pairs);
        ASSERT_EQ(batch.size(), pairs.size());
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            EXPECT_EQ(batch[k].user, pairs[k].first);
            EXPECT_EQ(batch[k].item, pairs[k].second);
            EXPECT_DOUBLE_EQ(batch[k].score, model->predict_id(pairs[k].first, pairs[k].second));
        }
    }
}

TEST(ModelContractTest, RecommendRowsCoverAllTrainingUsersInOrder) {
    Rng rng(707);
    const auto train = InteractionSet::build(oracle::random_interactions(rng, 5, 20, 60));
    const auto model = PopularityModel::fit(train);
    const auto rows = recommend_rows(model, 3, true);
    std::size_t cursor = 0;
    for (std::size_t u = 0; u < train.n_users(); ++u) {
        const auto expect = model.recommend(u, 3, true);
        for (std::size_t j = 0; j < expect.size(); ++j, ++cursor) {
            ASSERT_LT(cursor, rows.size());
            EXPECT_EQ(rows[cursor].user, train.user_index().id_of(u));
            EXPECT_EQ(rows[cursor].item, train.item_index().id_of(expect[j].item));
            EXPECT_EQ(rows[cursor].rank, static_cast<int>(j) + 1);
        }
    }
    EXPECT_EQ(cursor, rows.size());
}

TEST(ModelContractTest, EmptyTrainingSetsRejected) {
    const InteractionSet empty;
    EXPECT_THROW(PopularityModel::fit(empty), EmptyDatasetError);
    EXPECT_THROW(SarModel::fit(empty), EmptyDatasetError);
    EXPECT_THROW(AlsModel::fit(empty), EmptyDatasetError);
    EXPECT_THROW(SgdMfModel::fit(empty), EmptyDatasetError);
}

}  // namespace
