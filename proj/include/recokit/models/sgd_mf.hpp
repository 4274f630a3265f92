#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/model.hpp"
#include "recokit/rng.hpp"

namespace recokit {

struct SgdMfParams {
    int factors = 10;
    double learning_rate = 0.005;
    double regularization = 0.02;
    int epochs = 20;
    double init_sigma = 0.1;
    std::uint64_t seed = 0;
};

/**
 * Biased matrix factorization trained by SGD:
 *   r_hat = mu + b_u + b_i + p_u . q_i
 * Each epoch visits every interaction once in a freshly shuffled order (one
 * RNG stream drives initialization and all epoch shuffles). Updates use the
 * pre-update values on both sides:
 *   e = r - r_hat
 *   b_u += lr (e - reg b_u);      b_i += lr (e - reg b_i)
 *   p_u += lr (e q_i - reg p_u);  q_i += lr (e p_u - reg q_i)
 * Biases start at 0, factors at seeded Gaussian(0, init_sigma). A non-finite
 * parameter aborts with the offending epoch: the learning rate is too high.
 *
 * Cold users and items contribute nothing, so a fully cold pair predicts mu.
 */
class SgdMfModel final : public Model {
public:
    std::string algorithm() const override { return "sgd_mf"; }

    double predict(std::size_t user, std::size_t item) const override {
        const std::size_t f = static_cast<std::size_t>(params_.factors);
        double score = global_mean_;
        if (user < n_users()) score += user_bias_[user];
        if (item < n_items()) score += item_bias_[item];
        if (user < n_users() && item < n_items())
            for (std::size_t c = 0; c < f; ++c)
                score += user_factors_[user * f + c] * item_factors_[item * f + c];
        return score;
    }

    void score_user(std::size_t user, std::vector<double>& scores) const override {
        scores.resize(n_items());
        for (std::size_t i = 0; i < n_items(); ++i) scores[i] = predict(user, i);
    }

    const SgdMfParams& params() const { return params_; }
    double global_mean() const { return global_mean_; }
    const std::vector<double>& user_bias() const { return user_bias_; }
    const std::vector<double>& item_bias() const { return item_bias_; }
    const std::vector<double>& user_factors() const { return user_factors_; }
    const std::vector<double>& item_factors() const { return item_factors_; }

    static SgdMfModel fit(const InteractionSet& train, const SgdMfParams& params = {}) {
        if (train.empty()) throw EmptyDatasetError("sgd_mf: empty training set");
        if (params.factors < 1) throw InvalidSpecError("sgd_mf: factors must be >= 1");
        if (params.learning_rate <= 0.0) throw InvalidSpecError("sgd_mf: learning_rate must be > 0");
        if (params.regularization < 0.0) throw InvalidSpecError("sgd_mf: regularization must be >= 0");
        if (params.epochs < 1) throw InvalidSpecError("sgd_mf: epochs must be >= 1");
        if (params.init_sigma <= 0.0) throw InvalidSpecError("sgd_mf: init_sigma must be > 0");

        SgdMfModel model;
        model.capture_base(train);
        model.params_ = params;

        const std::size_t n = train.size();
        const std::size_t f = static_cast<std::size_t>(params.factors);
        double sum = 0.0;
        for (const auto& inter : train.interactions()) sum += inter.rating;
        model.global_mean_ = sum / static_cast<double>(n);

        Rng rng(params.seed);
        auto& bu = model.user_bias_;
        auto& bi = model.item_bias_;
        auto& p = model.user_factors_;
        auto& q = model.item_factors_;
        bu.assign(train.n_users(), 0.0);
        bi.assign(train.n_items(), 0.0);
        p.resize(train.n_users() * f);
        q.resize(train.n_items() * f);
        for (auto& v : p) v = rng.normal() * params.init_sigma;
        for (auto& v : q) v = rng.normal() * params.init_sigma;

        const double lr = params.learning_rate;
        const double reg = params.regularization;
        const double mu = model.global_mean_;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> p_old(f);

        for (int epoch = 0; epoch < params.epochs; ++epoch) {
            rng.shuffle(order);
            for (std::size_t k : order) {
                const std::size_t u = train.user_of(k);
                const std::size_t i = train.item_of(k);
                const double r = train.interactions()[k].rating;
                double dot = 0.0;
                for (std::size_t c = 0; c < f; ++c) dot += p[u * f + c] * q[i * f + c];
                const double e = r - (mu + bu[u] + bi[i] + dot);
                if (!std::isfinite(e))
                    throw DivergenceError(epoch + 1, "non-finite parameter; lower the learning rate");
                bu[u] += lr * (e - reg * bu[u]);
                bi[i] += lr * (e - reg * bi[i]);
                for (std::size_t c = 0; c < f; ++c) p_old[c] = p[u * f + c];
                for (std::size_t c = 0; c < f; ++c)
                    p[u * f + c] += lr * (e * q[i * f + c] - reg * p[u * f + c]);
                for (std::size_t c = 0; c < f; ++c)
                    q[i * f + c] += lr * (e * p_old[c] - reg * q[i * f + c]);
                if (!std::isfinite(bu[u]) || !std::isfinite(bi[i]) || !std::isfinite(p[u * f]) ||
                    !std::isfinite(q[i * f]))
                    throw DivergenceError(epoch + 1, "non-finite parameter; lower the learning rate");
            }
        }
        return model;
    }

private:
    friend struct ModelCodec;
    SgdMfParams params_;
    double global_mean_ = 0.0;
    std::vector<double> user_bias_;
    std::vector<double> item_bias_;
    std::vector<double> user_factors_;  // n_users x factors, row-major
    std::vector<double> item_factors_;  // n_items x factors, row-major
};

}  // namespace recokit
