#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/model.hpp"
#include "recokit/rng.hpp"

namespace recokit {

struct AlsParams {
    int factors = 10;
    double regularization = 0.05;
    int iterations = 15;
    double init_sigma = 0.1;
    std::uint64_t seed = 0;
};

/**
 * Explicit-feedback ALS. Minimizes
 *   L = sum_observed (r_ui - p_u.q_i)^2 + lambda (sum ||p_u||^2 + sum ||q_i||^2)
 * by exact per-row ridge solves, alternating users then items for exactly
 * `iterations` rounds. Duplicate (user, item) events are merged with the
 * `last` policy before fitting. Regularization is plain lambda, not scaled
 * by rating counts, which makes each half-step an exact block minimization:
 * the objective can never increase across a half-step. The k x k normal
 * matrix gains lambda > 0 on its diagonal, so it is positive definite and
 * the Cholesky solve cannot fail.
 *
 * predict(u, i) = p_u . q_i; any cold side falls back to the global mean.
 */
class AlsModel final : public Model {
public:
    std::string algorithm() const override { return "als"; }

    double predict(std::size_t user, std::size_t item) const override {
        if (user >= n_users() || item >= n_items()) return global_mean_;
        const std::size_t f = static_cast<std::size_t>(params_.factors);
        double dot = 0.0;
        for (std::size_t c = 0; c < f; ++c)
            dot += user_factors_[user * f + c] * item_factors_[item * f + c];
        return dot;
    }

    void score_user(std::size_t user, std::vector<double>& scores) const override {
        if (user >= n_users()) {
            scores.assign(n_items(), global_mean_);
            return;
        }
        scores.resize(n_items());
        for (std::size_t i = 0; i < n_items(); ++i) scores[i] = predict(user, i);
    }

    const AlsParams& params() const { return params_; }
    double global_mean() const { return global_mean_; }
    const std::vector<double>& user_factors() const { return user_factors_; }
    const std::vector<double>& item_factors() const { return item_factors_; }

    /// L before training, then after every half-step: 1 + 2 * iterations values.
    const std::vector<double>& objective_history() const { return objective_history_; }

    static AlsModel fit(const InteractionSet& train, const AlsParams& params = {}) {
        if (train.empty()) throw EmptyDatasetError("als: empty training set");
        if (params.factors < 1) throw InvalidSpecError("als: factors must be >= 1");
        if (params.regularization <= 0.0) throw InvalidSpecError("als: regularization must be > 0");
        if (params.iterations < 1) throw InvalidSpecError("als: iterations must be >= 1");
        if (params.init_sigma <= 0.0) throw InvalidSpecError("als: init_sigma must be > 0");

        AlsModel model;
        model.capture_base(train);
        model.params_ = params;

        const SparseMatrix by_user = to_sparse(train, Aggregation::last);
        const SparseMatrix by_item = transpose(by_user);
        const std::size_t n_users = by_user.rows;
        const std::size_t n_items = by_user.cols;
        const std::size_t f = static_cast<std::size_t>(params.factors);

        double rating_sum = 0.0;
        for (double v : by_user.val) rating_sum += v;
        model.global_mean_ = rating_sum / static_cast<double>(by_user.nnz());

        Rng rng(params.seed);
        auto& p = model.user_factors_;
        auto& q = model.item_factors_;
        p.resize(n_users * f);
        q.resize(n_items * f);
        for (auto& v : p) v = rng.normal() * params.init_sigma;
        for (auto& v : q) v = rng.normal() * params.init_sigma;

        const double lambda = params.regularization;
        const auto objective = [&]() {
            double loss = 0.0;
            for (std::size_t u = 0; u < n_users; ++u) {
                for (std::size_t k = by_user.indptr[u]; k < by_user.indptr[u + 1]; ++k) {
                    double dot = 0.0;
                    for (std::size_t c = 0; c < f; ++c) dot += p[u * f + c] * q[by_user.col[k] * f + c];
                    const double e = by_user.val[k] - dot;
                    loss += e * e;
                }
            }
            double reg = 0.0;
            for (double v : p) reg += v * v;
            for (double v : q) reg += v * v;
            return loss + lambda * reg;
        };

        // one exact ridge solve per row of `target`, against `other`'s rows
        const auto half_step = [&](const SparseMatrix& ratings, std::vector<double>& target,
                                   const std::vector<double>& other) {
            Eigen::MatrixXd gram(f, f);
            Eigen::VectorXd rhs(f);
            for (std::size_t row = 0; row < ratings.rows; ++row) {
                gram.setZero();
                rhs.setZero();
                for (std::size_t k = ratings.indptr[row]; k < ratings.indptr[row + 1]; ++k) {
                    const Eigen::Map<const Eigen::VectorXd> v(other.data() + ratings.col[k] * f,
                                                              static_cast<Eigen::Index>(f));
                    gram.noalias() += v * v.transpose();
                    rhs.noalias() += ratings.val[k] * v;
                }
                gram.diagonal().array() += lambda;
                const Eigen::VectorXd solved = gram.llt().solve(rhs);
                for (std::size_t c = 0; c < f; ++c) target[row * f + c] = solved(static_cast<Eigen::Index>(c));
            }
        };

        model.objective_history_.push_back(objective());
        for (int it = 0; it < params.iterations; ++it) {
            half_step(by_user, p, q);
            model.objective_history_.push_back(objective());
            half_step(by_item, q, p);
            model.objective_history_.push_back(objective());
        }
        return model;
    }

private:
    friend struct ModelCodec;
    AlsParams params_;
    double global_mean_ = 0.0;
    std::vector<double> user_factors_;  // n_users x factors, row-major
    std::vector<double> item_factors_;  // n_items x factors, row-major
    std::vector<double> objective_history_;
};

}  // namespace recokit
