#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/rng.hpp"

namespace recokit {

/**
 * Planted low-rank dataset generator.
 *
 * User and item factors are drawn N(0, 1/rank) entrywise, so inner products
 * have unit variance. Each rating is the inner product pushed through an
 * affine map into [rating_min, rating_max] (the map places +/- Z_SPAN
 * standard units at the range edges), plus optional Gaussian noise, then
 * clamped. Cells are observed independently with probability `density`.
 * The planted factors come back with the data so tests can compare fitted
 * models against ground truth.
 */
struct SyntheticSpec {
    std::size_t n_users = 100;
    std::size_t n_items = 50;
    std::size_t rank = 2;
    double density = 1.0;
    double noise_sigma = 0.0;
    double rating_min = 1.0;
    double rating_max = 5.0;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    InteractionSet interactions;
    std::vector<std::vector<double>> user_factors;  // n_users x rank
    std::vector<std::vector<double>> item_factors;  // n_items x rank
    double scale = 1.0;   // rating = clamp(offset + scale * (p.q) + noise)
    double offset = 0.0;
};

namespace detail {
// Observation timestamps are drawn from this fixed window so chronological
// splits have something to order.
inline constexpr std::int64_t kTimestampBase = 1'500'000'000;
inline constexpr std::int64_t kTimestampWindow = 100'000'000;
inline constexpr double kZSpan = 4.0;  // standard units mapped to the range edges
}  // namespace detail

inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.rank < 1) throw InvalidSpecError("synthetic: rank must be >= 1");
    if (!(spec.density > 0.0 && spec.density <= 1.0))
        throw InvalidSpecError("synthetic: density must be in (0, 1]");
    if (spec.n_users < 1 || spec.n_items < 1)
        throw InvalidSpecError("synthetic: need at least one user and one item");
    if (spec.noise_sigma < 0.0) throw InvalidSpecError("synthetic: noise_sigma must be >= 0");
    if (!(spec.rating_min < spec.rating_max))
        throw InvalidSpecError("synthetic: rating_min must be < rating_max");

    Rng rng(spec.seed);
    const double factor_scale = 1.0 / std::sqrt(static_cast<double>(spec.rank));
    auto draw_factors = [&](std::size_t n) {
        std::vector<std::vector<double>> f(n, std::vector<double>(spec.rank));
        for (auto& row : f)
            for (auto& v : row) v = rng.normal() * factor_scale;
        return f;
    };

    SyntheticData data;
    data.user_factors = draw_factors(spec.n_users);
    data.item_factors = draw_factors(spec.n_items);
    data.offset = 0.5 * (spec.rating_min + spec.rating_max);
    data.scale = (spec.rating_max - spec.rating_min) / (2.0 * detail::kZSpan);

    std::vector<Interaction> rows;
    for (std::size_t u = 0; u < spec.n_users; ++u) {
        for (std::size_t i = 0; i < spec.n_items; ++i) {
            if (rng.uniform01() >= spec.density) continue;
            double dot = 0.0;
            for (std::size_t r = 0; r < spec.rank; ++r)
                dot += data.user_factors[u][r] * data.item_factors[i][r];
            double rating = data.offset + data.scale * dot + spec.noise_sigma * rng.normal();
            rating = std::clamp(rating, spec.rating_min, spec.rating_max);
            const std::int64_t ts =
                detail::kTimestampBase +
                static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(detail::kTimestampWindow)));
            rows.push_back(Interaction{"u" + std::to_string(u), "i" + std::to_string(i), rating, ts});
        }
    }
    if (rows.empty())
        throw InvalidSpecError("synthetic: no cells observed (density too low for this size)");
    data.interactions = InteractionSet::build(std::move(rows));
    return data;
}

}  // namespace recokit
