#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/rng.hpp"

namespace recokit {

enum class SplitMethod { random, chrono, stratified };
enum class GroupBy { user, item };

inline const char* to_string(SplitMethod m) {
    switch (m) {
        case SplitMethod::random: return "random";
        case SplitMethod::chrono: return "chrono";
        case SplitMethod::stratified: return "stratified";
    }
    return "?";
}

inline const char* to_string(GroupBy g) {
    return g == GroupBy::user ? "user" : "item";
}

inline std::optional<SplitMethod> parse_split_method(const std::string& s) {
    if (s == "random") return SplitMethod::random;
    if (s == "chrono") return SplitMethod::chrono;
    if (s == "stratified") return SplitMethod::stratified;
    return std::nullopt;
}

inline std::optional<GroupBy> parse_group_by(const std::string& s) {
    if (s == "user") return GroupBy::user;
    if (s == "item") return GroupBy::item;
    return std::nullopt;
}

/// Two ratios produce train/test, three produce train/validation/test.
/// `group_by` and `min_interactions` only apply to the grouped splitters.
struct SplitSpec {
    std::vector<double> ratios;
    std::uint64_t seed = 0;
    GroupBy group_by = GroupBy::user;
    std::size_t min_interactions = 1;
};

/// Disjoint parts whose multiset union is the input. Parts share the
/// parent's dense indices.
struct Split {
    std::vector<InteractionSet> parts;
    SplitMethod method = SplitMethod::random;
};

inline void validate_split_spec(const SplitSpec& spec) {
    if (spec.ratios.size() < 2 || spec.ratios.size() > 3)
        throw InvalidSpecError("split: need 2 or 3 ratios, got " +
                               std::to_string(spec.ratios.size()));
    double sum = 0.0;
    for (double r : spec.ratios) {
        if (!(r > 0.0)) throw InvalidSpecError("split: every ratio must be > 0");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw InvalidSpecError("split: ratios must sum to 1 (got " + format_double(sum) + ")");
    if (spec.min_interactions < 1) throw InvalidSpecError("split: min_interactions must be >= 1");
}

/// Largest-remainder allocation of n into |ratios| parts: sizes sum to n and
/// each differs from ratio*n by less than 1. Remainder ties go to the
/// earlier part.
inline std::vector<std::size_t> largest_remainder_sizes(std::size_t n,
                                                        const std::vector<double>& ratios) {
    const std::size_t m = ratios.size();
    std::vector<std::size_t> sizes(m);
    std::vector<double> remainders(m);
    std::size_t allocated = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double quota = ratios[k] * static_cast<double>(n);
        sizes[k] = static_cast<std::size_t>(std::floor(quota));
        remainders[k] = quota - static_cast<double>(sizes[k]);
        allocated += sizes[k];
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t k = 0; allocated < n; ++k) {
        ++sizes[order[k % m]];
        ++allocated;
    }
    return sizes;
}

namespace detail {

inline std::vector<InteractionSet> assemble_parts(const InteractionSet& set,
                                                  const std::vector<std::vector<std::size_t>>& members) {
    std::vector<InteractionSet> parts;
    parts.reserve(members.size());
    for (const auto& positions : members) {
        std::vector<Interaction> rows;
        rows.reserve(positions.size());
        for (std::size_t p : positions) rows.push_back(set.interactions()[p]);
        parts.push_back(InteractionSet::with_indices(std::move(rows), set.user_index_ptr(),
                                                     set.item_index_ptr()));
    }
    return parts;
}

/// Positions of each interaction, bucketed by dense group id.
inline std::vector<std::vector<std::size_t>> group_positions(const InteractionSet& set,
                                                             GroupBy group_by) {
    const std::size_t n_groups =
        group_by == GroupBy::user ? set.n_users() : set.n_items();
    std::vector<std::vector<std::size_t>> groups(n_groups);
    for (std::size_t k = 0; k < set.size(); ++k) {
        const std::size_t g = group_by == GroupBy::user ? set.user_of(k) : set.item_of(k);
        groups[g].push_back(k);
    }
    return groups;
}

/// Largest remainder with a floor of one element per part, so a group that
/// is split at all lands in every part. Deficits are repaired by taking one
/// element from the currently largest part.
inline std::vector<std::size_t> covered_sizes(std::size_t n, const std::vector<double>& ratios) {
    std::vector<std::size_t> sizes = largest_remainder_sizes(n, ratios);
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        while (sizes[k] == 0) {
            std::size_t donor = 0;
            for (std::size_t j = 1; j < sizes.size(); ++j)
                if (sizes[j] > sizes[donor]) donor = j;
            --sizes[donor];
            ++sizes[k];
        }
    }
    return sizes;
}

}  // namespace detail

/// Seeded Fisher-Yates shuffle over the input order, then a contiguous
/// largest-remainder partition.
inline Split random_split(const InteractionSet& set, const SplitSpec& spec) {
    validate_split_spec(spec);
    if (set.size() < spec.ratios.size())
        throw TooFewInteractionsError("random_split: " + std::to_string(set.size()) +
                                      " interactions for " + std::to_string(spec.ratios.size()) +
                                      " parts");

    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(spec.seed);
    rng.shuffle(order);

    const std::vector<std::size_t> sizes = largest_remainder_sizes(set.size(), spec.ratios);
    std::vector<std::vector<std::size_t>> members(spec.ratios.size());
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        members[k].assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                          order.begin() + static_cast<std::ptrdiff_t>(cursor + sizes[k]));
        cursor += sizes[k];
    }
    return Split{detail::assemble_parts(set, members), SplitMethod::random};
}

/// Within each group the interactions are ordered by (timestamp, input
/// position) and the earliest fraction goes to the first part. Groups too
/// small to split fall entirely into part 0. No RNG is consumed.
inline Split chrono_split(const InteractionSet& set, const SplitSpec& spec) {
    validate_split_spec(spec);
    if (set.size() < spec.ratios.size())
        throw TooFewInteractionsError("chrono_split: too few interactions");

    const std::size_t threshold = std::max(spec.ratios.size(), spec.min_interactions);
    auto groups = detail::group_positions(set, spec.group_by);
    std::vector<std::vector<std::size_t>> members(spec.ratios.size());
    for (auto& positions : groups) {
        std::stable_sort(positions.begin(), positions.end(), [&](std::size_t a, std::size_t b) {
            const auto ta = set.interactions()[a].timestamp;
            const auto tb = set.interactions()[b].timestamp;
            return ta != tb ? ta < tb : a < b;
        });
        if (positions.size() < threshold) {
            members[0].insert(members[0].end(), positions.begin(), positions.end());
            continue;
        }
        const auto sizes = largest_remainder_sizes(positions.size(), spec.ratios);
        std::size_t cursor = 0;
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            members[k].insert(members[k].end(),
                              positions.begin() + static_cast<std::ptrdiff_t>(cursor),
                              positions.begin() + static_cast<std::ptrdiff_t>(cursor + sizes[k]));
            cursor += sizes[k];
        }
    }
    return Split{detail::assemble_parts(set, members), SplitMethod::chrono};
}

/// Every group large enough is represented in every part. Each group is
/// shuffled on its own stream (mix_seed(seed, group id)), so one group's
/// split never depends on another's size and groups can be processed in any
/// order. Part contents are canonicalized to (group id, input position).
inline Split stratified_split(const InteractionSet& set, const SplitSpec& spec) {
    validate_split_spec(spec);
    if (set.size() < spec.ratios.size())
        throw TooFewInteractionsError("stratified_split: too few interactions");

    const std::size_t threshold = std::max(spec.ratios.size(), spec.min_interactions);
    auto groups = detail::group_positions(set, spec.group_by);
    std::vector<std::vector<std::size_t>> members(spec.ratios.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto& positions = groups[g];
        if (positions.empty()) continue;
        if (positions.size() < threshold) {
            members[0].insert(members[0].end(), positions.begin(), positions.end());
            continue;
        }
        Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(g)));
        rng.shuffle(positions);
        const auto sizes = detail::covered_sizes(positions.size(), spec.ratios);
        std::size_t cursor = 0;
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            std::vector<std::size_t> slice(positions.begin() + static_cast<std::ptrdiff_t>(cursor),
                                           positions.begin() +
                                               static_cast<std::ptrdiff_t>(cursor + sizes[k]));
            std::sort(slice.begin(), slice.end());
            members[k].insert(members[k].end(), slice.begin(), slice.end());
            cursor += sizes[k];
        }
    }
    return Split{detail::assemble_parts(set, members), SplitMethod::stratified};
}

inline Split split_interactions(const InteractionSet& set, SplitMethod method,
                                const SplitSpec& spec) {
    switch (method) {
        case SplitMethod::random: return random_split(set, spec);
        case SplitMethod::chrono: return chrono_split(set, spec);
        case SplitMethod::stratified: return stratified_split(set, spec);
    }
    throw InvalidSpecError("unknown split method");
}

}  // namespace recokit
