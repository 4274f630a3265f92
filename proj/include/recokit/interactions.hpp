#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "recokit/errors.hpp"
#include "recokit/io.hpp"

namespace recokit {

/// One feedback event. Ratings are explicit scores or implicit weights;
/// timestamps are seconds since the epoch.
struct Interaction {
    std::string user;
    std::string item;
    double rating = 1.0;
    std::int64_t timestamp = 0;

    friend bool operator==(const Interaction& a, const Interaction& b) {
        return a.user == b.user && a.item == b.item && a.rating == b.rating &&
               a.timestamp == b.timestamp;
    }
};

/**
 * Dense bijection between external identifiers and [0, n).
 * Ids are assigned in order of first appearance, which makes every index a
 * pure function of the interaction sequence.
 */
class IdIndex {
public:
    std::size_t intern(const std::string& id) {
        auto it = to_dense_.find(id);
        if (it != to_dense_.end()) return it->second;
        const std::size_t dense = ids_.size();
        ids_.push_back(id);
        to_dense_.emplace(id, dense);
        return dense;
    }

    std::optional<std::size_t> find(const std::string& id) const {
        auto it = to_dense_.find(id);
        if (it == to_dense_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& id_of(std::size_t dense) const { return ids_[dense]; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> to_dense_;
};

/**
 * An ordered, validated collection of interactions with dense user/item
 * indices. Immutable after construction; split parts share the parent's
 * indices so dense ids mean the same thing in every part.
 */
class InteractionSet {
public:
    InteractionSet() = default;

    /// Builds fresh first-appearance indices over `interactions`.
    static InteractionSet build(std::vector<Interaction> interactions) {
        auto users = std::make_shared<IdIndex>();
        auto items = std::make_shared<IdIndex>();
        std::vector<std::size_t> uidx, iidx;
        uidx.reserve(interactions.size());
        iidx.reserve(interactions.size());
        for (const auto& inter : interactions) {
            validate(inter);
            uidx.push_back(users->intern(inter.user));
            iidx.push_back(items->intern(inter.item));
        }
        return InteractionSet(std::move(interactions), std::move(users), std::move(items),
                              std::move(uidx), std::move(iidx));
    }

    /// Builds a subset that shares `parent`'s indices (used by splitters).
    static InteractionSet with_indices(std::vector<Interaction> interactions,
                                       std::shared_ptr<const IdIndex> users,
                                       std::shared_ptr<const IdIndex> items) {
        std::vector<std::size_t> uidx, iidx;
        uidx.reserve(interactions.size());
        iidx.reserve(interactions.size());
        for (const auto& inter : interactions) {
            validate(inter);
            auto u = users->find(inter.user);
            auto i = items->find(inter.item);
            if (!u || !i) throw Error("interaction does not resolve through the given indices");
            uidx.push_back(*u);
            iidx.push_back(*i);
        }
        return InteractionSet(std::move(interactions), std::move(users), std::move(items),
                              std::move(uidx), std::move(iidx));
    }

    const std::vector<Interaction>& interactions() const { return interactions_; }
    std::size_t size() const { return interactions_.size(); }
    bool empty() const { return interactions_.empty(); }

    std::size_t n_users() const { return users_->size(); }
    std::size_t n_items() const { return items_->size(); }

    /// Dense ids of the k-th interaction.
    std::size_t user_of(std::size_t k) const { return user_idx_[k]; }
    std::size_t item_of(std::size_t k) const { return item_idx_[k]; }

    const IdIndex& user_index() const { return *users_; }
    const IdIndex& item_index() const { return *items_; }
    std::shared_ptr<const IdIndex> user_index_ptr() const { return users_; }
    std::shared_ptr<const IdIndex> item_index_ptr() const { return items_; }

private:
    InteractionSet(std::vector<Interaction> interactions, std::shared_ptr<const IdIndex> users,
                   std::shared_ptr<const IdIndex> items, std::vector<std::size_t> uidx,
                   std::vector<std::size_t> iidx)
        : interactions_(std::move(interactions)),
          users_(std::move(users)),
          items_(std::move(items)),
          user_idx_(std::move(uidx)),
          item_idx_(std::move(iidx)) {}

    static void validate(const Interaction& inter) {
        if (!std::isfinite(inter.rating)) throw Error("non-finite rating for user " + inter.user);
        if (inter.timestamp < 0) throw Error("negative timestamp for user " + inter.user);
        if (inter.user.empty() || inter.item.empty()) throw Error("empty user or item id");
    }

    std::vector<Interaction> interactions_;
    std::shared_ptr<const IdIndex> users_;
    std::shared_ptr<const IdIndex> items_;
    std::vector<std::size_t> user_idx_;
    std::vector<std::size_t> item_idx_;
};

/// Rebuilds `set` with compact indices over only the users/items it actually
/// contains, in first-appearance order. Models fit through this so the same
/// interactions produce the same model whether they arrive from a file or
/// from an in-memory split part.
inline InteractionSet reindex(const InteractionSet& set) {
    return InteractionSet::build(set.interactions());
}

inline InteractionSet concat_build(const InteractionSet& a, const InteractionSet& b) {
    std::vector<Interaction> merged = a.interactions();
    merged.insert(merged.end(), b.interactions().begin(), b.interactions().end());
    return InteractionSet::build(std::move(merged));
}

// ---- CSV ingestion --------------------------------------------------------

/// Maps the logical columns onto header names. Set `rating` or `timestamp`
/// to a name absent from the header (or leave the column out of the file)
/// to get the defaults: weight 1.0 and timestamp 0.
struct CsvSchema {
    std::string user = "user_id";
    std::string item = "item_id";
    std::string rating = "rating";
    std::string timestamp = "timestamp";
    char delimiter = ',';
};

inline InteractionSet load_interactions(const std::filesystem::path& path,
                                        const CsvSchema& schema = {}) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw EmptyDatasetError("empty file: " + path.string());

    const std::vector<std::string> header = split_line(line, schema.delimiter);
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        return std::nullopt;
    };
    const auto user_col = column(schema.user);
    const auto item_col = column(schema.item);
    if (!user_col) throw SchemaError("user column '" + schema.user + "' not in header");
    if (!item_col) throw SchemaError("item column '" + schema.item + "' not in header");
    const auto rating_col = column(schema.rating);
    const auto ts_col = column(schema.timestamp);

    std::vector<Interaction> rows;
    std::size_t row_number = 0;  // 1-based over data rows
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row_number;
        const std::vector<std::string> fields = split_line(line, schema.delimiter);
        auto field = [&](std::size_t c) -> const std::string& {
            if (c >= fields.size())
                throw MalformedRowError(row_number, "missing fields (expected at least " +
                                                       std::to_string(c + 1) + " columns)");
            return fields[c];
        };

        Interaction inter;
        inter.user = field(*user_col);
        inter.item = field(*item_col);
        if (inter.user.empty()) throw MalformedRowError(row_number, "empty user id");
        if (inter.item.empty()) throw MalformedRowError(row_number, "empty item id");

        if (rating_col) {
            const auto v = parse_double(field(*rating_col));
            if (!v || !std::isfinite(*v))
                throw MalformedRowError(row_number,
                                        "non-numeric rating '" + field(*rating_col) + "'");
            inter.rating = *v;
        }
        if (ts_col) {
            const auto t = parse_int(field(*ts_col));
            if (!t) throw MalformedRowError(row_number,
                                            "non-numeric timestamp '" + field(*ts_col) + "'");
            if (*t < 0) throw MalformedRowError(row_number, "negative timestamp");
            inter.timestamp = *t;
        }
        rows.push_back(std::move(inter));
    }
    if (rows.empty()) throw EmptyDatasetError("no data rows in " + path.string());
    return InteractionSet::build(std::move(rows));
}

/// Canonical on-disk form: `user_id,item_id,rating,timestamp` with ratings in
/// shortest round-trip notation. load_interactions on the result reproduces
/// the set exactly.
inline void write_interactions_csv(const std::filesystem::path& path, const InteractionSet& set) {
    std::ofstream out = open_output(path);
    out << "user_id,item_id,rating,timestamp\n";
    for (const auto& inter : set.interactions()) {
        out << inter.user << ',' << inter.item << ',' << format_double(inter.rating) << ','
            << inter.timestamp << '\n';
    }
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

// ---- sparse view ----------------------------------------------------------

/// How duplicate (user, item) pairs are merged when building a matrix view.
enum class Aggregation { last, sum, max };

inline const char* to_string(Aggregation a) {
    switch (a) {
        case Aggregation::last: return "last";
        case Aggregation::sum: return "sum";
        case Aggregation::max: return "max";
    }
    return "?";
}

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row.
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> indptr;  // rows + 1
    std::vector<std::size_t> col;
    std::vector<double> val;
    Aggregation aggregation = Aggregation::last;

    std::size_t nnz() const { return col.size(); }

    /// Value at (r, c), or 0 if the entry is absent.
    double at(std::size_t r, std::size_t c) const {
        const auto begin = col.begin() + static_cast<std::ptrdiff_t>(indptr[r]);
        const auto end = col.begin() + static_cast<std::ptrdiff_t>(indptr[r + 1]);
        const auto it = std::lower_bound(begin, end, c);
        if (it == end || *it != c) return 0.0;
        return val[static_cast<std::size_t>(it - col.begin())];
    }
};

/// Transpose in CSR form (counting sort over columns, so output rows stay
/// sorted).
inline SparseMatrix transpose(const SparseMatrix& m) {
    SparseMatrix t;
    t.rows = m.cols;
    t.cols = m.rows;
    t.aggregation = m.aggregation;
    t.indptr.assign(t.rows + 1, 0);
    for (std::size_t c : m.col) ++t.indptr[c + 1];
    for (std::size_t r = 0; r < t.rows; ++r) t.indptr[r + 1] += t.indptr[r];
    t.col.resize(m.nnz());
    t.val.resize(m.nnz());
    std::vector<std::size_t> cursor(t.indptr.begin(), t.indptr.end() - 1);
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t k = m.indptr[r]; k < m.indptr[r + 1]; ++k) {
            const std::size_t c = m.col[k];
            t.col[cursor[c]] = r;
            t.val[cursor[c]] = m.val[k];
            ++cursor[c];
        }
    }
    return t;
}

/// Collapses the set into a user x item CSR matrix, merging duplicate
/// (user, item) pairs per `agg`. `last` keeps the value with the greatest
/// timestamp (ties resolved toward the later input position).
inline SparseMatrix to_sparse(const InteractionSet& set, Aggregation agg = Aggregation::last) {
    if (set.empty()) throw EmptyDatasetError("to_sparse: empty interaction set");

    struct Cell {
        double value;
        std::int64_t timestamp;  // only meaningful for `last`
    };
    std::unordered_map<std::uint64_t, Cell> cells;
    cells.reserve(set.size());
    const std::size_t n_items = set.n_items();
    for (std::size_t k = 0; k < set.size(); ++k) {
        const std::uint64_t key =
            static_cast<std::uint64_t>(set.user_of(k)) * n_items + set.item_of(k);
        const double v = set.interactions()[k].rating;
        const std::int64_t ts = set.interactions()[k].timestamp;
        auto [it, inserted] = cells.try_emplace(key, Cell{v, ts});
        if (inserted) continue;
        switch (agg) {
            case Aggregation::last:
                if (ts >= it->second.timestamp) it->second = Cell{v, ts};
                break;
            case Aggregation::sum:
                it->second.value += v;
                break;
            case Aggregation::max:
                it->second.value = std::max(it->second.value, v);
                break;
        }
    }

    std::vector<std::pair<std::uint64_t, double>> entries;
    entries.reserve(cells.size());
    for (const auto& [key, cell] : cells) entries.emplace_back(key, cell.value);
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    SparseMatrix m;
    m.rows = set.n_users();
    m.cols = n_items;
    m.aggregation = agg;
    m.indptr.assign(m.rows + 1, 0);
    m.col.reserve(entries.size());
    m.val.reserve(entries.size());
    for (const auto& [key, value] : entries) {
        const std::size_t r = static_cast<std::size_t>(key / n_items);
        m.col.push_back(static_cast<std::size_t>(key % n_items));
        m.val.push_back(value);
        ++m.indptr[r + 1];
    }
    for (std::size_t r = 0; r < m.rows; ++r) m.indptr[r + 1] += m.indptr[r];
    return m;
}

}  // namespace recokit
