#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/io.hpp"
#include "recokit/model.hpp"
#include "recokit/models/als.hpp"
#include "recokit/models/popularity.hpp"
#include "recokit/models/sar.hpp"
#include "recokit/models/sgd_mf.hpp"

namespace recokit {

namespace detail {

// Fixed little-endian scalar encoding; doubles round-trip bit-exactly.

inline void put_u8(std::ostream& os, std::uint8_t v) {
    os.put(static_cast<char>(v));
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) os.put(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) os.put(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline void put_i64(std::ostream& os, std::int64_t v) {
    put_u64(os, static_cast<std::uint64_t>(v));
}

inline void put_f64(std::ostream& os, double v) {
    put_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void put_f64_vec(std::ostream& os, const std::vector<double>& v) {
    put_u64(os, v.size());
    for (double x : v) put_f64(os, x);
}

inline std::uint8_t get_u8(std::istream& is) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw IoError("model file truncated");
    return static_cast<std::uint8_t>(c);
}

inline std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(get_u8(is)) << (8 * b);
    return v;
}

inline std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(get_u8(is)) << (8 * b);
    return v;
}

inline std::int64_t get_i64(std::istream& is) {
    return static_cast<std::int64_t>(get_u64(is));
}

inline double get_f64(std::istream& is) {
    return std::bit_cast<double>(get_u64(is));
}

inline std::string get_string(std::istream& is) {
    const std::uint32_t n = get_u32(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::uint32_t>(is.gcount()) != n) throw IoError("model file truncated");
    return s;
}

inline std::vector<double> get_f64_vec(std::istream& is) {
    const std::uint64_t n = get_u64(is);
    std::vector<double> v(n);
    for (auto& x : v) x = get_f64(is);
    return v;
}

}  // namespace detail

/// Flat binary model format: magic, format version, algorithm tag, id maps,
/// per-user seen sets, then the algorithm's parameter and array payload.
struct ModelCodec {
    static constexpr char kMagic[8] = {'R', 'E', 'C', 'O', 'K', 'I', 'T', '1'};
    static constexpr std::uint32_t kVersion = 1;

    enum Tag : std::uint8_t { kPopularity = 0, kSar = 1, kAls = 2, kSgdMf = 3 };

    static void save(const Model& model, const std::string& path) {
        std::ostringstream os(std::ios::binary);
        os.write(kMagic, sizeof(kMagic));
        detail::put_u32(os, kVersion);
        if (const auto* m = dynamic_cast<const PopularityModel*>(&model)) {
            detail::put_u8(os, kPopularity);
            write_base(os, *m);
            detail::put_f64_vec(os, m->counts_);
        } else if (const auto* m = dynamic_cast<const SarModel*>(&model)) {
            detail::put_u8(os, kSar);
            write_base(os, *m);
            detail::put_u8(os, static_cast<std::uint8_t>(m->params_.similarity));
            detail::put_u8(os, m->params_.half_life_seconds ? 1 : 0);
            detail::put_f64(os, m->params_.half_life_seconds.value_or(0.0));
            detail::put_u8(os, m->params_.reference_time ? 1 : 0);
            detail::put_i64(os, m->params_.reference_time.value_or(0));
            detail::put_u8(os, m->params_.rating_as_weight ? 1 : 0);
            detail::put_f64_vec(os, m->affinity_);
            detail::put_f64_vec(os, m->similarity_);
            detail::put_f64_vec(os, m->popularity_);
        } else if (const auto* m = dynamic_cast<const AlsModel*>(&model)) {
            detail::put_u8(os, kAls);
            write_base(os, *m);
            detail::put_u32(os, static_cast<std::uint32_t>(m->params_.factors));
            detail::put_f64(os, m->params_.regularization);
            detail::put_u32(os, static_cast<std::uint32_t>(m->params_.iterations));
            detail::put_f64(os, m->params_.init_sigma);
            detail::put_u64(os, m->params_.seed);
            detail::put_f64(os, m->global_mean_);
            detail::put_f64_vec(os, m->user_factors_);
            detail::put_f64_vec(os, m->item_factors_);
            detail::put_f64_vec(os, m->objective_history_);
        } else if (const auto* m = dynamic_cast<const SgdMfModel*>(&model)) {
            detail::put_u8(os, kSgdMf);
            write_base(os, *m);
            detail::put_u32(os, static_cast<std::uint32_t>(m->params_.factors));
            detail::put_f64(os, m->params_.learning_rate);
            detail::put_f64(os, m->params_.regularization);
            detail::put_u32(os, static_cast<std::uint32_t>(m->params_.epochs));
            detail::put_f64(os, m->params_.init_sigma);
            detail::put_u64(os, m->params_.seed);
            detail::put_f64(os, m->global_mean_);
            detail::put_f64_vec(os, m->user_bias_);
            detail::put_f64_vec(os, m->item_bias_);
            detail::put_f64_vec(os, m->user_factors_);
            detail::put_f64_vec(os, m->item_factors_);
        } else {
            throw IoError("unknown model type: " + model.algorithm());
        }
        write_file_atomic(path, os.str());
    }

    static std::unique_ptr<Model> load(const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw FileNotFoundError(path);
        char magic[8];
        is.read(magic, sizeof(magic));
        if (is.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
            throw IoError(path + ": not a model file");
        const std::uint32_t version = detail::get_u32(is);
        if (version != kVersion)
            throw IoError(path + ": unsupported model format version " + std::to_string(version));
        const std::uint8_t tag = detail::get_u8(is);
        switch (tag) {
            case kPopularity: {
                auto m = std::make_unique<PopularityModel>();
                read_base(is, *m);
                m->counts_ = detail::get_f64_vec(is);
                return m;
            }
            case kSar: {
                auto m = std::make_unique<SarModel>();
                read_base(is, *m);
                m->params_.similarity = static_cast<SarSimilarity>(detail::get_u8(is));
                const bool has_hl = detail::get_u8(is) != 0;
                const double hl = detail::get_f64(is);
                if (has_hl) m->params_.half_life_seconds = hl;
                const bool has_ref = detail::get_u8(is) != 0;
                const std::int64_t ref = detail::get_i64(is);
                if (has_ref) m->params_.reference_time = ref;
                m->params_.rating_as_weight = detail::get_u8(is) != 0;
                m->affinity_ = detail::get_f64_vec(is);
                m->similarity_ = detail::get_f64_vec(is);
                m->popularity_ = detail::get_f64_vec(is);
                return m;
            }
            case kAls: {
                auto m = std::make_unique<AlsModel>();
                read_base(is, *m);
                m->params_.factors = static_cast<int>(detail::get_u32(is));
                m->params_.regularization = detail::get_f64(is);
                m->params_.iterations = static_cast<int>(detail::get_u32(is));
                m->params_.init_sigma = detail::get_f64(is);
                m->params_.seed = detail::get_u64(is);
                m->global_mean_ = detail::get_f64(is);
                m->user_factors_ = detail::get_f64_vec(is);
                m->item_factors_ = detail::get_f64_vec(is);
                m->objective_history_ = detail::get_f64_vec(is);
                return m;
            }
            case kSgdMf: {
                auto m = std::make_unique<SgdMfModel>();
                read_base(is, *m);
                m->params_.factors = static_cast<int>(detail::get_u32(is));
                m->params_.learning_rate = detail::get_f64(is);
                m->params_.regularization = detail::get_f64(is);
                m->params_.epochs = static_cast<int>(detail::get_u32(is));
                m->params_.init_sigma = detail::get_f64(is);
                m->params_.seed = detail::get_u64(is);
                m->global_mean_ = detail::get_f64(is);
                m->user_bias_ = detail::get_f64_vec(is);
                m->item_bias_ = detail::get_f64_vec(is);
                m->user_factors_ = detail::get_f64_vec(is);
                m->item_factors_ = detail::get_f64_vec(is);
                return m;
            }
            default:
                throw IoError(path + ": unknown algorithm tag " + std::to_string(tag));
        }
    }

private:
    template <typename M>
    static void write_base(std::ostream& os, const M& m) {
        detail::put_u64(os, m.n_users());
        for (const auto& id : m.user_index().ids()) detail::put_string(os, id);
        detail::put_u64(os, m.n_items());
        for (const auto& id : m.item_index().ids()) detail::put_string(os, id);
        detail::put_u64(os, m.seen_.size());
        for (const auto& s : m.seen_) {
            detail::put_u64(os, s.size());
            for (std::size_t item : s) detail::put_u64(os, item);
        }
    }

    template <typename M>
    static void read_base(std::istream& is, M& m) {
        auto users = std::make_shared<IdIndex>();
        const std::uint64_t n_users = detail::get_u64(is);
        for (std::uint64_t k = 0; k < n_users; ++k) users->intern(detail::get_string(is));
        auto items = std::make_shared<IdIndex>();
        const std::uint64_t n_items = detail::get_u64(is);
        for (std::uint64_t k = 0; k < n_items; ++k) items->intern(detail::get_string(is));
        m.users_ = std::move(users);
        m.items_ = std::move(items);
        const std::uint64_t n_seen = detail::get_u64(is);
        m.seen_.assign(n_seen, {});
        for (auto& s : m.seen_) {
            const std::uint64_t cnt = detail::get_u64(is);
            s.resize(cnt);
            for (auto& item : s) item = static_cast<std::size_t>(detail::get_u64(is));
        }
    }
};

inline void save_model(const Model& model, const std::string& path) {
    ModelCodec::save(model, path);
}

inline std::unique_ptr<Model> load_model(const std::string& path) {
    return ModelCodec::load(path);
}

}  // namespace recokit
