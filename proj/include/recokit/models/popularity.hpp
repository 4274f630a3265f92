#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/model.hpp"

namespace recokit {

/// Rating-agnostic baseline: an item's score is its interaction count in
/// the training set, for every user alike. Unknown items score 0.
class PopularityModel final : public Model {
public:
    std::string algorithm() const override { return "popularity"; }

    double predict(std::size_t, std::size_t item) const override {
        return item < counts_.size() ? counts_[item] : 0.0;
    }

    void score_user(std::size_t, std::vector<double>& scores) const override {
        scores = counts_;
    }

    const std::vector<double>& counts() const { return counts_; }

    static PopularityModel fit(const InteractionSet& train) {
        if (train.empty()) throw EmptyDatasetError("popularity: empty training set");
        PopularityModel model;
        model.capture_base(train);
        model.counts_.assign(train.n_items(), 0.0);
        for (std::size_t k = 0; k < train.size(); ++k) model.counts_[train.item_of(k)] += 1.0;
        return model;
    }

private:
    friend struct ModelCodec;
    std::vector<double> counts_;
};

}  // namespace recokit
