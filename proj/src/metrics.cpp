#include "medfx/metrics.hpp"

#include "medfx/error.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace medfx {

namespace {

// Midrank form of the Mann-Whitney statistic; exact for ties.
double auc_from_pairs(std::vector<std::pair<double, bool>> &items) {
    std::sort(items.begin(), items.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    double rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < items.size();) {
        std::size_t j = i;
        while (j < items.size() && items[j].first == items[i].first)
            ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (items[k].second) {
                rank_sum += midrank;
                ++n_pos;
            }
        i = j;
    }
    const std::size_t n_neg = items.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw Error(ErrorCode::SingleClass, "AUC needs both classes");
    const double pos = static_cast<double>(n_pos);
    return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * static_cast<double>(n_neg));
}

} // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw Error(ErrorCode::ShapeMismatch, "one label per score required");
    std::vector<std::pair<double, bool>> items;
    items.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw Error(ErrorCode::InvalidArgument, "binary labels must be 0 or 1");
        items.emplace_back(scores[i], labels[i] == 1);
    }
    return auc_from_pairs(items);
}

double hand_till_auc(const Eigen::MatrixXd &proba, std::span<const int> labels) {
    if (static_cast<std::size_t>(proba.rows()) != labels.size())
        throw Error(ErrorCode::ShapeMismatch, "one label per probability row required");
    const auto c = static_cast<int>(proba.cols());
    if (c < 2)
        throw Error(ErrorCode::InvalidArgument, "multiclass AUC needs at least two classes");
    std::vector<std::size_t> counts(static_cast<std::size_t>(c), 0);
    for (int l : labels) {
        if (l < 0 || l >= c)
            throw Error(ErrorCode::InvalidArgument, "label outside the probability columns");
        ++counts[static_cast<std::size_t>(l)];
    }
    if (std::find(counts.begin(), counts.end(), 0U) != counts.end())
        throw Error(ErrorCode::MissingClass, "every class must be present");

    double total = 0.0;
    std::vector<std::pair<double, bool>> items;
    for (int i = 0; i < c; ++i)
        for (int j = i + 1; j < c; ++j) {
            double pair = 0.0;
            for (const int ref : {i, j}) {
                items.clear();
                for (std::size_t r = 0; r < labels.size(); ++r)
                    if (labels[r] == i || labels[r] == j)
                        items.emplace_back(proba(static_cast<Eigen::Index>(r), ref), labels[r] == ref);
                pair += auc_from_pairs(items);
            }
            total += 0.5 * pair;
        }
    return 2.0 * total / (static_cast<double>(c) * static_cast<double>(c - 1));
}

} // namespace medfx
