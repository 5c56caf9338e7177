#include "medfx/forest.hpp"

#include "medfx/error.hpp"
#include "medfx/parallel.hpp"
#include "medfx/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace medfx {

int DecisionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd> &row) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const Node &n = nodes[static_cast<std::size_t>(node)];
        node = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].label;
}

namespace {

struct TreeBuilder {
    const Eigen::MatrixXd &x;
    std::span<const int> labels;
    std::size_t n_classes;
    std::size_t mtry;
    std::size_t min_leaf;
    Rng rng;

    std::vector<std::size_t> samples;
    std::vector<std::pair<double, int>> scratch;
    std::vector<std::size_t> feature_pool;
    DecisionTree tree;

    struct Pending {
        int node;
        std::size_t begin;
        std::size_t end;
    };

    static int majority(const std::vector<std::size_t> &counts) {
        return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }

    DecisionTree build() {
        const auto n = static_cast<std::size_t>(x.rows());
        samples.resize(n);
        for (auto &s : samples)
            s = uniform_index(rng, n);
        feature_pool.resize(static_cast<std::size_t>(x.cols()));
        std::iota(feature_pool.begin(), feature_pool.end(), 0);

        tree.nodes.emplace_back();
        std::vector<Pending> stack{{0, 0, n}};
        std::vector<std::size_t> counts(n_classes), left_counts(n_classes);
        while (!stack.empty()) {
            const Pending job = stack.back();
            stack.pop_back();
            const std::size_t size = job.end - job.begin;

            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t i = job.begin; i < job.end; ++i)
                ++counts[static_cast<std::size_t>(labels[samples[i]])];
            tree.nodes[static_cast<std::size_t>(job.node)].label = majority(counts);
            const bool pure = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
            if (pure || size < 2 * min_leaf)
                continue;

            double parent_score = 0.0;
            for (auto c : counts)
                parent_score += static_cast<double>(c) * static_cast<double>(c);
            parent_score /= static_cast<double>(size);

            // Partial Fisher-Yates: the first mtry entries become the candidates.
            for (std::size_t k = 0; k < mtry; ++k)
                std::swap(feature_pool[k], feature_pool[k + uniform_index(rng, feature_pool.size() - k)]);

            int best_feature = -1;
            double best_threshold = 0.0;
            double best_score = parent_score + 1e-12 * static_cast<double>(size);
            for (std::size_t k = 0; k < mtry; ++k) {
                const auto f = static_cast<Eigen::Index>(feature_pool[k]);
                scratch.clear();
                for (std::size_t i = job.begin; i < job.end; ++i)
                    scratch.emplace_back(x(static_cast<Eigen::Index>(samples[i]), f), labels[samples[i]]);
                std::sort(scratch.begin(), scratch.end());
                if (scratch.front().first == scratch.back().first)
                    continue;

                // Gini: maximize sum_c nL_c^2 / nL + sum_c nR_c^2 / nR.
                std::fill(left_counts.begin(), left_counts.end(), 0);
                double left_sq = 0.0;
                double right_sq = parent_score * static_cast<double>(size);
                for (std::size_t i = 0; i + 1 < size; ++i) {
                    const auto c = static_cast<std::size_t>(scratch[i].second);
                    const double l = static_cast<double>(left_counts[c]);
                    const double r = static_cast<double>(counts[c] - left_counts[c]);
                    left_sq += 2.0 * l + 1.0;
                    right_sq -= 2.0 * r - 1.0;
                    ++left_counts[c];
                    const std::size_t n_left = i + 1;
                    if (scratch[i].first == scratch[i + 1].first || n_left < min_leaf || size - n_left < min_leaf)
                        continue;
                    const double score = left_sq / static_cast<double>(n_left) + right_sq / static_cast<double>(size - n_left);
                    if (score > best_score) {
                        best_score = score;
                        best_feature = static_cast<int>(f);
                        best_threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
                        if (!(best_threshold < scratch[i + 1].first))
                            best_threshold = scratch[i].first;
                    }
                }
            }
            if (best_feature < 0)
                continue;

            const auto mid = std::partition(samples.begin() + static_cast<std::ptrdiff_t>(job.begin),
                                            samples.begin() + static_cast<std::ptrdiff_t>(job.end), [&](std::size_t s) {
                                                return x(static_cast<Eigen::Index>(s), best_feature) <= best_threshold;
                                            });
            const auto split = static_cast<std::size_t>(mid - samples.begin());
            const int left = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            auto &node = tree.nodes[static_cast<std::size_t>(job.node)];
            node.feature = best_feature;
            node.threshold = best_threshold;
            node.left = left;
            node.right = left + 1;
            stack.push_back({left + 1, split, job.end});
            stack.push_back({left, job.begin, split});
        }
        return std::move(tree);
    }
};

} // namespace

ForestModel train_forest(const Eigen::MatrixXd &features, std::span<const int> labels, const ForestParams &params) {
    const auto n = static_cast<std::size_t>(features.rows());
    if (labels.size() != n)
        throw Error(ErrorCode::ShapeMismatch, "one label per training row required");
    if (n == 0 || features.cols() == 0)
        throw Error(ErrorCode::InvalidArgument, "empty training set");
    if (features.hasNaN())
        throw Error(ErrorCode::InvalidArgument, "training features contain missing values; impute first");
    if (params.n_trees == 0 || params.min_leaf == 0)
        throw Error(ErrorCode::InvalidArgument, "forest needs at least one tree and min_leaf >= 1");
    const int max_label = *std::max_element(labels.begin(), labels.end());
    if (*std::min_element(labels.begin(), labels.end()) < 0)
        throw Error(ErrorCode::InvalidArgument, "labels must be non-negative class indices");
    if (std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels.front(); }))
        throw Error(ErrorCode::SingleClassTraining, "training labels hold a single class");

    ForestModel model;
    model.n_classes = static_cast<std::size_t>(max_label) + 1;
    model.n_features = static_cast<std::size_t>(features.cols());
    const std::size_t mtry = std::clamp<std::size_t>(
        params.mtry.value_or(static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(model.n_features))))), 1,
        model.n_features);

    model.trees.resize(params.n_trees);
    parallel_for(params.n_trees, [&](std::size_t t) {
        TreeBuilder builder{features, labels, model.n_classes, mtry, params.min_leaf, make_rng(derive_seed(params.seed, t)),
                            {}, {}, {}, {}};
        model.trees[t] = builder.build();
    });
    return model;
}

Eigen::MatrixXd predict_proba(const ForestModel &model, const Eigen::MatrixXd &rows) {
    if (static_cast<std::size_t>(rows.cols()) != model.n_features)
        throw Error(ErrorCode::ShapeMismatch, "feature width differs from training");
    Eigen::MatrixXd votes = Eigen::MatrixXd::Zero(rows.rows(), static_cast<Eigen::Index>(model.n_classes));
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        for (const auto &tree : model.trees)
            votes(i, tree.predict(rows.row(i))) += 1.0;
    return votes / static_cast<double>(model.trees.size());
}

} // namespace medfx
