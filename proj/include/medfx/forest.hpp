#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace medfx {

struct ForestParams {
    std::size_t n_trees = 500;
    std::optional<std::size_t> mtry; // default floor(sqrt(p)), at least 1
    std::size_t min_leaf = 1;
    std::uint64_t seed = 0;
};

/// Classification tree stored as a flat node array; node 0 is the root.
struct DecisionTree {
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int label = 0;
    };
    std::vector<Node> nodes;

    int predict(const Eigen::Ref<const Eigen::RowVectorXd> &row) const;
};

struct ForestModel {
    std::size_t n_classes = 0;
    std::size_t n_features = 0;
    std::vector<DecisionTree> trees;
};

/// Bagged CART trees (Gini splits, mtry candidate features per split).
/// Labels are class indices 0..c-1. Inputs must be free of NaN.
ForestModel train_forest(const Eigen::MatrixXd &features, std::span<const int> labels, const ForestParams &params);

/// Fraction of trees voting for each class; one row per input row.
Eigen::MatrixXd predict_proba(const ForestModel &model, const Eigen::MatrixXd &rows);

} // namespace medfx
