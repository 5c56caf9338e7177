#pragma once

#include <Eigen/Dense>

#include <span>

namespace medfx {

/// Area under the ROC curve in its Mann-Whitney form: P(pos > neg) plus half
/// the tie probability. labels are 0 (negative) or 1 (positive).
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Multiclass AUC averaged over unordered class pairs (one-vs-one). Column i
/// of proba scores class i; labels are class indices.
double hand_till_auc(const Eigen::MatrixXd &proba, std::span<const int> labels);

} // namespace medfx
