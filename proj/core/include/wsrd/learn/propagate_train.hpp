#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wsrd/gpc/gpc.hpp"

namespace wsrd {

enum class Provenance { Manual, Propagated };

/// One training example for the downstream classifier. Confidence is 1.0
/// for manual labels and the GPC predictive probability for propagated
/// ones (>= the tau used at creation).
struct LabeledExample {
  std::string id;
  Eigen::VectorXd features;
  int label = 0;  // category index
  Provenance provenance = Provenance::Manual;
  double confidence = 1.0;
};

enum class ConflictPolicy { Abandon, HighestConfidence };

struct PropagationConfig {
  double tau = 0.7;
  ConflictPolicy conflict_policy = ConflictPolicy::Abandon;

  void validate() const {
    if (!(tau > 0.5 && tau <= 1.0)) throw Error("tau must be in (0.5, 1]");
  }
};

struct CategoryPropagationStats {
  std::size_t unlabeled_count = 0;
  std::size_t propagated_count = 0;
  std::size_t abandoned_count = 0;
};

struct PropagationResult {
  std::vector<LabeledExample> examples;
  std::map<int, CategoryPropagationStats> per_category;
};

/// Scores each pool item under every per-category binary model and keeps
/// items whose confidence lies in [tau, 1]; items confident under more
/// than one category follow the conflict policy. models[c] classifies
/// category c vs rest.
PropagationResult propagate_labels(const std::vector<GpcModel>& models,
                                   const std::vector<std::string>& pool_ids,
                                   const Eigen::MatrixXd& pool_features,
                                   const PropagationConfig& config);

/// Linear softmax classifier over fused features, weights C x (d+1) with a
/// trailing bias column.
struct LinearSoftmaxModel {
  Eigen::MatrixXd weights;

  int num_classes() const { return int(weights.rows()); }
  int dimension() const { return int(weights.cols()) - 1; }

  void save(const std::string& path) const;
  static LinearSoftmaxModel load(const std::string& path);
};

struct TrainOptions {
  double eta = 1.0;   // weight of the propagated-pool loss term
  int epochs = 200;
  double learning_rate = 0.5;
  int batch_size = 0;  // 0 = full batch with backtracking line search
  std::uint64_t seed = 0;
};

/// Two-pool weighted negative log likelihood:
///   -sum_manual log softmax - eta * sum_propagated log softmax.
double weighted_softmax_loss(const LinearSoftmaxModel& model,
                             const std::vector<LabeledExample>& manual,
                             const std::vector<LabeledExample>& propagated,
                             double eta);

/// Gradient of the weighted loss with respect to the weights.
Eigen::MatrixXd weighted_softmax_gradient(
    const LinearSoftmaxModel& model, const std::vector<LabeledExample>& manual,
    const std::vector<LabeledExample>& propagated, double eta);

/// Minimizes the weighted loss from zero initialization. Full-batch mode
/// uses backtracking line search (monotone loss); batch_size > 0 switches
/// to seeded mini-batch gradient descent. Throws Error("no supervision")
/// when the manual pool is empty.
LinearSoftmaxModel train_weighted_classifier(
    const std::vector<LabeledExample>& manual,
    const std::vector<LabeledExample>& propagated, int num_classes,
    const TrainOptions& opts);

/// Softmax probabilities and the argmax category (ties break toward the
/// lowest category index).
std::pair<int, Eigen::VectorXd> predict_class(
    const LinearSoftmaxModel& model,
    const Eigen::Ref<const Eigen::VectorXd>& x);

/// Elementwise mean of per-view probability vectors, then argmax with the
/// lowest-index tie break.
std::pair<int, Eigen::VectorXd> aggregate_view_predictions(
    const std::vector<Eigen::VectorXd>& per_view);

}  // namespace wsrd
