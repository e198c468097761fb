#include "wsrd/learn/propagate_train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace wsrd {

PropagationResult propagate_labels(const std::vector<GpcModel>& models,
                                   const std::vector<std::string>& pool_ids,
                                   const Eigen::MatrixXd& pool_features,
                                   const PropagationConfig& config) {
  config.validate();
  if (models.empty()) throw Error("no models");
  if (pool_ids.size() != std::size_t(pool_features.rows()))
    throw Error("pool id/feature mismatch");

  PropagationResult result;
  for (int c = 0; c < int(models.size()); ++c)
    result.per_category[c].unlabeled_count = pool_ids.size();

  for (Eigen::Index i = 0; i < pool_features.rows(); ++i) {
    const Eigen::VectorXd x = pool_features.row(i);
    int best = -1, confident_hits = 0;
    double best_conf = -1.0;
    for (int c = 0; c < int(models.size()); ++c) {
      const double conf = models[std::size_t(c)].predict(x).probability;
      if (conf >= config.tau) ++confident_hits;
      if (conf > best_conf) {
        best_conf = conf;
        best = c;
      }
    }

    const bool accept =
        best_conf >= config.tau &&
        (confident_hits == 1 ||
         config.conflict_policy == ConflictPolicy::HighestConfidence);
    if (accept) {
      result.examples.push_back({pool_ids[std::size_t(i)], x, best,
                                 Provenance::Propagated, best_conf});
      result.per_category[best].propagated_count++;
    }
  }
  const std::size_t total_propagated = result.examples.size();
  for (auto& [c, stats] : result.per_category)
    stats.abandoned_count = pool_ids.size() - total_propagated;
  return result;
}

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::VectorXd shifted =
      (logits.array() - logits.maxCoeff()).exp();
  return shifted / shifted.sum();
}

Eigen::VectorXd augmented(const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd xa(x.size() + 1);
  xa << x, 1.0;
  return xa;
}

double pool_loss(const LinearSoftmaxModel& model,
                 const std::vector<LabeledExample>& pool) {
  double loss = 0.0;
  for (const auto& ex : pool) {
    const Eigen::VectorXd logits = model.weights * augmented(ex.features);
    const double lse =
        logits.maxCoeff() +
        std::log((logits.array() - logits.maxCoeff()).exp().sum());
    loss -= logits[ex.label] - lse;
  }
  return loss;
}

void pool_gradient(const LinearSoftmaxModel& model,
                   const std::vector<LabeledExample>& pool, double weight,
                   Eigen::MatrixXd& grad) {
  for (const auto& ex : pool) {
    const Eigen::VectorXd xa = augmented(ex.features);
    Eigen::VectorXd p = softmax(model.weights * xa);
    p[ex.label] -= 1.0;
    grad.noalias() += weight * p * xa.transpose();
  }
}

}  // namespace

double weighted_softmax_loss(const LinearSoftmaxModel& model,
                             const std::vector<LabeledExample>& manual,
                             const std::vector<LabeledExample>& propagated,
                             double eta) {
  return pool_loss(model, manual) + eta * pool_loss(model, propagated);
}

Eigen::MatrixXd weighted_softmax_gradient(
    const LinearSoftmaxModel& model, const std::vector<LabeledExample>& manual,
    const std::vector<LabeledExample>& propagated, double eta) {
  Eigen::MatrixXd grad =
      Eigen::MatrixXd::Zero(model.weights.rows(), model.weights.cols());
  pool_gradient(model, manual, 1.0, grad);
  pool_gradient(model, propagated, eta, grad);
  return grad;
}

LinearSoftmaxModel train_weighted_classifier(
    const std::vector<LabeledExample>& manual,
    const std::vector<LabeledExample>& propagated, int num_classes,
    const TrainOptions& opts) {
  if (manual.empty()) throw Error("no supervision");
  if (num_classes < 2) throw Error("need at least 2 classes");
  if (opts.eta < 0.0 || opts.eta > 1.0) throw Error("eta must be in [0, 1]");
  const Eigen::Index d = manual.front().features.size();
  for (const auto& ex : manual)
    if (ex.features.size() != d || ex.label < 0 || ex.label >= num_classes)
      throw Error("inconsistent dimension");
  for (const auto& ex : propagated)
    if (ex.features.size() != d || ex.label < 0 || ex.label >= num_classes)
      throw Error("inconsistent dimension");

  LinearSoftmaxModel model{Eigen::MatrixXd::Zero(num_classes, d + 1)};

  if (opts.batch_size <= 0) {
    // Full batch with backtracking: loss is monotone non-increasing.
    double loss = weighted_softmax_loss(model, manual, propagated, opts.eta);
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
      const Eigen::MatrixXd grad =
          weighted_softmax_gradient(model, manual, propagated, opts.eta);
      const double g2 = grad.squaredNorm();
      if (g2 < 1e-16) break;
      double step = opts.learning_rate;
      bool moved = false;
      while (step > 1e-12) {
        LinearSoftmaxModel cand{model.weights - step * grad};
        const double cand_loss =
            weighted_softmax_loss(cand, manual, propagated, opts.eta);
        if (cand_loss <= loss - 1e-4 * step * g2) {
          model = std::move(cand);
          loss = cand_loss;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    return model;
  }

  // Seeded mini-batch mode. The eta weight rides along with each example.
  struct Item {
    const LabeledExample* ex;
    double weight;
  };
  std::vector<Item> items;
  items.reserve(manual.size() + propagated.size());
  for (const auto& ex : manual) items.push_back({&ex, 1.0});
  for (const auto& ex : propagated) items.push_back({&ex, opts.eta});

  std::mt19937_64 rng(opts.seed);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(items.begin(), items.end(), rng);
    for (std::size_t start = 0; start < items.size();
         start += std::size_t(opts.batch_size)) {
      const std::size_t end =
          std::min(items.size(), start + std::size_t(opts.batch_size));
      Eigen::MatrixXd grad =
          Eigen::MatrixXd::Zero(num_classes, d + 1);
      for (std::size_t k = start; k < end; ++k) {
        const Eigen::VectorXd xa = augmented(items[k].ex->features);
        Eigen::VectorXd p = softmax(model.weights * xa);
        p[items[k].ex->label] -= 1.0;
        grad.noalias() += items[k].weight * p * xa.transpose();
      }
      model.weights -= (opts.learning_rate / double(end - start)) * grad;
    }
  }
  return model;
}

std::pair<int, Eigen::VectorXd> predict_class(
    const LinearSoftmaxModel& model,
    const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() + 1 != model.weights.cols()) throw Error("dimension mismatch");
  const Eigen::VectorXd p = softmax(model.weights * augmented(x));
  int best = 0;
  for (int c = 1; c < p.size(); ++c)
    if (p[c] > p[best]) best = c;
  return {best, p};
}

std::pair<int, Eigen::VectorXd> aggregate_view_predictions(
    const std::vector<Eigen::VectorXd>& per_view) {
  if (per_view.empty()) throw Error("empty input");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(per_view.front().size());
  for (const auto& p : per_view) {
    if (p.size() != mean.size()) throw Error("dimension mismatch");
    mean += p;
  }
  mean /= double(per_view.size());
  int best = 0;
  for (int c = 1; c < mean.size(); ++c)
    if (mean[c] > mean[best]) best = c;
  return {best, mean};
}

void LinearSoftmaxModel::save(const std::string& path) const {
  nlohmann::json j;
  j["version"] = 1;
  j["rows"] = weights.rows();
  j["cols"] = weights.cols();
  j["weights"] = std::vector<double>(weights.data(),
                                     weights.data() + weights.size());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model: " + path);
  out << j.dump();
}

LinearSoftmaxModel LinearSoftmaxModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, true, true);
  LinearSoftmaxModel m;
  const auto w = j.at("weights").get<std::vector<double>>();
  m.weights = Eigen::Map<const Eigen::MatrixXd>(
      w.data(), j.at("rows").get<Eigen::Index>(),
      j.at("cols").get<Eigen::Index>());
  return m;
}

}  // namespace wsrd
