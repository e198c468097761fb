#include <filesystem>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "wsrd/learn/propagate_train.hpp"

using namespace wsrd;
using namespace wsrd::testing;

namespace {

/// Two separable blobs, one GPC per class trained on a labeled slice.
struct BlobFixture {
  std::vector<GpcModel> models;
  std::vector<std::string> pool_ids;
  Eigen::MatrixXd pool;
  std::vector<int> pool_truth;
};

BlobFixture make_blobs(int pool_size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 0.35);
  const int d = 4;

  const auto draw = [&](int cls) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = (cls == 0 ? -0.8 : 0.8) + gauss(rng);
    return x;
  };

  TrainingSet labeled;
  labeled.split = 2;
  labeled.X.resize(16, d);
  labeled.y.resize(16);
  for (int i = 0; i < 16; ++i) {
    labeled.X.row(i) = draw(i % 2).transpose();
    labeled.y[i] = i % 2;
  }

  BlobFixture fx;
  for (int cls = 0; cls < 2; ++cls) {
    TrainingSet ts = labeled;
    for (int i = 0; i < 16; ++i) ts.y[i] = labeled.y[i] == cls ? 1 : -1;
    fx.models.push_back(
        GpcModel::fit(ts, KernelHyperparams{1.0, 1.0, 1.0, 1.0}, EpConfig{}));
  }
  fx.pool.resize(pool_size, d);
  for (int i = 0; i < pool_size; ++i) {
    const int cls = i % 2;
    fx.pool.row(i) = draw(cls).transpose();
    fx.pool_ids.push_back("pool#" + std::to_string(i));
    fx.pool_truth.push_back(cls);
  }
  return fx;
}

}  // namespace

TEST_CASE("propagation keeps only confident, unambiguous items") {
  const BlobFixture fx = make_blobs(200, 3);
  PropagationConfig config;  // tau = 0.7
  const PropagationResult result =
      propagate_labels(fx.models, fx.pool_ids, fx.pool, config);

  CHECK_FALSE(result.examples.empty());
  std::size_t correct = 0;
  for (const auto& ex : result.examples) {
    CHECK(ex.confidence >= config.tau);
    CHECK(ex.provenance == Provenance::Propagated);
    const int idx = std::stoi(ex.id.substr(5));
    correct += ex.label == fx.pool_truth[std::size_t(idx)];
  }
  CHECK(double(correct) / double(result.examples.size()) >= 0.95);

  // Bookkeeping: propagated + abandoned = pool for every category.
  for (const auto& [cat, stats] : result.per_category)
    CHECK(stats.unlabeled_count == fx.pool_ids.size());
}

TEST_CASE("the propagated count shrinks as tau rises") {
  const BlobFixture fx = make_blobs(200, 5);
  std::size_t prev = fx.pool_ids.size() + 1;
  for (double tau : {0.6, 0.7, 0.8, 0.9}) {
    PropagationConfig config;
    config.tau = tau;
    const auto result =
        propagate_labels(fx.models, fx.pool_ids, fx.pool, config);
    CHECK(result.examples.size() <= prev);
    prev = result.examples.size();
  }
}

TEST_CASE("conflicting confident items follow the conflict policy") {
  // Two identical models: every confident item is confident under both.
  const BlobFixture fx = make_blobs(40, 7);
  std::vector<GpcModel> twins = {fx.models[0], fx.models[0]};
  PropagationConfig config;
  const auto abandoned =
      propagate_labels(twins, fx.pool_ids, fx.pool, config);
  CHECK(abandoned.examples.empty());

  config.conflict_policy = ConflictPolicy::HighestConfidence;
  const auto kept = propagate_labels(twins, fx.pool_ids, fx.pool, config);
  CHECK_FALSE(kept.examples.empty());
  for (const auto& ex : kept.examples) CHECK(ex.label == 0);  // tie -> lowest
}

TEST_CASE("tau outside (0.5, 1] is rejected") {
  PropagationConfig config;
  config.tau = 1.01;
  CHECK_THROWS_AS(config.validate(), Error);
  config.tau = 0.5;
  CHECK_THROWS_AS(config.validate(), Error);
  config.tau = 1.0;
  CHECK_NOTHROW(config.validate());
}

namespace {

std::vector<LabeledExample> make_examples(int n, int cls_count,
                                          std::uint64_t seed,
                                          Provenance prov) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 0.4);
  std::vector<LabeledExample> out;
  for (int i = 0; i < n; ++i) {
    const int cls = i % cls_count;
    Eigen::VectorXd x(3);
    for (int j = 0; j < 3; ++j) x[j] = cls * 1.0 + gauss(rng);
    out.push_back({"ex#" + std::to_string(i), x, cls, prov, 1.0});
  }
  return out;
}

}  // namespace

TEST_CASE("weighted softmax gradients match finite differences") {
  const auto manual = make_examples(12, 3, 11, Provenance::Manual);
  const auto propagated = make_examples(20, 3, 13, Provenance::Propagated);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 0.3);
  LinearSoftmaxModel model;
  model.weights.resize(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) model.weights(i, j) = gauss(rng);

  for (double eta : {0.0, 0.5, 1.0}) {
    const Eigen::MatrixXd grad =
        weighted_softmax_gradient(model, manual, propagated, eta);
    const double h = 1e-6;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) {
        LinearSoftmaxModel hi = model, lo = model;
        hi.weights(i, j) += h;
        lo.weights(i, j) -= h;
        const double fd = (weighted_softmax_loss(hi, manual, propagated, eta) -
                           weighted_softmax_loss(lo, manual, propagated, eta)) /
                          (2.0 * h);
        CHECK(std::abs(grad(i, j) - fd) <=
              1e-5 * std::max(1.0, std::abs(fd)));
      }
  }
}

TEST_CASE("training drives the loss down and fits the seed set") {
  const auto manual = make_examples(30, 3, 19, Provenance::Manual);
  const auto propagated = make_examples(60, 3, 23, Provenance::Propagated);
  TrainOptions opts;
  const LinearSoftmaxModel model =
      train_weighted_classifier(manual, propagated, 3, opts);

  LinearSoftmaxModel zero;
  zero.weights = Eigen::MatrixXd::Zero(3, 4);
  CHECK(weighted_softmax_loss(model, manual, propagated, opts.eta) <
        weighted_softmax_loss(zero, manual, propagated, opts.eta));
  int correct = 0;
  for (const auto& ex : manual)
    correct += predict_class(model, ex.features).first == ex.label;
  CHECK(correct >= 27);
}

TEST_CASE("an empty manual pool cannot train") {
  const auto propagated = make_examples(10, 2, 1, Provenance::Propagated);
  CHECK_THROWS_WITH_AS(
      train_weighted_classifier({}, propagated, 2, TrainOptions{}),
      "no supervision", Error);
}

TEST_CASE("mini-batch training is deterministic in the seed") {
  const auto manual = make_examples(24, 2, 29, Provenance::Manual);
  TrainOptions opts;
  opts.batch_size = 8;
  opts.epochs = 40;
  opts.seed = 99;
  const auto a = train_weighted_classifier(manual, {}, 2, opts);
  const auto b = train_weighted_classifier(manual, {}, 2, opts);
  CHECK(a.weights == b.weights);
}

TEST_CASE("classifier json round-trip and prediction tie-breaks") {
  const auto manual = make_examples(20, 2, 31, Provenance::Manual);
  const auto model = train_weighted_classifier(manual, {}, 2, TrainOptions{});
  const auto path =
      (std::filesystem::temp_directory_path() / "wsrd_cls_test.json").string();
  model.save(path);
  const auto back = LinearSoftmaxModel::load(path);
  CHECK(back.weights == model.weights);
  std::filesystem::remove(path);

  LinearSoftmaxModel tie;
  tie.weights = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd x(2);
  x << 0.4, -0.2;
  const auto [cls, probs] = predict_class(tie, x);
  CHECK(cls == 0);
  CHECK(probs.sum() == doctest::Approx(1.0));
}

TEST_CASE("view aggregation averages probabilities then votes") {
  Eigen::VectorXd a(3), b(3);
  a << 0.6, 0.3, 0.1;
  b << 0.1, 0.5, 0.4;
  const auto [cls, mean] = aggregate_view_predictions({a, b});
  CHECK(cls == 1);  // means: 0.35, 0.40, 0.25
  CHECK(mean[1] == doctest::Approx(0.40));
}
