#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "wsrd/error.hpp"

namespace wsrd {

/// Signal scale and length scale per modality of the product RBF kernel
/// k(x,x') = aI^2 exp(-|xI-xI'|^2/(2 bI^2)) * aD^2 exp(-|xD-xD'|^2/(2 bD^2)).
struct KernelHyperparams {
  double alpha_rgb = 1.0;
  double beta_rgb = 1.0;
  double alpha_depth = 1.0;
  double beta_depth = 1.0;

  void validate() const {
    if (alpha_rgb <= 0 || beta_rgb <= 0 || alpha_depth <= 0 ||
        beta_depth <= 0)
      throw Error("hyperparameters must be positive");
  }
};

/// Fused feature rows with the rgb/depth split and binary labels in {-1,+1}.
struct TrainingSet {
  Eigen::MatrixXd X;  // n x d, rgb block first
  int split = 0;      // columns [0, split) are rgb
  Eigen::VectorXi y;  // entries in {-1, +1}

  Eigen::Index size() const { return X.rows(); }
  void validate() const;
};

struct EpConfig {
  double tol = 1e-6;
  int max_sweeps = 100;
  double damping = 0.8;  // fraction of the site step applied
};

struct Prediction {
  double probability = 0.5;  // P(y=+1)
  double latent_mean = 0.0;
  double latent_variance = 0.0;
};

/// Product-of-RBF kernel between two fused rows sharing `split`.
double kernel_eval(const KernelHyperparams& h,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2, int split);

/// Full Gram matrix (no jitter).
Eigen::MatrixXd kernel_matrix(const KernelHyperparams& h,
                              const Eigen::MatrixXd& X, int split);

/// Binary GP classifier: probit likelihood, EP posterior. Immutable once
/// trained; safe to share across concurrent predict calls.
class GpcModel {
 public:
  /// Runs EP site updates in fixed index order with damping until the max
  /// site-parameter change drops below tol or max_sweeps is reached.
  /// Throws NumericalError("ill-conditioned kernel") when the Gram matrix
  /// is not positive definite after the jitter ladder, Error("degenerate
  /// labels") when only one label is present, and
  /// NumericalError("ep did not converge") on sweep exhaustion.
  static GpcModel fit(TrainingSet ts, const KernelHyperparams& h,
                      const EpConfig& cfg = {});

  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x_star) const;

  double log_marginal_likelihood() const { return log_ml_; }
  const KernelHyperparams& hyperparams() const { return h_; }
  const TrainingSet& training_set() const { return ts_; }
  const Eigen::VectorXd& site_means() const { return site_nu_; }
  const Eigen::VectorXd& site_precisions() const { return site_tau_; }
  double jitter() const { return jitter_; }

  /// Versioned JSON blob; round-trip reproduces predictions bit-for-bit.
  std::string serialize() const;
  static GpcModel deserialize(const std::string& blob);
  void save(const std::string& path) const;
  static GpcModel load(const std::string& path);

  /// d(log Z_EP)/d(log alpha_rgb, log beta_rgb, log alpha_depth,
  /// log beta_depth) at the converged EP fixed point.
  Eigen::Vector4d log_ml_gradient() const;

 private:
  GpcModel() = default;
  void build_cache();  // recomputes L, b from sites + kernel

  TrainingSet ts_;
  KernelHyperparams h_;
  Eigen::VectorXd site_nu_;   // natural mean parameters
  Eigen::VectorXd site_tau_;  // site precisions, >= 0
  double jitter_ = 0.0;
  double log_ml_ = 0.0;

  // Cached predictive quantities: sqrt(S), chol(I + S^1/2 K S^1/2), and
  // b = nu - S^1/2 B^-1 S^1/2 K nu.
  Eigen::MatrixXd K_;
  Eigen::VectorXd sqrt_s_;
  Eigen::MatrixXd chol_b_;  // lower factor
  Eigen::VectorXd b_;
};

/// Multi-start gradient ascent (log-space, backtracking line search) on the
/// EP log marginal likelihood. Restart initializations are log-uniform in
/// [1e-2, 1e2]; restart 0 starts from `init`. Deterministic given seed.
struct OptimizeResult {
  KernelHyperparams hyperparams;
  double log_ml = 0.0;
  GpcModel model;
};

OptimizeResult optimize_hyperparams(const TrainingSet& ts,
                                    const KernelHyperparams& init,
                                    int restarts, std::uint64_t seed,
                                    const EpConfig& cfg = {});

/// Standard normal CDF and its log, numerically stable in both tails.
double normal_cdf(double x);
double log_normal_cdf(double x);

}  // namespace wsrd
