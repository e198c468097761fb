#include "wsrd/gpc/gpc.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "json.hpp"

namespace wsrd {

namespace {

double log_normal_pdf(double x) {
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// Squared-distance matrix over a column block.
Eigen::MatrixXd sq_dist(const Eigen::MatrixXd& A) {
  const Eigen::VectorXd sq = A.rowwise().squaredNorm();
  Eigen::MatrixXd D = sq.replicate(1, A.rows()) +
                      sq.transpose().replicate(A.rows(), 1) -
                      2.0 * A * A.transpose();
  return D.cwiseMax(0.0);
}

}  // namespace

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double log_normal_cdf(double x) {
  if (x > -36.0) return std::log(normal_cdf(x));
  // Deep-tail asymptotic expansion.
  const double x2 = x * x;
  return -0.5 * x2 - std::log(-x * std::sqrt(2.0 * std::numbers::pi)) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

void TrainingSet::validate() const {
  if (X.rows() < 1 || X.rows() != y.size())
    throw Error("invalid training set");
  if (split < 0 || split > X.cols()) throw Error("invalid feature split");
  if (!X.allFinite()) throw Error("invalid value");
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 1)
      pos = true;
    else if (y[i] == -1)
      neg = true;
    else
      throw Error("labels must be -1 or +1");
  }
  if (!pos || !neg) throw Error("degenerate labels");
}

double kernel_eval(const KernelHyperparams& h,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2, int split) {
  h.validate();
  if (x.size() != x2.size()) throw Error("dimension mismatch");
  if (split < 0 || split > x.size()) throw Error("invalid feature split");
  const double d2_rgb = (x.head(split) - x2.head(split)).squaredNorm();
  const double d2_dep =
      (x.tail(x.size() - split) - x2.tail(x.size() - split)).squaredNorm();
  const double k_rgb = h.alpha_rgb * h.alpha_rgb *
                       std::exp(-d2_rgb / (2.0 * h.beta_rgb * h.beta_rgb));
  const double k_dep =
      h.alpha_depth * h.alpha_depth *
      std::exp(-d2_dep / (2.0 * h.beta_depth * h.beta_depth));
  return k_rgb * k_dep;
}

Eigen::MatrixXd kernel_matrix(const KernelHyperparams& h,
                              const Eigen::MatrixXd& X, int split) {
  h.validate();
  const Eigen::MatrixXd d2_rgb = sq_dist(X.leftCols(split));
  const Eigen::MatrixXd d2_dep = sq_dist(X.rightCols(X.cols() - split));
  const double a2 = h.alpha_rgb * h.alpha_rgb * h.alpha_depth * h.alpha_depth;
  return a2 * (-d2_rgb / (2.0 * h.beta_rgb * h.beta_rgb) -
               d2_dep / (2.0 * h.beta_depth * h.beta_depth))
                  .array()
                  .exp()
                  .matrix();
}

void GpcModel::build_cache() {
  const Eigen::Index n = ts_.size();
  K_ = kernel_matrix(h_, ts_.X, ts_.split);
  K_.diagonal().array() += jitter_;
  sqrt_s_ = site_tau_.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) +
                      sqrt_s_.asDiagonal() * K_ * sqrt_s_.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success)
    throw NumericalError("ill-conditioned kernel");
  chol_b_ = llt.matrixL();
  const Eigen::VectorXd rhs = sqrt_s_.cwiseProduct(K_ * site_nu_);
  const Eigen::VectorXd sol = llt.solve(rhs);
  b_ = site_nu_ - sqrt_s_.cwiseProduct(sol);
}

GpcModel GpcModel::fit(TrainingSet ts, const KernelHyperparams& h,
                       const EpConfig& cfg) {
  ts.validate();
  h.validate();
  const Eigen::Index n = ts.size();

  GpcModel model;
  model.ts_ = std::move(ts);
  model.h_ = h;

  // Jitter ladder: start at 1e-8 * mean(diag K), double until the Gram
  // matrix admits a Cholesky factorization, give up at 1e-2 * mean.
  Eigen::MatrixXd K = kernel_matrix(h, model.ts_.X, model.ts_.split);
  const double diag_mean = K.diagonal().mean();
  double jitter = 1e-8 * diag_mean;
  for (;; jitter *= 2.0) {
    if (jitter > 1e-2 * diag_mean)
      throw NumericalError("ill-conditioned kernel");
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    if (Eigen::LLT<Eigen::MatrixXd>(Kj).info() == Eigen::Success) break;
  }
  model.jitter_ = jitter;
  K.diagonal().array() += jitter;

  Eigen::VectorXd nu = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd Sigma = K;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);

  auto recompute_posterior = [&]() {
    const Eigen::VectorXd rt = tau.cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) +
                        rt.asDiagonal() * K * rt.asDiagonal();
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success)
      throw NumericalError("ill-conditioned kernel");
    const Eigen::MatrixXd V =
        llt.matrixL().solve(rt.asDiagonal() * K);
    Sigma = K - V.transpose() * V;
    mu = Sigma * nu;
  };

  bool converged = false;
  for (int sweep = 0; sweep < cfg.max_sweeps && !converged; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sigma2 = Sigma(i, i);
      const double tau_cav = 1.0 / sigma2 - tau[i];
      const double nu_cav = mu[i] / sigma2 - nu[i];
      if (tau_cav <= 1e-12) continue;  // cavity collapsed, skip this site
      const double mu_cav = nu_cav / tau_cav;
      const double s2_cav = 1.0 / tau_cav;

      // Probit moment matching.
      const double y = double(model.ts_.y[i]);
      const double denom = std::sqrt(1.0 + s2_cav);
      const double z = y * mu_cav / denom;
      const double rho = std::exp(log_normal_pdf(z) - log_normal_cdf(z));
      const double mu_hat = mu_cav + y * s2_cav * rho / denom;
      const double s2_hat = std::max(
          s2_cav - s2_cav * s2_cav * rho * (z + rho) / (1.0 + s2_cav),
          1e-14);

      double tau_new = std::max(1.0 / s2_hat - tau_cav, 0.0);
      double nu_new = mu_hat / s2_hat - nu_cav;
      tau_new = (1.0 - cfg.damping) * tau[i] + cfg.damping * tau_new;
      nu_new = (1.0 - cfg.damping) * nu[i] + cfg.damping * nu_new;

      const double d_tau = tau_new - tau[i];
      const double d_nu = nu_new - nu[i];
      max_delta = std::max({max_delta, std::abs(d_tau), std::abs(d_nu)});
      tau[i] = tau_new;
      nu[i] = nu_new;

      const Eigen::VectorXd si = Sigma.col(i);
      Sigma.noalias() -= (d_tau / (1.0 + d_tau * sigma2)) * si * si.transpose();
      mu.noalias() = Sigma * nu;
    }
    recompute_posterior();
    converged = max_delta < cfg.tol;
  }
  if (!converged) throw NumericalError("ep did not converge");

  model.site_nu_ = nu;
  model.site_tau_ = tau;
  model.build_cache();

  // log Z_EP = -log|B|/2 + nu' mu / 2 + sum_i [ log Phi(z_i) - log C_i ]
  // with C_i the cavity-weighted mass of the local site term.
  recompute_posterior();
  double log_z =
      -model.chol_b_.diagonal().array().log().sum() + 0.5 * nu.dot(mu);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sigma2 = Sigma(i, i);
    const double tau_cav = std::max(1.0 / sigma2 - tau[i], 1e-12);
    const double nu_cav = mu[i] / sigma2 - nu[i];
    const double mu_cav = nu_cav / tau_cav;
    const double s2_cav = 1.0 / tau_cav;
    const double z =
        double(model.ts_.y[i]) * mu_cav / std::sqrt(1.0 + s2_cav);
    const double c = 1.0 + tau[i] * s2_cav;
    const double log_site_mass =
        -0.5 * std::log(c) +
        (2.0 * nu[i] * mu_cav - tau[i] * mu_cav * mu_cav +
         nu[i] * nu[i] * s2_cav) /
            (2.0 * c);
    log_z += log_normal_cdf(z) - log_site_mass;
  }
  model.log_ml_ = log_z;
  return model;
}

Prediction GpcModel::predict(
    const Eigen::Ref<const Eigen::VectorXd>& x_star) const {
  if (x_star.size() != ts_.X.cols()) throw Error("dimension mismatch");
  const Eigen::Index n = ts_.size();
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i)
    k_star[i] = kernel_eval(h_, ts_.X.row(i), x_star, ts_.split);
  const double k_ss = h_.alpha_rgb * h_.alpha_rgb * h_.alpha_depth *
                      h_.alpha_depth;

  Prediction p;
  p.latent_mean = k_star.dot(b_);
  const Eigen::VectorXd v = chol_b_.triangularView<Eigen::Lower>().solve(
      sqrt_s_.cwiseProduct(k_star));
  p.latent_variance = std::max(k_ss - v.squaredNorm(), 0.0);
  p.probability =
      normal_cdf(p.latent_mean / std::sqrt(1.0 + p.latent_variance));
  return p;
}

Eigen::Vector4d GpcModel::log_ml_gradient() const {
  const Eigen::Index n = ts_.size();
  // R = S^1/2 B^-1 S^1/2; gradient of log Z_EP at the EP fixed point is
  // (b' dK b - tr(R dK)) / 2 per log-hyperparameter.
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) +
                      sqrt_s_.asDiagonal() * K_ * sqrt_s_.asDiagonal();
  llt.compute(B);
  const Eigen::MatrixXd Binv =
      llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd R =
      sqrt_s_.asDiagonal() * Binv * sqrt_s_.asDiagonal();

  const Eigen::MatrixXd d2_rgb = sq_dist(ts_.X.leftCols(ts_.split));
  const Eigen::MatrixXd d2_dep =
      sq_dist(ts_.X.rightCols(ts_.X.cols() - ts_.split));
  Eigen::MatrixXd K_nojit = K_;
  K_nojit.diagonal().array() -= jitter_;

  auto directional = [&](const Eigen::MatrixXd& dK) {
    return 0.5 * b_.dot(dK * b_) - 0.5 * (R.cwiseProduct(dK)).sum();
  };

  Eigen::Vector4d g;
  g[0] = directional(2.0 * K_nojit);  // d/dlog alpha_rgb
  g[1] = directional(
      K_nojit.cwiseProduct(d2_rgb / (h_.beta_rgb * h_.beta_rgb)));
  g[2] = directional(2.0 * K_nojit);  // d/dlog alpha_depth
  g[3] = directional(
      K_nojit.cwiseProduct(d2_dep / (h_.beta_depth * h_.beta_depth)));
  return g;
}

OptimizeResult optimize_hyperparams(const TrainingSet& ts,
                                    const KernelHyperparams& init,
                                    int restarts, std::uint64_t seed,
                                    const EpConfig& cfg) {
  ts.validate();
  if (restarts < 1) throw Error("restarts must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_uni(std::log(1e-2),
                                                 std::log(1e2));

  auto evaluate = [&](const Eigen::Vector4d& theta)
      -> std::pair<double, std::optional<GpcModel>> {
    KernelHyperparams h{std::exp(theta[0]), std::exp(theta[1]),
                        std::exp(theta[2]), std::exp(theta[3])};
    try {
      GpcModel m = GpcModel::fit(ts, h, cfg);
      return {m.log_marginal_likelihood(), std::move(m)};
    } catch (const Error&) {
      return {-std::numeric_limits<double>::infinity(), std::nullopt};
    }
  };

  std::optional<OptimizeResult> best;
  for (int r = 0; r < restarts; ++r) {
    Eigen::Vector4d theta;
    if (r == 0) {
      init.validate();
      theta << std::log(init.alpha_rgb), std::log(init.beta_rgb),
          std::log(init.alpha_depth), std::log(init.beta_depth);
    } else {
      for (int j = 0; j < 4; ++j) theta[j] = log_uni(rng);
    }

    auto [f, model] = evaluate(theta);
    if (!model) continue;

    for (int iter = 0; iter < 60; ++iter) {
      const Eigen::Vector4d g = model->log_ml_gradient();
      if (g.lpNorm<Eigen::Infinity>() < 1e-5) break;
      double step = 1.0 / std::max(1.0, g.norm());
      bool moved = false;
      while (step >= 1e-7) {
        const Eigen::Vector4d cand = theta + step * g;
        auto [fc, mc] = evaluate(cand);
        if (mc && fc > f + 1e-4 * step * g.squaredNorm()) {
          theta = cand;
          f = fc;
          model = std::move(mc);
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }

    if (!best || f > best->log_ml) {
      best = OptimizeResult{{std::exp(theta[0]), std::exp(theta[1]),
                             std::exp(theta[2]), std::exp(theta[3])},
                            f, std::move(*model)};
    }
  }
  if (!best) throw NumericalError("optimization failed");
  return std::move(*best);
}

std::string GpcModel::serialize() const {
  nlohmann::json j;
  j["version"] = 1;
  j["hyperparams"] = {{"alpha_rgb", h_.alpha_rgb},
                      {"beta_rgb", h_.beta_rgb},
                      {"alpha_depth", h_.alpha_depth},
                      {"beta_depth", h_.beta_depth}};
  j["split"] = ts_.split;
  j["jitter"] = jitter_;
  j["log_ml"] = log_ml_;
  j["X"] = std::vector<std::vector<double>>();
  for (Eigen::Index r = 0; r < ts_.X.rows(); ++r) {
    std::vector<double> row(std::size_t(ts_.X.cols()));
    for (Eigen::Index c = 0; c < ts_.X.cols(); ++c)
      row[std::size_t(c)] = ts_.X(r, c);
    j["X"].push_back(row);
  }
  j["y"] = std::vector<int>(ts_.y.data(), ts_.y.data() + ts_.y.size());
  j["site_nu"] =
      std::vector<double>(site_nu_.data(), site_nu_.data() + site_nu_.size());
  j["site_tau"] = std::vector<double>(site_tau_.data(),
                                      site_tau_.data() + site_tau_.size());
  return j.dump();
}

GpcModel GpcModel::deserialize(const std::string& blob) {
  nlohmann::json j = nlohmann::json::parse(blob);
  if (j.at("version").get<int>() != 1)
    throw DataError("unsupported model version");

  GpcModel m;
  const auto& h = j.at("hyperparams");
  m.h_ = {h.at("alpha_rgb"), h.at("beta_rgb"), h.at("alpha_depth"),
          h.at("beta_depth")};
  m.ts_.split = j.at("split");
  m.jitter_ = j.at("jitter");
  m.log_ml_ = j.at("log_ml");

  const auto X = j.at("X").get<std::vector<std::vector<double>>>();
  const auto y = j.at("y").get<std::vector<int>>();
  m.ts_.X.resize(Eigen::Index(X.size()),
                 X.empty() ? 0 : Eigen::Index(X.front().size()));
  for (std::size_t r = 0; r < X.size(); ++r)
    for (std::size_t c = 0; c < X[r].size(); ++c)
      m.ts_.X(Eigen::Index(r), Eigen::Index(c)) = X[r][c];
  m.ts_.y = Eigen::Map<const Eigen::VectorXi>(y.data(),
                                              Eigen::Index(y.size()));

  const auto nu = j.at("site_nu").get<std::vector<double>>();
  const auto tau = j.at("site_tau").get<std::vector<double>>();
  m.site_nu_ = Eigen::Map<const Eigen::VectorXd>(nu.data(),
                                                 Eigen::Index(nu.size()));
  m.site_tau_ = Eigen::Map<const Eigen::VectorXd>(tau.data(),
                                                  Eigen::Index(tau.size()));
  m.build_cache();
  return m;
}

void GpcModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model: " + path);
  out << serialize();
}

GpcModel GpcModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

}  // namespace wsrd
