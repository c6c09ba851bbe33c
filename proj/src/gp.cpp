#include "gpsearch/gp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "gpsearch/errors.hpp"
#include "gpsearch/format.hpp"

namespace gpsearch {

Eigen::VectorXd Posterior::variances() const {
  if (!covariance)
    throw ValidationError("posterior was computed without covariance");
  return covariance->diagonal().cwiseMax(0.0);
}

GPModel fit(const KernelSpec& kernel, const Eigen::MatrixXd& X,
            const Eigen::VectorXd& f, double jitter) {
  if (X.rows() == 0) throw ValidationError("fit requires at least one point");
  if (X.rows() != f.size())
    throw ValidationError("fit: inputs and outputs differ in length");
  if (!X.allFinite() || !f.allFinite())
    throw ValidationError("fit: inputs must be finite");
  if (!(jitter >= 0.0) || !std::isfinite(jitter))
    throw ValidationError("fit: jitter must be a nonnegative finite value");

  GPModel model;
  model.kernel_ = kernel;
  model.train_inputs_ = X;
  model.train_outputs_ = f;
  model.jitter_ = jitter;

  // A constant vector must yield an exactly-zero residual so the posterior
  // mean falls back to that constant at every query point.
  if (f.minCoeff() == f.maxCoeff()) {
    model.mean_offset_ = f[0];
  } else {
    model.mean_offset_ = f.mean();
  }

  Eigen::MatrixXd K = gram_matrix(kernel, X, X);
  K.diagonal().array() += jitter;
  model.llt_.compute(K);
  if (model.llt_.info() != Eigen::Success) {
    throw FactorizationError(
        "cholesky factorization failed with jitter " + format_exact(jitter),
        jitter);
  }
  model.alpha_ = model.llt_.solve((f.array() - model.mean_offset_).matrix());
  return model;
}

GPModel fit_with_jitter_ladder(const KernelSpec& kernel,
                               const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& f, double initial_jitter,
                               double max_jitter) {
  // Zero would make the *10 escalation a no-op and the loop unbounded.
  if (!(initial_jitter > 0.0) || !std::isfinite(initial_jitter))
    throw ValidationError("jitter ladder requires a positive starting jitter");
  double jitter = initial_jitter;
  while (true) {
    try {
      return fit(kernel, X, f, jitter);
    } catch (const FactorizationError&) {
      if (jitter * 10.0 > max_jitter) {
        throw FactorizationError(
            "cholesky factorization failed after escalating jitter to " +
                format_exact(jitter),
            jitter);
      }
      jitter *= 10.0;
    }
  }
}

Posterior posterior(const GPModel& model, const Eigen::MatrixXd& query,
                    bool want_covariance) {
  if (query.rows() == 0)
    throw ValidationError("posterior requires at least one query point");
  if (query.cols() != model.train_inputs().cols())
    throw ValidationError("posterior: query dimension differs from training");

  const Eigen::MatrixXd k_train_query =
      gram_matrix(model.kernel(), model.train_inputs(), query);

  Posterior post;
  post.mean = Eigen::VectorXd::Constant(query.rows(), model.mean_offset());
  post.mean.noalias() += k_train_query.transpose() * model.alpha();

  if (want_covariance) {
    // Sigma = K(Q,Q) - V^T V with V = L^{-1} K(X,Q); one triangular solve,
    // no explicit inverse.
    Eigen::MatrixXd v = k_train_query;
    model.llt().matrixL().solveInPlace(v);
    Eigen::MatrixXd cov = gram_matrix(model.kernel(), query, query);
    cov.noalias() -= v.transpose() * v;
    cov = 0.5 * (cov + cov.transpose()).eval();
    post.covariance = std::move(cov);
  }
  return post;
}

Eigen::VectorXd sample_prior(const KernelSpec& kernel, const Eigen::MatrixXd& X,
                             double jitter, std::uint64_t seed) {
  if (X.rows() == 0)
    throw ValidationError("sample_prior requires at least one point");

  Eigen::MatrixXd K = gram_matrix(kernel, X, X);
  K.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError(
        "cholesky factorization failed with jitter " + format_exact(jitter),
        jitter);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd z(X.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = gauss(rng);
  return llt.matrixL() * z;
}

}  // namespace gpsearch
