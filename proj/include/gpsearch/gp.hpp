#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "gpsearch/kernels.hpp"

namespace gpsearch {

/// Diagonal jitter ladder: factorization starts at kDefaultJitter and
/// escalates by a factor of 10 up to kMaxJitter before giving up. The
/// linear and cubic kernels routinely produce rank-deficient Gram matrices
/// on grid data, so a retry policy is part of the contract.
inline constexpr double kDefaultJitter = 1e-8;
inline constexpr double kMaxJitter = 1e-2;

/// Exact GP regressor over a fixed training set.
///
/// The model is immutable once fitted; refitting produces a new model. The
/// Cholesky factor of K(X,X) + jitter*I is computed once here and reused by
/// every posterior query, and no explicit matrix inverse is ever formed.
/// The prior mean is a constant equal to the arithmetic mean of the
/// training outputs, which keeps early predictions centered on realistic
/// score levels without extra hyperparameters.
class GPModel {
 public:
  const KernelSpec& kernel() const { return kernel_; }
  const Eigen::MatrixXd& train_inputs() const { return train_inputs_; }
  const Eigen::VectorXd& train_outputs() const { return train_outputs_; }
  double jitter() const { return jitter_; }
  double mean_offset() const { return mean_offset_; }

  /// Lower-triangular L with L L^T = K(X,X) + jitter*I.
  Eigen::MatrixXd factor_l() const { return llt_.matrixL(); }

  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }

  /// (K + jitter*I)^{-1} (f - mean_offset), cached at fit time.
  const Eigen::VectorXd& alpha() const { return alpha_; }

 private:
  friend GPModel fit(const KernelSpec&, const Eigen::MatrixXd&,
                     const Eigen::VectorXd&, double);

  GPModel() = default;

  KernelSpec kernel_;
  Eigen::MatrixXd train_inputs_;
  Eigen::VectorXd train_outputs_;
  double jitter_ = 0.0;
  double mean_offset_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

struct Posterior {
  Eigen::VectorXd mean;
  std::optional<Eigen::MatrixXd> covariance;

  /// Diagonal of the covariance with small negative rounding clamped to 0.
  Eigen::VectorXd variances() const;
};

/// Fits at exactly the given jitter; throws FactorizationError (carrying the
/// attempted jitter) if K + jitter*I is not numerically positive definite.
GPModel fit(const KernelSpec& kernel, const Eigen::MatrixXd& X,
            const Eigen::VectorXd& f, double jitter = kDefaultJitter);

/// fit() with escalation: multiplies the jitter by 10 after each
/// factorization failure until max_jitter is exceeded.
GPModel fit_with_jitter_ladder(const KernelSpec& kernel,
                               const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& f,
                               double initial_jitter = kDefaultJitter,
                               double max_jitter = kMaxJitter);

/// Posterior of the query points given the training data:
///   mean = m + K(Q,X) [K(X,X) + jitter*I]^{-1} (f - m)
///   cov  = K(Q,Q) - K(Q,X) [K(X,X) + jitter*I]^{-1} K(X,Q)
/// with m the model's constant mean offset. The covariance is skipped
/// unless requested; the search loop only needs the mean.
Posterior posterior(const GPModel& model, const Eigen::MatrixXd& query,
                    bool want_covariance = false);

/// One draw f ~ N(0, K(X,X) + jitter*I) via L z with z a seeded standard
/// normal vector. Identical seeds produce identical draws.
Eigen::VectorXd sample_prior(const KernelSpec& kernel, const Eigen::MatrixXd& X,
                             double jitter, std::uint64_t seed);

}  // namespace gpsearch
