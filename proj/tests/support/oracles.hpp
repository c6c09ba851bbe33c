#pragma once

// Independent reference implementations for the test suites. Everything
// here recomputes results from first principles (explicit inverses, direct
// formula evaluation) instead of calling the library's optimized paths.

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "gpsearch/kernels.hpp"
#include "gpsearch/space.hpp"

namespace oracles {

inline double kernel_value(gpsearch::KernelKind kind, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y) {
  switch (kind) {
    case gpsearch::KernelKind::Linear:
      return x.dot(y);
    case gpsearch::KernelKind::Cubic: {
      const double s = x.dot(y);
      return 3.0 * (s * s + 2.0 * s * s * s);
    }
    case gpsearch::KernelKind::AbsExponential:
      return std::exp(-std::sqrt((x - y).squaredNorm()));
    case gpsearch::KernelKind::SqExponential:
      return std::exp(-0.5 * (x - y).squaredNorm());
  }
  return 0.0;
}

inline Eigen::MatrixXd gram(gpsearch::KernelKind kind, const Eigen::MatrixXd& A,
                            const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      K(i, j) = kernel_value(kind, A.row(i), B.row(j));
    }
  }
  return K;
}

struct DensePosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// Conditions the joint Gaussian prior by explicit matrix inversion: with
// m the constant mean of f,
//   mean = m + K(Q,X) (K(X,X) + jitter I)^{-1} (f - m)
//   cov  = K(Q,Q) - K(Q,X) (K(X,X) + jitter I)^{-1} K(X,Q)
inline DensePosterior dense_posterior(gpsearch::KernelKind kind,
                                      const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& f,
                                      const Eigen::MatrixXd& Q,
                                      double jitter) {
  const double m = f.mean();
  Eigen::MatrixXd Kxx = gram(kind, X, X);
  Kxx.diagonal().array() += jitter;
  const Eigen::MatrixXd Kinv = Kxx.inverse();
  const Eigen::MatrixXd Kqx = gram(kind, Q, X);
  DensePosterior post;
  post.mean = Eigen::VectorXd::Constant(Q.rows(), m) +
              Kqx * Kinv * (f.array() - m).matrix();
  post.covariance = gram(kind, Q, Q) - Kqx * Kinv * Kqx.transpose();
  return post;
}

inline gpsearch::SearchSpace make_space(
    std::vector<std::pair<std::string, std::vector<double>>> axes) {
  std::vector<gpsearch::Axis> built;
  for (auto& [name, values] : axes) built.push_back({name, values});
  return gpsearch::SearchSpace(std::move(built));
}

inline gpsearch::SearchSpace dstc4_space() {
  return gpsearch::load_space_file(std::string(GPSEARCH_TABLES_DIR) +
                                   "/dstc4.space");
}

}  // namespace oracles
