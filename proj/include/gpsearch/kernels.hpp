#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>

namespace gpsearch {

enum class KernelKind { Linear, Cubic, AbsExponential, SqExponential };

/// Covariance function selector. All four forms are parameter-free; any
/// input scaling is handled by the encoding scheme of the search space.
///
///   linear    k(x, y) = x.y
///   cubic     k(x, y) = 3((x.y)^2 + 2(x.y)^3)
///   abs-exp   k(x, y) = exp(-|x - y|)
///   sq-exp    k(x, y) = exp(-0.5 |x - y|^2)
///
/// |.| is the Euclidean norm. The absolute-exponential kernel uses the
/// decaying (Ornstein-Uhlenbeck) form: a positive exponent would grow with
/// distance and is not a valid covariance.
struct KernelSpec {
  KernelKind kind = KernelKind::AbsExponential;

  /// Accepts `linear`, `cubic`, `abs-exp`, `sq-exp` (case-insensitive).
  static KernelSpec parse(std::string_view name);
  std::string name() const;
};

double eval_kernel(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y);

/// Covariance matrix between two point sets (rows are points);
/// entry (i, j) is k(A.row(i), B.row(j)).
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& A,
                            const Eigen::MatrixXd& B);

}  // namespace gpsearch
