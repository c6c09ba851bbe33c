#include "gpsearch/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <vector>

#include "gpsearch/errors.hpp"

namespace gpsearch {

namespace {

double eval_unchecked(KernelKind kind, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y) {
  switch (kind) {
    case KernelKind::Linear:
      return x.dot(y);
    case KernelKind::Cubic: {
      const double s = x.dot(y);
      return 3.0 * (s * s + 2.0 * s * s * s);
    }
    case KernelKind::AbsExponential:
      return std::exp(-(x - y).norm());
    case KernelKind::SqExponential:
      return std::exp(-0.5 * (x - y).squaredNorm());
  }
  throw ValidationError("unknown kernel kind");
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

KernelSpec KernelSpec::parse(std::string_view name) {
  const std::string n = to_lower(name);
  if (n == "linear") return {KernelKind::Linear};
  if (n == "cubic") return {KernelKind::Cubic};
  if (n == "abs-exp") return {KernelKind::AbsExponential};
  if (n == "sq-exp") return {KernelKind::SqExponential};
  throw ValidationError("unknown kernel '" + std::string(name) +
                        "' (expected linear, cubic, abs-exp, or sq-exp)");
}

std::string KernelSpec::name() const {
  switch (kind) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Cubic: return "cubic";
    case KernelKind::AbsExponential: return "abs-exp";
    case KernelKind::SqExponential: return "sq-exp";
  }
  throw ValidationError("unknown kernel kind");
}

double eval_kernel(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y) {
  if (x.size() != y.size())
    throw ValidationError("kernel inputs have mismatched dimensions");
  if (x.size() == 0) throw ValidationError("kernel inputs must be non-empty");
  if (!x.allFinite() || !y.allFinite())
    throw ValidationError("kernel inputs must be finite");
  return eval_unchecked(spec.kind, x, y);
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& A,
                            const Eigen::MatrixXd& B) {
  if (A.rows() == 0 || B.rows() == 0)
    throw ValidationError("gram matrix requires non-empty point sets");
  if (A.cols() != B.cols())
    throw ValidationError("gram matrix point sets have mismatched dimensions");
  if (A.cols() == 0) throw ValidationError("points must have dimension >= 1");
  if (!A.allFinite() || !B.allFinite())
    throw ValidationError("gram matrix inputs must be finite");

  std::vector<Eigen::VectorXd> b_rows(B.rows());
  for (Eigen::Index j = 0; j < B.rows(); ++j) b_rows[j] = B.row(j);

  Eigen::MatrixXd K(A.rows(), B.rows());
  Eigen::VectorXd xi;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    xi = A.row(i);
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      K(i, j) = eval_unchecked(spec.kind, xi, b_rows[j]);
    }
  }
  return K;
}

}  // namespace gpsearch
