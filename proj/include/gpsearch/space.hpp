#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gpsearch {

/// Canonical identity of a combination: row-major index over the axes in
/// declaration order, with axis 0 most significant.
using FlatId = std::int64_t;

/// One ordinal hyperparameter: a name plus its strictly increasing
/// candidate values.
struct Axis {
  std::string name;
  std::vector<double> values;
};

/// How a combination enters the kernels. UnitNormalized maps each axis
/// affinely onto [0, 1] (single-value axes map to 0.5) and is the default:
/// raw axis ranges can differ by orders of magnitude, which would let one
/// axis dominate every distance-based kernel.
enum class EncodeScheme { RawValues, UnitNormalized };

/// Accepts `raw` or `unit` (case-insensitive).
EncodeScheme parse_encode_scheme(std::string_view name);
std::string encode_scheme_name(EncodeScheme scheme);

/// One point of the candidate grid.
struct Combination {
  std::vector<std::size_t> indices;  // one 0-based entry per axis
  FlatId flat_id = 0;
};

class SearchSpace {
 public:
  explicit SearchSpace(std::vector<Axis> axes);

  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t dims() const { return axes_.size(); }
  FlatId size() const { return size_; }

  std::size_t axis_index(std::string_view name) const;

  Combination at(FlatId flat_id) const;
  FlatId flat_id_of(const std::vector<std::size_t>& indices) const;

  /// Literal axis values of a combination, in axis order.
  std::vector<double> values_of(const Combination& c) const;

 private:
  std::vector<Axis> axes_;
  FlatId size_ = 0;
};

/// Every combination exactly once, in ascending flat_id order.
std::vector<Combination> enumerate(const SearchSpace& space);

Eigen::VectorXd encode(const SearchSpace& space, const Combination& c,
                       EncodeScheme scheme);

/// All combinations encoded as rows, row i holding flat_id i.
Eigen::MatrixXd encode_all(const SearchSpace& space, EncodeScheme scheme);

/// Line-oriented space format: one axis per line, `<name>: v1, v2, ..., vk`.
/// Blank lines and lines starting with `#` are ignored.
SearchSpace parse_space(std::istream& in);
SearchSpace load_space_file(const std::string& path);

}  // namespace gpsearch
