#include "gpsearch/space.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "gpsearch/errors.hpp"
#include "gpsearch/format.hpp"

namespace gpsearch {

EncodeScheme parse_encode_scheme(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (n == "raw") return EncodeScheme::RawValues;
  if (n == "unit") return EncodeScheme::UnitNormalized;
  throw ValidationError("unknown encode scheme '" + std::string(name) +
                        "' (expected raw or unit)");
}

std::string encode_scheme_name(EncodeScheme scheme) {
  return scheme == EncodeScheme::RawValues ? "raw" : "unit";
}

SearchSpace::SearchSpace(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw ValidationError("search space has no axes");
  std::unordered_set<std::string> names;
  size_ = 1;
  for (const auto& axis : axes_) {
    if (axis.name.empty()) throw ValidationError("axis with empty name");
    if (!names.insert(axis.name).second)
      throw ValidationError("duplicate axis name '" + axis.name + "'");
    if (axis.values.empty())
      throw ValidationError("axis '" + axis.name + "' has no values");
    for (std::size_t i = 0; i < axis.values.size(); ++i) {
      if (!std::isfinite(axis.values[i]))
        throw ValidationError("axis '" + axis.name + "' has non-finite value");
      if (i > 0 && axis.values[i] <= axis.values[i - 1])
        throw ValidationError("axis '" + axis.name +
                              "' values must be strictly increasing");
    }
    const auto count = static_cast<FlatId>(axis.values.size());
    if (size_ > std::numeric_limits<FlatId>::max() / count)
      throw ValidationError("search space size overflows");
    size_ *= count;
  }
}

std::size_t SearchSpace::axis_index(std::string_view name) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].name == name) return i;
  }
  throw ValidationError("unknown axis '" + std::string(name) + "'");
}

Combination SearchSpace::at(FlatId flat_id) const {
  if (flat_id < 0 || flat_id >= size_)
    throw ValidationError("flat_id " + std::to_string(flat_id) +
                          " out of range [0, " + std::to_string(size_) + ")");
  Combination c;
  c.flat_id = flat_id;
  c.indices.resize(axes_.size());
  FlatId rest = flat_id;
  for (std::size_t i = axes_.size(); i-- > 0;) {
    const auto count = static_cast<FlatId>(axes_[i].values.size());
    c.indices[i] = static_cast<std::size_t>(rest % count);
    rest /= count;
  }
  return c;
}

FlatId SearchSpace::flat_id_of(const std::vector<std::size_t>& indices) const {
  if (indices.size() != axes_.size())
    throw ValidationError("combination has wrong number of indices");
  FlatId id = 0;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (indices[i] >= axes_[i].values.size())
      throw ValidationError("index out of range on axis '" + axes_[i].name +
                            "'");
    id = id * static_cast<FlatId>(axes_[i].values.size()) +
         static_cast<FlatId>(indices[i]);
  }
  return id;
}

std::vector<double> SearchSpace::values_of(const Combination& c) const {
  if (c.indices.size() != axes_.size() || flat_id_of(c.indices) != c.flat_id)
    throw ValidationError("combination does not belong to this space");
  std::vector<double> v(axes_.size());
  for (std::size_t i = 0; i < axes_.size(); ++i)
    v[i] = axes_[i].values[c.indices[i]];
  return v;
}

std::vector<Combination> enumerate(const SearchSpace& space) {
  std::vector<Combination> all;
  all.reserve(static_cast<std::size_t>(space.size()));
  Combination c;
  c.indices.assign(space.dims(), 0);
  c.flat_id = 0;
  for (FlatId id = 0; id < space.size(); ++id) {
    c.flat_id = id;
    all.push_back(c);
    // Increment the least significant axis, carrying leftwards.
    for (std::size_t i = space.dims(); i-- > 0;) {
      if (++c.indices[i] < space.axes()[i].values.size()) break;
      c.indices[i] = 0;
    }
  }
  return all;
}

Eigen::VectorXd encode(const SearchSpace& space, const Combination& c,
                       EncodeScheme scheme) {
  const auto values = space.values_of(c);
  Eigen::VectorXd x(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (scheme == EncodeScheme::RawValues) {
      x[static_cast<Eigen::Index>(i)] = values[i];
    } else {
      const auto& vals = space.axes()[i].values;
      const double lo = vals.front();
      const double hi = vals.back();
      x[static_cast<Eigen::Index>(i)] =
          hi == lo ? 0.5 : (values[i] - lo) / (hi - lo);
    }
  }
  return x;
}

Eigen::MatrixXd encode_all(const SearchSpace& space, EncodeScheme scheme) {
  Eigen::MatrixXd X(space.size(), static_cast<Eigen::Index>(space.dims()));
  const auto all = enumerate(space);
  for (const auto& c : all) X.row(c.flat_id) = encode(space, c, scheme);
  return X;
}

SearchSpace parse_space(std::istream& in) {
  std::vector<Axis> axes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto colon = stripped.find(':');
    if (colon == std::string_view::npos)
      throw ValidationError("space line " + std::to_string(line_no) +
                            ": expected '<name>: v1, v2, ...'");
    Axis axis;
    axis.name = std::string(trim(stripped.substr(0, colon)));
    std::string rest(stripped.substr(colon + 1));
    std::stringstream values(rest);
    std::string token;
    // Validate eagerly so errors can point at the offending line.
    try {
      while (std::getline(values, token, ',')) {
        const double v = parse_double(token);
        if (!std::isfinite(v))
          throw ValidationError("axis '" + axis.name +
                                "' has non-finite value");
        if (!axis.values.empty() && v <= axis.values.back())
          throw ValidationError("axis '" + axis.name +
                                "' values must be strictly increasing");
        axis.values.push_back(v);
      }
      if (axis.values.empty())
        throw ValidationError("axis '" + axis.name + "' has no values");
    } catch (const ValidationError& e) {
      throw ValidationError("space line " + std::to_string(line_no) + ": " +
                            e.what());
    }
    axes.push_back(std::move(axis));
  }
  return SearchSpace(std::move(axes));
}

SearchSpace load_space_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open space file '" + path + "'");
  return parse_space(in);
}

}  // namespace gpsearch
