#include "gpsearch/objective.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "gpsearch/errors.hpp"
#include "gpsearch/format.hpp"

namespace gpsearch {

namespace {

std::string describe_combination(const SearchSpace& space, FlatId id) {
  const auto values = space.values_of(space.at(id));
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += space.axes()[i].name + "=" + format_exact(values[i]);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

Landscape::Landscape(SearchSpace space, std::vector<double> scores,
                     std::string source)
    : space_(std::move(space)),
      scores_(std::move(scores)),
      source_(std::move(source)) {
  if (static_cast<FlatId>(scores_.size()) != space_.size())
    throw ValidationError("landscape covers " + std::to_string(scores_.size()) +
                          " combinations, space has " +
                          std::to_string(space_.size()));
  for (double s : scores_) {
    if (!std::isfinite(s))
      throw ValidationError("landscape contains a non-finite score");
  }
}

TopSet::TopSet(int k, std::vector<FlatId> ranked)
    : k_(k), ranked_(std::move(ranked)), sorted_(ranked_) {
  std::sort(sorted_.begin(), sorted_.end());
}

bool TopSet::contains(FlatId id) const {
  return std::binary_search(sorted_.begin(), sorted_.end(), id);
}

Landscape load_tabulated(const SearchSpace& space, std::istream& rows,
                         std::string source) {
  std::string line;
  if (!std::getline(rows, line))
    throw ValidationError("tabulated landscape is empty");
  const auto header = split_csv(line);
  if (header.size() != space.dims() + 1)
    throw ValidationError("tabulated header has " +
                          std::to_string(header.size()) + " columns, expected " +
                          std::to_string(space.dims() + 1));

  // Axis columns may appear in any order; `score` must be present.
  std::vector<std::size_t> axis_of_column(header.size());
  std::vector<bool> seen(space.dims(), false);
  std::size_t score_column = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = std::string(trim(header[c]));
    if (name == "score") {
      if (score_column != header.size())
        throw ValidationError("tabulated header repeats 'score'");
      score_column = c;
      continue;
    }
    const auto a = space.axis_index(name);
    if (seen[a])
      throw ValidationError("tabulated header repeats axis '" + name + "'");
    seen[a] = true;
    axis_of_column[c] = a;
  }
  if (score_column == header.size())
    throw ValidationError("tabulated header lacks a 'score' column");

  // Per-axis lookup from value to index; values compare exactly because
  // both sides come through the same decimal parser.
  std::vector<std::unordered_map<double, std::size_t>> value_index(
      space.dims());
  for (std::size_t a = 0; a < space.dims(); ++a) {
    const auto& vals = space.axes()[a].values;
    for (std::size_t i = 0; i < vals.size(); ++i) value_index[a][vals[i]] = i;
  }

  std::vector<double> scores(static_cast<std::size_t>(space.size()));
  std::vector<bool> covered(static_cast<std::size_t>(space.size()), false);
  int line_no = 1;
  while (std::getline(rows, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw ValidationError("tabulated line " + std::to_string(line_no) +
                            " has " + std::to_string(fields.size()) +
                            " fields, expected " +
                            std::to_string(header.size()));
    std::vector<std::size_t> indices(space.dims());
    double score = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const double v = parse_double(fields[c]);
      if (c == score_column) {
        if (!std::isfinite(v))
          throw ValidationError("tabulated line " + std::to_string(line_no) +
                                ": non-finite score");
        score = v;
        continue;
      }
      const auto a = axis_of_column[c];
      const auto it = value_index[a].find(v);
      if (it == value_index[a].end())
        throw ValidationError("tabulated line " + std::to_string(line_no) +
                              ": value " + std::string(trim(fields[c])) +
                              " is not on axis '" + space.axes()[a].name + "'");
      indices[a] = it->second;
    }
    const FlatId id = space.flat_id_of(indices);
    if (covered[static_cast<std::size_t>(id)])
      throw ValidationError("duplicate row for combination " +
                            describe_combination(space, id));
    covered[static_cast<std::size_t>(id)] = true;
    scores[static_cast<std::size_t>(id)] = score;
  }

  for (FlatId id = 0; id < space.size(); ++id) {
    if (!covered[static_cast<std::size_t>(id)])
      throw ValidationError("missing combination " +
                            describe_combination(space, id) + " (flat_id " +
                            std::to_string(id) + ")");
  }
  return Landscape(space, std::move(scores), std::move(source));
}

Landscape load_tabulated_file(const SearchSpace& space,
                              const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open landscape file '" + path + "'");
  return load_tabulated(space, in, "file:" + path);
}

void write_tabulated(const Landscape& l, std::ostream& out) {
  const auto& space = l.space();
  for (std::size_t i = 0; i < space.dims(); ++i)
    out << space.axes()[i].name << ',';
  out << "score\n";
  for (const auto& c : enumerate(space)) {
    for (double v : space.values_of(c)) out << format_exact(v) << ',';
    out << format_exact(l.score(c.flat_id)) << '\n';
  }
}

void write_tabulated_file(const Landscape& l, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write landscape file '" + path + "'");
  write_tabulated(l, out);
  if (!out) throw IoError("failed while writing '" + path + "'");
}

Landscape make_quadratic_landscape(const SearchSpace& space,
                                   std::span<const double> center) {
  if (center.size() != space.dims())
    throw ValidationError("center has " + std::to_string(center.size()) +
                          " entries, space has " +
                          std::to_string(space.dims()) + " axes");
  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(space.size()));
  for (const auto& c : enumerate(space)) {
    const auto u = encode(space, c, EncodeScheme::UnitNormalized);
    double s = 0;
    for (std::size_t i = 0; i < space.dims(); ++i) {
      const double d = u[static_cast<Eigen::Index>(i)] - center[i];
      s -= d * d;
    }
    scores.push_back(s);
  }
  std::string source = "quadratic(center=";
  for (std::size_t i = 0; i < center.size(); ++i)
    source += (i ? "," : "") + format_exact(center[i]);
  source += ")";
  return Landscape(space, std::move(scores), std::move(source));
}

Landscape make_interaction_landscape(const SearchSpace& space,
                                     std::span<const double> center,
                                     double coupling, std::size_t axis_a,
                                     std::size_t axis_b) {
  if (center.size() != space.dims())
    throw ValidationError("center has " + std::to_string(center.size()) +
                          " entries, space has " +
                          std::to_string(space.dims()) + " axes");
  if (axis_a >= space.dims() || axis_b >= space.dims())
    throw ValidationError("coupled axis index out of range");
  if (axis_a == axis_b)
    throw ValidationError("coupled axes must be distinct");
  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(space.size()));
  for (const auto& c : enumerate(space)) {
    const auto u = encode(space, c, EncodeScheme::UnitNormalized);
    double s = 0;
    for (std::size_t i = 0; i < space.dims(); ++i) {
      const double d = u[static_cast<Eigen::Index>(i)] - center[i];
      s -= d * d;
    }
    const double ridge = u[static_cast<Eigen::Index>(axis_a)] +
                         u[static_cast<Eigen::Index>(axis_b)] - 1.0;
    s -= coupling * ridge * ridge;
    scores.push_back(s);
  }
  std::string source = "interaction(coupling=" + format_exact(coupling) +
                       ";axes=" + space.axes()[axis_a].name + "," +
                       space.axes()[axis_b].name + ")";
  return Landscape(space, std::move(scores), std::move(source));
}

Landscape prior_landscape(const SearchSpace& space, const KernelSpec& kernel,
                          std::uint64_t seed, double scale, double offset) {
  if (space.size() > kMaxPriorLandscapePoints)
    throw ValidationError("space has " + std::to_string(space.size()) +
                          " combinations; prior sampling is limited to " +
                          std::to_string(kMaxPriorLandscapePoints));
  if (!std::isfinite(scale) || !std::isfinite(offset))
    throw ValidationError("scale and offset must be finite");

  const Eigen::MatrixXd grid = encode_all(space, EncodeScheme::UnitNormalized);
  double jitter = kDefaultJitter;
  Eigen::VectorXd draw;
  while (true) {
    try {
      draw = sample_prior(kernel, grid, jitter, seed);
      break;
    } catch (const FactorizationError&) {
      if (jitter * 10.0 > kMaxJitter) throw;
      jitter *= 10.0;
    }
  }

  std::vector<double> scores(static_cast<std::size_t>(space.size()));
  for (FlatId id = 0; id < space.size(); ++id)
    scores[static_cast<std::size_t>(id)] = offset + scale * draw[id];
  const std::string source = "prior(kernel=" + kernel.name() +
                             ";seed=" + std::to_string(seed) +
                             ";scale=" + format_exact(scale) +
                             ";offset=" + format_exact(offset) + ")";
  return Landscape(space, std::move(scores), source);
}

TopSet top_set(const Landscape& l, int k) {
  if (k < 1) throw ValidationError("top set requires k >= 1");
  const auto n = static_cast<std::size_t>(l.space().size());
  std::vector<FlatId> ids(n);
  std::iota(ids.begin(), ids.end(), FlatId{0});
  const auto better = [&l](FlatId a, FlatId b) {
    if (l.score(a) != l.score(b)) return l.score(a) > l.score(b);
    return a < b;
  };
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), n);
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take),
                    ids.end(), better);
  ids.resize(take);
  return TopSet(k, std::move(ids));
}

}  // namespace gpsearch
