#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gpsearch/gp.hpp"
#include "gpsearch/space.hpp"

namespace gpsearch {

/// Total map from every combination of a space to a finite score. Coverage
/// is checked at construction, never at query time.
class Landscape {
 public:
  Landscape(SearchSpace space, std::vector<double> scores, std::string source);

  const SearchSpace& space() const { return space_; }
  double score(FlatId id) const { return scores_[static_cast<std::size_t>(id)]; }
  const std::vector<double>& scores() const { return scores_; }

  /// Where the scores came from (file path, synthetic family, or prior draw).
  const std::string& source() const { return source_; }

 private:
  SearchSpace space_;
  std::vector<double> scores_;
  std::string source_;
};

/// The k best-scoring combinations, ties broken toward the lower flat_id.
/// flat_ids() is ordered best-first.
class TopSet {
 public:
  TopSet(int k, std::vector<FlatId> ranked);

  int k() const { return k_; }
  const std::vector<FlatId>& flat_ids() const { return ranked_; }
  bool contains(FlatId id) const;

 private:
  int k_;
  std::vector<FlatId> ranked_;
  std::vector<FlatId> sorted_;
};

/// Tabulated landscape format: comma-separated, header row naming every
/// axis plus a final `score` column, one row per combination with literal
/// axis values. The writer emits rows in flat_id order with shortest
/// round-trip decimals, so write(load(text)) == text for canonical input.
Landscape load_tabulated(const SearchSpace& space, std::istream& rows,
                         std::string source = "stream");
Landscape load_tabulated_file(const SearchSpace& space,
                              const std::string& path);
void write_tabulated(const Landscape& l, std::ostream& out);
void write_tabulated_file(const Landscape& l, const std::string& path);

/// score(x) = -sum_i (u_i - center_i)^2 over unit-normalized coordinates u.
/// The unique maximum (score 0) sits at center when center is a grid point.
Landscape make_quadratic_landscape(const SearchSpace& space,
                                   std::span<const double> center);

/// Quadratic bowl plus a coupling ridge -coupling*(u_a + u_b - 1)^2 between
/// two axes, so the best value of one axis depends on the other.
Landscape make_interaction_landscape(const SearchSpace& space,
                                     std::span<const double> center,
                                     double coupling, std::size_t axis_a = 0,
                                     std::size_t axis_b = 1);

inline constexpr FlatId kMaxPriorLandscapePoints = 5000;

/// scores = offset + scale * draw with draw ~ N(0, K + jitter*I) over the
/// unit-normalized grid; deterministic per seed. Guarded to spaces of at
/// most kMaxPriorLandscapePoints combinations.
Landscape prior_landscape(const SearchSpace& space, const KernelSpec& kernel,
                          std::uint64_t seed, double scale, double offset);

TopSet top_set(const Landscape& l, int k);

}  // namespace gpsearch
