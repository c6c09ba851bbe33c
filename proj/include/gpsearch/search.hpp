#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gpsearch/gp.hpp"
#include "gpsearch/objective.hpp"
#include "gpsearch/space.hpp"

namespace gpsearch {

enum class Strategy { Gp, Random, Grid };

/// Accepts `gp`, `random`, or `grid` (case-insensitive).
Strategy parse_strategy(std::string_view name);
std::string strategy_name(Strategy s);

/// Where a step's pick came from. Random search tags every step
/// random-init; grid search tags every step exhaustive.
enum class Phase { RandomInit, ModelGuided, Exhaustive };

Phase parse_phase(std::string_view name);
std::string phase_name(Phase p);

/// Settings for one search run. kernel and initial_random only apply to the
/// GP strategy; the defaults are the settings that converged fastest in
/// practice (abs-exp kernel, 10 random initial points).
struct SearchConfig {
  Strategy strategy = Strategy::Gp;
  KernelSpec kernel;
  int initial_random = 10;
  int budget = 0;
  EncodeScheme encode = EncodeScheme::UnitNormalized;
  double initial_jitter = kDefaultJitter;
  std::uint64_t seed = 0;
};

/// Throws ValidationError unless 1 <= budget <= space_size and, for GP,
/// 1 <= initial_random <= budget.
void validate_config(const SearchConfig& cfg, FlatId space_size);

struct TraceStep {
  int iteration = 0;  // 1-based position in the run
  FlatId flat_id = 0;
  double score = 0.0;
  double best_so_far = 0.0;  // running maximum of scores
  Phase phase = Phase::RandomInit;
};

/// Record of one run. best_flat_id holds the evaluated combination with the
/// maximal score, ties broken toward the lower flat_id.
struct SearchTrace {
  SearchConfig config;
  std::vector<TraceStep> steps;
  FlatId best_flat_id = -1;
  double best_score = 0.0;
};

/// A run that could not finish; the steps completed so far are preserved.
class SearchAbortedError : public std::runtime_error {
 public:
  SearchAbortedError(const std::string& what, SearchTrace partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}

  const SearchTrace& partial_trace() const { return partial_; }

 private:
  SearchTrace partial_;
};

/// First `count` entries of a seeded uniform shuffle of 0..n-1. Both the
/// GP initialization and random search draw through this helper, so a GP
/// run with initial_random == budget evaluates exactly the combinations a
/// random-search run with the same seed would.
std::vector<FlatId> sample_without_replacement(FlatId n, FlatId count,
                                               std::mt19937_64& rng);

/// initial_random seeded uniform picks, then repeatedly fit the GP on all
/// observations and evaluate the unevaluated combination with the highest
/// posterior mean (ties toward the lower flat_id).
SearchTrace run_gp_search(const Landscape& l, const SearchConfig& cfg);

/// budget seeded uniform picks without replacement.
SearchTrace run_random_search(const Landscape& l, const SearchConfig& cfg);

/// Evaluates flat_ids 0..budget-1 in order.
SearchTrace run_grid_search(const Landscape& l, const SearchConfig& cfg);

/// Dispatches on cfg.strategy.
SearchTrace run_search(const Landscape& l, const SearchConfig& cfg);

/// Line-delimited records: one config header line, then one line per step
/// carrying iteration, flat_id, literal axis values, score, best_so_far,
/// and phase. read_trace inverts write_trace; the terminal best is
/// recomputed from the steps.
void write_trace(const SearchTrace& t, const SearchSpace& space,
                 std::ostream& out);
void write_trace_file(const SearchTrace& t, const SearchSpace& space,
                      const std::string& path);
SearchTrace read_trace(std::istream& in);
SearchTrace read_trace_file(const std::string& path);

}  // namespace gpsearch
