#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gpsearch/objective.hpp"
#include "gpsearch/search.hpp"

namespace gpsearch {

struct NamedConfig {
  std::string name;
  SearchConfig config;  // its seed field is ignored; runs use base_seed + i
};

struct ExperimentPlan {
  std::vector<NamedConfig> configs;
  int runs_per_config = 100;
  std::uint64_t base_seed = 0;
};

/// Unique nonempty config names, runs_per_config >= 1, and every config
/// valid for the landscape's space.
void validate_plan(const ExperimentPlan& plan, const Landscape& l);

struct TraceGroup {
  std::string name;
  std::vector<SearchTrace> traces;  // index i holds the seed base_seed + i run
};

/// Runs every config runs_per_config times, run i with seed base_seed + i.
/// workers > 1 executes independent (config, run) pairs on that many
/// threads; traces land in fixed (config, seed) slots, so the result and
/// all statistics derived from it do not depend on scheduling. Search
/// failures are rethrown tagged with the config name and seed.
std::vector<TraceGroup> run_experiment(const Landscape& l,
                                       const ExperimentPlan& plan,
                                       int workers = 1);

struct ConvergenceCurve {
  std::string name;
  std::vector<double> mean;    // entry i = mean best_so_far at iteration i+1
  std::vector<double> stddev;  // population standard deviation per iteration
};

/// Pointwise mean and standard deviation of best_so_far over the first t
/// iterations. Every trace must have at least t steps.
ConvergenceCurve convergence(std::string name,
                             const std::vector<SearchTrace>& traces, int t);

struct HitRateReport {
  std::string name;
  std::vector<int> ks;           // ascending, deduplicated
  std::vector<int> checkpoints;  // ascending, deduplicated
  // rates[i][j] = fraction of runs whose first checkpoints[j] evaluations
  // include a member of the top-ks[i] set
  std::vector<std::vector<double>> rates;
};

HitRateReport hit_rates(std::string name,
                        const std::vector<SearchTrace>& traces,
                        const Landscape& l, std::vector<int> ks,
                        std::vector<int> checkpoints);

inline constexpr int kNeverReached = -1;

struct EvalsToTarget {
  std::string name;
  int k = 1;
  std::vector<int> per_trace;  // first iteration inside the top-k set, or
                               // kNeverReached
  int reached = 0;
  double reach_fraction = 0.0;
  double mean = 0.0;    // over reached runs only; 0 when none reached
  double median = 0.0;  // over reached runs only; 0 when none reached
};

EvalsToTarget evals_to_target(std::string name,
                              const std::vector<SearchTrace>& traces,
                              const Landscape& l, int k);

struct HeatmapGrid {
  std::string axis_a;
  std::string axis_b;
  std::vector<double> values_a;  // row labels
  std::vector<double> values_b;  // column labels
  // means(i, j) averages the scores of every combination with
  // axis_a = values_a[i] and axis_b = values_b[j]
  Eigen::MatrixXd means;
};

HeatmapGrid marginal_heatmap(const Landscape& l, std::string_view axis_a,
                             std::string_view axis_b);

/// One row per combination in flat_id order; identical to the tabulated
/// landscape format.
void write_parallel_coordinates(const Landscape& l, std::ostream& out);

/// The k best combinations, best first: flat_id, axis values, score.
void write_topk_csv(const Landscape& l, int k, std::ostream& out);

// Statistics writers. Derived numbers carry 6 significant digits; literal
// axis values keep their exact decimals.
void write_convergence_csv(const std::vector<ConvergenceCurve>& curves,
                           std::ostream& out);
void write_hit_rates_csv(const std::vector<HitRateReport>& reports,
                         std::ostream& out);
void write_evals_csv(const std::vector<EvalsToTarget>& summaries,
                     std::ostream& out);
void write_heatmap_csv(const HeatmapGrid& grid, std::ostream& out);

/// Everything needed to rerun an experiment: the input file paths, the
/// plan, and the report settings. The manifest written next to the
/// statistics files is exactly this serialization, so a finished
/// experiment reruns from its own manifest.
struct PlanFile {
  std::string space_path;
  std::string landscape_path;
  ExperimentPlan plan;
  std::vector<int> hit_ks{1, 3, 5};
  std::vector<int> checkpoints;  // empty: each config reports at its budget
  int target_k = 1;
};

PlanFile parse_plan(std::istream& in);
PlanFile read_plan_file(const std::string& path);
void write_manifest(const PlanFile& plan, std::ostream& out);
void write_manifest_file(const PlanFile& plan, const std::string& path);

}  // namespace gpsearch
