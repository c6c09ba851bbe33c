#include "gpsearch/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

#include <json.hpp>

#include "gpsearch/errors.hpp"
#include "gpsearch/format.hpp"

namespace gpsearch {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<int> ascending_unique(std::vector<int> xs, const char* what) {
  if (xs.empty())
    throw ValidationError(std::string(what) + " must not be empty");
  for (int x : xs) {
    if (x < 1)
      throw ValidationError(std::string(what) + " must be positive");
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

// First iteration whose evaluated combination is in the set; kNeverReached
// if the trace never gets there.
int first_hit(const SearchTrace& trace, const TopSet& set) {
  for (const TraceStep& step : trace.steps) {
    if (set.contains(step.flat_id)) return step.iteration;
  }
  return kNeverReached;
}

}  // namespace

void validate_plan(const ExperimentPlan& plan, const Landscape& l) {
  if (plan.configs.empty())
    throw ValidationError("experiment plan has no configs");
  if (plan.runs_per_config < 1)
    throw ValidationError("runs per config must be at least 1");
  std::set<std::string> names;
  for (const NamedConfig& nc : plan.configs) {
    if (nc.name.empty()) throw ValidationError("config name must not be empty");
    if (!names.insert(nc.name).second)
      throw ValidationError("duplicate config name '" + nc.name + "'");
    try {
      validate_config(nc.config, l.space().size());
    } catch (const ValidationError& e) {
      throw ValidationError("config '" + nc.name + "': " + e.what());
    }
  }
}

std::vector<TraceGroup> run_experiment(const Landscape& l,
                                       const ExperimentPlan& plan,
                                       int workers) {
  validate_plan(plan, l);
  if (workers < 1) throw ValidationError("workers must be at least 1");

  const std::size_t runs = static_cast<std::size_t>(plan.runs_per_config);
  const std::size_t total = plan.configs.size() * runs;

  std::vector<TraceGroup> groups(plan.configs.size());
  for (std::size_t c = 0; c < plan.configs.size(); ++c) {
    groups[c].name = plan.configs[c].name;
    groups[c].traces.resize(runs);
  }
  std::vector<std::exception_ptr> failures(total);

  const auto work = [&](std::size_t task) {
    const std::size_t c = task / runs;
    const std::size_t run = task % runs;
    SearchConfig cfg = plan.configs[c].config;
    cfg.seed = plan.base_seed + run;
    try {
      groups[c].traces[run] = run_search(l, cfg);
    } catch (...) {
      failures[task] = std::current_exception();
    }
  };

  if (workers == 1 || total == 1) {
    for (std::size_t task = 0; task < total; ++task) work(task);
  } else {
    std::atomic<std::size_t> next{0};
    const auto loop = [&] {
      for (std::size_t task = next.fetch_add(1); task < total;
           task = next.fetch_add(1))
        work(task);
    };
    std::vector<std::thread> pool;
    const std::size_t count =
        std::min<std::size_t>(static_cast<std::size_t>(workers), total);
    pool.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pool.emplace_back(loop);
    for (std::thread& th : pool) th.join();
  }

  // Report the failure of the lowest (config, seed) slot so the outcome
  // does not depend on thread scheduling.
  for (std::size_t task = 0; task < total; ++task) {
    if (!failures[task]) continue;
    const std::string tag = "config '" + plan.configs[task / runs].name +
                            "' seed " +
                            std::to_string(plan.base_seed + task % runs) +
                            ": ";
    try {
      std::rethrow_exception(failures[task]);
    } catch (const SearchAbortedError& e) {
      throw SearchAbortedError(tag + e.what(), e.partial_trace());
    } catch (const ValidationError& e) {
      throw ValidationError(tag + e.what());
    }
  }
  return groups;
}

ConvergenceCurve convergence(std::string name,
                             const std::vector<SearchTrace>& traces, int t) {
  if (traces.empty())
    throw ValidationError("convergence requires at least one trace");
  if (t < 1) throw ValidationError("convergence length must be at least 1");
  for (const SearchTrace& trace : traces) {
    if (static_cast<int>(trace.steps.size()) < t)
      throw ValidationError("trace has fewer than " + std::to_string(t) +
                            " steps");
  }

  ConvergenceCurve curve;
  curve.name = std::move(name);
  curve.mean.resize(static_cast<std::size_t>(t));
  curve.stddev.resize(static_cast<std::size_t>(t));
  const double n = static_cast<double>(traces.size());
  for (int i = 0; i < t; ++i) {
    double sum = 0.0;
    for (const SearchTrace& trace : traces)
      sum += trace.steps[static_cast<std::size_t>(i)].best_so_far;
    const double mean = sum / n;
    double sq = 0.0;
    for (const SearchTrace& trace : traces) {
      const double d =
          trace.steps[static_cast<std::size_t>(i)].best_so_far - mean;
      sq += d * d;
    }
    curve.mean[static_cast<std::size_t>(i)] = mean;
    curve.stddev[static_cast<std::size_t>(i)] = std::sqrt(sq / n);
  }
  return curve;
}

HitRateReport hit_rates(std::string name,
                        const std::vector<SearchTrace>& traces,
                        const Landscape& l, std::vector<int> ks,
                        std::vector<int> checkpoints) {
  if (traces.empty())
    throw ValidationError("hit rates require at least one trace");
  HitRateReport report;
  report.name = std::move(name);
  report.ks = ascending_unique(std::move(ks), "top-k values");
  report.checkpoints =
      ascending_unique(std::move(checkpoints), "checkpoints");
  for (const SearchTrace& trace : traces) {
    if (static_cast<int>(trace.steps.size()) < report.checkpoints.back())
      throw ValidationError("checkpoint " +
                            std::to_string(report.checkpoints.back()) +
                            " exceeds a trace's length");
  }

  const double n = static_cast<double>(traces.size());
  report.rates.assign(report.ks.size(),
                      std::vector<double>(report.checkpoints.size(), 0.0));
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    const TopSet set = top_set(l, report.ks[i]);
    for (const SearchTrace& trace : traces) {
      const int hit = first_hit(trace, set);
      if (hit == kNeverReached) continue;
      for (std::size_t j = 0; j < report.checkpoints.size(); ++j) {
        if (hit <= report.checkpoints[j]) report.rates[i][j] += 1.0;
      }
    }
    for (double& rate : report.rates[i]) rate /= n;
  }
  return report;
}

EvalsToTarget evals_to_target(std::string name,
                              const std::vector<SearchTrace>& traces,
                              const Landscape& l, int k) {
  if (traces.empty())
    throw ValidationError("evals-to-target requires at least one trace");
  if (k < 1) throw ValidationError("top-k target requires k >= 1");

  EvalsToTarget summary;
  summary.name = std::move(name);
  summary.k = k;
  const TopSet set = top_set(l, k);
  std::vector<int> reached_values;
  for (const SearchTrace& trace : traces) {
    const int hit = first_hit(trace, set);
    summary.per_trace.push_back(hit);
    if (hit != kNeverReached) reached_values.push_back(hit);
  }
  summary.reached = static_cast<int>(reached_values.size());
  summary.reach_fraction =
      static_cast<double>(summary.reached) /
      static_cast<double>(traces.size());
  if (!reached_values.empty()) {
    long long sum = 0;
    for (int v : reached_values) sum += v;
    summary.mean = static_cast<double>(sum) /
                   static_cast<double>(reached_values.size());
    std::sort(reached_values.begin(), reached_values.end());
    const std::size_t mid = reached_values.size() / 2;
    summary.median =
        reached_values.size() % 2 == 1
            ? reached_values[mid]
            : 0.5 * (reached_values[mid - 1] + reached_values[mid]);
  }
  return summary;
}

HeatmapGrid marginal_heatmap(const Landscape& l, std::string_view axis_a,
                             std::string_view axis_b) {
  const SearchSpace& space = l.space();
  const std::size_t ia = space.axis_index(axis_a);
  const std::size_t ib = space.axis_index(axis_b);
  if (ia == ib) throw ValidationError("heatmap axes must be distinct");

  HeatmapGrid grid;
  grid.axis_a = space.axes()[ia].name;
  grid.axis_b = space.axes()[ib].name;
  grid.values_a = space.axes()[ia].values;
  grid.values_b = space.axes()[ib].values;

  const auto rows = static_cast<Eigen::Index>(grid.values_a.size());
  const auto cols = static_cast<Eigen::Index>(grid.values_b.size());
  grid.means = Eigen::MatrixXd::Zero(rows, cols);
  // Ascending flat_id accumulation; every cell collects the same count.
  for (const Combination& c : enumerate(space)) {
    grid.means(static_cast<Eigen::Index>(c.indices[ia]),
               static_cast<Eigen::Index>(c.indices[ib])) += l.score(c.flat_id);
  }
  const double per_cell = static_cast<double>(
      space.size() / (static_cast<FlatId>(grid.values_a.size()) *
                      static_cast<FlatId>(grid.values_b.size())));
  grid.means /= per_cell;
  return grid;
}

void write_parallel_coordinates(const Landscape& l, std::ostream& out) {
  write_tabulated(l, out);
}

void write_topk_csv(const Landscape& l, int k, std::ostream& out) {
  const TopSet set = top_set(l, k);
  const SearchSpace& space = l.space();
  out << "flat_id,";
  for (const Axis& axis : space.axes()) out << axis.name << ',';
  out << "score\n";
  for (FlatId id : set.flat_ids()) {
    out << id << ',';
    for (double v : space.values_of(space.at(id))) out << format_exact(v) << ',';
    out << format_exact(l.score(id)) << '\n';
  }
}

void write_convergence_csv(const std::vector<ConvergenceCurve>& curves,
                           std::ostream& out) {
  out << "config,iteration,mean_best,stddev_best\n";
  for (const ConvergenceCurve& curve : curves) {
    for (std::size_t i = 0; i < curve.mean.size(); ++i) {
      out << curve.name << ',' << (i + 1) << ',' << format_stat(curve.mean[i])
          << ',' << format_stat(curve.stddev[i]) << '\n';
    }
  }
}

void write_hit_rates_csv(const std::vector<HitRateReport>& reports,
                         std::ostream& out) {
  out << "config,k,checkpoint,hit_rate\n";
  for (const HitRateReport& report : reports) {
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
      for (std::size_t j = 0; j < report.checkpoints.size(); ++j) {
        out << report.name << ',' << report.ks[i] << ','
            << report.checkpoints[j] << ',' << format_stat(report.rates[i][j])
            << '\n';
      }
    }
  }
}

void write_evals_csv(const std::vector<EvalsToTarget>& summaries,
                     std::ostream& out) {
  out << "config,k,runs,reached,reach_fraction,mean_evals,median_evals\n";
  for (const EvalsToTarget& s : summaries) {
    out << s.name << ',' << s.k << ',' << s.per_trace.size() << ','
        << s.reached << ',' << format_stat(s.reach_fraction) << ','
        << format_stat(s.mean) << ',' << format_stat(s.median) << '\n';
  }
}

void write_heatmap_csv(const HeatmapGrid& grid, std::ostream& out) {
  out << grid.axis_a << '\\' << grid.axis_b;
  for (double v : grid.values_b) out << ',' << format_exact(v);
  out << '\n';
  for (Eigen::Index i = 0; i < grid.means.rows(); ++i) {
    out << format_exact(grid.values_a[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < grid.means.cols(); ++j)
      out << ',' << format_stat(grid.means(i, j));
    out << '\n';
  }
}

namespace {

std::vector<int> parse_int_array(const ordered_json& arr, const char* what) {
  if (!arr.is_array())
    throw ValidationError(std::string(what) + " must be an array");
  std::vector<int> out;
  for (const auto& v : arr) {
    if (!v.is_number_integer())
      throw ValidationError(std::string(what) + " must hold integers");
    out.push_back(v.get<int>());
  }
  return out;
}

NamedConfig parse_plan_config(const ordered_json& entry) {
  if (!entry.is_object())
    throw ValidationError("plan config entries must be objects");
  NamedConfig nc;
  bool have_budget = false;
  for (const auto& [key, value] : entry.items()) {
    if (key == "name") {
      nc.name = value.get<std::string>();
    } else if (key == "strategy") {
      nc.config.strategy = parse_strategy(value.get<std::string>());
    } else if (key == "kernel") {
      nc.config.kernel = KernelSpec::parse(value.get<std::string>());
    } else if (key == "initial_random") {
      nc.config.initial_random = value.get<int>();
    } else if (key == "budget") {
      nc.config.budget = value.get<int>();
      have_budget = true;
    } else if (key == "encode") {
      nc.config.encode = parse_encode_scheme(value.get<std::string>());
    } else if (key == "initial_jitter") {
      nc.config.initial_jitter = value.get<double>();
    } else {
      throw ValidationError("unknown plan config key '" + key + "'");
    }
  }
  if (nc.name.empty())
    throw ValidationError("plan config entry lacks a name");
  if (!have_budget)
    throw ValidationError("plan config '" + nc.name + "' lacks a budget");
  return nc;
}

}  // namespace

PlanFile parse_plan(std::istream& in) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("plan is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("plan must be a JSON object");

  PlanFile plan;
  bool have_space = false;
  bool have_landscape = false;
  bool have_configs = false;
  for (const auto& [key, value] : doc.items()) {
    if (key == "artifact" || key == "version") {
      continue;  // identification fields written by the manifest
    } else if (key == "space") {
      plan.space_path = value.get<std::string>();
      have_space = true;
    } else if (key == "landscape") {
      plan.landscape_path = value.get<std::string>();
      have_landscape = true;
    } else if (key == "runs_per_config") {
      plan.plan.runs_per_config = value.get<int>();
    } else if (key == "base_seed") {
      plan.plan.base_seed = value.get<std::uint64_t>();
    } else if (key == "hit_rate_ks") {
      plan.hit_ks = parse_int_array(value, "hit_rate_ks");
    } else if (key == "checkpoints") {
      plan.checkpoints = parse_int_array(value, "checkpoints");
    } else if (key == "target_k") {
      plan.target_k = value.get<int>();
    } else if (key == "configs") {
      if (!value.is_array() || value.empty())
        throw ValidationError("plan configs must be a non-empty array");
      for (const auto& entry : value)
        plan.plan.configs.push_back(parse_plan_config(entry));
      have_configs = true;
    } else {
      throw ValidationError("unknown plan key '" + key + "'");
    }
  }
  if (!have_space) throw ValidationError("plan lacks a space path");
  if (!have_landscape) throw ValidationError("plan lacks a landscape path");
  if (!have_configs) throw ValidationError("plan lacks configs");
  return plan;
}

PlanFile read_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open plan file '" + path + "'");
  return parse_plan(in);
}

void write_manifest(const PlanFile& plan, std::ostream& out) {
  ordered_json doc;
  doc["artifact"] = "gpsearch";
  doc["version"] = GPSEARCH_VERSION;
  doc["space"] = plan.space_path;
  doc["landscape"] = plan.landscape_path;
  doc["runs_per_config"] = plan.plan.runs_per_config;
  doc["base_seed"] = plan.plan.base_seed;
  doc["hit_rate_ks"] = plan.hit_ks;
  doc["checkpoints"] = plan.checkpoints;
  doc["target_k"] = plan.target_k;
  doc["configs"] = ordered_json::array();
  for (const NamedConfig& nc : plan.plan.configs) {
    ordered_json entry;
    entry["name"] = nc.name;
    entry["strategy"] = strategy_name(nc.config.strategy);
    entry["kernel"] = nc.config.kernel.name();
    entry["initial_random"] = nc.config.initial_random;
    entry["budget"] = nc.config.budget;
    entry["encode"] = encode_scheme_name(nc.config.encode);
    entry["initial_jitter"] = nc.config.initial_jitter;
    doc["configs"].push_back(entry);
  }
  out << doc.dump(2) << '\n';
}

void write_manifest_file(const PlanFile& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest '" + path + "'");
  write_manifest(plan, out);
  if (!out) throw IoError("failed while writing '" + path + "'");
}

}  // namespace gpsearch
