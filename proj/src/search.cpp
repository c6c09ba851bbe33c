#include "gpsearch/search.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include <json.hpp>

#include "gpsearch/errors.hpp"

namespace gpsearch {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Appends one evaluation to the trace and keeps the terminal best current.
void record_step(SearchTrace& trace, const Landscape& l, FlatId id,
                 Phase phase) {
  const double score = l.score(id);
  if (trace.steps.empty() || score > trace.best_score) {
    trace.best_score = score;
    trace.best_flat_id = id;
  } else if (score == trace.best_score && id < trace.best_flat_id) {
    trace.best_flat_id = id;
  }
  TraceStep step;
  step.iteration = static_cast<int>(trace.steps.size()) + 1;
  step.flat_id = id;
  step.score = score;
  step.best_so_far = trace.best_score;
  step.phase = phase;
  trace.steps.push_back(step);
}

}  // namespace

Strategy parse_strategy(std::string_view name) {
  const std::string n = to_lower(name);
  if (n == "gp") return Strategy::Gp;
  if (n == "random") return Strategy::Random;
  if (n == "grid") return Strategy::Grid;
  throw ValidationError("unknown strategy '" + std::string(name) +
                        "' (expected gp, random, or grid)");
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Gp: return "gp";
    case Strategy::Random: return "random";
    case Strategy::Grid: return "grid";
  }
  throw ValidationError("unknown strategy");
}

Phase parse_phase(std::string_view name) {
  if (name == "random-init") return Phase::RandomInit;
  if (name == "model-guided") return Phase::ModelGuided;
  if (name == "exhaustive") return Phase::Exhaustive;
  throw ValidationError("unknown phase '" + std::string(name) + "'");
}

std::string phase_name(Phase p) {
  switch (p) {
    case Phase::RandomInit: return "random-init";
    case Phase::ModelGuided: return "model-guided";
    case Phase::Exhaustive: return "exhaustive";
  }
  throw ValidationError("unknown phase");
}

void validate_config(const SearchConfig& cfg, FlatId space_size) {
  if (cfg.budget < 1) throw ValidationError("budget must be at least 1");
  if (static_cast<FlatId>(cfg.budget) > space_size)
    throw ValidationError("budget " + std::to_string(cfg.budget) +
                          " exceeds the space size " +
                          std::to_string(space_size));
  if (cfg.strategy == Strategy::Gp) {
    if (cfg.initial_random < 1)
      throw ValidationError("initial random points must be at least 1");
    if (cfg.initial_random > cfg.budget)
      throw ValidationError("initial random points (" +
                            std::to_string(cfg.initial_random) +
                            ") exceed the budget (" +
                            std::to_string(cfg.budget) + ")");
  }
  if (!(cfg.initial_jitter > 0.0) || !std::isfinite(cfg.initial_jitter))
    throw ValidationError("initial jitter must be a positive finite value");
}

std::vector<FlatId> sample_without_replacement(FlatId n, FlatId count,
                                               std::mt19937_64& rng) {
  if (count < 0 || count > n)
    throw ValidationError("cannot draw " + std::to_string(count) +
                          " of " + std::to_string(n) + " combinations");
  std::vector<FlatId> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), FlatId{0});
  for (FlatId i = 0; i < count; ++i) {
    std::uniform_int_distribution<FlatId> pick(i, n - 1);
    std::swap(ids[static_cast<std::size_t>(i)],
              ids[static_cast<std::size_t>(pick(rng))]);
  }
  ids.resize(static_cast<std::size_t>(count));
  return ids;
}

SearchTrace run_gp_search(const Landscape& l, const SearchConfig& cfg) {
  if (cfg.strategy != Strategy::Gp)
    throw ValidationError("run_gp_search requires the gp strategy");
  const SearchSpace& space = l.space();
  validate_config(cfg, space.size());

  const FlatId n = space.size();
  const int t = cfg.budget;
  const int r = cfg.initial_random;

  SearchTrace trace;
  trace.config = cfg;

  std::mt19937_64 rng(cfg.seed);
  const std::vector<FlatId> initial = sample_without_replacement(n, r, rng);

  const Eigen::MatrixXd grid = encode_all(space, cfg.encode);
  const Eigen::Index d = grid.cols();

  // Kernel values against evaluated points, grown one column per
  // evaluation: cross(i, j) = k(candidate i, j-th evaluated point). The
  // posterior mean of candidate i after q evaluations is then
  // mean_offset + cross.row(i).head(q) . alpha, which avoids recomputing
  // the full cross-covariance every iteration.
  Eigen::MatrixXd cross(n, t);
  Eigen::MatrixXd train(t, d);
  Eigen::VectorXd outputs(t);
  std::vector<char> taken(static_cast<std::size_t>(n), 0);

  const auto evaluate = [&](FlatId id, Phase phase) {
    const Eigen::Index j = static_cast<Eigen::Index>(trace.steps.size());
    record_step(trace, l, id, phase);
    train.row(j) = grid.row(id);
    outputs[j] = trace.steps.back().score;
    if (t > r) cross.col(j) = gram_matrix(cfg.kernel, grid, grid.row(id));
    taken[static_cast<std::size_t>(id)] = 1;
  };

  for (FlatId id : initial) evaluate(id, Phase::RandomInit);

  std::vector<FlatId> remaining;
  remaining.reserve(static_cast<std::size_t>(n - r));
  for (FlatId id = 0; id < n; ++id) {
    if (!taken[static_cast<std::size_t>(id)]) remaining.push_back(id);
  }

  for (int iter = r + 1; iter <= t; ++iter) {
    const Eigen::Index q = iter - 1;
    std::optional<GPModel> model;
    try {
      model = fit_with_jitter_ladder(cfg.kernel, train.topRows(q),
                                     outputs.head(q), cfg.initial_jitter);
    } catch (const FactorizationError& e) {
      throw SearchAbortedError(
          "gp fit failed at iteration " + std::to_string(iter) + ": " +
              e.what(),
          std::move(trace));
    }

    const Eigen::VectorXd& alpha = model->alpha();
    const double offset = model->mean_offset();
    std::size_t chosen = 0;
    double chosen_mean = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const double mu =
          offset + cross.row(remaining[i]).head(q).dot(alpha);
      if (mu > chosen_mean) {  // ties keep the earlier, lower flat_id
        chosen_mean = mu;
        chosen = i;
      }
    }

    const FlatId pick = remaining[chosen];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(chosen));
    evaluate(pick, Phase::ModelGuided);
  }
  return trace;
}

SearchTrace run_random_search(const Landscape& l, const SearchConfig& cfg) {
  if (cfg.strategy != Strategy::Random)
    throw ValidationError("run_random_search requires the random strategy");
  const SearchSpace& space = l.space();
  validate_config(cfg, space.size());

  SearchTrace trace;
  trace.config = cfg;
  std::mt19937_64 rng(cfg.seed);
  for (FlatId id : sample_without_replacement(space.size(), cfg.budget, rng))
    record_step(trace, l, id, Phase::RandomInit);
  return trace;
}

SearchTrace run_grid_search(const Landscape& l, const SearchConfig& cfg) {
  if (cfg.strategy != Strategy::Grid)
    throw ValidationError("run_grid_search requires the grid strategy");
  validate_config(cfg, l.space().size());

  SearchTrace trace;
  trace.config = cfg;
  for (FlatId id = 0; id < cfg.budget; ++id)
    record_step(trace, l, id, Phase::Exhaustive);
  return trace;
}

SearchTrace run_search(const Landscape& l, const SearchConfig& cfg) {
  switch (cfg.strategy) {
    case Strategy::Gp: return run_gp_search(l, cfg);
    case Strategy::Random: return run_random_search(l, cfg);
    case Strategy::Grid: return run_grid_search(l, cfg);
  }
  throw ValidationError("unknown strategy");
}

void write_trace(const SearchTrace& t, const SearchSpace& space,
                 std::ostream& out) {
  ordered_json header;
  header["record"] = "config";
  header["strategy"] = strategy_name(t.config.strategy);
  header["kernel"] = t.config.kernel.name();
  header["initial_random"] = t.config.initial_random;
  header["budget"] = t.config.budget;
  header["encode"] = encode_scheme_name(t.config.encode);
  header["initial_jitter"] = t.config.initial_jitter;
  header["seed"] = t.config.seed;
  out << header.dump() << '\n';

  for (const TraceStep& step : t.steps) {
    ordered_json rec;
    rec["record"] = "step";
    rec["iteration"] = step.iteration;
    rec["flat_id"] = step.flat_id;
    rec["values"] = space.values_of(space.at(step.flat_id));
    rec["score"] = step.score;
    rec["best_so_far"] = step.best_so_far;
    rec["phase"] = phase_name(step.phase);
    out << rec.dump() << '\n';
  }
}

void write_trace_file(const SearchTrace& t, const SearchSpace& space,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trace file '" + path + "'");
  write_trace(t, space, out);
  if (!out) throw IoError("failed while writing '" + path + "'");
}

SearchTrace read_trace(std::istream& in) {
  std::string line;
  SearchTrace trace;
  bool have_config = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json rec;
    try {
      rec = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("trace line " + std::to_string(line_no) + ": " +
                            e.what());
    }
    const std::string kind = rec.value("record", "");
    if (kind == "config") {
      if (have_config)
        throw ValidationError("trace has more than one config record");
      trace.config.strategy =
          parse_strategy(rec.at("strategy").get<std::string>());
      trace.config.kernel =
          KernelSpec::parse(rec.at("kernel").get<std::string>());
      trace.config.initial_random = rec.at("initial_random").get<int>();
      trace.config.budget = rec.at("budget").get<int>();
      trace.config.encode =
          parse_encode_scheme(rec.at("encode").get<std::string>());
      trace.config.initial_jitter = rec.at("initial_jitter").get<double>();
      trace.config.seed = rec.at("seed").get<std::uint64_t>();
      have_config = true;
    } else if (kind == "step") {
      if (!have_config)
        throw ValidationError("trace step precedes the config record");
      TraceStep step;
      step.iteration = rec.at("iteration").get<int>();
      step.flat_id = rec.at("flat_id").get<FlatId>();
      step.score = rec.at("score").get<double>();
      step.best_so_far = rec.at("best_so_far").get<double>();
      step.phase = parse_phase(rec.at("phase").get<std::string>());
      if (step.iteration != static_cast<int>(trace.steps.size()) + 1)
        throw ValidationError("trace line " + std::to_string(line_no) +
                              ": iterations out of order");
      if (trace.steps.empty() || step.score > trace.best_score) {
        trace.best_score = step.score;
        trace.best_flat_id = step.flat_id;
      } else if (step.score == trace.best_score &&
                 step.flat_id < trace.best_flat_id) {
        trace.best_flat_id = step.flat_id;
      }
      trace.steps.push_back(step);
    } else {
      throw ValidationError("trace line " + std::to_string(line_no) +
                            ": unknown record kind");
    }
  }
  if (!have_config) throw ValidationError("trace lacks a config record");
  return trace;
}

SearchTrace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file '" + path + "'");
  return read_trace(in);
}

}  // namespace gpsearch
