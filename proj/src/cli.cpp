#include "gpsearch/cli.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "gpsearch/errors.hpp"
#include "gpsearch/format.hpp"
#include "gpsearch/harness.hpp"
#include "gpsearch/objective.hpp"
#include "gpsearch/search.hpp"
#include "gpsearch/space.hpp"

namespace gpsearch {

namespace {

namespace fs = std::filesystem;

struct SearchFlags {
  std::string space_path;
  std::string landscape_path;
  std::string strategy;
  std::string kernel = "abs-exp";
  std::string encode = "unit";
  std::string out_path;
  int init_random = 10;
  int budget = 0;
  double jitter = kDefaultJitter;
  std::uint64_t seed = 0;
};

struct ExperimentFlags {
  std::string plan_path;
  SearchFlags inline_cfg;
  std::string name;
  std::string out_dir;
  int runs = 100;
  std::uint64_t base_seed = 0;
  int workers = 1;
  std::vector<int> hit_ks{1, 3, 5};
  std::vector<int> checkpoints;
  int target_k = 1;
};

struct LandscapeFlags {
  std::string space_path;
  std::string kind;
  std::string kernel = "sq-exp";
  std::string out_path;
  std::uint64_t seed = 0;
  double scale = 1.0;
  double offset = 0.0;
  double coupling = 1.0;
  std::vector<double> center;
  std::vector<std::string> axes;
};

struct ExportFlags {
  std::string space_path;
  std::string landscape_path;
  std::string what;
  std::string out_path;
  std::vector<std::string> axes;
  int k = 5;
};

// Flag sanity shared by search and inline experiment configs; messages name
// the offending flag and no file is touched before these pass.
SearchConfig build_config(const SearchFlags& fl) {
  SearchConfig cfg;
  cfg.strategy = parse_strategy(fl.strategy);
  cfg.kernel = KernelSpec::parse(fl.kernel);
  cfg.encode = parse_encode_scheme(fl.encode);
  if (fl.budget < 1) throw ValidationError("--budget must be at least 1");
  cfg.budget = fl.budget;
  if (fl.init_random < 1)
    throw ValidationError("--init-random must be at least 1");
  cfg.initial_random = fl.init_random;
  if (!(fl.jitter > 0.0) || !std::isfinite(fl.jitter))
    throw ValidationError("--jitter must be a positive finite value");
  cfg.initial_jitter = fl.jitter;
  cfg.seed = fl.seed;
  return cfg;
}

void write_output_file(const std::string& path,
                       const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  writer(out);
  out.flush();
  if (!out) throw IoError("failed while writing '" + path + "'");
}

void print_best(const SearchSpace& space, const SearchTrace& trace,
                std::ostream& out) {
  out << "best:";
  const auto values = space.values_of(space.at(trace.best_flat_id));
  for (std::size_t i = 0; i < values.size(); ++i)
    out << ' ' << space.axes()[i].name << '=' << format_exact(values[i]);
  out << " score=" << format_stat(trace.best_score)
      << " flat_id=" << trace.best_flat_id << '\n';
}

void cmd_search(const SearchFlags& fl, std::ostream& out) {
  const SearchConfig cfg = build_config(fl);
  const SearchSpace space = load_space_file(fl.space_path);
  const Landscape l = load_tabulated_file(space, fl.landscape_path);
  const SearchTrace trace = run_search(l, cfg);
  if (!fl.out_path.empty()) write_trace_file(trace, space, fl.out_path);
  print_best(space, trace, out);
}

void cmd_experiment(const ExperimentFlags& fl, std::ostream& out) {
  if (fl.workers < 1) throw ValidationError("--workers must be at least 1");
  if (fl.out_dir.empty()) throw ValidationError("--out-dir is required");

  PlanFile plan;
  if (!fl.plan_path.empty()) {
    plan = read_plan_file(fl.plan_path);
  } else {
    if (fl.runs < 1) throw ValidationError("--runs must be at least 1");
    if (fl.target_k < 1) throw ValidationError("--target-k must be at least 1");
    NamedConfig nc;
    nc.config = build_config(fl.inline_cfg);
    nc.name = fl.name.empty()
                  ? (nc.config.strategy == Strategy::Gp
                         ? "gp-" + nc.config.kernel.name()
                         : strategy_name(nc.config.strategy))
                  : fl.name;
    plan.space_path = fl.inline_cfg.space_path;
    plan.landscape_path = fl.inline_cfg.landscape_path;
    plan.plan.configs.push_back(std::move(nc));
    plan.plan.runs_per_config = fl.runs;
    plan.plan.base_seed = fl.base_seed;
    plan.hit_ks = fl.hit_ks;
    plan.checkpoints = fl.checkpoints;
    plan.target_k = fl.target_k;
  }

  const SearchSpace space = load_space_file(plan.space_path);
  const Landscape l = load_tabulated_file(space, plan.landscape_path);
  const std::vector<TraceGroup> groups =
      run_experiment(l, plan.plan, fl.workers);

  std::vector<ConvergenceCurve> curves;
  std::vector<HitRateReport> hit_reports;
  std::vector<EvalsToTarget> evals;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const int budget = plan.plan.configs[i].config.budget;
    curves.push_back(convergence(groups[i].name, groups[i].traces, budget));
    std::vector<int> cps;
    for (int c : plan.checkpoints) {
      if (c >= 1 && c <= budget) cps.push_back(c);
    }
    if (cps.empty()) cps.push_back(budget);
    hit_reports.push_back(
        hit_rates(groups[i].name, groups[i].traces, l, plan.hit_ks, cps));
    evals.push_back(
        evals_to_target(groups[i].name, groups[i].traces, l, plan.target_k));
  }

  std::error_code ec;
  fs::create_directories(fl.out_dir, ec);
  if (ec)
    throw IoError("cannot create output directory '" + fl.out_dir +
                  "': " + ec.message());

  // Nothing partial survives a failed run: every file written so far is
  // removed before the error propagates.
  std::vector<std::string> written;
  const auto emit = [&](const std::string& name,
                        const std::function<void(std::ostream&)>& writer) {
    const std::string path = (fs::path(fl.out_dir) / name).string();
    written.push_back(path);
    write_output_file(path, writer);
  };
  try {
    emit("manifest.json", [&](std::ostream& o) { write_manifest(plan, o); });
    emit("convergence.csv",
         [&](std::ostream& o) { write_convergence_csv(curves, o); });
    emit("hit_rates.csv",
         [&](std::ostream& o) { write_hit_rates_csv(hit_reports, o); });
    emit("evals_to_target.csv",
         [&](std::ostream& o) { write_evals_csv(evals, o); });
  } catch (...) {
    for (const std::string& path : written) {
      std::error_code ignore;
      fs::remove(path, ignore);
    }
    throw;
  }

  out << "wrote manifest.json convergence.csv hit_rates.csv "
         "evals_to_target.csv to "
      << fl.out_dir << '\n';
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (plan.plan.configs[g].config.strategy != Strategy::Gp) continue;
    for (std::size_t r = 0; r < groups.size(); ++r) {
      if (plan.plan.configs[r].config.strategy != Strategy::Random) continue;
      out << "speedup k=" << plan.target_k << ' ' << groups[g].name << " vs "
          << groups[r].name << ": ";
      if (evals[g].reached > 0 && evals[r].reached > 0) {
        out << format_stat(evals[r].mean / evals[g].mean) << "x (mean evals "
            << format_stat(evals[g].mean) << " vs "
            << format_stat(evals[r].mean) << ")\n";
      } else {
        out << "n/a (target not reached)\n";
      }
    }
  }
}

void cmd_landscape(const LandscapeFlags& fl, std::ostream& out) {
  const SearchSpace space = load_space_file(fl.space_path);
  auto build = [&]() -> Landscape {
    if (fl.kind == "prior") {
      return prior_landscape(space, KernelSpec::parse(fl.kernel), fl.seed,
                             fl.scale, fl.offset);
    }
    if (fl.kind == "quadratic" || fl.kind == "interaction") {
      if (fl.center.empty())
        throw ValidationError("--center is required for --kind " + fl.kind);
      if (fl.kind == "quadratic")
        return make_quadratic_landscape(space, fl.center);
      std::size_t axis_a = 0;
      std::size_t axis_b = 1;
      if (!fl.axes.empty()) {
        if (fl.axes.size() != 2)
          throw ValidationError("--axes needs exactly two axis names");
        axis_a = space.axis_index(fl.axes[0]);
        axis_b = space.axis_index(fl.axes[1]);
      }
      return make_interaction_landscape(space, fl.center, fl.coupling, axis_a,
                                        axis_b);
    }
    throw ValidationError("--kind must be prior, quadratic, or interaction");
  };
  const Landscape l = build();
  write_tabulated_file(l, fl.out_path);
  out << "wrote " << l.space().size() << " combinations to " << fl.out_path
      << '\n';
}

void cmd_export(const ExportFlags& fl, std::ostream& out) {
  const SearchSpace space = load_space_file(fl.space_path);
  const Landscape l = load_tabulated_file(space, fl.landscape_path);
  if (fl.what == "heatmap") {
    if (fl.axes.size() != 2)
      throw ValidationError("--axes needs exactly two axis names");
    const HeatmapGrid grid = marginal_heatmap(l, fl.axes[0], fl.axes[1]);
    write_output_file(fl.out_path,
                      [&](std::ostream& o) { write_heatmap_csv(grid, o); });
  } else if (fl.what == "parcoords") {
    write_output_file(fl.out_path, [&](std::ostream& o) {
      write_parallel_coordinates(l, o);
    });
  } else if (fl.what == "topk") {
    if (fl.k < 1) throw ValidationError("--k must be at least 1");
    write_output_file(fl.out_path,
                      [&](std::ostream& o) { write_topk_csv(l, fl.k, o); });
  } else {
    throw ValidationError("--what must be heatmap, parcoords, or topk");
  }
  out << "wrote " << fl.out_path << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Search finite hyperparameter grids with an exact GP surrogate"};
  app.set_version_flag("--version", GPSEARCH_VERSION);
  app.require_subcommand(1);

  SearchFlags sf;
  CLI::App* search_cmd =
      app.add_subcommand("search", "Run one search and write its trace");
  search_cmd->add_option("--space", sf.space_path, "Axis definition file")
      ->required();
  search_cmd
      ->add_option("--landscape", sf.landscape_path, "Tabulated score file")
      ->required();
  search_cmd->add_option("--strategy", sf.strategy, "gp, random, or grid")
      ->required();
  search_cmd->add_option("--kernel", sf.kernel,
                         "linear, cubic, abs-exp, or sq-exp (gp only)");
  search_cmd->add_option("--init-random", sf.init_random,
                         "Random evaluations before the model takes over");
  search_cmd->add_option("--budget", sf.budget, "Total evaluations")
      ->required();
  search_cmd->add_option("--encode", sf.encode, "unit or raw");
  search_cmd->add_option("--jitter", sf.jitter, "Initial diagonal jitter");
  search_cmd->add_option("--seed", sf.seed, "Random seed");
  search_cmd->add_option("--out", sf.out_path, "Trace output path");

  ExperimentFlags ef;
  CLI::App* exp_cmd = app.add_subcommand(
      "experiment", "Run repeated searches and write statistics");
  CLI::Option* plan_opt =
      exp_cmd->add_option("--plan", ef.plan_path, "Plan or manifest file");
  std::vector<CLI::Option*> inline_opts;
  inline_opts.push_back(exp_cmd->add_option("--space",
                                            ef.inline_cfg.space_path,
                                            "Axis definition file"));
  inline_opts.push_back(exp_cmd->add_option(
      "--landscape", ef.inline_cfg.landscape_path, "Tabulated score file"));
  inline_opts.push_back(exp_cmd->add_option(
      "--strategy", ef.inline_cfg.strategy, "gp, random, or grid"));
  inline_opts.push_back(exp_cmd->add_option("--kernel", ef.inline_cfg.kernel,
                                            "Kernel for the gp strategy"));
  inline_opts.push_back(exp_cmd->add_option(
      "--init-random", ef.inline_cfg.init_random,
      "Random evaluations before the model takes over"));
  inline_opts.push_back(
      exp_cmd->add_option("--budget", ef.inline_cfg.budget,
                          "Total evaluations per run"));
  inline_opts.push_back(
      exp_cmd->add_option("--encode", ef.inline_cfg.encode, "unit or raw"));
  inline_opts.push_back(exp_cmd->add_option("--jitter", ef.inline_cfg.jitter,
                                            "Initial diagonal jitter"));
  inline_opts.push_back(
      exp_cmd->add_option("--name", ef.name, "Config name in the outputs"));
  inline_opts.push_back(
      exp_cmd->add_option("--runs", ef.runs, "Runs per config"));
  inline_opts.push_back(exp_cmd->add_option("--base-seed", ef.base_seed,
                                            "Seed of the first run"));
  inline_opts.push_back(exp_cmd
                            ->add_option("--hit-ks", ef.hit_ks,
                                         "Top-k sizes for hit rates")
                            ->delimiter(','));
  inline_opts.push_back(exp_cmd
                            ->add_option("--checkpoints", ef.checkpoints,
                                         "Hit-rate checkpoints")
                            ->delimiter(','));
  inline_opts.push_back(exp_cmd->add_option(
      "--target-k", ef.target_k, "Top-k target for evals-to-target"));
  for (CLI::Option* opt : inline_opts) plan_opt->excludes(opt);
  exp_cmd->add_option("--workers", ef.workers, "Concurrent runs");
  exp_cmd->add_option("--out-dir", ef.out_dir, "Statistics directory")
      ->required();

  LandscapeFlags lf;
  CLI::App* land_cmd =
      app.add_subcommand("landscape", "Generate a tabulated landscape");
  land_cmd->add_option("--space", lf.space_path, "Axis definition file")
      ->required();
  land_cmd->add_option("--kind", lf.kind, "prior, quadratic, or interaction")
      ->required();
  land_cmd->add_option("--kernel", lf.kernel, "Kernel of the prior draw");
  land_cmd->add_option("--seed", lf.seed, "Seed of the prior draw");
  land_cmd->add_option("--scale", lf.scale, "Score scale of the prior draw");
  land_cmd->add_option("--offset", lf.offset, "Score offset of the prior draw");
  land_cmd->add_option("--center", lf.center,
                       "Optimum in unit coordinates, one entry per axis")
      ->delimiter(',');
  land_cmd->add_option("--coupling", lf.coupling,
                       "Interaction ridge strength");
  land_cmd->add_option("--axes", lf.axes, "The two coupled axes")
      ->delimiter(',');
  land_cmd->add_option("--out", lf.out_path, "Landscape output path")
      ->required();

  ExportFlags xf;
  CLI::App* export_cmd =
      app.add_subcommand("export", "Derive analysis files from a landscape");
  export_cmd->add_option("--space", xf.space_path, "Axis definition file")
      ->required();
  export_cmd
      ->add_option("--landscape", xf.landscape_path, "Tabulated score file")
      ->required();
  export_cmd->add_option("--what", xf.what, "heatmap, parcoords, or topk")
      ->required();
  export_cmd->add_option("--axes", xf.axes, "Heatmap row and column axes")
      ->delimiter(',');
  export_cmd->add_option("--k", xf.k, "Rows in the topk export");
  export_cmd->add_option("--out", xf.out_path, "Output path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    while (!target->get_subcommands().empty())
      target = target->get_subcommands().front();
    out << target->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "gpsearch: " << e.what() << '\n';
    return 1;
  }

  try {
    if (search_cmd->parsed()) {
      cmd_search(sf, out);
    } else if (exp_cmd->parsed()) {
      cmd_experiment(ef, out);
    } else if (land_cmd->parsed()) {
      cmd_landscape(lf, out);
    } else if (export_cmd->parsed()) {
      cmd_export(xf, out);
    }
    return 0;
  } catch (const SearchAbortedError& e) {
    err << "gpsearch: " << e.what() << '\n';
    return 3;
  } catch (const FactorizationError& e) {
    err << "gpsearch: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    err << "gpsearch: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "gpsearch: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "gpsearch: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace gpsearch
