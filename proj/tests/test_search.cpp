#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "gpsearch/errors.hpp"
#include "gpsearch/search.hpp"
#include "support/oracles.hpp"

using namespace gpsearch;

namespace {

Landscape small_landscape() {
  const SearchSpace s = oracles::make_space(
      {{"a", {0, 1, 2}}, {"b", {0, 1, 2, 3}}});
  std::vector<double> scores{0.3, -1.2, 2.4,  0.0, 1.1, -0.7,
                             3.8, 0.9,  -2.5, 1.7, 0.2, 2.9};
  return Landscape(s, std::move(scores), "test");
}

SearchConfig gp_config(int r, int t, std::uint64_t seed,
                       KernelKind kind = KernelKind::SqExponential) {
  SearchConfig cfg;
  cfg.strategy = Strategy::Gp;
  cfg.kernel = KernelSpec{kind};
  cfg.initial_random = r;
  cfg.budget = t;
  cfg.seed = seed;
  return cfg;
}

SearchConfig plain_config(Strategy strategy, int t, std::uint64_t seed) {
  SearchConfig cfg;
  cfg.strategy = strategy;
  cfg.budget = t;
  cfg.seed = seed;
  return cfg;
}

void check_well_formed(const SearchTrace& trace, const Landscape& l) {
  const int t = trace.config.budget;
  REQUIRE(static_cast<int>(trace.steps.size()) == t);
  std::set<FlatId> seen;
  double running = -std::numeric_limits<double>::infinity();
  double best = -std::numeric_limits<double>::infinity();
  FlatId best_id = -1;
  for (int i = 0; i < t; ++i) {
    const TraceStep& step = trace.steps[static_cast<std::size_t>(i)];
    CHECK(step.iteration == i + 1);
    CHECK(step.flat_id >= 0);
    CHECK(step.flat_id < l.space().size());
    CHECK(seen.insert(step.flat_id).second);  // no repeats
    CHECK(step.score == l.score(step.flat_id));
    running = std::max(running, step.score);
    CHECK(step.best_so_far == running);
    if (step.score > best || (step.score == best && step.flat_id < best_id)) {
      best = step.score;
      best_id = step.flat_id;
    }
  }
  CHECK(trace.best_score == best);
  CHECK(trace.best_flat_id == best_id);
}

}  // namespace

TEST_CASE("strategy and phase names parse both ways") {
  CHECK(parse_strategy("gp") == Strategy::Gp);
  CHECK(parse_strategy("Random") == Strategy::Random);
  CHECK(parse_strategy("GRID") == Strategy::Grid);
  for (Strategy s : {Strategy::Gp, Strategy::Random, Strategy::Grid})
    CHECK(parse_strategy(strategy_name(s)) == s);
  CHECK_THROWS_AS((void)parse_strategy("anneal"), ValidationError);

  for (Phase p : {Phase::RandomInit, Phase::ModelGuided, Phase::Exhaustive})
    CHECK(parse_phase(phase_name(p)) == p);
  CHECK_THROWS_AS((void)parse_phase("warmup"), ValidationError);
}

TEST_CASE("configs are validated against the space size") {
  SearchConfig cfg = gp_config(10, 0, 0);
  CHECK_THROWS_AS(validate_config(cfg, 100), ValidationError);
  cfg.budget = 101;
  CHECK_THROWS_AS(validate_config(cfg, 100), ValidationError);
  cfg.budget = 100;
  CHECK_NOTHROW(validate_config(cfg, 100));
  cfg.initial_random = 0;
  CHECK_THROWS_AS(validate_config(cfg, 100), ValidationError);
  cfg.initial_random = 101;
  CHECK_THROWS_AS(validate_config(cfg, 100), ValidationError);
  cfg.initial_random = 10;
  cfg.initial_jitter = 0.0;
  CHECK_THROWS_AS(validate_config(cfg, 100), ValidationError);
  cfg.initial_jitter = -1e-8;
  CHECK_THROWS_AS(validate_config(cfg, 100), ValidationError);

  // initial_random is ignored outside the gp strategy
  SearchConfig random_cfg = plain_config(Strategy::Random, 5, 0);
  random_cfg.initial_random = 0;
  CHECK_NOTHROW(validate_config(random_cfg, 100));
}

TEST_CASE("sampling without replacement is a seeded uniform prefix") {
  std::mt19937_64 rng(3);
  const auto ids = sample_without_replacement(20, 8, rng);
  REQUIRE(ids.size() == 8);
  std::set<FlatId> unique(ids.begin(), ids.end());
  CHECK(unique.size() == 8);
  for (FlatId id : ids) {
    CHECK(id >= 0);
    CHECK(id < 20);
  }

  std::mt19937_64 rng2(3);
  CHECK(sample_without_replacement(20, 8, rng2) == ids);

  std::mt19937_64 rng3(3);
  const auto all = sample_without_replacement(6, 6, rng3);
  std::set<FlatId> perm(all.begin(), all.end());
  CHECK(perm.size() == 6);

  std::mt19937_64 rng4(0);
  CHECK_THROWS_AS((void)sample_without_replacement(5, 6, rng4),
                  ValidationError);
  CHECK_THROWS_AS((void)sample_without_replacement(5, -1, rng4),
                  ValidationError);
}

TEST_CASE("single-draw random search is uniform over the space") {
  const SearchSpace s = oracles::make_space(
      {{"a", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}});
  const Landscape l(s, std::vector<double>(10, 0.0), "flat");
  std::vector<int> counts(10, 0);
  const int runs = 100000;
  for (int i = 0; i < runs; ++i) {
    const SearchTrace trace =
        run_random_search(l, plain_config(Strategy::Random, 1, i));
    ++counts[static_cast<std::size_t>(trace.steps[0].flat_id)];
  }
  for (int c : counts) {
    const double freq = static_cast<double>(c) / runs;
    CHECK(freq >= 0.09);
    CHECK(freq <= 0.11);
  }
}

TEST_CASE("grid search walks flat ids in order") {
  const Landscape l = small_landscape();
  const SearchTrace trace = run_grid_search(l, plain_config(Strategy::Grid, 7, 9));
  REQUIRE(trace.steps.size() == 7);
  for (int i = 0; i < 7; ++i) {
    CHECK(trace.steps[static_cast<std::size_t>(i)].flat_id == i);
    CHECK(trace.steps[static_cast<std::size_t>(i)].phase == Phase::Exhaustive);
  }
  check_well_formed(trace, l);
  // seed has no effect on the deterministic sweep
  const SearchTrace other =
      run_grid_search(l, plain_config(Strategy::Grid, 7, 1234));
  for (int i = 0; i < 7; ++i)
    CHECK(other.steps[static_cast<std::size_t>(i)].flat_id ==
          trace.steps[static_cast<std::size_t>(i)].flat_id);
}

TEST_CASE("every strategy is exact when the budget covers the space") {
  const Landscape l = small_landscape();
  const FlatId n = l.space().size();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (Strategy strategy : {Strategy::Gp, Strategy::Random, Strategy::Grid}) {
      SearchConfig cfg = strategy == Strategy::Gp
                             ? gp_config(3, static_cast<int>(n), seed)
                             : plain_config(strategy, static_cast<int>(n), seed);
      const SearchTrace trace = run_search(l, cfg);
      check_well_formed(trace, l);
      CHECK(trace.best_flat_id == 6);  // unique max 3.8
      CHECK(trace.best_score == 3.8);
    }
  }
}

TEST_CASE("gp search with only random draws equals random search") {
  const Landscape l = small_landscape();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SearchTrace gp = run_gp_search(l, gp_config(7, 7, seed));
    const SearchTrace random =
        run_random_search(l, plain_config(Strategy::Random, 7, seed));
    REQUIRE(gp.steps.size() == random.steps.size());
    for (std::size_t i = 0; i < gp.steps.size(); ++i) {
      CHECK(gp.steps[i].flat_id == random.steps[i].flat_id);
      CHECK(gp.steps[i].score == random.steps[i].score);
      CHECK(gp.steps[i].phase == Phase::RandomInit);
    }
    CHECK(gp.best_flat_id == random.best_flat_id);
  }
}

TEST_CASE("gp phases split at the initialization boundary") {
  const Landscape l = small_landscape();
  const SearchTrace trace = run_gp_search(l, gp_config(4, 9, 2));
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    CHECK(trace.steps[i].phase ==
          (i < 4 ? Phase::RandomInit : Phase::ModelGuided));
  }
  check_well_formed(trace, l);
}

TEST_CASE("the first model-guided pick maximizes the posterior mean") {
  const SearchSpace s = oracles::make_space({{"x", {0, 1, 2, 3, 4}}});
  const Landscape l(s, {1.0, -0.5, 2.0, 0.3, -1.2}, "test");
  const Eigen::MatrixXd grid = encode_all(s, EncodeScheme::UnitNormalized);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SearchTrace trace = run_gp_search(l, gp_config(2, 3, seed));
    REQUIRE(trace.steps.size() == 3);

    std::mt19937_64 rng(seed);
    const auto init = sample_without_replacement(5, 2, rng);
    CHECK(trace.steps[0].flat_id == init[0]);
    CHECK(trace.steps[1].flat_id == init[1]);

    Eigen::MatrixXd X(2, 1);
    Eigen::VectorXd f(2);
    for (int i = 0; i < 2; ++i) {
      X.row(i) = grid.row(init[static_cast<std::size_t>(i)]);
      f[i] = l.score(init[static_cast<std::size_t>(i)]);
    }
    FlatId expected = -1;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (FlatId id = 0; id < 5; ++id) {
      if (id == init[0] || id == init[1]) continue;
      const auto oracle = oracles::dense_posterior(
          KernelKind::SqExponential, X, f, grid.row(id), 1e-8);
      if (oracle.mean[0] > best_mean) {
        best_mean = oracle.mean[0];
        expected = id;
      }
    }
    CHECK(trace.steps[2].flat_id == expected);
    CHECK(trace.steps[2].phase == Phase::ModelGuided);
  }
}

TEST_CASE("every model-guided pick is greedy against a refit model") {
  const Landscape l = small_landscape();
  const Eigen::MatrixXd grid =
      encode_all(l.space(), EncodeScheme::UnitNormalized);
  for (KernelKind kind : {KernelKind::Linear, KernelKind::Cubic,
                          KernelKind::AbsExponential,
                          KernelKind::SqExponential}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SearchTrace trace = run_gp_search(l, gp_config(3, 8, seed, kind));
      check_well_formed(trace, l);
      for (std::size_t q = 3; q < trace.steps.size(); ++q) {
        Eigen::MatrixXd X(static_cast<Eigen::Index>(q), grid.cols());
        Eigen::VectorXd f(static_cast<Eigen::Index>(q));
        std::set<FlatId> taken;
        for (std::size_t i = 0; i < q; ++i) {
          X.row(static_cast<Eigen::Index>(i)) =
              grid.row(trace.steps[i].flat_id);
          f[static_cast<Eigen::Index>(i)] = trace.steps[i].score;
          taken.insert(trace.steps[i].flat_id);
        }
        const GPModel model = fit_with_jitter_ladder({kind}, X, f);
        const FlatId chosen = trace.steps[q].flat_id;
        double chosen_mean = 0, max_mean = -1e300;
        for (FlatId id = 0; id < l.space().size(); ++id) {
          if (taken.count(id)) continue;
          const double mu = posterior(model, grid.row(id)).mean[0];
          if (id == chosen) chosen_mean = mu;
          max_mean = std::max(max_mean, mu);
        }
        const double slack = 1e-9 * std::max(1.0, std::abs(max_mean));
        CHECK(chosen_mean >= max_mean - slack);
      }
    }
  }
}

TEST_CASE("equal terminal scores resolve to the lower flat id") {
  const SearchSpace s = oracles::make_space({{"a", {0, 1}}});
  const Landscape l(s, {5.0, 5.0}, "tie");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SearchTrace trace =
        run_random_search(l, plain_config(Strategy::Random, 2, seed));
    CHECK(trace.best_flat_id == 0);
    CHECK(trace.best_score == 5.0);
    CHECK(trace.steps[1].best_so_far == 5.0);
  }
}

TEST_CASE("identical configurations reproduce identical traces") {
  const Landscape l = small_landscape();
  const SearchConfig cfg = gp_config(3, 9, 17, KernelKind::AbsExponential);
  const SearchTrace a = run_search(l, cfg);
  const SearchTrace b = run_search(l, cfg);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].flat_id == b.steps[i].flat_id);
    CHECK(a.steps[i].score == b.steps[i].score);
  }
  std::ostringstream ja, jb;
  write_trace(a, l.space(), ja);
  write_trace(b, l.space(), jb);
  CHECK(ja.str() == jb.str());
}

TEST_CASE("strategy dispatch rejects mismatched runners") {
  const Landscape l = small_landscape();
  CHECK_THROWS_AS((void)run_gp_search(l, plain_config(Strategy::Random, 3, 0)),
                  ValidationError);
  CHECK_THROWS_AS(
      (void)run_random_search(l, plain_config(Strategy::Grid, 3, 0)),
      ValidationError);
  CHECK_THROWS_AS((void)run_grid_search(l, gp_config(2, 3, 0)),
                  ValidationError);
}

TEST_CASE("an unfactorable model aborts the run but keeps the steps") {
  // raw cubic values of order 1e6 blow the gram up to 1e39, far beyond
  // what the jitter ladder can regularize once three points are in play
  const SearchSpace s =
      oracles::make_space({{"a", {1e6, 2e6, 3e6, 4e6, 5e6, 6e6}}});
  const Landscape l(s, {0.0, 1.0, 2.0, 3.0, 4.0, 5.0}, "steep");
  SearchConfig cfg = gp_config(2, 6, 0, KernelKind::Cubic);
  cfg.encode = EncodeScheme::RawValues;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    cfg.seed = seed;
    try {
      (void)run_gp_search(l, cfg);
      FAIL("expected SearchAbortedError");
    } catch (const SearchAbortedError& e) {
      CHECK(std::string(e.what()).find("iteration 4") != std::string::npos);
      const SearchTrace& partial = e.partial_trace();
      CHECK(partial.steps.size() == 3);
      CHECK(partial.config.budget == 6);
      double best = -1e300;
      for (const auto& step : partial.steps) best = std::max(best, step.score);
      CHECK(partial.best_score == best);
    }
  }
}

TEST_CASE("traces round trip through the line-delimited format") {
  const Landscape l = small_landscape();
  const SearchTrace trace = run_gp_search(l, gp_config(3, 8, 4));
  std::ostringstream out;
  write_trace(trace, l.space(), out);

  // one config line plus one line per step
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 9);

  std::istringstream in(text);
  const SearchTrace back = read_trace(in);
  CHECK(back.config.strategy == trace.config.strategy);
  CHECK(back.config.kernel.kind == trace.config.kernel.kind);
  CHECK(back.config.initial_random == trace.config.initial_random);
  CHECK(back.config.budget == trace.config.budget);
  CHECK(back.config.encode == trace.config.encode);
  CHECK(back.config.initial_jitter == trace.config.initial_jitter);
  CHECK(back.config.seed == trace.config.seed);
  REQUIRE(back.steps.size() == trace.steps.size());
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    CHECK(back.steps[i].iteration == trace.steps[i].iteration);
    CHECK(back.steps[i].flat_id == trace.steps[i].flat_id);
    CHECK(back.steps[i].score == trace.steps[i].score);
    CHECK(back.steps[i].best_so_far == trace.steps[i].best_so_far);
    CHECK(back.steps[i].phase == trace.steps[i].phase);
  }
  CHECK(back.best_flat_id == trace.best_flat_id);
  CHECK(back.best_score == trace.best_score);

  const auto path =
      std::filesystem::temp_directory_path() / "gpsearch_test_trace.jsonl";
  write_trace_file(trace, l.space(), path.string());
  const SearchTrace from_file = read_trace_file(path.string());
  CHECK(from_file.best_flat_id == trace.best_flat_id);
  std::filesystem::remove(path);
  CHECK_THROWS_AS((void)read_trace_file(path.string()), IoError);
}

TEST_CASE("trace reading validates the record stream") {
  auto read_text = [](const std::string& text) {
    std::istringstream in(text);
    return read_trace(in);
  };
  const std::string config =
      R"({"record":"config","strategy":"random","kernel":"abs-exp",)"
      R"("initial_random":10,"budget":2,"encode":"unit",)"
      R"("initial_jitter":1e-08,"seed":0})";
  const std::string step1 =
      R"({"record":"step","iteration":1,"flat_id":3,"values":[1.0],)"
      R"("score":2.0,"best_so_far":2.0,"phase":"random-init"})";
  const std::string step9 =
      R"({"record":"step","iteration":9,"flat_id":4,"values":[2.0],)"
      R"("score":1.0,"best_so_far":2.0,"phase":"random-init"})";

  CHECK_THROWS_AS((void)read_text(""), ValidationError);
  CHECK_THROWS_AS((void)read_text(step1 + "\n" + config + "\n"),
                  ValidationError);
  CHECK_THROWS_AS((void)read_text(config + "\n" + config + "\n"),
                  ValidationError);
  CHECK_THROWS_AS((void)read_text(config + "\nnot json\n"), ValidationError);
  CHECK_THROWS_AS((void)read_text(config + "\n" + step1 + "\n" + step9 + "\n"),
                  ValidationError);
  CHECK_THROWS_AS(
      (void)read_text(R"({"record":"mystery"})" "\n"),
      ValidationError);

  // terminal best is recomputed, ties toward the lower flat id
  const std::string tie_a =
      R"({"record":"step","iteration":1,"flat_id":7,"values":[1.0],)"
      R"("score":5.0,"best_so_far":5.0,"phase":"random-init"})";
  const std::string tie_b =
      R"({"record":"step","iteration":2,"flat_id":2,"values":[0.0],)"
      R"("score":5.0,"best_so_far":5.0,"phase":"random-init"})";
  const SearchTrace trace =
      read_text(config + "\n" + tie_a + "\n" + tie_b + "\n");
  CHECK(trace.best_flat_id == 2);
  CHECK(trace.best_score == 5.0);
}
