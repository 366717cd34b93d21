#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "reprocs/metrics_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace reprocs;

namespace {

ExperimentConfig small_experiment() {
  ExperimentConfig cfg;
  cfg.model.n = 40;
  cfg.model.r0 = 3;
  cfg.model.c = 1;
  cfg.model.J = 1;
  cfg.model.t_change = {60};
  cfg.model.t_train = 30;
  cfg.model.total_T = 120;
  cfg.model.s = 2;
  cfg.model.gamma_interval = 15;
  cfg.algo.alpha = 15;
  cfg.algo.K = 3;
  cfg.trials = 2;
  cfg.threads = 2;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("reprocs_metrics_" + name);
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_experiment_config(R"({
    "model": {"n": 50, "r0": 4, "c": 1, "J": 1, "t_change": [80], "t_train": 30, "total_T": 150},
    "algo": {"alpha": 20, "K": "auto", "xi": 0.2, "omega": "auto", "bpdn": {"max_iters": 500}},
    "trials": 3, "output_format": "json", "pcp_checkpoints": [100]
  })");
  CHECK(cfg.model.n == 50);
  CHECK(cfg.model.gamma_interval == 20);
  CHECK(cfg.algo.alpha == 20);
  CHECK(!cfg.algo.K.has_value());
  CHECK(cfg.algo.xi.value() == 0.2);
  CHECK(!cfg.algo.omega.has_value());
  CHECK(cfg.algo.bpdn.max_iters == 500);
  CHECK(cfg.output_format == OutputFormat::json);
  CHECK(cfg.pcp_checkpoints == std::vector<Index>{100});

  CHECK_THROWS_AS(parse_experiment_config(R"({"modle": {}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_config(R"({"model": {"sparsity": 3}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_config(R"({"algo": {"xi": "big"}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_config(R"({"trials": "many"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_config("{"), std::invalid_argument);
  CHECK_THROWS_AS(load_experiment_config("/nonexistent/config.json"), std::invalid_argument);
}

TEST_CASE("automatic parameters") {
  ModelConfig m;
  AlgoConfig a;
  a.zeta = 1e-6;
  const ReprocsParams p = resolve_params(a, m);
  const double r = 12 + 2;
  CHECK(p.xi == doctest::Approx(std::sqrt(2.0) * 0.05 + 1e-3 * (std::sqrt(r) + std::sqrt(2.0))));
  CHECK(p.omega == doctest::Approx(0.5 * m.S_min));
  CHECK(p.K == 27);
  a.xi = 0.2;
  CHECK_THROWS_AS(resolve_params(a, m), std::invalid_argument);
  a.omega = 1.0;
  CHECK_NOTHROW(resolve_params(a, m));
}

TEST_CASE("zero evaluation frames") {
  ExperimentConfig cfg = small_experiment();
  cfg.model.J = 0;
  cfg.model.t_change = {};
  cfg.model.total_T = cfg.model.t_train;
  const RunResult res = run_experiment(cfg);
  CHECK(res.records.empty());
  CHECK(res.errors.empty());
  CHECK(res.aggregate.trials_ok == 2);
  const auto path = scratch("empty.csv");
  write_records(res, path.string(), OutputFormat::csv);
  CHECK(slurp(path) == "trial,t,s_err_rel,l_err,se,support_exact\n");
  std::filesystem::remove(path);
}

TEST_CASE("records, aggregates and determinism") {
  const ExperimentConfig cfg = small_experiment();
  const RunResult a = run_experiment(cfg);
  const RunResult b = run_experiment(cfg);
  REQUIRE(a.errors.empty());
  CHECK(a.records.size() == 2 * 90);
  CHECK(a.aggregate == b.aggregate);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].s_err_rel == b.records[i].s_err_rel);
    CHECK(a.records[i].se == b.records[i].se);
  }

  const auto& frames = a.aggregate.frames;
  REQUIRE(frames.size() == 90);
  for (const auto& f : frames) {
    double se = 0.0, s_err = 0.0;
    for (const auto& r : a.records) {
      if (r.t != f.t) continue;
      se += r.se;
      s_err += r.s_err_rel;
    }
    CHECK(std::abs(f.se - se / 2.0) <= 1e-12);
    CHECK(std::abs(f.s_err_rel - s_err / 2.0) <= 1e-12);
  }

  for (const auto& r : a.records) {
    if (r.t < 60) CHECK(std::isnan(r.zeta_k));
    if (r.support_exact) CHECK(r.eq3_rel_err <= 1e-8);
    if (!r.support_exact) CHECK(std::isnan(r.eq3_rel_err));
  }
  CHECK(a.aggregate.support_exact_rate > 0.9);
}

TEST_CASE("support flag is set equality") {
  ModelConfig m;
  m.n = 20;
  m.r0 = 2;
  m.c = 1;
  m.J = 0;
  m.t_change = {};
  m.t_train = 10;
  m.total_T = 12;
  m.s = 2;
  const GroundTruth gt = gen_model(m);
  FrameEstimate fe;
  fe.basis = gt.P[0];
  fe.star_rank = 2;
  fe.S_hat = gt.S.col(11);
  fe.L_hat = gt.L.col(11);
  fe.T_hat = gt.support[11];
  FrameRecord rec = frame_metrics(gt, 11, fe, gt.P[0]);
  CHECK(rec.support_exact);
  CHECK(rec.s_err_rel == 0.0);
  CHECK(rec.se <= 1e-12);
  fe.T_hat.pop_back();
  rec = frame_metrics(gt, 11, fe, gt.P[0]);
  CHECK(!rec.support_exact);
}

TEST_CASE("writers") {
  RunResult res;
  for (Index t = 0; t < 3; ++t) {
    FrameRecord r;
    r.t = 40 + t;
    r.s_err_rel = 0.1 * static_cast<double>(t);
    r.se = 1.0 / 3.0;
    r.support_exact = t != 1;
    r.zeta_k = std::numeric_limits<double>::quiet_NaN();
    res.records.push_back(r);
  }
  PcpRecord p;
  p.checkpoint = 42;
  p.s_err_rel_last = 0.7;
  res.pcp.push_back(p);
  res.aggregate = aggregate(res.records, res.pcp, 1, 0);
  CHECK(res.aggregate.pcp.size() == 1);
  CHECK(res.aggregate.support_exact_rate == doctest::Approx(2.0 / 3.0));

  const auto csv = scratch("three.csv");
  write_records(res, csv.string(), OutputFormat::csv);
  std::istringstream lines(slurp(csv));
  std::string line;
  int count = 0;
  std::getline(lines, line);
  CHECK(line == "trial,t,s_err_rel,l_err,se,support_exact");
  while (std::getline(lines, line)) ++count;
  CHECK(count == 3);
  std::filesystem::remove(csv);

  const auto js = scratch("three.json");
  write_records(res, js.string(), OutputFormat::json);
  CHECK(read_aggregate_json(js.string()) == res.aggregate);
  std::filesystem::remove(js);
  CHECK_THROWS_AS(write_records(res, "/nonexistent/dir/x.csv", OutputFormat::csv), std::runtime_error);
}

TEST_CASE("pcp checkpoints are reported") {
  ExperimentConfig cfg = small_experiment();
  cfg.trials = 1;
  cfg.pcp_checkpoints = {70, 110};
  const RunResult res = run_experiment(cfg);
  REQUIRE(res.pcp.size() == 2);
  CHECK(res.aggregate.pcp.size() == 2);
  CHECK(res.aggregate.pcp[0].checkpoint == 70);
  for (const auto& p : res.pcp) CHECK(std::isfinite(p.s_err_rel_last));
  cfg.pcp_checkpoints = {500};
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}
