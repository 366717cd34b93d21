#include "reprocs/metrics_io.hpp"

#include "reprocs/theory_bounds.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace reprocs {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void append_number(std::string& out, double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  out.append(buf, res.ptr);
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

ModelConfig model_from_json(const json& j) {
  reject_unknown(j,
                 {"n", "r0", "c", "J", "t_change", "t_train", "total_T", "b", "gamma_star", "gamma_new", "v",
                  "lambda_minus", "lambda_plus", "s", "S_min", "S_max", "support_dwell", "gamma_interval",
                  "seed"},
                 "model");
  ModelConfig m;
  read_opt(j, "n", m.n);
  read_opt(j, "r0", m.r0);
  read_opt(j, "c", m.c);
  read_opt(j, "J", m.J);
  read_opt(j, "t_change", m.t_change);
  read_opt(j, "t_train", m.t_train);
  read_opt(j, "total_T", m.total_T);
  read_opt(j, "b", m.b);
  read_opt(j, "gamma_star", m.gamma_star);
  read_opt(j, "gamma_new", m.gamma_new);
  read_opt(j, "v", m.v);
  read_opt(j, "lambda_minus", m.lambda_minus);
  read_opt(j, "lambda_plus", m.lambda_plus);
  read_opt(j, "s", m.s);
  read_opt(j, "S_min", m.S_min);
  read_opt(j, "S_max", m.S_max);
  read_opt(j, "support_dwell", m.support_dwell);
  read_opt(j, "gamma_interval", m.gamma_interval);
  read_opt(j, "seed", m.seed);
  return m;
}

template <typename T>
std::optional<T> number_or_auto(const json& j, const char* key, std::optional<T> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() != "auto") throw std::invalid_argument(std::string("algo.") + key + " must be a number or \"auto\"");
    return std::nullopt;
  }
  return v.get<T>();
}

AlgoConfig algo_from_json(const json& j) {
  reject_unknown(j, {"xi", "omega", "K", "alpha", "zeta", "ar_whitening", "bpdn"}, "algo");
  AlgoConfig a;
  a.xi = number_or_auto<double>(j, "xi", std::nullopt);
  a.omega = number_or_auto<double>(j, "omega", std::nullopt);
  a.K = number_or_auto<Index>(j, "K", std::nullopt);
  read_opt(j, "alpha", a.alpha);
  read_opt(j, "zeta", a.zeta);
  read_opt(j, "ar_whitening", a.ar_whitening);
  if (j.contains("bpdn")) {
    const json& b = j.at("bpdn");
    reject_unknown(b, {"rho", "max_iters", "tol", "feas_slack"}, "algo.bpdn");
    read_opt(b, "rho", a.bpdn.rho);
    read_opt(b, "max_iters", a.bpdn.max_iters);
    read_opt(b, "tol", a.bpdn.tol);
    read_opt(b, "feas_slack", a.bpdn.feas_slack);
  }
  return a;
}

ExperimentConfig experiment_from_json(const json& j) {
  reject_unknown(j, {"model", "algo", "trials", "pcp_checkpoints", "pcp", "output_path", "output_format", "threads"},
                 "config");
  ExperimentConfig cfg;
  const bool interval_given = j.contains("model") && j.at("model").contains("gamma_interval");
  if (j.contains("model")) cfg.model = model_from_json(j.at("model"));
  if (j.contains("algo")) cfg.algo = algo_from_json(j.at("algo"));
  if (!interval_given) cfg.model.gamma_interval = cfg.algo.alpha;
  read_opt(j, "trials", cfg.trials);
  read_opt(j, "pcp_checkpoints", cfg.pcp_checkpoints);
  if (j.contains("pcp")) {
    const json& p = j.at("pcp");
    reject_unknown(p, {"max_iters", "tol", "mu_growth"}, "pcp");
    read_opt(p, "max_iters", cfg.pcp.max_iters);
    read_opt(p, "tol", cfg.pcp.tol);
    read_opt(p, "mu_growth", cfg.pcp.mu_growth);
  }
  read_opt(j, "output_path", cfg.output_path);
  if (j.contains("output_format")) {
    const std::string f = j.at("output_format").get<std::string>();
    if (f == "csv") {
      cfg.output_format = OutputFormat::csv;
    } else if (f == "json") {
      cfg.output_format = OutputFormat::json;
    } else {
      throw std::invalid_argument("output_format must be csv or json");
    }
  }
  read_opt(j, "threads", cfg.threads);
  return cfg;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
  }
}

template <typename F>
auto wrap_json_errors(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
}

// Normalized error, or the absolute error when the reference is zero.
double rel_err(double err, double ref) { return ref > 0.0 ? err / ref : err; }

struct TrialOutput {
  std::vector<FrameRecord> records;
  std::vector<PcpRecord> pcp;
  std::string error;
};

TrialOutput run_trial(const ExperimentConfig& cfg, const ReprocsParams& params, Index trial) {
  TrialOutput out;
  try {
    ModelConfig mc = cfg.model;
    mc.seed = cfg.model.seed + static_cast<std::uint64_t>(trial);
    const GroundTruth truth = gen_model(mc);
    ReprocsState st = init(truth.M.leftCols(mc.t_train), mc.r0);
    out.records.reserve(static_cast<std::size_t>(mc.total_T - mc.t_train));
    for (Index t = mc.t_train; t < mc.total_T; ++t) {
      const FrameEstimate fe = process_frame(st, truth.M.col(t), t, params);
      FrameRecord rec = frame_metrics(truth, t, fe, st.current_basis());
      rec.trial = trial;
      out.records.push_back(rec);
    }
    for (Index tau : cfg.pcp_checkpoints) {
      const Mat m = truth.M.leftCols(tau + 1);
      const PcpSolution sol = solve_pcp(m, default_pcp_lambda(m.rows(), m.cols()), cfg.pcp);
      PcpRecord pr;
      pr.trial = trial;
      pr.checkpoint = tau;
      pr.iterations = sol.iterations;
      pr.converged = sol.converged;
      pr.s_err_rel_last = rel_err((sol.S.col(tau) - truth.S.col(tau)).norm(), truth.S.col(tau).norm());
      double sum = 0.0;
      Index cnt = 0;
      for (Index t = mc.t_train; t <= tau; ++t) {
        sum += rel_err((sol.S.col(t) - truth.S.col(t)).norm(), truth.S.col(t).norm());
        ++cnt;
      }
      pr.s_err_rel_mean = cnt ? sum / static_cast<double>(cnt) : 0.0;
      pr.l_err_rel = rel_err((sol.L - truth.L.leftCols(tau + 1)).norm(), truth.L.leftCols(tau + 1).norm());
      out.pcp.push_back(pr);
    }
  } catch (const std::exception& e) {
    out.records.clear();
    out.pcp.clear();
    out.error = "trial " + std::to_string(trial) + ": " + e.what();
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  model.validate();
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  for (Index tau : pcp_checkpoints) {
    if (tau < 0 || tau >= model.total_T) throw std::invalid_argument("pcp checkpoint outside the stream");
  }
  if (model.r0 > model.t_train) throw std::invalid_argument("t_train must be >= r0");
  resolve_params(algo, model).validate();
}

ReprocsParams resolve_params(const AlgoConfig& algo, const ModelConfig& model) {
  ReprocsParams p;
  p.alpha = algo.alpha;
  p.t_change = model.t_change;
  p.r0 = model.r0;
  p.c = model.c;
  p.bpdn = algo.bpdn;
  p.ar_whitening = algo.ar_whitening;
  p.b = model.b;
  const double r = static_cast<double>(model.r0 + std::max<Index>(model.J - 1, 0) * model.c);
  p.xi = algo.xi ? *algo.xi : xi0(static_cast<double>(model.c), r, algo.zeta, model.gamma_new);
  if (algo.omega) {
    p.omega = *algo.omega;
  } else {
    const double lo = 7.0 * p.xi;
    const double hi = model.S_min - 7.0 * p.xi;
    if (lo > hi) {
      throw std::invalid_argument("automatic omega: window [7 xi, S_min - 7 xi] is empty");
    }
    p.omega = 0.5 * (lo + hi);
  }
  p.K = algo.K ? *algo.K : k_of_zeta(static_cast<int>(std::max<Index>(model.c, 1)), algo.zeta);
  return p;
}

FrameRecord frame_metrics(const GroundTruth& truth, Index t, const FrameEstimate& fe,
                          const BasisMatrix& basis_after) {
  FrameRecord rec;
  rec.t = t;
  const Vec s_true = truth.S.col(t);
  const Vec l_true = truth.L.col(t);
  const Vec e = fe.S_hat - s_true;
  rec.s_err_rel = rel_err(e.norm(), s_true.norm());
  rec.l_err = (fe.L_hat - l_true).norm();
  const BasisMatrix& p_t = truth.basis_at(t);
  rec.se = subspace_error(basis_after, p_t);
  rec.support_exact = fe.T_hat == truth.support[static_cast<std::size_t>(t)];
  rec.converged = fe.converged;
  rec.ill_conditioned = fe.ill_conditioned;

  const Index phase = truth.phase[static_cast<std::size_t>(t)];
  const BasisMatrix star(fe.basis.data().leftCols(fe.star_rank), 1e-8);
  const BasisMatrix& old_true = truth.P[static_cast<std::size_t>(phase > 0 ? phase - 1 : 0)];
  rec.zeta_star = subspace_error(star, old_true);
  if (phase > 0) {
    const Index cnew = p_t.r() - old_true.r();
    const BasisMatrix p_new(p_t.data().rightCols(cnew), 1e-8);
    rec.zeta_k = subspace_error(fe.basis, p_new);
  } else {
    rec.zeta_k = kNaN;
  }

  rec.eq3_rel_err = kNaN;
  if (rec.support_exact && !fe.ill_conditioned) {
    const IndexSet& tt = truth.support[static_cast<std::size_t>(t)];
    Vec e_cf = Vec::Zero(e.size());
    if (!tt.empty()) {
      // (Phi_T)^dagger beta_t through a QR least-squares solve of the
      // explicitly formed n x |T| matrix Phi_T.
      const Index n = truth.n();
      const Index m = static_cast<Index>(tt.size());
      Mat phi_t = Mat::Zero(n, m);
      for (Index i = 0; i < m; ++i) phi_t(tt[static_cast<std::size_t>(i)], i) = 1.0;
      if (!fe.basis.empty()) {
        phi_t -= fe.basis.data() * restrict_rows(fe.basis.data(), tt).transpose();
      }
      const Vec beta = ProjectedOperator(fe.basis).apply(l_true);
      const Vec x = phi_t.colPivHouseholderQr().solve(beta);
      for (Index i = 0; i < m; ++i) e_cf(tt[static_cast<std::size_t>(i)]) = x(i);
    }
    const double denom = std::max(e_cf.norm(), 1e-6 * s_true.norm());
    const double diff = (e - e_cf).norm();
    rec.eq3_rel_err = denom > 0.0 ? diff / denom : diff;
  }
  return rec;
}

Aggregate aggregate(const std::vector<FrameRecord>& records, const std::vector<PcpRecord>& pcp,
                    Index trials_ok, Index trials_failed) {
  Aggregate ag;
  ag.trials_ok = trials_ok;
  ag.trials_failed = trials_failed;
  if (!records.empty()) {
    Index t_min = records.front().t, t_max = records.front().t;
    for (const auto& r : records) {
      t_min = std::min(t_min, r.t);
      t_max = std::max(t_max, r.t);
    }
    const auto span = static_cast<std::size_t>(t_max - t_min + 1);
    std::vector<FrameAggregate> acc(span);
    std::vector<Index> cnt(span, 0);
    std::uint64_t exact = 0;
    for (const auto& r : records) {
      auto& a = acc[static_cast<std::size_t>(r.t - t_min)];
      a.s_err_rel += r.s_err_rel;
      a.l_err += r.l_err;
      a.se += r.se;
      a.support_exact_rate += r.support_exact ? 1.0 : 0.0;
      ++cnt[static_cast<std::size_t>(r.t - t_min)];
      exact += r.support_exact ? 1 : 0;
      ag.bpdn_nonconverged += r.converged ? 0 : 1;
      ag.ill_conditioned += r.ill_conditioned ? 1 : 0;
    }
    for (std::size_t i = 0; i < span; ++i) {
      if (!cnt[i]) continue;
      const double c = static_cast<double>(cnt[i]);
      FrameAggregate a = acc[i];
      a.t = t_min + static_cast<Index>(i);
      a.s_err_rel /= c;
      a.l_err /= c;
      a.se /= c;
      a.support_exact_rate /= c;
      ag.frames.push_back(a);
    }
    ag.support_exact_rate = static_cast<double>(exact) / static_cast<double>(records.size());
  }
  std::vector<Index> cps;
  for (const auto& p : pcp) {
    if (std::find(cps.begin(), cps.end(), p.checkpoint) == cps.end()) cps.push_back(p.checkpoint);
  }
  std::sort(cps.begin(), cps.end());
  for (Index cp : cps) {
    PcpAggregate a;
    a.checkpoint = cp;
    double c = 0.0;
    for (const auto& p : pcp) {
      if (p.checkpoint != cp) continue;
      a.s_err_rel_last += p.s_err_rel_last;
      a.s_err_rel_mean += p.s_err_rel_mean;
      a.l_err_rel += p.l_err_rel;
      c += 1.0;
    }
    a.s_err_rel_last /= c;
    a.s_err_rel_mean /= c;
    a.l_err_rel /= c;
    ag.pcp.push_back(a);
  }
  return ag;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ReprocsParams params = resolve_params(cfg.algo, cfg.model);
  for (const auto& w : params.warnings()) std::clog << "warning: " << w << '\n';

  const auto trials = static_cast<std::size_t>(cfg.trials);
  std::vector<TrialOutput> outs(trials);
  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, trials));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < trials; i = next++) outs[i] = run_trial(cfg, params, static_cast<Index>(i));
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  RunResult res;
  Index ok = 0, failed = 0;
  for (auto& o : outs) {
    if (!o.error.empty()) {
      ++failed;
      std::clog << "error: " << o.error << '\n';
      res.errors.push_back(o.error);
      continue;
    }
    ++ok;
    res.records.insert(res.records.end(), o.records.begin(), o.records.end());
    res.pcp.insert(res.pcp.end(), o.pcp.begin(), o.pcp.end());
  }
  res.aggregate = aggregate(res.records, res.pcp, ok, failed);
  if (res.aggregate.bpdn_nonconverged) {
    std::clog << "warning: " << res.aggregate.bpdn_nonconverged << " frames hit the BPDN iteration cap\n";
  }
  if (res.aggregate.ill_conditioned) {
    std::clog << "warning: " << res.aggregate.ill_conditioned << " frames fell back to the thresholded CS output\n";
  }
  return res;
}

namespace {

json aggregate_to_json(const Aggregate& ag) {
  json frames = json::array();
  for (const auto& f : ag.frames) {
    frames.push_back({{"t", f.t},
                      {"s_err_rel", f.s_err_rel},
                      {"l_err", f.l_err},
                      {"se", f.se},
                      {"support_exact_rate", f.support_exact_rate}});
  }
  json pcp = json::array();
  for (const auto& p : ag.pcp) {
    pcp.push_back({{"checkpoint", p.checkpoint},
                   {"s_err_rel_last", p.s_err_rel_last},
                   {"s_err_rel_mean", p.s_err_rel_mean},
                   {"l_err_rel", p.l_err_rel}});
  }
  return json{{"trials_ok", ag.trials_ok},
              {"trials_failed", ag.trials_failed},
              {"support_exact_rate", ag.support_exact_rate},
              {"bpdn_nonconverged", ag.bpdn_nonconverged},
              {"ill_conditioned", ag.ill_conditioned},
              {"frames", frames},
              {"pcp", pcp}};
}

Aggregate aggregate_from_json(const json& j) {
  Aggregate ag;
  ag.trials_ok = j.at("trials_ok").get<Index>();
  ag.trials_failed = j.at("trials_failed").get<Index>();
  ag.support_exact_rate = j.at("support_exact_rate").get<double>();
  ag.bpdn_nonconverged = j.at("bpdn_nonconverged").get<std::uint64_t>();
  ag.ill_conditioned = j.at("ill_conditioned").get<std::uint64_t>();
  for (const auto& f : j.at("frames")) {
    ag.frames.push_back(FrameAggregate{f.at("t").get<Index>(), f.at("s_err_rel").get<double>(),
                                       f.at("l_err").get<double>(), f.at("se").get<double>(),
                                       f.at("support_exact_rate").get<double>()});
  }
  for (const auto& p : j.at("pcp")) {
    ag.pcp.push_back(PcpAggregate{p.at("checkpoint").get<Index>(), p.at("s_err_rel_last").get<double>(),
                                  p.at("s_err_rel_mean").get<double>(), p.at("l_err_rel").get<double>()});
  }
  return ag;
}

}  // namespace

void write_records(const RunResult& result, const std::string& path, OutputFormat format) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  if (format == OutputFormat::csv) {
    std::string buf = "trial,t,s_err_rel,l_err,se,support_exact\n";
    for (const auto& r : result.records) {
      buf += std::to_string(r.trial);
      buf += ',';
      buf += std::to_string(r.t);
      buf += ',';
      append_number(buf, r.s_err_rel);
      buf += ',';
      append_number(buf, r.l_err);
      buf += ',';
      append_number(buf, r.se);
      buf += r.support_exact ? ",1\n" : ",0\n";
    }
    os << buf;
  } else {
    json recs = json::array();
    for (const auto& r : result.records) {
      recs.push_back({{"trial", r.trial},
                      {"t", r.t},
                      {"s_err_rel", r.s_err_rel},
                      {"l_err", r.l_err},
                      {"se", r.se},
                      {"support_exact", r.support_exact},
                      {"zeta_star", number_or_null(r.zeta_star)},
                      {"zeta_k", number_or_null(r.zeta_k)},
                      {"eq3_rel_err", number_or_null(r.eq3_rel_err)},
                      {"converged", r.converged},
                      {"ill_conditioned", r.ill_conditioned}});
    }
    json pcp = json::array();
    for (const auto& p : result.pcp) {
      pcp.push_back({{"trial", p.trial},
                     {"checkpoint", p.checkpoint},
                     {"s_err_rel_last", p.s_err_rel_last},
                     {"s_err_rel_mean", p.s_err_rel_mean},
                     {"l_err_rel", p.l_err_rel},
                     {"iterations", p.iterations},
                     {"converged", p.converged}});
    }
    json doc{{"records", recs}, {"pcp", pcp}, {"aggregate", aggregate_to_json(result.aggregate)},
             {"errors", result.errors}};
    os << doc.dump(1) << '\n';
  }
  if (!os) throw std::runtime_error("write failed for " + path);
}

Aggregate read_aggregate_json(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return aggregate_from_json(json::parse(ss.str()).at("aggregate"));
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  return wrap_json_errors([&] { return experiment_from_json(parse_text(text)); });
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::invalid_argument("cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_experiment_config(ss.str());
}

}  // namespace reprocs
