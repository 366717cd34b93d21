#include "reprocs/metrics_io.hpp"
#include "reprocs/signal_model.hpp"
#include "reprocs/theory_bounds.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::invalid_argument("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

reprocs::BoundParams bound_params_from_json(const json& j, int& n, int& K, bool& theorem) {
  theorem = j.value("theorem_constants", false);
  reprocs::BoundParams p = theorem ? reprocs::theorem_constants() : reprocs::BoundParams{};
  const int r0 = j.value("r0", 1);
  p.J = j.value("J", p.J);
  p.c = j.value("c", p.c);
  p.r = j.contains("r") ? j.at("r").get<int>() : r0 + (p.J - 1) * p.c;
  p.zeta = j.value("zeta", p.zeta);
  p.b = j.value("b", p.b);
  p.f = j.value("f", p.f);
  p.g = j.value("g", p.g);
  p.eta = j.value("eta", p.eta);
  p.gamma_star = j.value("gamma_star", p.gamma_star);
  p.gamma_new = j.value("gamma_new", p.gamma_new);
  p.v = j.value("v", p.v);
  p.lambda_minus = j.value("lambda_minus", p.lambda_minus);
  p.lambda_plus = j.value("lambda_plus", p.lambda_plus);
  p.kappa_2s_star = j.value("kappa_2s_star", p.kappa_2s_star);
  p.kappa_2s_new = j.value("kappa_2s_new", p.kappa_2s_new);
  p.kappa_s = j.value("kappa_s", p.kappa_s);
  p.kappa_tilde_2s = j.value("kappa_tilde_2s", p.kappa_tilde_2s);
  p.phi_plus = j.value("phi_plus", p.phi_plus);
  p.phi0_plus = j.value("phi0_plus", p.phi0_plus);
  if (j.contains("alpha") && !j.at("alpha").is_null()) p.alpha = j.at("alpha").get<double>();
  if (j.value("ak_variant", std::string("hundred")) == "alpha") p.ak_variant = reprocs::AkVariant::alpha;
  n = j.value("n", 200);
  K = j.value("K", 0);
  p.validate();
  return p;
}

int cmd_bounds(const std::string& params_path, const std::string& format) {
  reprocs::BoundParams p;
  int n = 0, K = 0;
  bool theorem = false;
  json src;
  try {
    src = json::parse(slurp(params_path));
    p = bound_params_from_json(src, n, K, theorem);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const int k_z = reprocs::k_of_zeta(std::max(p.c, 1), p.zeta);
    if (K <= 0) K = k_z;
    json out;
    out["K_of_zeta"] = k_z;
    out["K"] = K;
    out["xi0"] = reprocs::xi0(p.c, p.r, p.zeta, p.gamma_new);
    out["zeta_cap"] = reprocs::zeta_cap(src.value("r0", 1), p.J, p.c, p.gamma_star, p.f);
    try {
      out["alpha_add"] = reprocs::alpha_add(K, p.J, n, p.zeta, p.lambda_minus, p.gamma_new, p.gamma_star);
    } catch (const std::overflow_error&) {
      out["alpha_add"] = "overflow";
    }

    const reprocs::ZetaSequence seq = reprocs::zeta_plus_seq(p, K);
    out["zeta_plus"] = seq.values;
    out["envelope_ok"] = seq.envelope_ok;
    out["monotone_from_3"] = seq.monotone_from_3;
    const double zs = p.zeta_star_plus.value_or(p.r * p.zeta);
    const double worst_prev = seq.values.size() > 1 ? seq.values[1] : 1.0;
    const reprocs::RicPhiBounds rb = reprocs::ric_phi_bounds(p, zs, worst_prev);
    out["ric_phi"] = {{"delta2s_phi0_bound", rb.delta2s_phi0_bound},
                      {"delta2s_phik_bound", rb.delta2s_phik_bound},
                      {"phi_bound", rb.phi_bound}};
    if (!theorem) {
      reprocs::FactInputs fi;
      fi.r0 = src.value("r0", 1);
      fi.J = p.J;
      fi.c = p.c;
      fi.zeta = p.zeta;
      fi.gamma_star = p.gamma_star;
      fi.f = p.f;
      fi.gamma_new = p.gamma_new;
      fi.K = K;
      try {
        json items = json::array();
        for (const auto& it : reprocs::fact_constants(fi)) {
          items.push_back({{"item", it.index}, {"lhs", it.lhs}, {"rhs", it.rhs}, {"pass", it.pass}});
        }
        out["fact_checks"] = items;
      } catch (const std::invalid_argument& e) {
        out["fact_checks"] = e.what();
      }
    }

    if (format == "json") {
      std::cout << out.dump(2) << '\n';
    } else {
      std::cout << std::left;
      std::cout << std::setw(16) << "K(zeta)" << out["K_of_zeta"] << '\n';
      std::cout << std::setw(16) << "xi0" << out["xi0"] << '\n';
      std::cout << std::setw(16) << "alpha_add" << out["alpha_add"] << '\n';
      std::cout << std::setw(16) << "zeta cap" << out["zeta_cap"] << '\n';
      for (std::size_t k = 0; k < seq.values.size(); ++k) {
        std::cout << std::setw(16) << ("zeta_" + std::to_string(k) + "^+") << seq.values[k] << '\n';
      }
      std::cout << std::setw(16) << "envelope" << (seq.envelope_ok ? "ok" : "violated") << '\n';
      std::cout << std::setw(16) << "delta(Phi_0)" << rb.delta2s_phi0_bound << '\n';
      std::cout << std::setw(16) << "delta(Phi_k)" << rb.delta2s_phik_bound << '\n';
      std::cout << std::setw(16) << "phi bound" << rb.phi_bound << '\n';
      if (out.contains("fact_checks")) {
        if (out["fact_checks"].is_string()) {
          std::cout << std::setw(16) << "fact checks" << out["fact_checks"].get<std::string>() << '\n';
        } else {
          for (const auto& it : out["fact_checks"]) {
            std::cout << std::setw(16) << ("fact " + std::to_string(it["item"].get<int>()))
                      << it["lhs"] << " <= " << it["rhs"] << (it["pass"].get<bool>() ? "  pass" : "  FAIL") << '\n';
          }
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

int cmd_run(const std::string& config_path, int trials, long long seed, const std::string& format,
            const std::string& out_path) {
  reprocs::ExperimentConfig cfg;
  try {
    cfg = reprocs::load_experiment_config(config_path);
    if (trials > 0) cfg.trials = trials;
    if (seed >= 0) cfg.model.seed = static_cast<std::uint64_t>(seed);
    if (format == "csv") cfg.output_format = reprocs::OutputFormat::csv;
    if (format == "json") cfg.output_format = reprocs::OutputFormat::json;
    if (!out_path.empty()) cfg.output_path = out_path;
    if (cfg.output_path.empty()) throw std::invalid_argument("no output path (set output_path or --out)");
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    const reprocs::RunResult res = reprocs::run_experiment(cfg);
    reprocs::write_records(res, cfg.output_path, cfg.output_format);
    const auto& ag = res.aggregate;
    std::cout << "trials ok " << ag.trials_ok << ", failed " << ag.trials_failed << '\n';
    std::cout << "exact support rate " << ag.support_exact_rate << '\n';
    for (const auto& p : ag.pcp) {
      std::cout << "pcp t=" << p.checkpoint << " s_err_rel=" << p.s_err_rel_last << '\n';
    }
    std::cout << "wrote " << res.records.size() << " records to " << cfg.output_path << '\n';
    return ag.trials_ok > 0 || cfg.trials == 0 ? kOk : kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int cmd_gen(const std::string& config_path, const std::string& out_dir, long long seed) {
  reprocs::ExperimentConfig cfg;
  try {
    cfg = reprocs::load_experiment_config(config_path);
    if (seed >= 0) cfg.model.seed = static_cast<std::uint64_t>(seed);
    cfg.model.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    std::filesystem::create_directories(out_dir);
    const reprocs::GroundTruth truth = reprocs::gen_model(cfg.model);
    reprocs::write_dump(truth, out_dir);
    std::cout << "wrote " << truth.frames() << " frames of dimension " << truth.n() << " to " << out_dir << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ReProCS online robust PCA: experiments, bounds and stream generation"};
  app.require_subcommand(1);

  std::string config_path, params_path, out_path, format;
  int trials = 0;
  long long seed = -1;

  auto* run = app.add_subcommand("run", "Run a Monte-Carlo experiment");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--trials", trials, "Override the number of trials");
  run->add_option("--seed", seed, "Override the base seed");
  run->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--out", out_path, "Output path");

  auto* bounds = app.add_subcommand("bounds", "Evaluate the guarantee quantities");
  bounds->add_option("--params", params_path, "Bound parameters (JSON)")->required();
  std::string bounds_format = "text";
  bounds->add_option("--format", bounds_format, "Output format")->check(CLI::IsMember({"text", "json"}));

  auto* gen = app.add_subcommand("gen", "Generate a synthetic stream dump");
  gen->add_option("--config", config_path, "Experiment or model config (JSON)")->required();
  gen->add_option("--out", out_path, "Output directory")->required();
  gen->add_option("--seed", seed, "Override the seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*run) return cmd_run(config_path, trials, seed, format, out_path);
  if (*bounds) return cmd_bounds(params_path, bounds_format);
  return cmd_gen(config_path, out_path, seed);
}
