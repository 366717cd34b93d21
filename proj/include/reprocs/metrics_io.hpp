#pragma once

#include "reprocs/baseline_pcp.hpp"
#include "reprocs/reprocs.hpp"
#include "reprocs/signal_model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace reprocs {

enum class OutputFormat { csv, json };

/// Algorithm settings as configured; unset xi/omega/K are derived from the
/// theory formulas using zeta and the model parameters.
struct AlgoConfig {
  std::optional<double> xi;
  std::optional<double> omega;
  std::optional<Index> K;
  Index alpha = 25;
  double zeta = 1e-6;
  bool ar_whitening = false;
  BpdnSettings bpdn;
};

struct ExperimentConfig {
  ModelConfig model;
  AlgoConfig algo;
  Index trials = 1;
  std::vector<Index> pcp_checkpoints;
  PcpSettings pcp;
  std::string output_path;
  OutputFormat output_format = OutputFormat::csv;
  /// Worker threads for trials; 0 picks the hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

/// ReprocsParams for a model: change times, r0 and c come from the model.
ReprocsParams resolve_params(const AlgoConfig& algo, const ModelConfig& model);

struct FrameRecord {
  Index trial = 0;
  Index t = 0;
  double s_err_rel = 0.0;
  double l_err = 0.0;
  double se = 0.0;
  bool support_exact = false;
  /// SE of the old-subspace estimate used at t.
  double zeta_star = 0.0;
  /// Unestimated fraction of the newest directions; NaN before the first change.
  double zeta_k = 0.0;
  /// Relative mismatch between the realized error and its closed form;
  /// NaN when the support is not exact.
  double eq3_rel_err = 0.0;
  bool converged = true;
  bool ill_conditioned = false;
};

struct PcpRecord {
  Index trial = 0;
  Index checkpoint = 0;
  /// Normalized sparse error of column tau.
  double s_err_rel_last = 0.0;
  /// Mean normalized sparse error over the evaluation columns up to tau.
  double s_err_rel_mean = 0.0;
  double l_err_rel = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FrameAggregate {
  Index t = 0;
  double s_err_rel = 0.0;
  double l_err = 0.0;
  double se = 0.0;
  double support_exact_rate = 0.0;

  bool operator==(const FrameAggregate&) const = default;
};

struct PcpAggregate {
  Index checkpoint = 0;
  double s_err_rel_last = 0.0;
  double s_err_rel_mean = 0.0;
  double l_err_rel = 0.0;

  bool operator==(const PcpAggregate&) const = default;
};

struct Aggregate {
  Index trials_ok = 0;
  Index trials_failed = 0;
  double support_exact_rate = 0.0;
  std::uint64_t bpdn_nonconverged = 0;
  std::uint64_t ill_conditioned = 0;
  std::vector<FrameAggregate> frames;
  std::vector<PcpAggregate> pcp;

  bool operator==(const Aggregate&) const = default;
};

struct RunResult {
  std::vector<FrameRecord> records;
  std::vector<PcpRecord> pcp;
  Aggregate aggregate;
  std::vector<std::string> errors;
};

/// Metrics of one frame given the algorithm's estimate.
FrameRecord frame_metrics(const GroundTruth& truth, Index t, const FrameEstimate& fe,
                          const BasisMatrix& basis_after);

RunResult run_experiment(const ExperimentConfig& config);

/// Arithmetic means across trials of the per-frame records.
Aggregate aggregate(const std::vector<FrameRecord>& records, const std::vector<PcpRecord>& pcp,
                    Index trials_ok, Index trials_failed);

void write_records(const RunResult& result, const std::string& path, OutputFormat format);

/// Parses the `aggregate` object of a JSON result file.
Aggregate read_aggregate_json(const std::string& path);

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);

}  // namespace reprocs
