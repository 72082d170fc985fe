#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qfourier/counterexample.hpp"
#include "qfourier/serialization.hpp"

namespace qfourier {

inline constexpr const char* kVersion = "0.1.0";

/// How to build the θ grid: "interior" (midpoints), "equispaced" (with 0 and π)
/// or "points" (explicit list).
struct GridSpec {
  std::string kind = "equispaced";
  std::size_t count = 64;
  std::vector<double> points;

  ThetaGrid make() const;
};

/// Fully explicit experiment description. Every field has a default; the
/// effective values are echoed next to the artifacts.
struct ExperimentConfig {
  std::string command;
  Json coeffs;  // CoefficientSeq JSON, {"dense": [...]} or {"geometric": {"ratio", "max_index"}}
  std::string coeffs_file;
  InnovationLaw law = InnovationLaw::Rademacher;
  GridSpec grid;
  std::vector<std::uint64_t> n{4096};
  std::size_t M = 10000;
  std::size_t past_depth = 0;  // 0: max(64, largest support index)
  std::uint64_t seed = 1;

  // verify-clt
  double alpha = 0.01;
  double pass_fraction = 0.9;
  bool write_ensemble = true;

  // build-counterexample
  int k_max = 3;
  double base = 1.3;
  LambdaMode lambda_mode = LambdaMode::Deterministic;
  std::size_t probe_replicates = 200;
  std::size_t lambda_replicates = 400;
  std::uint64_t max_n = std::uint64_t{1} << 22;
  std::size_t verify_replicates = 200;
  std::size_t bk_replicates = 1000;

  // diverge-report
  std::size_t pasts = 20;
  std::uint64_t n_max = 0;  // 0: last block index, or 2^20 without blocks
  std::string expect;       // "", "diverges", "bounded" or "converges"
};

ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);

/// Resolves the coefficient source of a config (inline or file).
CoefficientSeq resolve_coeffs(const ExperimentConfig& cfg);

struct CommandResult {
  int exit_code = 0;
  Json summary;
};

/// Quenched CLT sweep. Exit 0 iff the pass fraction over non-exceptional grid
/// points (θ not in {0, π}) reaches cfg.pass_fraction.
CommandResult cmd_verify_clt(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Runs the block construction, persists sequence and log, verifies each stage.
/// Exit 0 iff every stage report passes; 2 when the n_k search runs out of budget.
CommandResult cmd_build_counterexample(const ExperimentConfig& cfg,
                                       const std::filesystem::path& out_dir);

/// Trajectories of |E_0 S_n(θ)|/√n over frozen pasts with limit verdicts.
CommandResult cmd_diverge_report(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Dispatches on cfg.command ("verify-clt", "build-counterexample", "diverge-report").
CommandResult run_command(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace qfourier
