#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qfourier/error.hpp"
#include "qfourier/innovations.hpp"
#include "qfourier/linear_process.hpp"

namespace qfourier {

enum class LambdaMode { Deterministic, McQuantile };
std::string_view to_string(LambdaMode mode);
LambdaMode parse_lambda_mode(std::string_view name);

/// Parameters of the inductive block construction.
///
/// `base` plays the role of 2 in both the thresholds base^k and the
/// probability targets base^{-(k+1)}, base^{-(k+2)}.
struct ConstructionParams {
  int k_max = 3;
  ThetaGrid grid = ThetaGrid::default_grid();
  double base = 1.3;
  InnovationLaw law = InnovationLaw::Rademacher;
  LambdaMode lambda_mode = LambdaMode::Deterministic;
  std::size_t probe_replicates = 200;   // walks per θ when searching n_k
  std::size_t lambda_replicates = 400;  // pasts for the mc-quantile λ
  double lambda_safety = 1.1;
  std::uint64_t max_n = std::uint64_t{1} << 22;  // search budget for n_k
  double confidence_z = 1.6448536269514722;      // one-sided 95% Wilson

  void validate() const;
};

struct StageRecord {
  int k = 0;
  double lambda = 0.0;
  std::uint64_t n_k = 0;
  double a = 0.0;
  double tau = 0.0;     // (λ_k + base^{k+1}) / a_{n_{k-1}}
  double target = 0.0;  // 1 - base^{-(k+1)}
  std::vector<double> success;               // per θ, empirical hit fraction at n_k
  std::vector<std::uint64_t> per_theta_n;    // per θ minimal passing N
  double min_success_lower = 0.0;            // min over θ of the Wilson lower bound
  std::size_t probe_samples = 0;
  double wall_clock_seconds = 0.0;           // diagnostic only, never persisted
};

struct ConstructionLog {
  double base = 2.0;
  LambdaMode lambda_mode = LambdaMode::Deterministic;
  InnovationLaw law = InnovationLaw::Rademacher;
  std::vector<double> grid;
  std::vector<StageRecord> stages;
  double tail_l2_bound = 0.0;  // bound on Σ a_j² over stages beyond the last one
};

struct BuildResult {
  CoefficientSeq coeffs;
  ConstructionLog log;
};

/// Raised when no N <= max_n satisfies the stage probability on every grid θ.
class SearchBudgetExhausted : public Error {
 public:
  SearchBudgetExhausted(int stage, std::uint64_t largest_probed, double worst_theta, double best_lower,
                        double target);

  int stage() const noexcept { return stage_; }
  std::uint64_t largest_probed() const noexcept { return largest_probed_; }
  double worst_theta() const noexcept { return worst_theta_; }
  double best_lower_bound() const noexcept { return best_lower_; }

  /// Partial construction up to the last completed stage.
  BuildResult partial;

 private:
  int stage_;
  std::uint64_t largest_probed_;
  double worst_theta_;
  double best_lower_;
};

/// λ_k such that |Σ_{j=1}^{k-1} a_{n_j} e^{i n_j θ} ζ_{-n_j}(θ)| exceeds it with
/// probability at most base^{-(k+2)}. Deterministic mode (Rademacher only)
/// returns the sure bound Σ_{j=1}^{k-1} |a_{n_j}| (n_j + 1).
double choose_lambda(int k, std::span<const Block> blocks, const ConstructionParams& params,
                     const SeedSpec& seed);

struct ChooseNResult {
  std::uint64_t n = 0;
  std::vector<std::uint64_t> per_theta_n;
  std::vector<double> success;        // hit fraction at n per θ
  std::vector<double> success_lower;  // Wilson lower bound at n per θ
  std::size_t worst_index = 0;
};

/// Smallest probed N > n_prev such that for every grid θ the Wilson lower
/// bound of P(max_{n_prev < n <= N} |ζ_{-n}(θ)|/√n >= τ) is at least
/// 1 - base^{-(k+1)}. Doubling then bisection; throws SearchBudgetExhausted.
ChooseNResult choose_n(int k, double tau, std::uint64_t n_prev, const ConstructionParams& params,
                       const SeedSpec& seed);

/// Runs stages 1..k_max starting from n_0 = 1, a_1 = 1/2, λ_0 = 0.
BuildResult build(const ConstructionParams& params, const SeedSpec& seed);

/// Violations of the log invariants (empty when consistent).
std::vector<std::string> check_log(const ConstructionLog& log);

/// Monte Carlo tail report for B_k(n, θ) over the block (n_{k-1}, n_k].
struct BkThetaReport {
  double theta = 0.0;
  double mean_max = 0.0;
  double mean_se = 0.0;
  double tail_prob = 0.0;  // P(max |B_k| >= base^k)
  double tail_se = 0.0;
  bool mean_ok = false;    // mean_max <= doob_bound + 3 se
  bool markov_ok = false;  // tail_prob <= markov_bound + 3 se
  bool tail_ok = false;    // tail_prob <= base^{-(k+2)} + 3 se
};

struct BkReport {
  int k = 0;
  double base = 2.0;
  std::size_t replicates = 0;
  bool truncated = false;        // no stages beyond k: B_k ≡ 0
  double doob_bound = 0.0;       // 2 √n_k Σ_{j>k} a_{n_j}
  double geometric_bound = 0.0;  // 2 base^{-k} / (base - 1)
  double markov_bound = 0.0;     // doob_bound / base^k
  double tail_target = 0.0;      // base^{-(k+2)}
  std::vector<BkThetaReport> per_theta;
  bool pass = false;
};

BkReport bound_Bk(const CoefficientSeq& coeffs, int k, const ThetaGrid& grid, InnovationLaw law,
                  std::size_t replicates, double base, const SeedSpec& seed);

/// Per θ fraction of pasts with max_{n_lo < n <= n_hi} |E_0 S_n(θ)|/√n >= threshold.
std::vector<double> block_exceedance(const CoefficientSeq& coeffs, std::span<const FrozenPast> pasts,
                                     const ThetaGrid& grid, std::uint64_t n_lo, std::uint64_t n_hi,
                                     double threshold);

struct StageThetaReport {
  double theta = 0.0;
  double frequency = 0.0;       // max |E_0 S_n|/√n >= base^k
  double head_frequency = 0.0;  // max |A_k|/√n >= 2 base^k
  double tail_frequency = 0.0;  // max |B_k| >= base^k
  bool pass = false;
};

struct StageReport {
  int k = 0;
  double threshold = 0.0;          // 1 - 2 base^{-(k+1)}
  std::size_t pasts = 0;
  std::vector<StageThetaReport> per_theta;
  bool decomposition_consistent = false;  // frequency >= head - tail on every θ
  bool pass = false;
};

StageReport verify_stage(const CoefficientSeq& coeffs, const ConstructionLog& log, int k,
                         std::span<const FrozenPast> pasts);
StageReport verify_stage(const CoefficientSeq& coeffs, const ConstructionLog& log, int k,
                         std::size_t replicates, const SeedSpec& seed);

}  // namespace qfourier
