#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace qfourier::stats {

/// One-sample Kolmogorov-Smirnov result against N(0, σ²).
struct GofReport {
  double ks_statistic = 0.0;
  std::size_t sample_size = 0;
  double alpha = 0.01;
  double critical_value = 0.0;
  bool pass = false;
  // context filled in by sweeps
  double theta = 0.0;
  std::size_t n = 0;
  double sigma = 0.0;
};

/// Asymptotic KS critical value √(-ln(α/2)/2)/√M (1.63/√M at α = 0.01).
double ks_critical_value(double alpha, std::size_t sample_size);

/// Exact KS distance to the N(0, σ²) CDF; σ = 0 means the point mass at 0.
GofReport ks_normal(std::span<const double> samples, double sigma, double alpha = 0.01);

/// Two-sample KS distance sup |F_x - F_y|.
double ks_two_sample(std::span<const double> x, std::span<const double> y);

struct CorrelationReport {
  double correlation = 0.0;
  double band = 0.0;  // max(0.05, 3/√M)
  std::size_t sample_size = 0;
  bool pass = false;
};

/// Pearson correlation; passes when |corr| < max(0.05, 3/√M). A constant
/// input has zero correlation with anything.
CorrelationReport independence_check(std::span<const double> re, std::span<const double> im);

/// Affine parameters matching Y to a·X + b in distribution.
struct TypeMatch {
  double a_hat = 0.0;
  double b_hat = 0.0;
  double residual = 0.0;  // two-sample KS between Y and a_hat·X + b_hat
  bool matched = false;   // a_hat > 0
};

/// Least-squares fit of Y quantiles on X quantiles over levels 5%..95%.
/// Throws DegenerateInput when X is constant (sample std <= 1e-6) and
/// InvalidArgument when either sample has fewer than 100 points.
TypeMatch match_affine_type(std::span<const double> samples_x, std::span<const double> samples_y);

struct ShiftLimit {
  bool converged = false;
  double c = 0.0;                   // estimate of lim c_k
  double final_spread = 0.0;        // sample std of the last Y_k
  double cauchy_gap = 0.0;          // max |c_i - c_j| over the trailing window
  std::optional<double> predicted;  // Y + c with Y the mean of the last Y_k
};

/// Degenerate case of the types theorem: if Y_k collapses to a constant and
/// c_k settles, Y_k + c_k converges to Y + lim c_k.
ShiftLimit degenerate_shift_limit(const std::vector<std::vector<double>>& samples_y,
                                  std::span<const double> shifts, double spread_tol = 0.05,
                                  double cauchy_tol = 1e-2);

// small helpers shared with the experiments
double mean(std::span<const double> x);
double sample_std(std::span<const double> x);
/// Type-7 empirical quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);
/// One-sided lower Wilson bound for a binomial proportion.
double wilson_lower(std::size_t successes, std::size_t trials, double z = 1.6448536269514722);

}  // namespace qfourier::stats
