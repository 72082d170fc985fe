#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qfourier/innovations.hpp"

namespace qfourier {

using Complex = std::complex<double>;

/// Maps any angle to [0, 2π).
double canonical_angle(double theta);

/// e^{i·angle} by direct trigonometric evaluation.
inline Complex unit_phase(double angle) { return std::polar(1.0, angle); }

/// One stage of the block structure produced by the counterexample builder.
struct Block {
  int k = 0;
  std::uint64_t n_k = 0;
  double a = 0.0;

  bool operator==(const Block&) const = default;
};

/// Sparse, finitely supported causal filter (a_j).
///
/// Only nonzero coefficients are stored. Indices are strictly increasing and
/// nonnegative. When `blocks` is present every block index n_k is in the support
/// with the recorded value.
class CoefficientSeq {
 public:
  CoefficientSeq() = default;
  CoefficientSeq(std::vector<std::uint64_t> support, std::vector<double> values,
                 std::vector<Block> blocks = {});

  /// Builds from a dense array a_0, a_1, ...; zero entries are dropped.
  static CoefficientSeq from_dense(std::span<const double> dense);
  /// a_0 = 1, all else zero.
  static CoefficientSeq identity();

  std::span<const std::uint64_t> support() const noexcept { return support_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const Block> blocks() const noexcept { return blocks_; }
  bool has_blocks() const noexcept { return !blocks_.empty(); }
  bool empty() const noexcept { return support_.empty(); }
  std::size_t size() const noexcept { return support_.size(); }

  /// Largest support index, or 0 when empty.
  std::uint64_t max_index() const noexcept { return support_.empty() ? 0 : support_.back(); }

  /// a_j (0 off the support).
  double coefficient(std::uint64_t j) const;

  double l2_norm_squared() const;

  bool operator==(const CoefficientSeq&) const = default;

 private:
  std::vector<std::uint64_t> support_;
  std::vector<double> values_;
  std::vector<Block> blocks_;
};

/// Grid of frequencies in [0, 2π). Points equal to 0 or π are tagged special.
class ThetaGrid {
 public:
  ThetaGrid() = default;
  explicit ThetaGrid(std::vector<double> points);

  /// `count` equispaced points 2πi/count, with 0 and π added when missing.
  static ThetaGrid equispaced(std::size_t count);
  /// `count` midpoints 2π(i + 1/2)/count; contains neither 0 nor π when count is even.
  static ThetaGrid interior(std::size_t count);
  /// 64 equispaced points (0 and π included).
  static ThetaGrid default_grid() { return equispaced(64); }

  std::span<const double> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  double operator[](std::size_t i) const { return points_[i]; }
  bool is_special(std::size_t i) const;

 private:
  std::vector<double> points_;
};

bool is_special_angle(double theta);

/// Prefix sums of a_j e^{ijθ} over the support, giving f_k(θ) in O(log s).
class PartialSums {
 public:
  PartialSums(const CoefficientSeq& coeffs, double theta);

  /// f_k(θ) = Σ_{j<k} a_j e^{ijθ}, zero for k <= 0.
  Complex at(std::int64_t k) const;
  Complex full() const { return prefix_.back(); }

 private:
  std::vector<std::uint64_t> support_;
  std::vector<Complex> prefix_;
};

Complex f_partial(const CoefficientSeq& coeffs, std::int64_t k, double theta);
Complex transfer_fn(const CoefficientSeq& coeffs, double theta);

/// X_k = Σ_j a_j ξ_{k-j}.
double process_value(const CoefficientSeq& coeffs, const InnovationWindow& window, std::int64_t k);

/// S_n(θ) = Σ_{k<n} e^{ikθ} X_k.
Complex dft_direct(const CoefficientSeq& coeffs, const InnovationWindow& window, std::uint64_t n,
                   double theta);

/// The two rotated-walk expansions of S_n(θ).
struct WalkExpansions {
  /// Σ_{j<n} (f_{n-j} - f_{-j})(θ) ξ_j e^{ijθ}
  Complex by_partial_sums;
  /// Σ_k a_k Σ_{j<n} e^{ijθ} ξ_{j-k}
  Complex by_coefficients;
};

WalkExpansions dft_expansions(const CoefficientSeq& coeffs, const InnovationWindow& window,
                              std::uint64_t n, double theta);

/// S_n(θ) through the partial-sum expansion; throws InternalMismatch when the
/// coefficient expansion disagrees beyond 1e-10 (relative, floor 1).
Complex dft_by_walks(const CoefficientSeq& coeffs, const InnovationWindow& window, std::uint64_t n,
                     double theta);

/// |a - b| <= tol * max(1, |a|, |b|)
bool close_relative(Complex a, Complex b, double tol);

}  // namespace qfourier
