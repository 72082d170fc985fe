#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "qfourier/innovations.hpp"
#include "qfourier/linear_process.hpp"

namespace qfourier {

/// Generates e^{sign·ikθ} for k = 0, 1, 2, ... by complex recurrence.
///
/// The recurrence is resynchronised with direct evaluation every kResync steps,
/// which keeps the drift below 1e-12 for k up to 1e7.
class PhaseStepper {
 public:
  static constexpr std::uint64_t kResync = 64;

  explicit PhaseStepper(double theta, int sign = -1);

  Complex current() const noexcept { return current_; }
  std::uint64_t index() const noexcept { return index_; }
  void advance();

 private:
  double angle_;
  Complex step_;
  Complex current_{1.0, 0.0};
  std::uint64_t index_ = 0;
};

/// ζ_{-k}(θ) = Σ_{j<=k} e^{-ijθ} ξ_{-j} maintained over a θ grid.
///
/// Each extend() consumes the next past innovation (ξ_0 first, then ξ_{-1}, ...).
/// Snapshots are kept only at registered checkpoint depths.
class ZetaLadder {
 public:
  explicit ZetaLadder(ThetaGrid grid);

  const ThetaGrid& grid() const noexcept { return grid_; }
  /// Current k, or -1 before the first extend().
  std::int64_t depth() const noexcept { return depth_; }
  std::span<const Complex> values() const noexcept { return values_; }

  void extend(double xi_next);

  /// Registers a depth to snapshot; must not be below the next depth.
  void add_checkpoint(std::uint64_t k);
  /// Snapshot at depth k, empty when k was not recorded.
  std::span<const Complex> checkpoint(std::uint64_t k) const;

 private:
  ThetaGrid grid_;
  std::int64_t depth_ = -1;
  std::vector<Complex> values_;
  std::map<std::uint64_t, std::vector<Complex>> checkpoints_;
};

/// Value-returning form of ZetaLadder::extend.
ZetaLadder zeta_extend(ZetaLadder ladder, double xi_next);

/// ζ_{-m}(θ) for m = 0, ..., back.size() - 1, where back = ξ_0, ξ_{-1}, ...
std::vector<Complex> zeta_path(std::span<const double> back, double theta);

/// Both closed forms of E_0 S_n(θ).
struct ConditionalForms {
  /// Σ_j a_j (ζ_{-j} - ζ_{-j+n})(θ) e^{ijθ}
  Complex by_zeta;
  /// Σ_{j<=0} ξ_j (f_{-j+n} - f_{-j})(θ) e^{ijθ}
  Complex by_partial_sums;
};

ConditionalForms conditional_dft_forms(const CoefficientSeq& coeffs, const FrozenPast& past,
                                       std::uint64_t n, double theta);

/// E_0 S_n(θ) from the frozen past via the ζ form, cross-checked against the
/// partial-sum form. Throws PastTooShallow or InternalMismatch.
Complex conditional_dft(const CoefficientSeq& coeffs, const FrozenPast& past, std::uint64_t n,
                        double theta);

/// E_0 S_n(θ) for arbitrary n from one past and one θ, O(support) per query.
class ProjectionPath {
 public:
  ProjectionPath(const CoefficientSeq& coeffs, const FrozenPast& past, double theta);

  Complex at(std::uint64_t n) const;
  Complex zeta(std::uint64_t m) const { return zeta_[m]; }
  double theta() const noexcept { return theta_; }

 private:
  double theta_;
  std::vector<std::uint64_t> support_;
  std::vector<Complex> weights_;  // a_j e^{ijθ}
  std::vector<Complex> zeta_;
  Complex total_{0.0, 0.0};
};

/// A_k + B_k split of E_0 S_n(θ) for block-structured sequences.
struct ProjectionSplit {
  Complex head;   // A_k: blocks 0..k
  Complex tail;   // B_k: blocks k+1..
  Complex total;  // E_0 S_n(θ)
};

/// Requires every support index to be a block index. Throws InternalMismatch
/// when head + tail differs from E_0 S_n(θ) by more than 1e-10.
ProjectionSplit split_projection(const CoefficientSeq& coeffs, const FrozenPast& past, int stage,
                                 std::uint64_t n, double theta);

/// One frozen past with M independent futures.
struct QuenchedEnsemble {
  FrozenPast past;
  InnovationLaw law;
  std::size_t replicates = 0;
  std::uint64_t horizon = 0;
  ThetaGrid grid;
  std::vector<Complex> conditional;  // E_0 S_n per grid point
  std::vector<Complex> S, Y, Z;      // index replicate * grid.size() + g

  std::size_t slot(std::size_t replicate, std::size_t g) const { return replicate * grid.size() + g; }
  std::vector<double> real_y(std::size_t g) const;
  std::vector<double> imag_y(std::size_t g) const;
};

/// Draws M futures over `past` (seed role "future", replicate r) and stores
/// S_n, Y_n = (S_n - E_0S_n)/√n and Z_n = S_n/√n per replicate and grid point.
QuenchedEnsemble quenched_sample(const CoefficientSeq& coeffs, const FrozenPast& past,
                                 InnovationLaw law, std::uint64_t n, const ThetaGrid& grid,
                                 std::size_t replicates, const SeedSpec& seed);

/// σ_θ² = |f(θ)|²/2 for unit-variance innovations.
double sigma_theta_squared(const CoefficientSeq& coeffs, double theta);
/// (1/2n) Σ_{j=1}^{n-1} |f_j(θ)|², the finite-n conditional variance per component.
double sigma_theta_squared_cesaro(const CoefficientSeq& coeffs, double theta, std::uint64_t n);

enum class Verdict { ConvergesTo, Diverges, Undecided };
std::string_view to_string(Verdict v);

struct LimitDiagnosis {
  Verdict verdict = Verdict::Undecided;
  Complex limit{0.0, 0.0};
  std::vector<std::uint64_t> schedule;
  std::vector<Complex> normalized;   // E_0 S_n / √n at schedule points
  std::vector<double> running_max;   // max_{m<=n} |E_0 S_m| / √m at schedule points
};

/// Converges-to L when the last five schedule values lie within a band of
/// width 1e-2 around their mean; diverges when the running max at the last
/// point is at least twice the running max at the last point <= n/8.
LimitDiagnosis limit_diagnosis(const CoefficientSeq& coeffs, const FrozenPast& past, double theta,
                               std::span<const std::uint64_t> schedule);

/// max over m0 <= m <= n of |ζ_{-m}(θ)| / √(m log log m), with m0 = 16.
double lil_statistic(std::span<const double> back, double theta);

}  // namespace qfourier
