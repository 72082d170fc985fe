#include "qfourier/linear_process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qfourier/error.hpp"

namespace qfourier {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kExpansionTol = 1e-10;
}  // namespace

double canonical_angle(double theta) {
  if (!std::isfinite(theta)) throw Error(ErrorCode::InvalidArgument, "theta must be finite");
  double t = std::fmod(theta, kTwoPi);
  if (t < 0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

bool is_special_angle(double theta) {
  const double t = canonical_angle(theta);
  return t == 0.0 || std::abs(t - std::numbers::pi) < 1e-12;
}

bool close_relative(Complex a, Complex b, double tol) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

// --- CoefficientSeq ---------------------------------------------------------

CoefficientSeq::CoefficientSeq(std::vector<std::uint64_t> support, std::vector<double> values,
                               std::vector<Block> blocks)
    : support_(std::move(support)), values_(std::move(values)), blocks_(std::move(blocks)) {
  if (support_.size() != values_.size())
    throw Error(ErrorCode::InvalidArgument, "support and values differ in length");
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (i > 0 && support_[i] <= support_[i - 1])
      throw Error(ErrorCode::InvalidArgument, "support must be strictly increasing");
    if (!std::isfinite(values_[i]) || values_[i] == 0.0)
      throw Error(ErrorCode::InvalidArgument,
                  "coefficient at index " + std::to_string(support_[i]) + " must be finite and nonzero");
  }
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (b > 0 && blocks_[b].n_k <= blocks_[b - 1].n_k)
      throw Error(ErrorCode::InvalidArgument, "block indices n_k must be strictly increasing");
    if (b > 0 && blocks_[b].k != blocks_[b - 1].k + 1)
      throw Error(ErrorCode::InvalidArgument, "block stages must be consecutive");
    if (coefficient(blocks_[b].n_k) != blocks_[b].a)
      throw Error(ErrorCode::InvalidArgument,
                  "block k=" + std::to_string(blocks_[b].k) + " disagrees with the support");
  }
}

CoefficientSeq CoefficientSeq::from_dense(std::span<const double> dense) {
  std::vector<std::uint64_t> support;
  std::vector<double> values;
  for (std::size_t j = 0; j < dense.size(); ++j) {
    if (dense[j] != 0.0) {
      support.push_back(j);
      values.push_back(dense[j]);
    }
  }
  return CoefficientSeq(std::move(support), std::move(values));
}

CoefficientSeq CoefficientSeq::identity() { return CoefficientSeq({0}, {1.0}); }

double CoefficientSeq::coefficient(std::uint64_t j) const {
  const auto it = std::lower_bound(support_.begin(), support_.end(), j);
  if (it == support_.end() || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - support_.begin())];
}

double CoefficientSeq::l2_norm_squared() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

// --- ThetaGrid --------------------------------------------------------------

ThetaGrid::ThetaGrid(std::vector<double> points) : points_(std::move(points)) {
  for (double& p : points_) p = canonical_angle(p);
  std::sort(points_.begin(), points_.end());
  points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
}

ThetaGrid ThetaGrid::equispaced(std::size_t count) {
  std::vector<double> pts;
  for (std::size_t i = 0; i < count; ++i) pts.push_back(kTwoPi * static_cast<double>(i) / count);
  pts.push_back(0.0);
  if (count % 2 != 0 || count == 0) pts.push_back(std::numbers::pi);
  return ThetaGrid(std::move(pts));
}

ThetaGrid ThetaGrid::interior(std::size_t count) {
  std::vector<double> pts;
  for (std::size_t i = 0; i < count; ++i)
    pts.push_back(kTwoPi * (static_cast<double>(i) + 0.5) / count);
  return ThetaGrid(std::move(pts));
}

bool ThetaGrid::is_special(std::size_t i) const { return is_special_angle(points_.at(i)); }

// --- transforms -------------------------------------------------------------

PartialSums::PartialSums(const CoefficientSeq& coeffs, double theta)
    : support_(coeffs.support().begin(), coeffs.support().end()) {
  const double t = canonical_angle(theta);
  prefix_.reserve(support_.size() + 1);
  prefix_.emplace_back(0.0, 0.0);
  const auto values = coeffs.values();
  for (std::size_t i = 0; i < support_.size(); ++i)
    prefix_.push_back(prefix_.back() + values[i] * unit_phase(static_cast<double>(support_[i]) * t));
}

Complex PartialSums::at(std::int64_t k) const {
  if (k <= 0) return {0.0, 0.0};
  const auto idx =
      std::lower_bound(support_.begin(), support_.end(), static_cast<std::uint64_t>(k)) -
      support_.begin();
  return prefix_[static_cast<std::size_t>(idx)];
}

Complex f_partial(const CoefficientSeq& coeffs, std::int64_t k, double theta) {
  return PartialSums(coeffs, theta).at(k);
}

Complex transfer_fn(const CoefficientSeq& coeffs, double theta) {
  return PartialSums(coeffs, theta).full();
}

double process_value(const CoefficientSeq& coeffs, const InnovationWindow& window, std::int64_t k) {
  const auto support = coeffs.support();
  const auto values = coeffs.values();
  double x = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i)
    x += values[i] * window.at(k - static_cast<std::int64_t>(support[i]));
  return x;
}

Complex dft_direct(const CoefficientSeq& coeffs, const InnovationWindow& window, std::uint64_t n,
                   double theta) {
  const double t = canonical_angle(theta);
  Complex s{0.0, 0.0};
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto ki = static_cast<std::int64_t>(k);
    s += unit_phase(static_cast<double>(k) * t) * process_value(coeffs, window, ki);
  }
  return s;
}

WalkExpansions dft_expansions(const CoefficientSeq& coeffs, const InnovationWindow& window,
                              std::uint64_t n, double theta) {
  const double t = canonical_angle(theta);
  const auto nn = static_cast<std::int64_t>(n);
  const auto lag = static_cast<std::int64_t>(coeffs.max_index());
  if (n > 0 && !coeffs.empty()) {
    if (window.first_index() > -lag) throw WindowTooShort(-lag);
    if (window.last_index() < nn - 1) throw WindowTooShort(nn - 1);
  }

  WalkExpansions out{{0.0, 0.0}, {0.0, 0.0}};
  if (n == 0 || coeffs.empty()) return out;

  const PartialSums f(coeffs, t);
  for (std::int64_t j = -lag; j < nn; ++j) {
    const Complex weight = f.at(nn - j) - f.at(-j);
    if (weight == Complex{0.0, 0.0}) continue;
    out.by_partial_sums += weight * window.at(j) * unit_phase(static_cast<double>(j) * t);
  }

  const auto support = coeffs.support();
  const auto values = coeffs.values();
  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto k = static_cast<std::int64_t>(support[i]);
    Complex inner{0.0, 0.0};
    for (std::int64_t j = 0; j < nn; ++j)
      inner += unit_phase(static_cast<double>(j) * t) * window.at(j - k);
    out.by_coefficients += values[i] * inner;
  }
  return out;
}

Complex dft_by_walks(const CoefficientSeq& coeffs, const InnovationWindow& window, std::uint64_t n,
                     double theta) {
  const WalkExpansions e = dft_expansions(coeffs, window, n, theta);
  if (!close_relative(e.by_partial_sums, e.by_coefficients, kExpansionTol))
    throw Error(ErrorCode::InternalMismatch, "S_n expansions disagree");
  return e.by_partial_sums;
}

}  // namespace qfourier
