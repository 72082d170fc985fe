#include "qfourier/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qfourier/error.hpp"

namespace qfourier::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_std(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double wilson_lower(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return 0.0;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = p + z2 / (2 * n);
  const double spread = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return std::max(0.0, (centre - spread) / (1 + z2 / n));
}

double ks_critical_value(double alpha, std::size_t sample_size) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be in (0,1)");
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(sample_size));
}

GofReport ks_normal(std::span<const double> samples, double sigma, double alpha) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "KS test on an empty sample");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");

  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double m = static_cast<double>(x.size());

  double d = 0.0;
  if (sigma == 0.0) {
    const auto neg = std::lower_bound(x.begin(), x.end(), 0.0) - x.begin();
    const auto nonpos = std::upper_bound(x.begin(), x.end(), 0.0) - x.begin();
    d = std::max(static_cast<double>(neg) / m, (m - static_cast<double>(nonpos)) / m);
  } else {
    const double scale = 1.0 / (sigma * std::numbers::sqrt2);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double cdf = 0.5 * std::erfc(-x[i] * scale);
      d = std::max({d, static_cast<double>(i + 1) / m - cdf, cdf - static_cast<double>(i) / m});
    }
  }

  GofReport r;
  r.ks_statistic = std::clamp(d, 0.0, 1.0);
  r.sample_size = x.size();
  r.alpha = alpha;
  r.critical_value = ks_critical_value(alpha, x.size());
  r.pass = r.ks_statistic < r.critical_value;
  r.sigma = sigma;
  return r;
}

double ks_two_sample(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) throw Error(ErrorCode::InvalidArgument, "KS test on an empty sample");
  std::vector<double> x(xs.begin(), xs.end()), y(ys.begin(), ys.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

CorrelationReport independence_check(std::span<const double> re, std::span<const double> im) {
  if (re.size() != im.size())
    throw Error(ErrorCode::InvalidArgument, "independence check needs equal-length samples");
  if (re.size() < 2) throw Error(ErrorCode::InvalidArgument, "independence check needs M >= 2");

  const double mx = mean(re), my = mean(im);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < re.size(); ++i) {
    sxy += (re[i] - mx) * (im[i] - my);
    sxx += (re[i] - mx) * (re[i] - mx);
    syy += (im[i] - my) * (im[i] - my);
  }
  CorrelationReport r;
  r.sample_size = re.size();
  r.correlation = (sxx > 0.0 && syy > 0.0) ? std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0) : 0.0;
  r.band = std::max(0.05, 3.0 / std::sqrt(static_cast<double>(re.size())));
  r.pass = std::abs(r.correlation) < r.band;
  return r;
}

TypeMatch match_affine_type(std::span<const double> samples_x, std::span<const double> samples_y) {
  constexpr std::size_t kMinSamples = 100;
  if (samples_x.size() < kMinSamples || samples_y.size() < kMinSamples)
    throw Error(ErrorCode::InvalidArgument, "affine type matching needs at least 100 samples each");
  if (sample_std(samples_x) <= 1e-6)
    throw Error(ErrorCode::DegenerateInput,
                "X is constant; its affine type cannot be recovered from a constant limit");

  std::vector<double> x(samples_x.begin(), samples_x.end()), y(samples_y.begin(), samples_y.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());

  // quantile levels 0.05, 0.06, ..., 0.95
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  constexpr int kLevels = 91;
  for (int i = 0; i < kLevels; ++i) {
    const double p = 0.05 + 0.01 * i;
    const double qx = quantile_sorted(x, p), qy = quantile_sorted(y, p);
    sx += qx;
    sy += qy;
    sxx += qx * qx;
    sxy += qx * qy;
  }
  const double n = kLevels;
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw Error(ErrorCode::DegenerateInput, "X quantiles are constant over 5%-95%");

  TypeMatch t;
  t.a_hat = (n * sxy - sx * sy) / denom;
  t.b_hat = (sy - t.a_hat * sx) / n;
  std::vector<double> mapped(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mapped[i] = t.a_hat * x[i] + t.b_hat;
  t.residual = ks_two_sample(y, mapped);
  t.matched = t.a_hat > 0.0;
  return t;
}

ShiftLimit degenerate_shift_limit(const std::vector<std::vector<double>>& samples_y,
                                  std::span<const double> shifts, double spread_tol,
                                  double cauchy_tol) {
  if (samples_y.size() != shifts.size() || shifts.empty())
    throw Error(ErrorCode::InvalidArgument, "need one shift per sample array");
  for (const auto& s : samples_y)
    if (s.empty()) throw Error(ErrorCode::InvalidArgument, "empty Y_k sample");

  ShiftLimit out;
  const std::size_t window = std::max<std::size_t>(2, shifts.size() / 4);
  const auto tail = shifts.last(std::min(window, shifts.size()));
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  out.cauchy_gap = *hi - *lo;
  out.final_spread = sample_std(samples_y.back());
  const double first_spread = sample_std(samples_y.front());
  out.c = shifts.back();

  const bool collapsed = out.final_spread <= spread_tol && out.final_spread <= first_spread + 1e-12;
  const bool settled = shifts.size() >= 2 && out.cauchy_gap <= cauchy_tol;
  out.converged = collapsed && settled;
  if (out.converged) out.predicted = mean(samples_y.back()) + out.c;
  return out;
}

}  // namespace qfourier::stats
