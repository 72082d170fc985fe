#pragma once
// Independent reference computations used by the tests. They work from the
// defining sums with dense arrays and plain std::exp, sharing no code with the
// library beyond its value types.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace oracle {

using C = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;

inline C cis(double x) { return {std::cos(x), std::sin(x)}; }

// Innovations indexed from `first`: xi(j) = values[j - first].
struct Xi {
  std::int64_t first = 0;
  std::vector<double> values;
  double operator()(std::int64_t j) const { return values.at(static_cast<std::size_t>(j - first)); }
};

// X_k = Σ_j a_j ξ_{k-j} with a dense array a.
inline double x_value(const std::vector<double>& a, const Xi& xi, std::int64_t k) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a[j] != 0.0) s += a[j] * xi(k - static_cast<std::int64_t>(j));
  return s;
}

// S_n(θ) = Σ_{k=0}^{n-1} e^{ikθ} X_k.
inline C dft(const std::vector<double>& a, const Xi& xi, std::int64_t n, double theta) {
  C s = 0.0;
  for (std::int64_t k = 0; k < n; ++k) s += cis(k * theta) * x_value(a, xi, k);
  return s;
}

// E_0 S_n(θ) as the plain average of S_n over every Rademacher future
// ξ_1..ξ_{n-1} ∈ {±1}, with the past fixed (past[m] = ξ_{-m}).
inline C exhaustive_conditional(const std::vector<double>& a, const std::vector<double>& past, std::int64_t n,
                                double theta) {
  const std::int64_t L = static_cast<std::int64_t>(past.size()) - 1;
  const std::int64_t fut = n - 1;
  C total = 0.0;
  const std::uint64_t patterns = std::uint64_t{1} << fut;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    Xi xi;
    xi.first = -L;
    for (std::int64_t m = L; m >= 0; --m) xi.values.push_back(past[static_cast<std::size_t>(m)]);
    for (std::int64_t i = 0; i < fut; ++i) xi.values.push_back(((mask >> i) & 1) ? 1.0 : -1.0);
    total += dft(a, xi, n, theta);
  }
  return total / static_cast<double>(patterns);
}

// ζ_{-k}(θ) = Σ_{j=0}^{k} e^{-ijθ} ξ_{-j}.
inline C zeta(const std::vector<double>& past, std::int64_t k, double theta) {
  C s = 0.0;
  for (std::int64_t j = 0; j <= k; ++j) s += cis(-j * theta) * past[static_cast<std::size_t>(j)];
  return s;
}

// f(θ) = Σ a_j e^{ijθ}.
inline C transfer(const std::vector<double>& a, double theta) {
  C s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * cis(static_cast<double>(j) * theta);
  return s;
}

// Random sparse finite filter with support inside [0, max_index].
inline std::map<std::uint64_t, double> random_support(std::mt19937_64& rng, std::size_t count,
                                                      std::uint64_t max_index) {
  std::uniform_int_distribution<std::uint64_t> idx(0, max_index);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  std::map<std::uint64_t, double> out;
  while (out.size() < count) {
    double v = val(rng);
    if (v == 0.0) continue;
    out[idx(rng)] = v;
  }
  return out;
}

inline std::vector<double> dense(const std::map<std::uint64_t, double>& sparse) {
  std::vector<double> a(sparse.empty() ? 0 : sparse.rbegin()->first + 1, 0.0);
  for (const auto& [j, v] : sparse) a[j] = v;
  return a;
}

}  // namespace oracle
