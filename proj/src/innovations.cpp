#include "qfourier/innovations.hpp"

#include <cmath>
#include <numbers>

#include "qfourier/error.hpp"

namespace qfourier {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t derive_key(InnovationLaw law, const SeedSpec& seed) {
  std::uint64_t h = mix64(seed.master + kGolden);
  h = mix64(h ^ fnv1a(seed.role));
  h = mix64(h ^ (seed.replicate + 2 * kGolden));
  h = mix64(h ^ (seed.block + 3 * kGolden));
  return mix64(h ^ static_cast<std::uint64_t>(law));
}

inline std::uint64_t counter_bits(std::uint64_t key, std::uint64_t counter) {
  return mix64(key + (counter + 1) * kGolden);
}

// uniform in (0, 1)
inline double open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::string_view to_string(InnovationLaw law) {
  switch (law) {
    case InnovationLaw::Rademacher:
      return "rademacher";
    case InnovationLaw::StandardNormal:
      return "normal";
  }
  return "unknown";
}

InnovationLaw parse_law(std::string_view name) {
  if (name == "rademacher") return InnovationLaw::Rademacher;
  if (name == "normal" || name == "standard_normal" || name == "gaussian")
    return InnovationLaw::StandardNormal;
  throw Error(ErrorCode::InvalidArgument, "unknown innovation law '" + std::string(name) + "'");
}

InnovationStream::InnovationStream(InnovationLaw law, const SeedSpec& seed)
    : law_(law), key_(derive_key(law, seed)) {}

double InnovationStream::at(std::uint64_t index) const {
  if (law_ == InnovationLaw::Rademacher) {
    const std::uint64_t bits = counter_bits(key_, index >> 6);
    return ((bits >> (index & 63)) & 1U) ? 1.0 : -1.0;
  }
  // Box-Muller on two counter slots, cosine branch only.
  const double u1 = open_unit(counter_bits(key_, 2 * index));
  const double u2 = open_unit(counter_bits(key_, 2 * index + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void InnovationStream::fill(std::span<double> out, std::uint64_t first) const {
  if (law_ != InnovationLaw::Rademacher) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(first + i);
    return;
  }
  std::uint64_t word_index = first >> 6;
  std::uint64_t bits = counter_bits(key_, word_index);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint64_t idx = first + i;
    if ((idx >> 6) != word_index) {
      word_index = idx >> 6;
      bits = counter_bits(key_, word_index);
    }
    out[i] = ((bits >> (idx & 63)) & 1U) ? 1.0 : -1.0;
  }
}

FrozenPast::FrozenPast(InnovationLaw law, std::vector<double> values)
    : law_(law), values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::InvalidArgument, "frozen past needs at least xi_0");
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite past innovation");
    if (law_ == InnovationLaw::Rademacher && v != 1.0 && v != -1.0)
      throw Error(ErrorCode::InvalidArgument, "Rademacher past must contain only +-1");
  }
}

FrozenPast draw_past(InnovationLaw law, std::size_t depth, const SeedSpec& seed) {
  std::vector<double> values(depth + 1);
  InnovationStream(law, seed).fill(values);
  return FrozenPast(law, std::move(values));
}

std::vector<double> draw_future(InnovationLaw law, std::uint64_t horizon, const SeedSpec& seed) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "future horizon must be >= 1");
  std::vector<double> values(horizon - 1);
  InnovationStream(law, seed).fill(values);
  return values;
}

InnovationWindow::InnovationWindow(std::int64_t first_index, std::vector<double> values)
    : first_(first_index), values_(std::move(values)) {}

InnovationWindow InnovationWindow::join(const FrozenPast& past, std::span<const double> future) {
  const std::size_t depth = past.depth();
  std::vector<double> values;
  values.reserve(depth + 1 + future.size());
  for (std::size_t m = depth + 1; m-- > 0;) values.push_back(past.back(m));
  values.insert(values.end(), future.begin(), future.end());
  return InnovationWindow(-static_cast<std::int64_t>(depth), std::move(values));
}

double InnovationWindow::at(std::int64_t index) const {
  if (index < first_ || index > last_index()) throw WindowTooShort(index);
  return values_[static_cast<std::size_t>(index - first_)];
}

}  // namespace qfourier
