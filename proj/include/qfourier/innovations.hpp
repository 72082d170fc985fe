#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qfourier {

/// Centered, unit-variance laws for the i.i.d. innovations.
enum class InnovationLaw { Rademacher, StandardNormal };

std::string_view to_string(InnovationLaw law);
InnovationLaw parse_law(std::string_view name);

/// Identifies one reproducible innovation stream.
///
/// Streams are counter based: the i-th draw is a pure function of
/// (law, master, role, replicate, block, i). Different roles or indices give
/// unrelated streams, so replicates can be generated in any order.
struct SeedSpec {
  std::uint64_t master = 0;
  std::string role = "default";
  std::uint64_t replicate = 0;
  std::uint64_t block = 0;

  SeedSpec with_role(std::string r) const {
    SeedSpec s = *this;
    s.role = std::move(r);
    return s;
  }
  SeedSpec with_replicate(std::uint64_t r) const {
    SeedSpec s = *this;
    s.replicate = r;
    return s;
  }
  SeedSpec with_block(std::uint64_t b) const {
    SeedSpec s = *this;
    s.block = b;
    return s;
  }

  bool operator==(const SeedSpec&) const = default;
};

class InnovationStream {
 public:
  InnovationStream(InnovationLaw law, const SeedSpec& seed);

  InnovationLaw law() const noexcept { return law_; }

  /// Draw number `index` of the stream.
  double at(std::uint64_t index) const;

  /// Writes draws first, first+1, ... into `out`.
  void fill(std::span<double> out, std::uint64_t first = 0) const;

 private:
  InnovationLaw law_;
  std::uint64_t key_;
};

/// Frozen realization ξ_0, ξ_{-1}, ..., ξ_{-D} of the past.
class FrozenPast {
 public:
  FrozenPast(InnovationLaw law, std::vector<double> values);

  InnovationLaw law() const noexcept { return law_; }
  std::size_t depth() const noexcept { return values_.size() - 1; }

  /// ξ_{-m} for 0 <= m <= depth().
  double back(std::size_t m) const { return values_[m]; }

  /// Values in order ξ_0, ξ_{-1}, ..., ξ_{-D}.
  std::span<const double> values() const noexcept { return values_; }

 private:
  InnovationLaw law_;
  std::vector<double> values_;
};

FrozenPast draw_past(InnovationLaw law, std::size_t depth, const SeedSpec& seed);

/// Fresh future ξ_1, ..., ξ_{n-1}. Requires n >= 1.
std::vector<double> draw_future(InnovationLaw law, std::uint64_t horizon, const SeedSpec& seed);

/// Innovations ξ_j for j in [first_index(), last_index()].
class InnovationWindow {
 public:
  InnovationWindow(std::int64_t first_index, std::vector<double> values);

  /// Joins a frozen past with future draws ξ_1, ξ_2, ...
  static InnovationWindow join(const FrozenPast& past, std::span<const double> future);

  std::int64_t first_index() const noexcept { return first_; }
  std::int64_t last_index() const noexcept {
    return first_ + static_cast<std::int64_t>(values_.size()) - 1;
  }
  bool covers(std::int64_t lo, std::int64_t hi) const noexcept {
    return lo >= first_ && hi <= last_index();
  }

  /// Throws WindowTooShort naming the index when it is not covered.
  double at(std::int64_t index) const;

 private:
  std::int64_t first_;
  std::vector<double> values_;
};

}  // namespace qfourier
