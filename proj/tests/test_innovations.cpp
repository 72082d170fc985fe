#include <doctest.h>

#include <cmath>
#include <numeric>

#include "qfourier/error.hpp"
#include "qfourier/innovations.hpp"

using namespace qfourier;

namespace {

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("law names round-trip") {
  CHECK(parse_law("rademacher") == InnovationLaw::Rademacher);
  CHECK(parse_law("normal") == InnovationLaw::StandardNormal);
  CHECK(parse_law(to_string(InnovationLaw::StandardNormal)) == InnovationLaw::StandardNormal);
  CHECK_THROWS_AS(parse_law("cauchy"), Error);
}

TEST_CASE("pasts are deterministic and lie in the law's support") {
  const SeedSpec s{42, "past", 0, 0};
  const auto p0 = draw_past(InnovationLaw::Rademacher, 0, s);
  CHECK(p0.depth() == 0);
  CHECK(std::abs(p0.back(0)) == 1.0);

  const auto a = draw_past(InnovationLaw::StandardNormal, 100, s);
  const auto b = draw_past(InnovationLaw::StandardNormal, 100, s);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  const auto c = draw_past(InnovationLaw::StandardNormal, 100, s.with_replicate(1));
  CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));

  const auto r = draw_past(InnovationLaw::Rademacher, 1000, s);
  for (double v : r.values()) CHECK((v == 1.0 || v == -1.0));
}

TEST_CASE("normal draws have unit variance") {
  const auto p = draw_past(InnovationLaw::StandardNormal, 999'999, SeedSpec{9, "past", 0, 0});
  const auto v = p.values();
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  const double var = ss / (n - 1);
  CHECK(var >= 0.99);
  CHECK(var <= 1.01);
  CHECK(std::abs(m) < 5.0 / std::sqrt(n));
}

TEST_CASE("rademacher draws are balanced") {
  const auto p = draw_past(InnovationLaw::Rademacher, 99'999, SeedSpec{9, "past", 0, 0});
  const double s = std::accumulate(p.values().begin(), p.values().end(), 0.0);
  CHECK(std::abs(s) < 5.0 * std::sqrt(1e5));
}

TEST_CASE("futures: horizon one is empty and replicates decorrelate") {
  const SeedSpec s{1, "future", 0, 0};
  CHECK(draw_future(InnovationLaw::Rademacher, 1, s).empty());
  CHECK_THROWS_AS(draw_future(InnovationLaw::Rademacher, 0, s), Error);
  CHECK(draw_future(InnovationLaw::StandardNormal, 10, s) == draw_future(InnovationLaw::StandardNormal, 10, s));

  for (auto law : {InnovationLaw::Rademacher, InnovationLaw::StandardNormal}) {
    const auto x = draw_future(law, 100'001, s);
    const auto y = draw_future(law, 100'001, s.with_replicate(1));
    CHECK(std::abs(correlation(x, y)) < 0.01);
    // roles and blocks are separate streams too
    const auto z = draw_future(law, 100'001, s.with_role("probe"));
    CHECK(std::abs(correlation(x, z)) < 0.01);
  }
}

TEST_CASE("stream access is random") {
  InnovationStream st(InnovationLaw::StandardNormal, SeedSpec{5, "x", 2, 3});
  std::vector<double> buf(50);
  st.fill(buf, 100);
  for (std::size_t i = 0; i < buf.size(); ++i) CHECK(buf[i] == st.at(100 + i));
}

TEST_CASE("frozen pasts and windows validate") {
  CHECK_THROWS_AS(FrozenPast(InnovationLaw::Rademacher, {0.5}), Error);
  CHECK_THROWS_AS(FrozenPast(InnovationLaw::StandardNormal, {}), Error);
  CHECK_THROWS_AS(FrozenPast(InnovationLaw::StandardNormal, {INFINITY}), Error);

  const FrozenPast past(InnovationLaw::Rademacher, {1.0, -1.0, 1.0});  // ξ_0, ξ_{-1}, ξ_{-2}
  const std::vector<double> fut{-1.0, -1.0};
  const auto w = InnovationWindow::join(past, fut);
  CHECK(w.first_index() == -2);
  CHECK(w.last_index() == 2);
  CHECK(w.at(-1) == -1.0);
  CHECK(w.at(0) == 1.0);
  CHECK(w.at(2) == -1.0);
  CHECK(w.covers(-2, 2));
  CHECK_FALSE(w.covers(-3, 0));
  CHECK_THROWS_AS(w.at(3), WindowTooShort);
}
