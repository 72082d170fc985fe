#include "qfourier/quenched.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"
#include "qfourier/error.hpp"

namespace qfourier {

namespace {

constexpr double kFormTol = 1e-10;
constexpr std::size_t kPhaseTableLimit = std::size_t{1} << 24;

void require_depth(const CoefficientSeq& coeffs, const FrozenPast& past) {
  if (!coeffs.empty() && past.depth() < coeffs.max_index())
    throw PastTooShallow(past.depth(), static_cast<std::size_t>(coeffs.max_index()));
}

}  // namespace

// --- phases and ladders -----------------------------------------------------

PhaseStepper::PhaseStepper(double theta, int sign)
    : angle_(sign * canonical_angle(theta)), step_(unit_phase(angle_)) {}

void PhaseStepper::advance() {
  ++index_;
  if (index_ % kResync == 0)
    current_ = unit_phase(static_cast<double>(index_) * angle_);
  else
    current_ *= step_;
}

ZetaLadder::ZetaLadder(ThetaGrid grid)
    : grid_(std::move(grid)), values_(grid_.size(), Complex{0.0, 0.0}) {}

void ZetaLadder::extend(double xi_next) {
  ++depth_;
  const double k = static_cast<double>(depth_);
  const auto points = grid_.points();
  for (std::size_t g = 0; g < points.size(); ++g) values_[g] += unit_phase(-k * points[g]) * xi_next;
  if (auto it = checkpoints_.find(static_cast<std::uint64_t>(depth_)); it != checkpoints_.end())
    it->second = values_;
}

void ZetaLadder::add_checkpoint(std::uint64_t k) {
  if (static_cast<std::int64_t>(k) <= depth_)
    throw Error(ErrorCode::InvalidArgument, "checkpoint depth already passed");
  checkpoints_.emplace(k, std::vector<Complex>{});
}

std::span<const Complex> ZetaLadder::checkpoint(std::uint64_t k) const {
  const auto it = checkpoints_.find(k);
  if (it == checkpoints_.end()) return {};
  return it->second;
}

ZetaLadder zeta_extend(ZetaLadder ladder, double xi_next) {
  ladder.extend(xi_next);
  return ladder;
}

std::vector<Complex> zeta_path(std::span<const double> back, double theta) {
  std::vector<Complex> out(back.size());
  PhaseStepper phase(theta, -1);
  Complex acc{0.0, 0.0};
  for (std::size_t m = 0; m < back.size(); ++m) {
    acc += phase.current() * back[m];
    out[m] = acc;
    phase.advance();
  }
  return out;
}

// --- conditional expectation ------------------------------------------------

ConditionalForms conditional_dft_forms(const CoefficientSeq& coeffs, const FrozenPast& past,
                                       std::uint64_t n, double theta) {
  require_depth(coeffs, past);
  const double t = canonical_angle(theta);
  ConditionalForms out{{0.0, 0.0}, {0.0, 0.0}};
  if (coeffs.empty()) return out;

  const std::uint64_t lag = coeffs.max_index();
  std::vector<Complex> zeta(lag + 1);
  Complex acc{0.0, 0.0};
  for (std::uint64_t m = 0; m <= lag; ++m) {
    acc += unit_phase(-static_cast<double>(m) * t) * past.back(m);
    zeta[m] = acc;
  }

  const auto support = coeffs.support();
  const auto values = coeffs.values();
  for (std::size_t i = 0; i < support.size(); ++i) {
    const std::uint64_t j = support[i];
    const Complex shifted = j >= n ? zeta[j - n] : Complex{0.0, 0.0};
    out.by_zeta += values[i] * (zeta[j] - shifted) * unit_phase(static_cast<double>(j) * t);
  }

  const PartialSums f(coeffs, t);
  const auto nn = static_cast<std::int64_t>(n);
  for (std::uint64_t m = 0; m <= lag; ++m) {
    const auto mi = static_cast<std::int64_t>(m);
    out.by_partial_sums += past.back(m) * (f.at(nn + mi) - f.at(mi)) *
                           unit_phase(-static_cast<double>(m) * t);
  }
  return out;
}

Complex conditional_dft(const CoefficientSeq& coeffs, const FrozenPast& past, std::uint64_t n,
                        double theta) {
  const ConditionalForms forms = conditional_dft_forms(coeffs, past, n, theta);
  if (!close_relative(forms.by_zeta, forms.by_partial_sums, kFormTol))
    throw Error(ErrorCode::InternalMismatch, "closed forms of E_0 S_n disagree");
  return forms.by_zeta;
}

ProjectionPath::ProjectionPath(const CoefficientSeq& coeffs, const FrozenPast& past, double theta)
    : theta_(canonical_angle(theta)), support_(coeffs.support().begin(), coeffs.support().end()) {
  require_depth(coeffs, past);
  if (coeffs.empty()) return;
  zeta_ = zeta_path(past.values().first(coeffs.max_index() + 1), theta_);
  const auto values = coeffs.values();
  weights_.reserve(support_.size());
  for (std::size_t i = 0; i < support_.size(); ++i) {
    weights_.push_back(values[i] * unit_phase(static_cast<double>(support_[i]) * theta_));
    total_ += weights_.back() * zeta_[support_[i]];
  }
}

Complex ProjectionPath::at(std::uint64_t n) const {
  Complex value = total_;
  const auto first = std::lower_bound(support_.begin(), support_.end(), n) - support_.begin();
  for (auto i = static_cast<std::size_t>(first); i < support_.size(); ++i)
    value -= weights_[i] * zeta_[support_[i] - n];
  return value;
}

ProjectionSplit split_projection(const CoefficientSeq& coeffs, const FrozenPast& past, int stage,
                                 std::uint64_t n, double theta) {
  const auto blocks = coeffs.blocks();
  if (blocks.size() != coeffs.size())
    throw Error(ErrorCode::InvalidArgument,
                "head/tail split needs a support made of block indices only");
  const ProjectionPath path(coeffs, past, theta);
  ProjectionSplit out{{0.0, 0.0}, {0.0, 0.0}, conditional_dft(coeffs, past, n, theta)};
  for (const Block& b : blocks) {
    const Complex shifted = b.n_k >= n ? path.zeta(b.n_k - n) : Complex{0.0, 0.0};
    const Complex term = b.a * unit_phase(static_cast<double>(b.n_k) * path.theta()) *
                         (path.zeta(b.n_k) - shifted);
    (b.k <= stage ? out.head : out.tail) += term;
  }
  if (!close_relative(out.head + out.tail, out.total, kFormTol))
    throw Error(ErrorCode::InternalMismatch, "A_k + B_k does not re-sum to E_0 S_n");
  return out;
}

// --- ensembles --------------------------------------------------------------

std::vector<double> QuenchedEnsemble::real_y(std::size_t g) const {
  std::vector<double> out(replicates);
  for (std::size_t r = 0; r < replicates; ++r) out[r] = Y[slot(r, g)].real();
  return out;
}

std::vector<double> QuenchedEnsemble::imag_y(std::size_t g) const {
  std::vector<double> out(replicates);
  for (std::size_t r = 0; r < replicates; ++r) out[r] = Y[slot(r, g)].imag();
  return out;
}

QuenchedEnsemble quenched_sample(const CoefficientSeq& coeffs, const FrozenPast& past,
                                 InnovationLaw law, std::uint64_t n, const ThetaGrid& grid,
                                 std::size_t replicates, const SeedSpec& seed) {
  if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "ensemble needs M >= 1");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "horizon n must be >= 1");
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "theta grid is empty");
  require_depth(coeffs, past);

  const std::size_t G = grid.size();
  QuenchedEnsemble ens{past, law, replicates, n, grid, {}, {}, {}, {}};
  ens.conditional.resize(G);
  for (std::size_t g = 0; g < G; ++g) ens.conditional[g] = conditional_dft(coeffs, past, n, grid[g]);
  ens.S.resize(replicates * G);
  ens.Y.resize(replicates * G);
  ens.Z.resize(replicates * G);

  const bool use_table = G * n <= kPhaseTableLimit;
  std::vector<Complex> table;
  if (use_table) {
    table.resize(G * n);
    for (std::size_t g = 0; g < G; ++g)
      for (std::uint64_t k = 0; k < n; ++k)
        table[g * n + k] = unit_phase(static_cast<double>(k) * grid[g]);
  }

  const std::size_t depth = past.depth();
  const auto support = coeffs.support();
  const auto values = coeffs.values();
  const double root_n = std::sqrt(static_cast<double>(n));
  const SeedSpec future_seed = seed.with_role("future");

  detail::parallel_for(replicates, [&](std::size_t r) {
    const std::vector<double> future = draw_future(law, n, future_seed.with_replicate(r));
    // xi[depth + j] = ξ_j for j in [-depth, n-1]
    std::vector<double> xi(depth + n);
    for (std::size_t m = 0; m <= depth; ++m) xi[depth - m] = past.back(m);
    std::copy(future.begin(), future.end(), xi.begin() + static_cast<std::ptrdiff_t>(depth + 1));

    std::vector<double> x(n);
    for (std::uint64_t k = 0; k < n; ++k) {
      double v = 0.0;
      for (std::size_t i = 0; i < support.size(); ++i) v += values[i] * xi[depth + k - support[i]];
      x[k] = v;
    }
    for (std::size_t g = 0; g < G; ++g) {
      Complex s{0.0, 0.0};
      if (use_table) {
        const Complex* row = table.data() + g * n;
        for (std::uint64_t k = 0; k < n; ++k) s += row[k] * x[k];
      } else {
        PhaseStepper phase(grid[g], +1);
        for (std::uint64_t k = 0; k < n; ++k, phase.advance()) s += phase.current() * x[k];
      }
      const std::size_t at = ens.slot(r, g);
      ens.S[at] = s;
      ens.Y[at] = (s - ens.conditional[g]) / root_n;
      ens.Z[at] = s / root_n;
    }
  });
  return ens;
}

double sigma_theta_squared(const CoefficientSeq& coeffs, double theta) {
  return std::norm(transfer_fn(coeffs, theta)) / 2.0;
}

double sigma_theta_squared_cesaro(const CoefficientSeq& coeffs, double theta, std::uint64_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "Cesaro form needs n >= 1");
  const PartialSums f(coeffs, theta);
  double acc = 0.0;
  for (std::uint64_t j = 1; j < n; ++j) acc += std::norm(f.at(static_cast<std::int64_t>(j)));
  return acc / (2.0 * static_cast<double>(n));
}

// --- limit diagnosis --------------------------------------------------------

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::ConvergesTo:
      return "converges-to";
    case Verdict::Diverges:
      return "diverges";
    case Verdict::Undecided:
      return "undecided";
  }
  return "undecided";
}

LimitDiagnosis limit_diagnosis(const CoefficientSeq& coeffs, const FrozenPast& past, double theta,
                               std::span<const std::uint64_t> schedule) {
  if (schedule.empty() || schedule.front() < 1)
    throw Error(ErrorCode::InvalidArgument, "schedule must be nonempty with n >= 1");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1])
      throw Error(ErrorCode::InvalidArgument, "schedule must be increasing");

  const ProjectionPath path(coeffs, past, theta);
  LimitDiagnosis out;
  out.schedule.assign(schedule.begin(), schedule.end());

  // Beyond the last support index E_0 S_n is constant, so |E_0 S_n|/√n only decreases.
  const std::uint64_t scan_limit = coeffs.empty() ? 1 : coeffs.max_index() + 1;
  double running = 0.0;
  std::uint64_t scanned = 0;
  for (std::uint64_t n : schedule) {
    const std::uint64_t upto = std::min(n, scan_limit);
    for (std::uint64_t m = scanned + 1; m <= upto; ++m)
      running = std::max(running, std::abs(path.at(m)) / std::sqrt(static_cast<double>(m)));
    scanned = std::max(scanned, upto);
    const Complex z = path.at(n) / std::sqrt(static_cast<double>(n));
    running = std::max(running, std::abs(z));
    out.normalized.push_back(z);
    out.running_max.push_back(running);
  }

  constexpr std::size_t kTail = 5;
  constexpr double kHalfBand = 0.5e-2;
  if (out.normalized.size() >= kTail) {
    Complex mean{0.0, 0.0};
    const auto tail = std::span(out.normalized).last(kTail);
    for (Complex z : tail) mean += z;
    mean /= static_cast<double>(kTail);
    const bool banded = std::all_of(tail.begin(), tail.end(),
                                    [&](Complex z) { return std::abs(z - mean) <= kHalfBand; });
    if (banded) {
      out.verdict = Verdict::ConvergesTo;
      out.limit = mean;
      return out;
    }
  }

  const std::uint64_t last = schedule.back();
  for (std::size_t i = schedule.size(); i-- > 0;) {
    if (schedule[i] * 8 <= last) {
      const double earlier = out.running_max[i];
      if (earlier > 0.0 && out.running_max.back() >= 2.0 * earlier) out.verdict = Verdict::Diverges;
      break;
    }
  }
  return out;
}

double lil_statistic(std::span<const double> back, double theta) {
  constexpr std::size_t kStart = 16;
  const std::vector<Complex> zeta = zeta_path(back, theta);
  double best = 0.0;
  for (std::size_t m = kStart; m < zeta.size(); ++m) {
    const double md = static_cast<double>(m);
    best = std::max(best, std::abs(zeta[m]) / std::sqrt(md * std::log(std::log(md))));
  }
  return best;
}

}  // namespace qfourier
