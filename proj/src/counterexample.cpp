#include "qfourier/counterexample.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "parallel.hpp"
#include "qfourier/quenched.hpp"
#include "qfourier/stats.hpp"

namespace qfourier {

namespace {

std::vector<Block> require_blocks(const CoefficientSeq& coeffs) {
  if (!coeffs.has_blocks() || coeffs.blocks().size() != coeffs.size())
    throw Error(ErrorCode::InvalidArgument,
                "operation needs a block-structured sequence whose support is exactly {n_k}");
  return {coeffs.blocks().begin(), coeffs.blocks().end()};
}

const Block& block_at(const std::vector<Block>& blocks, int k) {
  const int first = blocks.front().k;
  if (k < first || k > blocks.back().k)
    throw Error(ErrorCode::InvalidArgument, "stage " + std::to_string(k) + " is not in the sequence");
  return blocks[static_cast<std::size_t>(k - first)];
}

// Random walk ζ_{-m}(θ) advanced lazily until its first hit of |ζ_{-m}| >= τ√m, m > n_prev.
struct ProbeWalk {
  InnovationStream stream;
  PhaseStepper phase;
  Complex zeta{0.0, 0.0};
  std::uint64_t next = 0;
  std::uint64_t hit = 0;  // 0: no hit yet

  void extend(std::uint64_t horizon, std::uint64_t n_prev, double tau_sq) {
    while (hit == 0 && next <= horizon) {
      zeta += phase.current() * stream.at(next);
      if (next > n_prev && std::norm(zeta) >= tau_sq * static_cast<double>(next)) hit = next;
      phase.advance();
      ++next;
    }
  }
};

}  // namespace

std::string_view to_string(LambdaMode mode) {
  return mode == LambdaMode::Deterministic ? "deterministic" : "mc-quantile";
}

LambdaMode parse_lambda_mode(std::string_view name) {
  if (name == "deterministic") return LambdaMode::Deterministic;
  if (name == "mc-quantile" || name == "mc_quantile") return LambdaMode::McQuantile;
  throw Error(ErrorCode::InvalidArgument, "unknown lambda mode '" + std::string(name) + "'");
}

void ConstructionParams::validate() const {
  if (k_max < 0) throw Error(ErrorCode::InvalidArgument, "k_max must be >= 0");
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "theta grid is empty");
  if (!(base > 1.0)) throw Error(ErrorCode::InvalidArgument, "growth base must be > 1");
  if (probe_replicates < 1 || lambda_replicates < 1)
    throw Error(ErrorCode::InvalidArgument, "replicate counts must be >= 1");
  if (lambda_mode == LambdaMode::Deterministic && law != InnovationLaw::Rademacher)
    throw Error(ErrorCode::InvalidArgument,
                "deterministic lambda is a sure bound only for bounded (Rademacher) innovations");
}

SearchBudgetExhausted::SearchBudgetExhausted(int stage, std::uint64_t largest_probed,
                                             double worst_theta, double best_lower, double target)
    : Error(ErrorCode::SearchBudgetExhausted,
            [&] {
              std::ostringstream os;
              os << "stage " << stage << ": no N <= " << largest_probed
                 << " reaches the target probability " << target << " at theta=" << worst_theta
                 << " (best lower bound " << best_lower << ")";
              return os.str();
            }()),
      stage_(stage),
      largest_probed_(largest_probed),
      worst_theta_(worst_theta),
      best_lower_(best_lower) {}

// --- λ_k --------------------------------------------------------------------

double choose_lambda(int k, std::span<const Block> blocks, const ConstructionParams& params,
                     const SeedSpec& seed) {
  std::vector<Block> terms;
  for (const Block& b : blocks)
    if (b.k >= 1 && b.k <= k - 1) terms.push_back(b);
  if (terms.empty()) return 0.0;

  if (params.lambda_mode == LambdaMode::Deterministic) {
    if (params.law != InnovationLaw::Rademacher)
      throw Error(ErrorCode::InvalidArgument, "deterministic lambda needs Rademacher innovations");
    double lambda = 0.0;
    for (const Block& b : terms) lambda += std::abs(b.a) * static_cast<double>(b.n_k + 1);
    return lambda;
  }

  const std::uint64_t depth = terms.back().n_k;
  const auto grid = params.grid.points();
  std::vector<double> maxima(params.lambda_replicates);
  const SeedSpec lambda_seed = seed.with_role("lambda").with_block(static_cast<std::uint64_t>(k));
  detail::parallel_for(maxima.size(), [&](std::size_t r) {
    const FrozenPast past = draw_past(params.law, depth, lambda_seed.with_replicate(r));
    double worst = 0.0;
    for (double theta : grid) {
      const std::vector<Complex> zeta = zeta_path(past.values(), theta);
      Complex sum{0.0, 0.0};
      for (const Block& b : terms)
        sum += b.a * unit_phase(static_cast<double>(b.n_k) * theta) * zeta[b.n_k];
      worst = std::max(worst, std::abs(sum));
    }
    maxima[r] = worst;
  });
  std::sort(maxima.begin(), maxima.end());
  const double level = 1.0 - std::pow(params.base, -(k + 2));
  return params.lambda_safety * stats::quantile_sorted(maxima, level);
}

// --- n_k --------------------------------------------------------------------

ChooseNResult choose_n(int k, double tau, std::uint64_t n_prev, const ConstructionParams& params,
                       const SeedSpec& seed) {
  const auto grid = params.grid.points();
  const std::size_t M = params.probe_replicates;
  const double target = 1.0 - std::pow(params.base, -(k + 1));
  ChooseNResult out;
  out.per_theta_n.resize(grid.size());
  out.success.assign(grid.size(), 1.0);
  out.success_lower.assign(grid.size(), 1.0);

  if (tau <= 0.0) {
    out.n = n_prev + 1;
    std::fill(out.per_theta_n.begin(), out.per_theta_n.end(), out.n);
    return out;
  }

  const double tau_sq = tau * tau;
  const SeedSpec probe_seed = seed.with_role("probe").with_block(static_cast<std::uint64_t>(k));
  std::vector<std::vector<ProbeWalk>> walks(grid.size());

  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto& ws = walks[g];
    ws.reserve(M);
    for (std::size_t r = 0; r < M; ++r)
      ws.push_back(ProbeWalk{InnovationStream(params.law, probe_seed.with_replicate(r)),
                             PhaseStepper(grid[g], -1)});

    auto hits_by = [&](std::uint64_t N) {
      detail::parallel_for(M, [&](std::size_t r) { ws[r].extend(N, n_prev, tau_sq); });
      return static_cast<std::size_t>(std::count_if(
          ws.begin(), ws.end(), [N](const ProbeWalk& w) { return w.hit != 0 && w.hit <= N; }));
    };
    auto passes = [&](std::uint64_t N) {
      return stats::wilson_lower(hits_by(N), M, params.confidence_z) >= target;
    };

    std::uint64_t failing = n_prev;
    std::uint64_t N = n_prev + 1;
    if (N > params.max_n) {
      throw SearchBudgetExhausted(k, n_prev, grid[g], 0.0, target);
    }
    while (!passes(N)) {
      if (N >= params.max_n) {
        const double best = stats::wilson_lower(hits_by(N), M, params.confidence_z);
        throw SearchBudgetExhausted(k, N, grid[g], best, target);
      }
      failing = N;
      N = std::min(N * 2, params.max_n);
    }
    while (N - failing > 1) {
      const std::uint64_t mid = failing + (N - failing) / 2;
      if (passes(mid))
        N = mid;
      else
        failing = mid;
    }
    out.per_theta_n[g] = N;
  }

  const auto worst = std::max_element(out.per_theta_n.begin(), out.per_theta_n.end());
  out.worst_index = static_cast<std::size_t>(worst - out.per_theta_n.begin());
  out.n = *worst;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto& ws = walks[g];
    detail::parallel_for(M, [&](std::size_t r) { ws[r].extend(out.n, n_prev, tau_sq); });
    const auto hits = static_cast<std::size_t>(std::count_if(
        ws.begin(), ws.end(), [&](const ProbeWalk& w) { return w.hit != 0 && w.hit <= out.n; }));
    out.success[g] = static_cast<double>(hits) / static_cast<double>(M);
    out.success_lower[g] = stats::wilson_lower(hits, M, params.confidence_z);
  }
  return out;
}

// --- build ------------------------------------------------------------------

BuildResult build(const ConstructionParams& params, const SeedSpec& seed) {
  params.validate();
  BuildResult result;
  ConstructionLog& log = result.log;
  log.base = params.base;
  log.lambda_mode = params.lambda_mode;
  log.law = params.law;
  log.grid.assign(params.grid.points().begin(), params.grid.points().end());

  std::vector<Block> blocks{{0, 1, 0.5}};
  StageRecord initial;
  initial.k = 0;
  initial.n_k = 1;
  initial.a = 0.5;
  log.stages.push_back(initial);

  auto snapshot = [&] {
    std::vector<std::uint64_t> support;
    std::vector<double> values;
    for (const Block& b : blocks) {
      support.push_back(b.n_k);
      values.push_back(b.a);
    }
    return CoefficientSeq(std::move(support), std::move(values), blocks);
  };
  auto tail_bound = [&] {
    const double n_last = static_cast<double>(blocks.back().n_k);
    const int K = blocks.back().k;
    const double b2 = params.base * params.base;
    return std::pow(params.base, -2.0 * (K + 1)) / (1.0 - 1.0 / b2) / n_last;
  };

  for (int k = 1; k <= params.k_max; ++k) {
    const auto start = std::chrono::steady_clock::now();
    const Block& prev = blocks.back();
    StageRecord rec;
    rec.k = k;
    rec.lambda = choose_lambda(k, blocks, params, seed);
    rec.tau = (rec.lambda + std::pow(params.base, k + 1)) / prev.a;
    rec.target = 1.0 - std::pow(params.base, -(k + 1));

    ChooseNResult chosen;
    try {
      chosen = choose_n(k, rec.tau, prev.n_k, params, seed);
    } catch (SearchBudgetExhausted& e) {
      result.coeffs = snapshot();
      log.tail_l2_bound = tail_bound();
      e.partial = result;
      throw;
    }
    rec.n_k = chosen.n;
    rec.a = std::pow(params.base, -k) / std::sqrt(static_cast<double>(prev.n_k));
    rec.success = chosen.success;
    rec.per_theta_n = chosen.per_theta_n;
    rec.min_success_lower =
        *std::min_element(chosen.success_lower.begin(), chosen.success_lower.end());
    rec.probe_samples = params.probe_replicates;
    rec.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    blocks.push_back({k, rec.n_k, rec.a});
    log.stages.push_back(std::move(rec));
  }

  result.coeffs = snapshot();
  log.tail_l2_bound = tail_bound();
  return result;
}

std::vector<std::string> check_log(const ConstructionLog& log) {
  std::vector<std::string> issues;
  const auto& st = log.stages;
  if (st.empty() || st.front().k != 0 || st.front().n_k != 1 || st.front().a != 0.5 ||
      st.front().lambda != 0.0)
    issues.push_back("stage 0 must be n_0 = 1, a_1 = 1/2, lambda_0 = 0");
  double det_lambda = 0.0;
  for (std::size_t i = 1; i < st.size(); ++i) {
    const auto& s = st[i];
    const auto& p = st[i - 1];
    const std::string tag = "stage " + std::to_string(s.k) + ": ";
    if (s.k != p.k + 1) issues.push_back(tag + "stages are not consecutive");
    if (s.n_k <= p.n_k) issues.push_back(tag + "n_k not strictly increasing");
    const double expected_a = std::pow(log.base, -s.k) / std::sqrt(static_cast<double>(p.n_k));
    if (s.a != expected_a) issues.push_back(tag + "a_{n_k} != base^-k / sqrt(n_{k-1})");
    if (s.lambda < 0.0) issues.push_back(tag + "negative lambda");
    if (log.lambda_mode == LambdaMode::Deterministic && s.lambda != det_lambda)
      issues.push_back(tag + "lambda differs from the deterministic closed form");
    // λ_{k+1} picks up stage k's term
    det_lambda += std::abs(s.a) * static_cast<double>(s.n_k + 1);
  }
  return issues;
}

// --- B_k tail ---------------------------------------------------------------

BkReport bound_Bk(const CoefficientSeq& coeffs, int k, const ThetaGrid& grid, InnovationLaw law,
                  std::size_t replicates, double base, const SeedSpec& seed) {
  const std::vector<Block> blocks = require_blocks(coeffs);
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "B_k needs k >= 1");
  if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "B_k needs M >= 1");
  const std::uint64_t n_hi = block_at(blocks, k).n_k;
  const std::uint64_t n_lo = block_at(blocks, k - 1).n_k;

  std::vector<Block> tail;
  for (const Block& b : blocks)
    if (b.k > k) tail.push_back(b);

  BkReport rep;
  rep.k = k;
  rep.base = base;
  rep.replicates = replicates;
  rep.truncated = tail.empty();
  double tail_mass = 0.0;
  for (const Block& b : tail) tail_mass += std::abs(b.a);
  rep.doob_bound = 2.0 * std::sqrt(static_cast<double>(n_hi)) * tail_mass;
  rep.geometric_bound = 2.0 * std::pow(base, -k) / (base - 1.0);
  rep.markov_bound = rep.doob_bound / std::pow(base, k);
  rep.tail_target = std::pow(base, -(k + 2));
  const double level = std::pow(base, k);

  const std::size_t G = grid.size();
  std::vector<double> maxima(replicates * G, 0.0);
  if (!rep.truncated) {
    const std::uint64_t depth = coeffs.max_index();
    const SeedSpec bk_seed = seed.with_role("bk").with_block(static_cast<std::uint64_t>(k));
    detail::parallel_for(replicates, [&](std::size_t r) {
      const FrozenPast past = draw_past(law, depth, bk_seed.with_replicate(r));
      for (std::size_t g = 0; g < G; ++g) {
        const std::vector<Complex> zeta = zeta_path(past.values(), grid[g]);
        std::vector<Complex> w;
        for (const Block& b : tail) w.push_back(b.a * unit_phase(static_cast<double>(b.n_k) * grid[g]));
        double best = 0.0;
        for (std::uint64_t n = n_lo + 1; n <= n_hi; ++n) {
          Complex v{0.0, 0.0};
          for (std::size_t j = 0; j < tail.size(); ++j)
            v += w[j] * (zeta[tail[j].n_k] - zeta[tail[j].n_k - n]);
          best = std::max(best, std::abs(v));
        }
        maxima[r * G + g] = best;
      }
    });
  }

  rep.pass = true;
  const double M = static_cast<double>(replicates);
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<double> col(replicates);
    std::size_t exceed = 0;
    for (std::size_t r = 0; r < replicates; ++r) {
      col[r] = maxima[r * G + g];
      if (col[r] >= level) ++exceed;
    }
    BkThetaReport t;
    t.theta = grid[g];
    t.mean_max = stats::mean(col);
    t.mean_se = stats::sample_std(col) / std::sqrt(M);
    t.tail_prob = static_cast<double>(exceed) / M;
    t.tail_se = std::sqrt(t.tail_prob * (1.0 - t.tail_prob) / M);
    t.mean_ok = t.mean_max <= std::min(rep.doob_bound, rep.geometric_bound) + 3.0 * t.mean_se;
    t.markov_ok = t.tail_prob <= rep.markov_bound + 3.0 * t.tail_se;
    t.tail_ok = t.tail_prob <= rep.tail_target + 3.0 * t.tail_se;
    rep.pass = rep.pass && t.mean_ok && t.markov_ok;
    rep.per_theta.push_back(t);
  }
  return rep;
}

// --- stage verification -----------------------------------------------------

std::vector<double> block_exceedance(const CoefficientSeq& coeffs, std::span<const FrozenPast> pasts,
                                     const ThetaGrid& grid, std::uint64_t n_lo, std::uint64_t n_hi,
                                     double threshold) {
  if (pasts.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one past");
  const std::size_t G = grid.size();
  std::vector<unsigned char> hit(pasts.size() * G, 0);
  detail::parallel_for(pasts.size(), [&](std::size_t r) {
    for (std::size_t g = 0; g < G; ++g) {
      const ProjectionPath path(coeffs, pasts[r], grid[g]);
      for (std::uint64_t n = n_lo + 1; n <= n_hi; ++n) {
        if (std::abs(path.at(n)) >= threshold * std::sqrt(static_cast<double>(n))) {
          hit[r * G + g] = 1;
          break;
        }
      }
    }
  });
  std::vector<double> freq(G, 0.0);
  for (std::size_t r = 0; r < pasts.size(); ++r)
    for (std::size_t g = 0; g < G; ++g) freq[g] += hit[r * G + g];
  for (double& f : freq) f /= static_cast<double>(pasts.size());
  return freq;
}

StageReport verify_stage(const CoefficientSeq& coeffs, const ConstructionLog& log, int k,
                         std::span<const FrozenPast> pasts) {
  const std::vector<Block> blocks = require_blocks(coeffs);
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "stage verification needs k >= 1");
  if (pasts.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one past");
  const std::uint64_t n_hi = block_at(blocks, k).n_k;
  const std::uint64_t n_lo = block_at(blocks, k - 1).n_k;
  const double base = log.base;
  const double level = std::pow(base, k);
  const ThetaGrid grid(log.grid);
  const std::size_t G = grid.size();
  if (G == 0) throw Error(ErrorCode::InvalidArgument, "log carries no theta grid");

  // flags per (past, θ): bit 0 E_0S, bit 1 head, bit 2 tail
  std::vector<unsigned char> flags(pasts.size() * G, 0);
  detail::parallel_for(pasts.size(), [&](std::size_t r) {
    if (pasts[r].depth() < coeffs.max_index())
      throw PastTooShallow(pasts[r].depth(), static_cast<std::size_t>(coeffs.max_index()));
    for (std::size_t g = 0; g < G; ++g) {
      const double theta = grid[g];
      const std::vector<Complex> zeta =
          zeta_path(pasts[r].values().first(coeffs.max_index() + 1), theta);
      std::vector<Complex> w;
      for (const Block& b : blocks) w.push_back(b.a * unit_phase(static_cast<double>(b.n_k) * theta));
      double best_total = 0.0, best_head = 0.0, best_tail = 0.0;
      for (std::uint64_t n = n_lo + 1; n <= n_hi; ++n) {
        Complex head{0.0, 0.0}, tail{0.0, 0.0};
        for (std::size_t j = 0; j < blocks.size(); ++j) {
          const std::uint64_t nj = blocks[j].n_k;
          const Complex term = w[j] * (zeta[nj] - (nj >= n ? zeta[nj - n] : Complex{0.0, 0.0}));
          (blocks[j].k <= k ? head : tail) += term;
        }
        const double root = std::sqrt(static_cast<double>(n));
        best_total = std::max(best_total, std::abs(head + tail) / root);
        best_head = std::max(best_head, std::abs(head) / root);
        best_tail = std::max(best_tail, std::abs(tail));
      }
      unsigned char f = 0;
      if (best_total >= level) f |= 1;
      if (best_head >= 2.0 * level) f |= 2;
      if (best_tail >= level) f |= 4;
      flags[r * G + g] = f;
    }
  });

  StageReport rep;
  rep.k = k;
  rep.threshold = 1.0 - 2.0 * std::pow(base, -(k + 1));
  rep.pasts = pasts.size();
  rep.pass = true;
  rep.decomposition_consistent = true;
  const double M = static_cast<double>(pasts.size());
  for (std::size_t g = 0; g < G; ++g) {
    StageThetaReport t;
    t.theta = grid[g];
    for (std::size_t r = 0; r < pasts.size(); ++r) {
      const unsigned char f = flags[r * G + g];
      t.frequency += (f & 1) ? 1.0 : 0.0;
      t.head_frequency += (f & 2) ? 1.0 : 0.0;
      t.tail_frequency += (f & 4) ? 1.0 : 0.0;
    }
    t.frequency /= M;
    t.head_frequency /= M;
    t.tail_frequency /= M;
    t.pass = t.frequency >= rep.threshold;
    rep.pass = rep.pass && t.pass;
    if (t.frequency + 1e-12 < t.head_frequency - t.tail_frequency) rep.decomposition_consistent = false;
    rep.per_theta.push_back(t);
  }
  return rep;
}

StageReport verify_stage(const CoefficientSeq& coeffs, const ConstructionLog& log, int k,
                         std::size_t replicates, const SeedSpec& seed) {
  if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "need at least one past");
  std::vector<FrozenPast> pasts;
  pasts.reserve(replicates);
  const SeedSpec verify_seed = seed.with_role("verify").with_block(static_cast<std::uint64_t>(k));
  for (std::size_t r = 0; r < replicates; ++r)
    pasts.push_back(draw_past(log.law, coeffs.max_index(), verify_seed.with_replicate(r)));
  return verify_stage(coeffs, log, k, pasts);
}

}  // namespace qfourier
