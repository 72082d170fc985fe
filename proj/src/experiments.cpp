#include "qfourier/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

#include "qfourier/error.hpp"
#include "qfourier/quenched.hpp"
#include "qfourier/stats.hpp"

namespace qfourier {

namespace fs = std::filesystem;

namespace {

template <typename T>
void read_opt(const Json& j, const char* key, T& into) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("config field '") + key + "': " + e.what());
  }
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir.string());
}

void echo_config(const ExperimentConfig& cfg, const CoefficientSeq* coeffs, const fs::path& dir) {
  Json effective = to_json(cfg);
  if (coeffs) effective["coeffs"] = to_json(*coeffs);
  write_json_file(dir / "config.json", Json{{"version", kVersion}, {"config", effective}});
}

std::size_t effective_depth(const ExperimentConfig& cfg, const CoefficientSeq& coeffs) {
  return cfg.past_depth == 0 ? std::max<std::size_t>(64, coeffs.max_index()) : cfg.past_depth;
}

}  // namespace

ThetaGrid GridSpec::make() const {
  if (kind == "interior") return ThetaGrid::interior(count);
  if (kind == "equispaced") return ThetaGrid::equispaced(count);
  if (kind == "points") return ThetaGrid(points);
  throw Error(ErrorCode::InvalidArgument, "unknown theta grid kind '" + kind + "'");
}

ExperimentConfig config_from_json(const Json& j) {
  static const std::set<std::string> known = {
      "command",  "coeffs",           "coeffs_file",       "law",          "theta_grid",
      "n",        "M",                "past_depth",        "seed",         "alpha",
      "pass_fraction", "write_ensemble", "k_max",          "base",         "lambda_mode",
      "probe_replicates", "lambda_replicates", "max_n",    "verify_replicates",
      "bk_replicates", "pasts",        "n_max",             "expect"};
  if (!j.is_object()) throw Error(ErrorCode::Parse, "config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw Error(ErrorCode::Parse, "unknown config field '" + key + "'");

  ExperimentConfig cfg;
  read_opt(j, "command", cfg.command);
  if (j.contains("coeffs")) cfg.coeffs = j.at("coeffs");
  read_opt(j, "coeffs_file", cfg.coeffs_file);
  if (j.contains("law")) cfg.law = parse_law(j.at("law").get<std::string>());
  if (j.contains("theta_grid")) {
    const Json& g = j.at("theta_grid");
    read_opt(g, "kind", cfg.grid.kind);
    read_opt(g, "count", cfg.grid.count);
    read_opt(g, "points", cfg.grid.points);
    if (g.contains("points") && !g.contains("kind")) cfg.grid.kind = "points";
  }
  if (j.contains("n")) {
    if (j.at("n").is_array())
      read_opt(j, "n", cfg.n);
    else
      cfg.n = {j.at("n").get<std::uint64_t>()};
  }
  read_opt(j, "M", cfg.M);
  read_opt(j, "past_depth", cfg.past_depth);
  read_opt(j, "seed", cfg.seed);
  read_opt(j, "alpha", cfg.alpha);
  read_opt(j, "pass_fraction", cfg.pass_fraction);
  read_opt(j, "write_ensemble", cfg.write_ensemble);
  read_opt(j, "k_max", cfg.k_max);
  read_opt(j, "base", cfg.base);
  if (j.contains("lambda_mode")) cfg.lambda_mode = parse_lambda_mode(j.at("lambda_mode").get<std::string>());
  read_opt(j, "probe_replicates", cfg.probe_replicates);
  read_opt(j, "lambda_replicates", cfg.lambda_replicates);
  read_opt(j, "max_n", cfg.max_n);
  read_opt(j, "verify_replicates", cfg.verify_replicates);
  read_opt(j, "bk_replicates", cfg.bk_replicates);
  read_opt(j, "pasts", cfg.pasts);
  read_opt(j, "n_max", cfg.n_max);
  read_opt(j, "expect", cfg.expect);
  return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
  Json grid{{"kind", cfg.grid.kind}, {"count", cfg.grid.count}};
  if (cfg.grid.kind == "points") grid["points"] = cfg.grid.points;
  return Json{{"command", cfg.command},
              {"coeffs", cfg.coeffs},
              {"coeffs_file", cfg.coeffs_file},
              {"law", std::string(to_string(cfg.law))},
              {"theta_grid", grid},
              {"n", cfg.n},
              {"M", cfg.M},
              {"past_depth", cfg.past_depth},
              {"seed", cfg.seed},
              {"alpha", cfg.alpha},
              {"pass_fraction", cfg.pass_fraction},
              {"write_ensemble", cfg.write_ensemble},
              {"k_max", cfg.k_max},
              {"base", cfg.base},
              {"lambda_mode", std::string(to_string(cfg.lambda_mode))},
              {"probe_replicates", cfg.probe_replicates},
              {"lambda_replicates", cfg.lambda_replicates},
              {"max_n", cfg.max_n},
              {"verify_replicates", cfg.verify_replicates},
              {"bk_replicates", cfg.bk_replicates},
              {"pasts", cfg.pasts},
              {"n_max", cfg.n_max},
              {"expect", cfg.expect}};
}

CoefficientSeq resolve_coeffs(const ExperimentConfig& cfg) {
  Json source = cfg.coeffs;
  if (!cfg.coeffs_file.empty()) {
    if (!source.is_null()) throw Error(ErrorCode::InvalidArgument, "give either coeffs or coeffs_file");
    source = read_json_file(cfg.coeffs_file);
  }
  if (source.is_null()) throw Error(ErrorCode::InvalidArgument, "no coefficient sequence given");
  if (source.is_object() && source.contains("dense")) {
    const auto dense = source.at("dense").get<std::vector<double>>();
    return CoefficientSeq::from_dense(dense);
  }
  if (source.is_object() && source.contains("geometric")) {
    const Json& g = source.at("geometric");
    const double ratio = g.value("ratio", 0.5);
    const std::size_t max_index = g.value("max_index", std::size_t{20});
    std::vector<double> dense(max_index + 1);
    for (std::size_t j = 0; j <= max_index; ++j) dense[j] = std::pow(ratio, static_cast<double>(j));
    return CoefficientSeq::from_dense(dense);
  }
  return coeffs_from_json(source);
}

// --- verify-clt -------------------------------------------------------------

CommandResult cmd_verify_clt(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const CoefficientSeq coeffs = resolve_coeffs(cfg);
  const ThetaGrid grid = cfg.grid.make();
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "theta grid is empty");
  if (cfg.n.empty()) throw Error(ErrorCode::InvalidArgument, "n schedule is empty");
  ExperimentConfig effective = cfg;
  effective.past_depth = effective_depth(cfg, coeffs);

  prepare_dir(out_dir);
  echo_config(effective, &coeffs, out_dir);

  const SeedSpec seed{cfg.seed, "clt", 0, 0};
  const FrozenPast past = draw_past(cfg.law, effective.past_depth, seed.with_role("past"));

  Json notes = Json::array();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (grid.is_special(g)) {
      notes.push_back("theta=" + format_number(grid[g]) +
                      " is exceptional (0 or pi): reported but excluded from the pass fraction");
    }
  }

  CsvWriter sweep(out_dir / "clt_sweep.csv", {"theta", "n", "ks", "pass", "corr"});
  CsvWriter cond(out_dir / "conditional.csv", {"theta", "n", "re_E0S", "im_E0S"});
  Json cells = Json::array();
  std::size_t counted = 0, passed = 0;
  double max_cesaro_gap = 0.0;

  for (std::uint64_t n : cfg.n) {
    const QuenchedEnsemble ens =
        quenched_sample(coeffs, past, cfg.law, n, grid, cfg.M, seed.with_block(n));
    if (cfg.write_ensemble) write_ensemble_csv(ens, out_dir / ("ensemble_n" + std::to_string(n) + ".csv"));
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double theta = grid[g];
      const double sigma2 = sigma_theta_squared(coeffs, theta);
      const double cesaro = sigma_theta_squared_cesaro(coeffs, theta, n);
      max_cesaro_gap = std::max(max_cesaro_gap, std::abs(cesaro - sigma2));
      const double sigma = sigma2 < 1e-24 ? 0.0 : std::sqrt(sigma2);
      const auto re = ens.real_y(g);
      const auto im = ens.imag_y(g);
      auto ks_re = stats::ks_normal(re, sigma, cfg.alpha);
      auto ks_im = stats::ks_normal(im, sigma, cfg.alpha);
      for (auto* r : {&ks_re, &ks_im}) {
        r->theta = theta;
        r->n = n;
      }
      const auto corr = stats::independence_check(re, im);
      const bool ok = ks_re.pass && ks_im.pass && corr.pass;
      const bool special = grid.is_special(g);
      if (!special) {
        ++counted;
        if (ok) ++passed;
      }
      sweep.row(theta, n, std::max(ks_re.ks_statistic, ks_im.ks_statistic), ok, corr.correlation);
      cond.row(theta, n, ens.conditional[g].real(), ens.conditional[g].imag());
      cells.push_back(Json{{"theta", theta},
                           {"n", n},
                           {"sigma_squared", sigma2},
                           {"sigma_squared_cesaro", cesaro},
                           {"degenerate", sigma == 0.0},
                           {"exceptional", special},
                           {"ks_re", to_json(ks_re)},
                           {"ks_im", to_json(ks_im)},
                           {"independence", to_json(corr)},
                           {"pass", ok}});
    }
  }

  const double fraction = counted ? static_cast<double>(passed) / static_cast<double>(counted) : 0.0;
  CommandResult res;
  res.exit_code = (counted > 0 && fraction >= cfg.pass_fraction) ? 0 : 1;
  res.summary = Json{{"command", "verify-clt"},
                     {"counted_cells", counted},
                     {"passed_cells", passed},
                     {"pass_fraction", fraction},
                     {"required_fraction", cfg.pass_fraction},
                     {"max_cesaro_gap", max_cesaro_gap},
                     {"grid_size", grid.size()},
                     {"multiple_testing_note",
                      "no correction applied across the grid; each cell tested at alpha"},
                     {"notes", notes},
                     {"passed", res.exit_code == 0},
                     {"cells", cells}};
  write_json_file(out_dir / "summary.json", res.summary);
  return res;
}

// --- build-counterexample ---------------------------------------------------

CommandResult cmd_build_counterexample(const ExperimentConfig& cfg, const fs::path& out_dir) {
  ConstructionParams params;
  params.k_max = cfg.k_max;
  params.grid = cfg.grid.make();
  params.base = cfg.base;
  params.law = cfg.law;
  params.lambda_mode = cfg.lambda_mode;
  params.probe_replicates = cfg.probe_replicates;
  params.lambda_replicates = cfg.lambda_replicates;
  params.max_n = cfg.max_n;
  params.validate();

  prepare_dir(out_dir);
  echo_config(cfg, nullptr, out_dir);
  const SeedSpec seed{cfg.seed, "build", 0, 0};

  CommandResult res;
  BuildResult built;
  try {
    built = build(params, seed);
  } catch (const SearchBudgetExhausted& e) {
    write_json_file(out_dir / "coeffs.json", to_json(e.partial.coeffs));
    write_json_file(out_dir / "construction_log.json", to_json(e.partial.log));
    res.exit_code = 2;
    res.summary = Json{{"command", "build-counterexample"},
                       {"completed", false},
                       {"error", "search-budget-exhausted"},
                       {"message", e.what()},
                       {"stage", e.stage()},
                       {"largest_probed", e.largest_probed()},
                       {"worst_theta", e.worst_theta()},
                       {"best_lower_bound", e.best_lower_bound()},
                       {"completed_stages", static_cast<int>(e.partial.log.stages.size()) - 1},
                       {"passed", false}};
    write_json_file(out_dir / "summary.json", res.summary);
    return res;
  }
  for (const auto& s : built.log.stages)
    if (s.k > 0) std::clog << "stage " << s.k << " n_k=" << s.n_k << " (" << s.wall_clock_seconds << " s)\n";

  write_json_file(out_dir / "coeffs.json", to_json(built.coeffs));
  write_json_file(out_dir / "construction_log.json", to_json(built.log));

  CsvWriter csv(out_dir / "verify_stages.csv", {"k", "theta", "frequency", "threshold", "pass"});
  Json stages = Json::array();
  Json bk = Json::array();
  bool all_pass = true;
  for (int k = 1; k <= params.k_max; ++k) {
    const StageReport rep = verify_stage(built.coeffs, built.log, k, cfg.verify_replicates, seed);
    for (const auto& t : rep.per_theta) csv.row(k, t.theta, t.frequency, rep.threshold, t.pass);
    all_pass = all_pass && rep.pass;
    stages.push_back(to_json(rep));
    if (cfg.bk_replicates > 0)
      bk.push_back(to_json(
          bound_Bk(built.coeffs, k, params.grid, cfg.law, cfg.bk_replicates, params.base, seed)));
  }
  const auto issues = check_log(built.log);
  res.exit_code = all_pass && issues.empty() ? 0 : 1;
  res.summary = Json{{"command", "build-counterexample"},
                     {"completed", true},
                     {"stages", stages},
                     {"bk_reports", bk},
                     {"log_issues", issues},
                     {"l2_norm_squared", built.coeffs.l2_norm_squared()},
                     {"passed", res.exit_code == 0}};
  write_json_file(out_dir / "summary.json", res.summary);
  return res;
}

// --- diverge-report ---------------------------------------------------------

CommandResult cmd_diverge_report(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const CoefficientSeq coeffs = resolve_coeffs(cfg);
  const ThetaGrid grid = cfg.grid.make();
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "theta grid is empty");
  if (cfg.pasts < 1) throw Error(ErrorCode::InvalidArgument, "need at least one past");
  if (!cfg.expect.empty() && cfg.expect != "diverges" && cfg.expect != "bounded" &&
      cfg.expect != "converges")
    throw Error(ErrorCode::InvalidArgument, "expect must be diverges, bounded or converges");

  ExperimentConfig effective = cfg;
  if (effective.n_max == 0)
    effective.n_max = coeffs.has_blocks() ? std::max<std::uint64_t>(coeffs.max_index(), 2)
                                          : std::uint64_t{1} << 20;
  std::set<std::uint64_t> points;
  for (std::uint64_t p = 1; p <= effective.n_max; p *= 2) points.insert(p);
  for (const Block& b : coeffs.blocks())
    if (b.n_k <= effective.n_max) points.insert(b.n_k);
  points.insert(effective.n_max);
  const std::vector<std::uint64_t> schedule(points.begin(), points.end());

  prepare_dir(out_dir);
  echo_config(effective, &coeffs, out_dir);

  const SeedSpec seed{cfg.seed, "diverge", 0, 0};
  const std::size_t depth = static_cast<std::size_t>(coeffs.max_index());
  const std::size_t G = grid.size();
  std::vector<LimitDiagnosis> diag(cfg.pasts * G);
  for (std::size_t p = 0; p < cfg.pasts; ++p) {
    const FrozenPast past = draw_past(cfg.law, depth, seed.with_role("past").with_replicate(p));
    for (std::size_t g = 0; g < G; ++g) diag[p * G + g] = limit_diagnosis(coeffs, past, grid[g], schedule);
  }

  CsvWriter traj(out_dir / "trajectory.csv",
                 {"past", "theta", "n", "re_E0S_over_sqrt_n", "im_E0S_over_sqrt_n", "modulus", "running_max"});
  CsvWriter verdicts(out_dir / "verdicts.csv", {"past", "theta", "verdict", "re_L", "im_L"});
  std::size_t diverges = 0, converges = 0, undecided = 0;
  for (std::size_t p = 0; p < cfg.pasts; ++p) {
    for (std::size_t g = 0; g < G; ++g) {
      const LimitDiagnosis& d = diag[p * G + g];
      for (std::size_t i = 0; i < d.schedule.size(); ++i)
        traj.row(p, grid[g], d.schedule[i], d.normalized[i].real(), d.normalized[i].imag(),
                 std::abs(d.normalized[i]), d.running_max[i]);
      verdicts.row(p, grid[g], to_string(d.verdict), d.limit.real(), d.limit.imag());
      switch (d.verdict) {
        case Verdict::Diverges: ++diverges; break;
        case Verdict::ConvergesTo: ++converges; break;
        case Verdict::Undecided: ++undecided; break;
      }
    }
  }
  const double cells = static_cast<double>(cfg.pasts * G);
  const double diverge_fraction = static_cast<double>(diverges) / cells;

  CommandResult res;
  if (cfg.expect == "diverges")
    res.exit_code = diverge_fraction >= 0.9 ? 0 : 1;
  else if (cfg.expect == "bounded")
    res.exit_code = diverges == 0 ? 0 : 1;
  else if (cfg.expect == "converges")
    res.exit_code = converges == cfg.pasts * G ? 0 : 1;
  res.summary = Json{{"command", "diverge-report"},
                     {"cells", cfg.pasts * G},
                     {"diverges", diverges},
                     {"converges", converges},
                     {"undecided", undecided},
                     {"diverge_fraction", diverge_fraction},
                     {"schedule", schedule},
                     {"expect", cfg.expect},
                     {"passed", res.exit_code == 0}};
  write_json_file(out_dir / "summary.json", res.summary);
  return res;
}

CommandResult run_command(const ExperimentConfig& cfg, const fs::path& out_dir) {
  if (cfg.command == "verify-clt") return cmd_verify_clt(cfg, out_dir);
  if (cfg.command == "build-counterexample") return cmd_build_counterexample(cfg, out_dir);
  if (cfg.command == "diverge-report") return cmd_diverge_report(cfg, out_dir);
  throw Error(ErrorCode::InvalidArgument, "unknown command '" + cfg.command + "'");
}

}  // namespace qfourier
