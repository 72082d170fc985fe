#include "qfourier/serialization.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "qfourier/error.hpp"

namespace qfourier {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

Json to_json(const SeedSpec& seed) {
  return Json{{"master", seed.master},
              {"role", seed.role},
              {"replicate", seed.replicate},
              {"block", seed.block}};
}

SeedSpec seed_from_json(const Json& j) {
  SeedSpec s;
  s.master = field<std::uint64_t>(j, "master");
  if (j.contains("role")) s.role = field<std::string>(j, "role");
  if (j.contains("replicate")) s.replicate = field<std::uint64_t>(j, "replicate");
  if (j.contains("block")) s.block = field<std::uint64_t>(j, "block");
  return s;
}

Json to_json(const CoefficientSeq& coeffs) {
  Json blocks = Json::array();
  for (const Block& b : coeffs.blocks()) blocks.push_back(Json{{"k", b.k}, {"n_k", b.n_k}, {"a", b.a}});
  return Json{{"support", std::vector<std::uint64_t>(coeffs.support().begin(), coeffs.support().end())},
              {"values", std::vector<double>(coeffs.values().begin(), coeffs.values().end())},
              {"blocks", blocks}};
}

CoefficientSeq coeffs_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "coefficient sequence must be a JSON object");
  auto support = field<std::vector<std::uint64_t>>(j, "support");
  auto values = field<std::vector<double>>(j, "values");
  std::vector<Block> blocks;
  if (j.contains("blocks")) {
    for (const Json& b : j.at("blocks"))
      blocks.push_back({field<int>(b, "k"), field<std::uint64_t>(b, "n_k"), field<double>(b, "a")});
  }
  return CoefficientSeq(std::move(support), std::move(values), std::move(blocks));
}

Json to_json(const ConstructionLog& log) {
  Json stages = Json::array();
  for (const StageRecord& s : log.stages) {
    stages.push_back(Json{{"k", s.k},
                          {"lambda", s.lambda},
                          {"n_k", s.n_k},
                          {"a", s.a},
                          {"tau", s.tau},
                          {"target", s.target},
                          {"success", s.success},
                          {"per_theta_n", s.per_theta_n},
                          {"min_success_lower", s.min_success_lower},
                          {"probe_samples", s.probe_samples}});
  }
  return Json{{"base", log.base},
              {"lambda_mode", std::string(to_string(log.lambda_mode))},
              {"law", std::string(to_string(log.law))},
              {"grid", log.grid},
              {"tail_l2_bound", log.tail_l2_bound},
              {"stages", stages}};
}

ConstructionLog log_from_json(const Json& j) {
  ConstructionLog log;
  log.base = field<double>(j, "base");
  log.lambda_mode = parse_lambda_mode(field<std::string>(j, "lambda_mode"));
  log.law = parse_law(field<std::string>(j, "law"));
  log.grid = field<std::vector<double>>(j, "grid");
  if (j.contains("tail_l2_bound")) log.tail_l2_bound = field<double>(j, "tail_l2_bound");
  for (const Json& s : j.at("stages")) {
    StageRecord r;
    r.k = field<int>(s, "k");
    r.lambda = field<double>(s, "lambda");
    r.n_k = field<std::uint64_t>(s, "n_k");
    r.a = field<double>(s, "a");
    r.tau = field<double>(s, "tau");
    r.target = field<double>(s, "target");
    r.success = field<std::vector<double>>(s, "success");
    r.per_theta_n = field<std::vector<std::uint64_t>>(s, "per_theta_n");
    r.min_success_lower = field<double>(s, "min_success_lower");
    r.probe_samples = field<std::size_t>(s, "probe_samples");
    log.stages.push_back(std::move(r));
  }
  return log;
}

Json to_json(const stats::GofReport& r) {
  return Json{{"ks_statistic", r.ks_statistic}, {"sample_size", r.sample_size},
              {"alpha", r.alpha},               {"critical_value", r.critical_value},
              {"pass", r.pass},                 {"theta", r.theta},
              {"n", r.n},                       {"sigma", r.sigma}};
}

Json to_json(const stats::CorrelationReport& r) {
  return Json{{"correlation", r.correlation},
              {"band", r.band},
              {"sample_size", r.sample_size},
              {"pass", r.pass}};
}

Json to_json(const stats::TypeMatch& r) {
  return Json{{"a_hat", r.a_hat}, {"b_hat", r.b_hat}, {"residual", r.residual}, {"matched", r.matched}};
}

Json to_json(const stats::ShiftLimit& r) {
  Json j{{"converged", r.converged},
         {"c", r.c},
         {"final_spread", r.final_spread},
         {"cauchy_gap", r.cauchy_gap}};
  j["predicted"] = r.predicted ? Json(*r.predicted) : Json(nullptr);
  return j;
}

Json to_json(const BkReport& r) {
  Json per = Json::array();
  for (const auto& t : r.per_theta) {
    per.push_back(Json{{"theta", t.theta},
                       {"mean_max", t.mean_max},
                       {"mean_se", t.mean_se},
                       {"tail_prob", t.tail_prob},
                       {"tail_se", t.tail_se},
                       {"mean_ok", t.mean_ok},
                       {"markov_ok", t.markov_ok},
                       {"tail_ok", t.tail_ok}});
  }
  return Json{{"k", r.k},
              {"base", r.base},
              {"replicates", r.replicates},
              {"truncated", r.truncated},
              {"doob_bound", r.doob_bound},
              {"geometric_bound", r.geometric_bound},
              {"markov_bound", r.markov_bound},
              {"tail_target", r.tail_target},
              {"pass", r.pass},
              {"per_theta", per}};
}

Json to_json(const StageReport& r) {
  Json per = Json::array();
  for (const auto& t : r.per_theta) {
    per.push_back(Json{{"theta", t.theta},
                       {"frequency", t.frequency},
                       {"head_frequency", t.head_frequency},
                       {"tail_frequency", t.tail_frequency},
                       {"pass", t.pass}});
  }
  return Json{{"k", r.k},
              {"threshold", r.threshold},
              {"pasts", r.pasts},
              {"decomposition_consistent", r.decomposition_consistent},
              {"pass", r.pass},
              {"per_theta", per}};
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("invalid JSON: ") + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path) {
  if (!out_) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void write_ensemble_csv(const QuenchedEnsemble& ens, const std::filesystem::path& path) {
  CsvWriter csv(path, {"theta", "replicate", "re_S", "im_S", "re_Y", "im_Y", "re_Z", "im_Z", "n"});
  for (std::size_t g = 0; g < ens.grid.size(); ++g) {
    for (std::size_t r = 0; r < ens.replicates; ++r) {
      const std::size_t at = ens.slot(r, g);
      csv.row(ens.grid[g], r, ens.S[at].real(), ens.S[at].imag(), ens.Y[at].real(), ens.Y[at].imag(),
              ens.Z[at].real(), ens.Z[at].imag(), ens.horizon);
    }
  }
}

void write_conditional_csv(const QuenchedEnsemble& ens, const std::filesystem::path& path) {
  CsvWriter csv(path, {"theta", "n", "re_E0S", "im_E0S"});
  for (std::size_t g = 0; g < ens.grid.size(); ++g)
    csv.row(ens.grid[g], ens.horizon, ens.conditional[g].real(), ens.conditional[g].imag());
}

}  // namespace qfourier
