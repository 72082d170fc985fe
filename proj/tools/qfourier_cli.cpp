// qfourier command line: quenched CLT sweeps, the block counterexample
// construction and divergence reports. Talks to the library through the C API
// only.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qfourier/qfourier.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFormats = R"(Artifacts (all commands write config.json and summary.json):
  verify-clt:
    clt_sweep.csv       theta,n,ks,pass,corr   (ks = max of the Re/Im KS statistics)
    conditional.csv     theta,n,re_E0S,im_E0S
    ensemble_n<n>.csv   theta,replicate,re_S,im_S,re_Y,im_Y,re_Z,im_Z,n
  build-counterexample:
    coeffs.json, construction_log.json, verify_stages.csv (k,theta,frequency,threshold,pass)
  diverge-report:
    trajectory.csv      past,theta,n,re_E0S_over_sqrt_n,im_E0S_over_sqrt_n,modulus,running_max
    verdicts.csv        past,theta,verdict,re_L,im_L
Exit status: 0 pass, 1 fail, 2 search budget exhausted, 3 usage/config/IO error.
See FORMATS.md for details.)";

struct Inline {
  std::string config_path;
  std::string coeffs;
  std::string law;
  std::string theta_grid;
  std::string n;
  std::optional<std::size_t> M;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> past_depth;
  std::string out;

  std::optional<int> k_max;
  std::optional<double> base;
  std::string lambda_mode;
  std::optional<std::uint64_t> max_n;
  std::optional<std::size_t> pasts;
  std::optional<std::uint64_t> n_max;
  std::string expect;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) parts.push_back(item);
  return parts;
}

// "interior:16", "equispaced:64" or a comma list of angles.
Json parse_grid(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    return Json{{"kind", spec.substr(0, colon)}, {"count", std::stoull(spec.substr(colon + 1))}};
  }
  std::vector<double> points;
  for (const auto& p : split(spec, ',')) points.push_back(std::stod(p));
  return Json{{"kind", "points"}, {"points", points}};
}

Json merged_config(const std::string& command, const Inline& in) {
  Json cfg = in.config_path.empty() ? Json::object() : Json::parse(slurp(in.config_path));
  cfg["command"] = command;
  if (!in.coeffs.empty()) {
    cfg.erase("coeffs");
    cfg.erase("coeffs_file");
    if (in.coeffs.front() == '{')
      cfg["coeffs"] = Json::parse(in.coeffs);
    else
      cfg["coeffs_file"] = in.coeffs;
  }
  if (!in.law.empty()) cfg["law"] = in.law;
  if (!in.theta_grid.empty()) cfg["theta_grid"] = parse_grid(in.theta_grid);
  if (!in.n.empty()) {
    std::vector<std::uint64_t> ns;
    for (const auto& p : split(in.n, ',')) ns.push_back(std::stoull(p));
    cfg["n"] = ns;
  }
  if (in.M) cfg["M"] = *in.M;
  if (in.seed) cfg["seed"] = *in.seed;
  if (in.past_depth) cfg["past_depth"] = *in.past_depth;
  if (in.k_max) cfg["k_max"] = *in.k_max;
  if (in.base) cfg["base"] = *in.base;
  if (!in.lambda_mode.empty()) cfg["lambda_mode"] = in.lambda_mode;
  if (in.max_n) cfg["max_n"] = *in.max_n;
  if (in.pasts) cfg["pasts"] = *in.pasts;
  if (in.n_max) cfg["n_max"] = *in.n_max;
  if (!in.expect.empty()) cfg["expect"] = in.expect;
  return cfg;
}

void add_common(CLI::App* sub, Inline& in) {
  sub->add_option("--config", in.config_path, "JSON config file; inline flags override its fields");
  sub->add_option("--coeffs", in.coeffs, "coefficient JSON file, or inline JSON object");
  sub->add_option("--law", in.law, "innovation law: rademacher | normal");
  sub->add_option("--theta-grid", in.theta_grid, "interior:<count>, equispaced:<count> or a,b,c");
  sub->add_option("--M", in.M, "replicates (futures) per grid point");
  sub->add_option("--seed", in.seed, "master seed");
  sub->add_option("--out", in.out, "output directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quenched DFTs of linear processes"};
  app.footer(kFormats);
  app.set_version_flag("--version", std::string(qf_version()));
  app.require_subcommand(1);

  Inline in;
  auto* clt = app.add_subcommand("verify-clt", "quenched CLT sweep over a theta grid");
  add_common(clt, in);
  clt->add_option("--n", in.n, "comma-separated horizons");
  clt->add_option("--past-depth", in.past_depth, "depth of the frozen past");

  auto* build = app.add_subcommand("build-counterexample", "inductive block construction");
  add_common(build, in);
  build->add_option("--k-max", in.k_max, "number of stages");
  build->add_option("--base", in.base, "threshold base (> 1)");
  build->add_option("--lambda-mode", in.lambda_mode, "deterministic | mc-quantile");
  build->add_option("--max-n", in.max_n, "search budget for n_k");

  auto* diverge = app.add_subcommand("diverge-report", "E_0 S_n / sqrt(n) trajectories and verdicts");
  add_common(diverge, in);
  diverge->add_option("--pasts", in.pasts, "number of frozen pasts");
  diverge->add_option("--n-max", in.n_max, "largest n on the schedule");
  diverge->add_option("--expect", in.expect, "diverges | bounded | converges (sets the exit status)");

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  Json cfg;
  try {
    cfg = merged_config(command, in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }

  int exit_code = 0;
  char* summary = nullptr;
  const qf_status st = qf_run(command.c_str(), cfg.dump().c_str(), in.out.c_str(), &exit_code, &summary);
  if (st != QF_OK) {
    std::cerr << "error (" << qf_status_name(st) << "): " << qf_last_error() << '\n';
    return 3;
  }
  Json s = Json::parse(summary);
  qf_string_free(summary);
  s.erase("cells");
  s.erase("stages");
  s.erase("bk_reports");
  std::cout << s.dump() << '\n';
  return exit_code;
}
