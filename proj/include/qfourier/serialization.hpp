#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qfourier/counterexample.hpp"
#include "qfourier/innovations.hpp"
#include "qfourier/linear_process.hpp"
#include "qfourier/quenched.hpp"
#include "qfourier/stats.hpp"

namespace qfourier {

using Json = nlohmann::ordered_json;

// {"master": u64, "role": string, "replicate": u64, "block": u64}
Json to_json(const SeedSpec& seed);
SeedSpec seed_from_json(const Json& j);

// {"support": [...], "values": [...], "blocks": [{"k", "n_k", "a"}, ...]}
Json to_json(const CoefficientSeq& coeffs);
CoefficientSeq coeffs_from_json(const Json& j);

/// Wall-clock times are left out so that logs are byte-reproducible.
Json to_json(const ConstructionLog& log);
ConstructionLog log_from_json(const Json& j);

Json to_json(const stats::GofReport& r);
Json to_json(const stats::CorrelationReport& r);
Json to_json(const stats::TypeMatch& r);
Json to_json(const stats::ShiftLimit& r);
Json to_json(const BkReport& r);
Json to_json(const StageReport& r);

Json parse_json(std::string_view text);
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

/// Comma-separated writer; throws Error(Io) when the file cannot be opened.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((write_cell(cells, first)), ...);
    out_ << '\n';
  }

 private:
  void separator(bool& first) {
    if (!first) out_ << ',';
    first = false;
  }
  void write_cell(double v, bool& first) {
    separator(first);
    out_ << format_number(v);
  }
  void write_cell(const std::string& s, bool& first) {
    separator(first);
    out_ << s;
  }
  void write_cell(std::string_view s, bool& first) {
    separator(first);
    out_ << s;
  }
  void write_cell(const char* s, bool& first) {
    separator(first);
    out_ << s;
  }
  void write_cell(bool b, bool& first) {
    separator(first);
    out_ << (b ? "true" : "false");
  }
  template <typename Int>
    requires std::is_integral_v<Int>
  void write_cell(Int v, bool& first) {
    separator(first);
    out_ << v;
  }

  std::ofstream out_;
};

// theta, replicate, re_S, im_S, re_Y, im_Y, re_Z, im_Z, n
void write_ensemble_csv(const QuenchedEnsemble& ens, const std::filesystem::path& path);
// theta, n, re_E0S, im_E0S
void write_conditional_csv(const QuenchedEnsemble& ens, const std::filesystem::path& path);

}  // namespace qfourier
