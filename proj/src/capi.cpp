#include "qfourier/qfourier.h"

#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "qfourier/error.hpp"
#include "qfourier/experiments.hpp"
#include "qfourier/quenched.hpp"

struct qf_coeffs {
  qfourier::CoefficientSeq seq;
};

struct qf_past {
  qfourier::FrozenPast past;
};

namespace {

thread_local std::string last_error;

qf_status fail(qf_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body` and maps exceptions onto status codes.
template <typename Fn>
qf_status guarded(Fn&& body) {
  try {
    last_error.clear();
    body();
    return QF_OK;
  } catch (const qfourier::Error& e) {
    return fail(static_cast<qf_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(QF_UNKNOWN, "out of memory");
  } catch (const std::exception& e) {
    return fail(QF_UNKNOWN, e.what());
  } catch (...) {
    return fail(QF_UNKNOWN, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

qfourier::InnovationLaw to_law(qf_law law) {
  switch (law) {
    case QF_RADEMACHER: return qfourier::InnovationLaw::Rademacher;
    case QF_STANDARD_NORMAL: return qfourier::InnovationLaw::StandardNormal;
  }
  throw qfourier::Error(qfourier::ErrorCode::InvalidArgument, "unknown innovation law");
}

}  // namespace

extern "C" {

const char* qf_version(void) { return qfourier::kVersion; }

const char* qf_last_error(void) { return last_error.c_str(); }

const char* qf_status_name(qf_status status) {
  switch (status) {
    case QF_OK: return "ok";
    case QF_INVALID_ARGUMENT: return "invalid-argument";
    case QF_WINDOW_TOO_SHORT: return "window-too-short";
    case QF_PAST_TOO_SHALLOW: return "past-too-shallow";
    case QF_INTERNAL_MISMATCH: return "internal-mismatch";
    case QF_SEARCH_BUDGET_EXHAUSTED: return "search-budget-exhausted";
    case QF_DEGENERATE_INPUT: return "degenerate-input";
    case QF_IO: return "io";
    case QF_PARSE: return "parse";
    case QF_INVALID_HANDLE: return "invalid-handle";
    case QF_UNKNOWN: return "unknown";
  }
  return "unknown";
}

void qf_string_free(char* s) { delete[] s; }

qf_status qf_coeffs_from_json(const char* json, qf_coeffs** out) {
  if (!json || !out) return fail(QF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    qfourier::ExperimentConfig cfg;
    cfg.coeffs = qfourier::parse_json(json);
    *out = new qf_coeffs{qfourier::resolve_coeffs(cfg)};
  });
}

qf_status qf_coeffs_from_dense(const double* values, size_t count, qf_coeffs** out) {
  if (!values || !out) return fail(QF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new qf_coeffs{qfourier::CoefficientSeq::from_dense(std::span<const double>(values, count))};
  });
}

qf_status qf_coeffs_to_json(const qf_coeffs* coeffs, char** out_json) {
  if (!coeffs) return fail(QF_INVALID_HANDLE, "null coefficient handle");
  if (!out_json) return fail(QF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out_json = dup_string(qfourier::to_json(coeffs->seq).dump()); });
}

qf_status qf_coeffs_max_index(const qf_coeffs* coeffs, uint64_t* out) {
  if (!coeffs) return fail(QF_INVALID_HANDLE, "null coefficient handle");
  if (!out) return fail(QF_INVALID_ARGUMENT, "null argument");
  *out = coeffs->seq.max_index();
  return QF_OK;
}

void qf_coeffs_destroy(qf_coeffs* coeffs) { delete coeffs; }

qf_status qf_past_draw(qf_law law, size_t depth, uint64_t seed, uint64_t replicate, qf_past** out) {
  if (!out) return fail(QF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const qfourier::SeedSpec spec{seed, "past", replicate, 0};
    *out = new qf_past{qfourier::draw_past(to_law(law), depth, spec)};
  });
}

qf_status qf_past_from_values(qf_law law, const double* back, size_t count, qf_past** out) {
  if (!back || !out) return fail(QF_INVALID_ARGUMENT, "null argument");
  if (count == 0) return fail(QF_INVALID_ARGUMENT, "a frozen past needs at least xi_0");
  return guarded([&] {
    *out = new qf_past{qfourier::FrozenPast(to_law(law), std::vector<double>(back, back + count))};
  });
}

qf_status qf_past_depth(const qf_past* past, size_t* out) {
  if (!past) return fail(QF_INVALID_HANDLE, "null past handle");
  if (!out) return fail(QF_INVALID_ARGUMENT, "null argument");
  *out = past->past.depth();
  return QF_OK;
}

void qf_past_destroy(qf_past* past) { delete past; }

qf_status qf_transfer_fn(const qf_coeffs* coeffs, double theta, double* re, double* im) {
  if (!coeffs) return fail(QF_INVALID_HANDLE, "null coefficient handle");
  if (!re || !im) return fail(QF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto f = qfourier::transfer_fn(coeffs->seq, theta);
    *re = f.real();
    *im = f.imag();
  });
}

qf_status qf_conditional_dft(const qf_coeffs* coeffs, const qf_past* past, uint64_t n, double theta,
                             double* re, double* im) {
  if (!coeffs || !past) return fail(QF_INVALID_HANDLE, "null handle");
  if (!re || !im) return fail(QF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto v = qfourier::conditional_dft(coeffs->seq, past->past, n, theta);
    *re = v.real();
    *im = v.imag();
  });
}

qf_status qf_sigma_theta_squared(const qf_coeffs* coeffs, double theta, double* out) {
  if (!coeffs) return fail(QF_INVALID_HANDLE, "null coefficient handle");
  if (!out) return fail(QF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = qfourier::sigma_theta_squared(coeffs->seq, theta); });
}

qf_status qf_run(const char* command, const char* config_json, const char* out_dir, int* exit_code,
                 char** summary_json) {
  if (!command || !config_json || !out_dir || !exit_code) return fail(QF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    qfourier::Json j = qfourier::parse_json(config_json);
    if (j.is_object() && !j.contains("command")) j["command"] = command;
    qfourier::ExperimentConfig cfg = qfourier::config_from_json(j);
    if (cfg.command != command)
      throw qfourier::Error(qfourier::ErrorCode::InvalidArgument,
                            "config command '" + cfg.command + "' does not match '" + command + "'");
    const auto res = qfourier::run_command(cfg, out_dir);
    *exit_code = res.exit_code;
    if (summary_json) *summary_json = dup_string(res.summary.dump());
  });
}

}  // extern "C"
