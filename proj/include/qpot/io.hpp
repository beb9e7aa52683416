// Field CSV dumps, atomic file writes, and the run report.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qpot/madelung.hpp"
#include "qpot/problem_spec.hpp"

#include "json.hpp"

namespace qpot {

/// CSV text with header "x,t,value", row-major by slice, 17 significant
/// digits.
std::string field_csv(const Field& f);

/// Complex fields use the header "x,t,re,im" in the same layout.
std::string complex_field_csv(const ComplexField& f);

/// Writes via a temp file in the same directory followed by a rename, so
/// readers never observe partial content.
void write_text_atomic(const std::string& path, const std::string& content);

/// Loaded CSV dump (real or complex); values are row-major by slice.
struct CsvField {
  std::vector<double> xs, ts;
  std::vector<double> values;  // real part or plain value
  std::vector<double> imag;    // empty for real dumps
  bool is_complex() const { return !imag.empty(); }
  int nx() const { return static_cast<int>(xs.size()); }
  int nt() const { return static_cast<int>(ts.size()); }
};
CsvField load_field_csv(const std::string& path);

/// Deterministic run report: insertion-ordered keys, nlohmann's float
/// serialization (shortest round-trip form).
nlohmann::ordered_json build_report(const ProblemSpec& spec, const PipelineResult& result);

nlohmann::ordered_json slice_report_json(const SolveReport& rep, int slice, double t);

}  // namespace qpot
