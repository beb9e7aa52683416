#include "qpot/io.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qpot {
namespace {

void append_g17(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

std::string field_csv(const Field& f) {
  std::string out = "x,t,value\n";
  out.reserve(out.size() + f.v.size() * 40);
  for (int j = 0; j < f.nt(); ++j)
    for (int i = 0; i < f.nx(); ++i) {
      append_g17(out, f.grid.x(i));
      out += ',';
      append_g17(out, f.grid.t(j));
      out += ',';
      append_g17(out, f.at(j, i));
      out += '\n';
    }
  return out;
}

std::string complex_field_csv(const ComplexField& f) {
  std::string out = "x,t,re,im\n";
  out.reserve(out.size() + f.v.size() * 60);
  for (int j = 0; j < f.nt(); ++j)
    for (int i = 0; i < f.nx(); ++i) {
      append_g17(out, f.grid.x(i));
      out += ',';
      append_g17(out, f.grid.t(j));
      out += ',';
      append_g17(out, f.at(j, i).real());
      out += ',';
      append_g17(out, f.at(j, i).imag());
      out += '\n';
    }
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error("cannot rename '" + tmp.string() + "' to '" + target.string() + "'");
}

CsvField load_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw SpecError("'" + path + "' is empty");
  bool complex_dump;
  if (header == "x,t,value") complex_dump = false;
  else if (header == "x,t,re,im") complex_dump = true;
  else throw SpecError("'" + path + "': unrecognized CSV header '" + header + "'");

  CsvField out;
  std::string line;
  std::vector<std::array<double, 4>> rows;
  int expected_cols = complex_dump ? 4 : 3;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 4> row{0, 0, 0, 0};
    std::istringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= expected_cols)
        throw SpecError("'" + path + "': too many columns at line " + std::to_string(lineno));
      try {
        row[col] = std::stod(cell);
      } catch (...) {
        throw SpecError("'" + path + "': bad number at line " + std::to_string(lineno));
      }
      ++col;
    }
    if (col != expected_cols)
      throw SpecError("'" + path + "': expected " + std::to_string(expected_cols) +
                      " columns at line " + std::to_string(lineno));
    rows.push_back(row);
  }
  if (rows.empty()) throw SpecError("'" + path + "' contains no data rows");

  // Row-major by slice: x cycles fastest. The first slice fixes the x axis.
  double t0 = rows[0][1];
  for (const auto& r : rows) {
    if (r[1] != t0) break;
    out.xs.push_back(r[0]);
  }
  int nx = static_cast<int>(out.xs.size());
  if (nx == 0 || rows.size() % nx != 0)
    throw SpecError("'" + path + "': rows do not form complete slices");
  int nt = static_cast<int>(rows.size()) / nx;
  for (int j = 0; j < nt; ++j) out.ts.push_back(rows[std::size_t(j) * nx][1]);

  out.values.resize(rows.size());
  if (complex_dump) out.imag.resize(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.values[k] = rows[k][2];
    if (complex_dump) out.imag[k] = rows[k][3];
  }
  return out;
}

nlohmann::ordered_json slice_report_json(const SolveReport& rep, int slice, double t) {
  nlohmann::ordered_json j;
  j["slice"] = slice;
  j["t"] = t;
  j["coercive"] = rep.coercive;
  j["margin"] = rep.coercivity_margin;
  j["sigma_distance"] = rep.sigma_distance;
  j["condition_estimate"] = rep.condition_estimate;
  return j;
}

nlohmann::ordered_json build_report(const ProblemSpec& spec, const PipelineResult& result) {
  nlohmann::ordered_json j;
  j["grid"] = {{"x0", spec.grid.x0}, {"x1", spec.grid.x1}, {"nx", spec.grid.nx},
               {"t0", spec.grid.t0}, {"t1", spec.grid.t1}, {"nt", spec.grid.nt}};
  j["physics"] = {{"hbar", spec.params.hbar}, {"m", spec.params.m},
                  {"beta", spec.params.beta()}};
  j["q"] = spec.q_text;
  j["mode"] = spec.reconstruct ? "reconstruct" : "given";

  nlohmann::ordered_json res;
  for (const auto& [name, norms] : result.residual_norms())
    res[name] = {{"linf", norms.linf}, {"l2", norms.l2}};
  j["residuals"] = res;
  j["masked_fraction"] = result.masked_fraction;
  j["v_staticity_defect"] = result.v_staticity_defect;
  j["psi_emitted"] = result.psi_emitted;

  nlohmann::ordered_json slices = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < result.slice_reports.size(); ++k)
    slices.push_back(
        slice_report_json(result.slice_reports[k], static_cast<int>(k),
                          result.R.grid.t(static_cast<int>(k))));
  j["elliptic_slices"] = slices;
  return j;
}

}  // namespace qpot
