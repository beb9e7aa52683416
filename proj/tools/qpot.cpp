// qpot: quantum-potential inversion toolkit.

#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qpot/cli.hpp"

namespace {

std::map<std::string, double> parse_overrides(const std::vector<std::string>& sets) {
  std::map<std::string, double> out;
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw CLI::ValidationError("--set expects key=value, got '" + s + "'");
    try {
      std::size_t used = 0;
      double v = std::stod(s.substr(eq + 1), &used);
      if (used != s.size() - eq - 1) throw std::invalid_argument("trailing junk");
      out[s.substr(0, eq)] = v;
    } catch (const std::exception&) {
      throw CLI::ValidationError("--set value in '" + s + "' is not a number");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qpot: build the amplitude, momentum, phase and classical potential of a "
      "generalized quantum theory from a prescribed quantum potential Q(x,t), "
      "and verify the governing residuals"};
  app.require_subcommand(1);

  std::string spec_path, out_dir = "out", csv_path, svg_path, case_name;
  int n_eigs = 5;
  std::vector<std::string> sets;

  auto* invert = app.add_subcommand("invert", "run the inversion pipeline for a spec file");
  invert->add_option("spec", spec_path, "problem spec (JSON)")->required();
  invert->add_option("--out", out_dir, "output directory (default: out)");

  auto* eigs = app.add_subcommand("eigs", "print solvability eigenvalues per slice");
  eigs->add_option("spec", spec_path, "problem spec (JSON)")->required();
  eigs->add_option("-n", n_eigs, "how many eigenvalues (default 5)");

  auto* casecmd = app.add_subcommand("case", "run a built-in golden case and verify it");
  casecmd->add_option("name", case_name,
                      "one of: linear_a0, linear_b0, plane_wave, cos_superposition, "
                      "oscillator_n")
      ->required();
  casecmd->add_option("--set", sets, "override a case parameter, e.g. --set n=3");

  auto* plot = app.add_subcommand("plot", "render a field CSV dump as SVG");
  plot->add_option("csv", csv_path, "field dump (x,t,value or x,t,re,im)")->required();
  plot->add_option("svg", svg_path, "output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  if (invert->parsed()) return qpot::run_invert(spec_path, out_dir);
  if (eigs->parsed()) return qpot::run_eigs(spec_path, n_eigs);
  if (casecmd->parsed()) return qpot::run_case(case_name, parse_overrides(sets));
  if (plot->parsed()) return qpot::run_plot(csv_path, svg_path);
  return qpot::kExitFail;
}
