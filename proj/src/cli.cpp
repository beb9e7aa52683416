#include "qpot/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "qpot/golden.hpp"
#include "qpot/io.hpp"
#include "qpot/svgplot.hpp"

namespace qpot {
namespace {

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const SingularSystemError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSingular;
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSpec;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSpec;
  } catch (const EvalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSpec;
  } catch (const GridError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSpec;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
}

}  // namespace

int run_invert(const std::string& spec_path, const std::string& out_dir) {
  return guarded([&] {
    ProblemSpec spec = load_problem_spec(spec_path);
    Field Q = spec.q_field();
    auto [bcl, bcr] = spec.bc_values();
    PipelineResult result = run_pipeline(Q, spec.config(), bcl, bcr);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw SpecError("cannot create output directory '" + out_dir + "'");

    auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
    write_text_atomic(path("report.json"), build_report(spec, result).dump(2) + "\n");
    write_text_atomic(path("R.csv"), field_csv(result.R));
    write_text_atomic(path("p.csv"), field_csv(result.p));
    write_text_atomic(path("S.csv"), field_csv(result.S));
    write_text_atomic(path("V.csv"), field_csv(result.V));
    if (result.psi_emitted)
      write_text_atomic(path("psi.csv"), complex_field_csv(result.psi));
    else
      std::cerr << "note: psi withheld (masked fraction " << result.masked_fraction
                << " > 0.5)\n";
    return kExitOk;
  });
}

int run_eigs(const std::string& spec_path, int n) {
  return guarded([&] {
    ProblemSpec spec = load_problem_spec(spec_path);
    if (n < 1) throw SpecError("eigs: n must be at least 1");
    if (n > spec.grid.nx - 2)
      throw SpecError("eigs: n exceeds the interior node count nx-2");
    Field Q = spec.q_field();
    const double h = spec.grid.h();
    const double beta = spec.params.beta();

    for (int j = 0; j < spec.grid.nt; ++j) {
      std::span<const double> q(&Q.v[std::size_t(j) * spec.grid.nx],
                                static_cast<std::size_t>(spec.grid.nx));
      auto lams = sigma_spectrum(q, h, beta, n);
      double nearest = nearest_sigma_eigenvalue(q, h, beta, 0.0);
      double tol = std::max(1e-10, spec.sigma_tol_rel * operator_norm_bound(q, h, beta, 0.0));

      nlohmann::ordered_json line;
      line["slice"] = j;
      line["t"] = spec.grid.t(j);
      line["eigenvalues"] = lams;
      line["zero_in_sigma"] = std::fabs(nearest) <= tol;
      std::cout << line.dump() << "\n";
    }
    return kExitOk;
  });
}

int run_case(const std::string& name, const std::map<std::string, double>& overrides) {
  return guarded([&] {
    GoldenCase gc = golden_case(name, overrides);
    PipelineResult result = run_golden(gc);
    auto rows = verify_golden(gc, result);

    std::printf("case %s (", gc.name.c_str());
    bool first = true;
    for (const auto& [key, value] : gc.bindings) {
      std::printf("%s%s=%g", first ? "" : " ", key.c_str(), value);
      first = false;
    }
    std::printf(" grid %dx%d)\n", gc.grid.nx, gc.grid.nt);
    std::printf("  %-58s %12s %9s  %s\n", "check", "value", "tol", "status");

    bool all_pass = true;
    for (const auto& r : rows) {
      std::printf("  %-58s %12.4e %9.1e  %s\n", r.label.c_str(), r.value, r.tol,
                  r.pass ? "PASS" : "FAIL");
      all_pass = all_pass && r.pass;
    }
    std::printf("RESULT: %s\n", all_pass ? "PASS" : "FAIL");
    return all_pass ? kExitOk : kExitFail;
  });
}

int run_plot(const std::string& csv_path, const std::string& svg_path) {
  return guarded([&] {
    CsvField data = load_field_csv(csv_path);
    write_text_atomic(svg_path, render_svg(data));
    return kExitOk;
  });
}

}  // namespace qpot
