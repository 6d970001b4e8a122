#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cubicdyn/pipeline.hpp"

using namespace cubicdyn;

namespace {

constexpr int kParseError = 2;

int emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream f(path);
  if (!f) {
    std::cerr << "cubicdyn: cannot write " << path << "\n";
    return kParseError;
  }
  f << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic fibers and residual periodicity of t_x t_y on a smooth cubic surface over Q", "cubicdyn"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::string input, output, stages_opt;
  bool no_timestamp = false;
  app.add_option("--input", input, "problem file (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--output", output, "write the report here instead of stdout");
  app.add_flag("--no-timestamp", no_timestamp, "omit generated_at, for byte-identical reports");
  app.add_option("--stages", stages_opt,
                 "comma-separated subset of verify,fibration,divpoly,periodic,residual,srp,mwcheck");

  int nmax = 0;
  std::uint32_t pmax = 0, brute_pmax = 0, prime = 0;
  bool brute_given = false;

  auto* verify = app.add_subcommand("verify", "check smoothness and the good pair");
  auto* fibration = app.add_subcommand("fibration", "pencil through L(x, y) and its Weierstrass model");
  auto* divpoly = app.add_subcommand("divpoly", "division polynomials Psi_n, Phi_n");
  divpoly->add_option("--nmax", nmax, "largest n")->check(CLI::Range(2, 24));
  auto* periodic = app.add_subcommand("periodic-fibers", "rational periodic fibers and their Z_inf points");
  auto* residual = app.add_subcommand("residual-scan", "reduction mod p, brute-force orbits, theta roots");
  residual->add_option("--pmax", pmax, "largest prime scanned")->check(CLI::Range(2, 65521));
  residual->add_option("--brute-pmax", brute_pmax, "largest prime for exhaustive orbits")
      ->check(CLI::Range(0, 65521))
      ->each([&](const std::string&) { brute_given = true; });
  auto* srp = app.add_subcommand("srp-report", "full analysis with the SRP verdict");
  auto* mw = app.add_subcommand("mw-check", "resultants Res(Psi_1, Psi_n), n = 2, 3, 4, 6");
  auto* oracle = app.add_subcommand("oracle", "full orbit table for one prime");
  oracle->add_option("--prime", prime, "the prime")->required()->check(CLI::Range(2, 65521));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kParseError;
  }

  try {
    ProblemInput in = read_input_file(input);
    if (nmax) in.scan.N = nmax;
    if (pmax) in.scan.p_max = pmax;
    if (brute_given) in.scan.brute_p_max = brute_pmax;

    std::set<Stage> stages = all_stages();
    if (*verify) stages = {Stage::verify};
    if (*fibration) stages = {Stage::fibration};
    if (*divpoly) stages = {Stage::divpoly};
    if (*periodic) stages = {Stage::periodic};
    if (*residual) stages = {Stage::residual};
    if (*srp) stages = all_stages();
    if (*mw) stages = {Stage::mwcheck};
    if (*oracle) stages = {Stage::periodic};
    if (!stages_opt.empty()) {
      stages = parse_stages(stages_opt);
      if (*oracle) stages.insert(Stage::periodic);
    }
    if (*oracle && !is_prime(prime)) throw ParseError("--prime", std::to_string(prime) + " is not prime");

    const AnalysisReport report = run_pipeline(in, stages);
    const ReportOptions opt{!no_timestamp};
    if (*oracle && report.periodic) {
      bool consistent = true;
      const std::string text = oracle_json(report, prime, opt, &consistent);
      if (emit(text, output)) return kParseError;
      if (!consistent) return 4;
      return exit_code(report);
    }
    if (emit(report_json(report, opt), output)) return kParseError;
    for (const auto& e : report.errors) std::cerr << "cubicdyn: " << e << "\n";
    return exit_code(report);
  } catch (const ParseError& e) {
    std::cerr << "cubicdyn: " << e.what() << "\n";
    return kParseError;
  }
}
