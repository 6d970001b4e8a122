// Input parsing, stage orchestration and JSON reports.

#ifndef CUBICDYN_PIPELINE_HPP
#define CUBICDYN_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cubicdyn/residual.hpp"

namespace cubicdyn {

/// Malformed input. position is "line L, column C" for syntax errors and a
/// JSON pointer for semantic ones.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& position, const std::string& what)
      : std::runtime_error("parse error at " + position + ": " + what), position_(position) {}
  const std::string& position() const { return position_; }

 private:
  std::string position_;
};

struct RankAnnotation {
  FiberParam fiber;
  int rank = 0;
};

struct ProblemInput {
  std::string name;
  std::map<Exponent, Integer> surface;
  std::vector<Integer> x, y;
  std::vector<RankAnnotation> ranks;
  ScanOptions scan;
  bool analyze_rejected_pair = false;
};

ProblemInput parse_input(const std::string& text);
ProblemInput read_input_file(const std::string& path);

enum class Stage { verify, fibration, divpoly, periodic, residual, srp, mwcheck };

std::string to_string(Stage s);
/// Comma-separated stage names; throws ParseError on an unknown name.
std::set<Stage> parse_stages(const std::string& list);
/// Adds every stage the given ones depend on.
std::set<Stage> with_dependencies(std::set<Stage> stages);
std::set<Stage> all_stages();

enum class RunStatus { ok, rejected, consistency_error };

/// Results of the stages that ran; later members are empty when their stage
/// was not requested or an earlier stage stopped the run.
struct AnalysisReport {
  ProblemInput input;
  std::set<Stage> stages;
  RunStatus status = RunStatus::ok;
  std::vector<std::string> errors;

  std::optional<CubicSurface> surface;
  std::optional<GoodPairResult> pair;
  bool pair_rejected = false;
  std::optional<CubicPencil> pencil;
  std::optional<WeierstrassModel> model;
  std::optional<DivisionPolynomialSet> dps;
  std::optional<PeriodicFiberReport> periodic;
  std::optional<std::map<int, Rational>> resultants;
  std::optional<ScanReport> scan;

  /// Requires fibration, divpoly and periodic to have run.
  GlobalSystem global() const;
};

AnalysisReport run_pipeline(const ProblemInput& input, const std::set<Stage>& stages);

int exit_code(const AnalysisReport& r);

struct ReportOptions {
  bool timestamp = true;
};

/// Canonical JSON (sorted keys, two-space indent, trailing newline).
std::string report_json(const AnalysisReport& r, const ReportOptions& opt = {});

/// Full orbit table for one prime, with the fiberwise predictions. Sets
/// *consistent to whether brute force agrees with them.
std::string oracle_json(const AnalysisReport& r, std::uint32_t p, const ReportOptions& opt = {},
                        bool* consistent = nullptr);

}  // namespace cubicdyn

#endif  // CUBICDYN_PIPELINE_HPP
