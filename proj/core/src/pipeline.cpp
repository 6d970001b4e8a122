#include "cubicdyn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cubicdyn {

using nlohmann::json;

namespace {

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Integer integer_at(const json& v, const std::string& where) {
  if (v.is_number_integer()) {
    if (v.is_number_unsigned()) return Integer(std::to_string(v.get<std::uint64_t>()));
    return Integer(std::to_string(v.get<std::int64_t>()));
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    Integer z;
    const bool digits = !s.empty() && std::all_of(s.begin() + (s[0] == '-' ? 1 : 0), s.end(), ::isdigit) &&
                        s != "-";
    if (digits && z.set_str(s, 10) == 0) return z;
  }
  throw ParseError(where, "expected an integer (JSON integer or decimal string)");
}

long small_int_at(const json& v, const std::string& where, long lo, long hi) {
  if (!v.is_number_integer()) throw ParseError(where, "expected an integer");
  const long x = v.get<long>();
  if (x < lo || x > hi)
    throw ParseError(where, "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
  return x;
}

Exponent exponent_key(const std::string& key, const std::string& where) {
  Exponent e{};
  std::stringstream ss(key);
  std::string part;
  int i = 0, sum = 0;
  while (std::getline(ss, part, ',')) {
    part.erase(std::remove(part.begin(), part.end(), ' '), part.end());
    if (i >= 4 || part.empty() || !std::all_of(part.begin(), part.end(), ::isdigit) || part.size() > 2)
      throw ParseError(where, "exponent key must look like \"eX,eY,eZ,eW\"");
    e[i] = std::stoi(part);
    sum += e[i++];
  }
  if (i != 4) throw ParseError(where, "exponent key must have four entries");
  if (sum != 3) throw ParseError(where, "exponents must sum to 3");
  return e;
}

std::vector<Integer> point_at(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4) throw ParseError(where, "expected an array of 4 integers");
  std::vector<Integer> r;
  bool nonzero = false;
  for (std::size_t i = 0; i < 4; ++i) {
    r.push_back(integer_at(v[i], where + "/" + std::to_string(i)));
    if (r.back() != 0) nonzero = true;
  }
  if (!nonzero) throw ParseError(where, "all coordinates are zero");
  return r;
}

FiberParam fiber_at(const json& v, const std::string& where) {
  if (v.is_number_integer()) return FiberParam::at(Rational(integer_at(v, where)));
  if (v.is_string()) {
    try {
      return parse_fiber_param(v.get<std::string>());
    } catch (const InvalidInput&) {
    }
  }
  throw ParseError(where, "expected a rational \"num/den\", an integer, or \"inf\"");
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ParseError(where + "/" + it.key(), "unknown field");
  }
}

// ---- serialization helpers -------------------------------------------------

json rat(const Rational& q) { return to_string(q); }

json poly(const UniPoly& f) {
  json a = json::array();
  for (const auto& c : f.coeffs()) a.push_back(rat(c));
  return a;
}

json ratfunc(const RatFunc& f) { return {{"num", poly(f.num())}, {"den", poly(f.den())}}; }

json point(const ProjPoint& p) {
  json a = json::array();
  for (const auto& c : p.c) a.push_back(c.get_str());
  return a;
}

json rvec(const Vec<Rational>& v) {
  json a = json::array();
  for (const auto& c : v) a.push_back(rat(c));
  return a;
}

json fiber_param(const FiberParam& t) { return to_string(t); }

json wpoint(const WPoint<Rational>& P) {
  if (P.infinity) return "O";
  return {{"u", rat(P.u)}, {"v", rat(P.v)}};
}

json curve(const ShortCurve<Rational>& E) {
  return {{"A", rat(E.A)}, {"B", rat(E.B)}, {"discriminant", rat(E.discriminant())}};
}

json roots_json(const UniPoly& f) {
  json a = json::array();
  if (f.is_zero()) return a;
  for (const auto& r : rational_roots(f)) a.push_back({{"value", rat(r.value)}, {"multiplicity", r.multiplicity}});
  return a;
}

json opt_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

// A period that may be infinite; null when not computed.
json period_or_inf(bool computed, const std::optional<int>& v) {
  if (!computed) return nullptr;
  return v ? json(*v) : json("inf");
}

json int_list(const std::vector<int>& v) {
  json a = json::array();
  for (int n : v) a.push_back(n);
  return a;
}

std::string timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::ok:
      return "ok";
    case RunStatus::rejected:
      return "rejected";
    case RunStatus::consistency_error:
      return "consistency-error";
  }
  return "unknown";
}

json input_json(const ProblemInput& in) {
  json terms = json::array();
  for (const auto& [e, c] : in.surface)
    terms.push_back({{"exponent", {e[0], e[1], e[2], e[3]}}, {"coefficient", c.get_str()}});
  json ranks = json::array();
  for (const auto& r : in.ranks) ranks.push_back({{"fiber", fiber_param(r.fiber)}, {"rank", r.rank}});
  json x = json::array(), y = json::array();
  for (const auto& c : in.x) x.push_back(c.get_str());
  for (const auto& c : in.y) y.push_back(c.get_str());
  return {{"name", in.name},
          {"surface", terms},
          {"x", x},
          {"y", y},
          {"ranks", ranks},
          {"scan",
           {{"p_max", in.scan.p_max}, {"brute_force_p_max", in.scan.brute_p_max}, {"N_max", in.scan.N}}},
          {"analyze_rejected_pair", in.analyze_rejected_pair}};
}

json verify_json(const AnalysisReport& r) {
  json v;
  if (!r.surface) {
    v["surface"] = {{"smooth", false}, {"evidence", r.errors.empty() ? "" : r.errors.front()}};
    return v;
  }
  v["surface"] = {{"smooth", true},
                  {"evidence", r.surface->smoothness_evidence()},
                  {"provenance", "CubicSurface: rank of the degree-5 Macaulay matrix of the four partial derivatives"}};
  if (!r.pair) return v;
  const GoodPairResult& g = *r.pair;
  json pair;
  const auto& c = g.certificate ? g.certificate : g.candidate;
  pair["x"] = point(ProjPoint(r.input.x));
  pair["y"] = point(ProjPoint(r.input.y));
  pair["z"] = c ? point(c->z) : json(nullptr);
  pair["line_not_tangent"] = c ? c->line_not_tangent : false;
  pair["all_three_good"] = c ? c->all_three_good : false;
  pair["distinct"] = c ? c->distinct : false;
  pair["valid"] = g.certificate.has_value();
  pair["rejection"] = g.certificate ? json(nullptr) : json(g.rejection);
  pair["provenance"] =
      "is_good_pair: z from the restricted parameter cubic (third_intersection); goodness of x, y, z from "
      "absolute irreducibility of the tangent-plane sections";
  v["pair"] = pair;
  v["analysis_forced_on_rejected_pair"] = r.pair_rejected && r.input.analyze_rejected_pair;
  return v;
}

json fibration_json(const AnalysisReport& r) {
  const CubicPencil& P = *r.pencil;
  json M = json::array();
  for (const auto& row : P.M) M.push_back(rvec(row));
  json generic = json::array();
  for (const auto& [e, c] : P.generic.terms())
    generic.push_back({{"exponent", {e[0], e[1], e[2]}}, {"coefficient", ratfunc(c)}});
  json pencil = {{"rows_l1_l2_m1_m2", M},
                 {"fiber_equation", "l2 = t*l1 (t = inf: l1 = 0)"},
                 {"plane_coordinates", "(l1, m1, m2), or (l2, m1, m2) at t = inf"},
                 {"generic_fiber", generic},
                 {"x", rvec(P.x)},
                 {"y", rvec(P.y)},
                 {"z", rvec(P.z)},
                 {"parametrization_attempts", P.attempts},
                 {"provenance", P.provenance}};
  const WeierstrassModel& W = *r.model;
  json exc = json::array();
  for (const auto& t : W.exceptional) exc.push_back(rat(t));
  exc.push_back("inf");
  json w = {{"A", poly(W.A)},
            {"B", poly(W.B)},
            {"discriminant", poly(W.discriminant())},
            {"u_y", ratfunc(W.u_y)},
            {"v_y", ratfunc(W.v_y)},
            {"a", poly(W.a)},
            {"c", poly(W.c)},
            {"d", poly(W.d)},
            {"mu", ratfunc(W.mu)},
            {"exceptional_set", exc},
            {"provenance", W.provenance}};
  return {{"pencil", pencil}, {"weierstrass", w}};
}

json divpoly_json(const DivisionPolynomialSet& D) {
  auto adjustments_for = [&](const char* which, int n) {
    json a = json::array();
    for (const auto& adj : D.adjustments)
      if (adj.n == n && adj.polynomial == which)
        a.push_back({{"t", rat(adj.t0)}, {"inserted", adj.inserted}, {"reason", adj.reason}});
    return a;
  };
  json psi = json::array(), phi = json::array();
  for (int n = 1; n <= D.n_max; ++n) {
    std::string how = n == 1   ? "discriminant of the integral Weierstrass model"
                      : n == 2 ? "numerator of v_y"
                               : "homogenized division-polynomial recursion at u_y, d-power part removed";
    psi.push_back({{"n", n},
                   {"degree", D.psi(n).degree()},
                   {"coefficients", poly(D.psi(n))},
                   {"rational_roots", roots_json(D.psi(n))},
                   {"exceptional_adjustments", adjustments_for("Psi", n)},
                   {"provenance", how}});
    phi.push_back({{"n", n},
                   {"degree", D.phi(n).degree()},
                   {"coefficients", poly(D.phi(n))},
                   {"rational_roots", roots_json(D.phi(n))},
                   {"exceptional_adjustments", adjustments_for("Phi", n)},
                   {"provenance", "squarefree part of Psi_n with the common factors of Psi_d (2 < d < n, d | n) "
                                  "removed"}});
  }
  const UniPoly theta = D.theta(D.n_max);
  const UniPoly tilde = D.theta_tilde(D.n_max);
  return {{"n_max", D.n_max},
          {"psi", psi},
          {"phi", phi},
          {"theta", {{"N", D.n_max}, {"degree", theta.degree()}, {"rational_roots", roots_json(theta)}}},
          {"theta_tilde", {{"N", D.n_max}, {"degree", tilde.degree()}}},
          {"degree_bounds",
           {{"deg_Psi_1", D.psi(1).degree()},
            {"deg_Psi_2", D.psi(2).degree()},
            {"holds", D.psi(1).degree() <= 12 && D.psi(2).degree() <= 3}}}};
}

json periodic_json(const AnalysisReport& r) {
  const PeriodicFiberReport& R = *r.periodic;
  json fibers = json::array(), periodic = json::array();
  for (const auto& f : R.fibers) {
    json zi = json::array(), tor = json::array();
    for (const auto& p : f.z_infinity) zi.push_back(point(p));
    for (const auto& p : f.torsion_points) tor.push_back(point(p));
    fibers.push_back({{"t", fiber_param(f.t0)},
                      {"singular", f.singular},
                      {"singularity", to_string(f.type)},
                      {"order_of_y", f.y_is_singular_point ? json(nullptr)
                                     : f.order_of_y == 0   ? json("inf")
                                                           : json(f.order_of_y)},
                      {"exact_period", f.exact_period},
                      {"y_is_singular_point", f.y_is_singular_point},
                      {"curve", curve(f.curve)},
                      {"y", wpoint(f.y)},
                      {"singular_point", f.singular_point ? point(*f.singular_point) : json(nullptr)},
                      {"z_infinity", zi},
                      {"torsion_points", tor},
                      {"rank", opt_int(f.rank)},
                      {"sources", f.sources},
                      {"provenance",
                       "analyze_periodic_candidate: direct Weierstrass transform of this fiber, order of y by the "
                       "group law (Mazur bound 12)"}});
    if (f.exact_period > 0) periodic.push_back({{"t", fiber_param(f.t0)}, {"exact_period", f.exact_period}});
  }
  json unused = json::array();
  for (const auto& a : r.input.ranks) {
    bool used = false;
    for (const auto& f : R.fibers) used = used || f.t0 == a.fiber;
    if (!used) unused.push_back(fiber_param(a.fiber));
  }
  json ft = json::array(), fa = json::array();
  for (const auto& t : R.period2.from_tangent_line) ft.push_back(fiber_param(t));
  for (const auto& t : R.period2.from_analysis) fa.push_back(fiber_param(t));
  return {{"fibers", fibers},
          {"periodic_fibers", periodic},
          {"unused_rank_annotations", unused},
          {"period2_cross_check",
           {{"applicable", R.period2.applicable},
            {"note", R.period2.note},
            {"from_tangent_line", ft},
            {"from_analysis", fa},
            {"consistent", R.period2.consistent}}},
          {"fixed_points_over_closure",
           {{"count", R.fixed_points_over_closure},
            {"bound", 12},
            {"provenance", "roots of Psi_1 with multiplicity, plus the fiber at infinity if singular"}}}};
}

json mwcheck_json(const std::map<int, Rational>& res) {
  json a = json::array();
  bool all = true;
  for (const auto& [n, v] : res) {
    a.push_back({{"n", n}, {"value", rat(v)}, {"provenance", "Res(Psi_1, Psi_n), Euclidean remainder sequence"}});
    all = all && sgn(v) != 0;
  }
  return {{"resultants", a},
          {"all_nonzero", all},
          {"conclusion", all ? "no singular fiber carries y of order 2, 3, 4 or 6; the finite-generation criterion "
                               "applies"
                             : "some singular fiber meets a torsion section of order 2, 3, 4 or 6; the "
                               "finite-generation criterion does not apply"}};
}

json oracle_summary(const OracleReport& O) {
  return {{"points_compared", O.points_compared},
          {"points_unpredicted", O.points_unpredicted},
          {"mismatches", O.mismatches},
          {"psi_mismatches", O.psi_mismatches},
          {"predicted_periods", int_list(O.predicted_periods)},
          {"realized_periods", int_list(O.realized_periods)},
          {"fixed_point", O.fixed_point},
          {"psi1_root_in_P1", O.psi1_root_in_P1},
          {"theta_bound", opt_int(O.theta_bound)},
          {"consistent", O.consistent()}};
}

std::string scan_range(const ScanOptions& o) {
  return "primes p <= " + std::to_string(o.p_max) + " (brute force for p <= " + std::to_string(o.brute_p_max) +
         "), N = " + std::to_string(o.N);
}

json residual_json(const AnalysisReport& r) {
  const ScanReport& S = *r.scan;
  json primes = json::array();
  for (const auto& rec : S.primes) {
    const bool good = rec.good_reduction;
    json j = {{"p", rec.p},
              {"good_reduction", good},
              {"bad_reason", good ? json(nullptr) : json(rec.bad_reason)},
              {"method", good ? json(rec.method) : json(nullptr)},
              {"ell", period_or_inf(good, rec.ell)},
              {"ell_is_upper_bound", good && rec.method == "theta-roots"},
              {"ell_unrestricted", good && rec.method == "brute-force" ? period_or_inf(true, rec.ell_unrestricted)
                                                                       : json(nullptr)},
              {"theta_bound", opt_int(rec.theta_bound)},
              {"theta_root", good ? json(rec.theta_root) : json(nullptr)},
              {"theta_tilde_root", good ? json(rec.theta_tilde_root) : json(nullptr)},
              {"least_tilde_n", opt_int(rec.least_tilde_n)},
              {"psi1_pattern", good ? int_list(rec.psi1_pattern) : json(nullptr)},
              {"psi1_squarefree_mod_p", good ? json(rec.psi1_squarefree_mod_p) : json(nullptr)},
              {"oracle", rec.oracle ? oracle_summary(*rec.oracle) : json(nullptr)}};
    primes.push_back(j);
  }
  json forbidden = json::array();
  for (const auto& f : forbidden_set(*r.periodic)) {
    json pts = json::array();
    for (const auto& p : f.points) pts.push_back(point(p));
    forbidden.push_back(
        {{"t", fiber_param(f.t0)}, {"whole_fiber", f.whole_fiber}, {"points", pts}, {"reason", f.reason}});
  }
  return {{"options", {{"p_max", S.options.p_max}, {"brute_force_p_max", S.options.brute_p_max}, {"N_max", S.options.N}}},
          {"scan_range", scan_range(S.options)},
          {"forbidden_set", forbidden},
          {"primes", primes},
          {"irreducible_psi1_prime",
           S.irreducible_psi1_prime ? json(*S.irreducible_psi1_prime) : json(nullptr)},
          {"provenance",
           "brute force: functional graph of f on all F_p-points, checked against the group law on each fiber "
           "and Psi_n at regular fibers; theta-roots: least exact period among realizable roots of Phi_n mod p"}};
}

std::string verdict_summary(const Verdict& v) {
  std::string s;
  if (v.rational_periodic_points == "none")
    s = "no Q-periodic points";
  else if (v.rational_periodic_points == "finite")
    s = "finitely many Q-periodic points";
  else if (v.rational_periodic_points == "infinite")
    s = "infinitely many Q-periodic points";
  else
    s = "Q-periodic points undetermined";
  if (v.kind == "SRP" && v.branch == "a")
    s += "; SRP(" + std::to_string(v.n) + ") given rank-0 annotations";
  else if (v.kind == "SRP")
    s += "; SRP(" + std::to_string(v.n) + ") on the scanned primes";
  else if (v.kind == "not-SRP")
    s += "; not SRP on the scanned primes";
  else
    s += "; SRP inconclusive";
  return s;
}

json srp_json(const AnalysisReport& r) {
  const Verdict& v = r.scan->verdict;
  json w = json::array();
  for (auto p : v.witnesses) w.push_back(p);
  json ex = json::array();
  for (auto p : v.exceptions) ex.push_back(p);
  return {{"verdict", v.kind},
          {"n", v.kind == "SRP" ? json(v.n) : json(nullptr)},
          {"branch", v.branch.empty() ? json(nullptr) : json(v.branch)},
          {"witness_primes", w},
          {"exceptional_primes", ex},
          {"reason", v.reason},
          {"rational_periodic_points", v.rational_periodic_points},
          {"summary", verdict_summary(v)},
          {"scan_range", scan_range(r.scan->options)}};
}

std::string dump(json j) { return j.dump(2) + "\n"; }

json envelope(const AnalysisReport& r, const ReportOptions& opt) {
  json out;
  out["schema_version"] = 1;
  out["tool"] = "cubicdyn 0.1.0";
  if (opt.timestamp) out["generated_at"] = timestamp_now();
  out["input"] = input_json(r.input);
  json stages = json::array();
  for (Stage s : r.stages) stages.push_back(to_string(s));
  out["stages"] = stages;
  out["status"] = status_name(r.status);
  out["errors"] = r.errors;
  return out;
}

}  // namespace

// ---- input -------------------------------------------------------------------

ProblemInput parse_input(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line_column(text, e.byte), "malformed JSON");
  }
  if (!j.is_object()) throw ParseError("/", "expected a JSON object");
  reject_unknown(j, "", {"$schema", "name", "description", "surface", "x", "y", "ranks", "scan",
                         "analyze_rejected_pair"});

  ProblemInput in;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ParseError("/name", "expected a string");
    in.name = j["name"].get<std::string>();
  }
  if (!j.contains("surface")) throw ParseError("/surface", "missing field");
  const json& s = j["surface"];
  if (!s.is_object() || s.empty()) throw ParseError("/surface", "expected a non-empty object");
  for (auto it = s.begin(); it != s.end(); ++it) {
    const std::string where = "/surface/" + it.key();
    const Exponent e = exponent_key(it.key(), where);
    if (in.surface.count(e)) throw ParseError(where, "duplicate exponent");
    const Integer c = integer_at(it.value(), where);
    if (c != 0) in.surface[e] = c;
  }
  if (in.surface.empty()) throw ParseError("/surface", "all coefficients are zero");

  for (const char* k : {"x", "y"})
    if (!j.contains(k)) throw ParseError(std::string("/") + k, "missing field");
  in.x = point_at(j["x"], "/x");
  in.y = point_at(j["y"], "/y");

  if (j.contains("ranks")) {
    const json& r = j["ranks"];
    if (!r.is_array()) throw ParseError("/ranks", "expected an array");
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string where = "/ranks/" + std::to_string(i);
      if (!r[i].is_object()) throw ParseError(where, "expected an object {fiber, rank}");
      reject_unknown(r[i], where, {"fiber", "rank"});
      if (!r[i].contains("fiber")) throw ParseError(where + "/fiber", "missing field");
      if (!r[i].contains("rank")) throw ParseError(where + "/rank", "missing field");
      RankAnnotation a;
      a.fiber = fiber_at(r[i]["fiber"], where + "/fiber");
      a.rank = static_cast<int>(small_int_at(r[i]["rank"], where + "/rank", 0, 1000));
      for (const auto& b : in.ranks)
        if (b.fiber == a.fiber) throw ParseError(where, "duplicate annotation for fiber " + to_string(a.fiber));
      in.ranks.push_back(a);
    }
  }
  if (j.contains("scan")) {
    const json& sc = j["scan"];
    if (!sc.is_object()) throw ParseError("/scan", "expected an object");
    reject_unknown(sc, "/scan", {"p_max", "brute_force_p_max", "N_max"});
    if (sc.contains("p_max"))
      in.scan.p_max = static_cast<std::uint32_t>(small_int_at(sc["p_max"], "/scan/p_max", 2, 65521));
    if (sc.contains("brute_force_p_max"))
      in.scan.brute_p_max =
          static_cast<std::uint32_t>(small_int_at(sc["brute_force_p_max"], "/scan/brute_force_p_max", 0, 65521));
    if (sc.contains("N_max")) in.scan.N = static_cast<int>(small_int_at(sc["N_max"], "/scan/N_max", 2, 24));
  }
  if (j.contains("analyze_rejected_pair")) {
    if (!j["analyze_rejected_pair"].is_boolean()) throw ParseError("/analyze_rejected_pair", "expected a boolean");
    in.analyze_rejected_pair = j["analyze_rejected_pair"].get<bool>();
  }
  return in;
}

ProblemInput read_input_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(path, "cannot open input file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_input(ss.str());
}

// ---- stages ------------------------------------------------------------------

std::string to_string(Stage s) {
  switch (s) {
    case Stage::verify:
      return "verify";
    case Stage::fibration:
      return "fibration";
    case Stage::divpoly:
      return "divpoly";
    case Stage::periodic:
      return "periodic";
    case Stage::residual:
      return "residual";
    case Stage::srp:
      return "srp";
    case Stage::mwcheck:
      return "mwcheck";
  }
  return "unknown";
}

std::set<Stage> all_stages() {
  return {Stage::verify, Stage::fibration, Stage::divpoly, Stage::periodic, Stage::residual, Stage::srp,
          Stage::mwcheck};
}

std::set<Stage> parse_stages(const std::string& list) {
  std::set<Stage> out;
  std::stringstream ss(list);
  std::string name;
  std::size_t pos = 0;
  while (std::getline(ss, name, ',')) {
    const std::size_t here = pos;
    pos += name.size() + 1;
    name.erase(std::remove(name.begin(), name.end(), ' '), name.end());
    if (name.empty()) continue;
    bool found = false;
    for (Stage s : all_stages())
      if (to_string(s) == name) {
        out.insert(s);
        found = true;
      }
    if (!found) throw ParseError("--stages, character " + std::to_string(here + 1), "unknown stage '" + name + "'");
  }
  if (out.empty()) throw ParseError("--stages", "no stage given");
  return out;
}

std::set<Stage> with_dependencies(std::set<Stage> s) {
  if (s.count(Stage::srp)) s.insert(Stage::residual);
  if (s.count(Stage::residual)) s.insert(Stage::periodic);
  if (s.count(Stage::periodic) || s.count(Stage::mwcheck)) s.insert(Stage::divpoly);
  if (s.count(Stage::divpoly)) s.insert(Stage::fibration);
  s.insert(Stage::verify);
  return s;
}

GlobalSystem AnalysisReport::global() const {
  if (!surface || !pair || !pencil || !model || !dps || !periodic)
    throw InvalidInput("global system requested before the periodic stage ran");
  const GoodPairCertificate& cert = pair->certificate ? *pair->certificate : *pair->candidate;
  return GlobalSystem{*surface, cert, pair_rejected, *pencil, *model, *dps, *periodic};
}

AnalysisReport run_pipeline(const ProblemInput& input, const std::set<Stage>& requested) {
  AnalysisReport r;
  r.input = input;
  r.stages = with_dependencies(requested);
  auto want = [&](Stage s) { return r.stages.count(s) > 0; };

  try {
    Form<Rational> F(4, 3);
    for (const auto& [e, c] : input.surface) F.set(e, Rational(c));
    try {
      r.surface.emplace(F);
    } catch (const InvalidInput& e) {
      r.status = RunStatus::rejected;
      r.errors.push_back(std::string("surface rejected: ") + e.what());
      return r;
    }
    const ProjPoint x(input.x), y(input.y);
    if (!r.surface->contains(x) || !r.surface->contains(y)) {
      r.status = RunStatus::rejected;
      r.errors.push_back(std::string("pair rejected: ") + (!r.surface->contains(x) ? "x" : "y") +
                         " does not lie on the surface");
      return r;
    }
    if (x == y) {
      r.status = RunStatus::rejected;
      r.errors.push_back("pair rejected: x and y coincide");
      return r;
    }
    r.pair = is_good_pair(*r.surface, x, y);
    if (!r.pair->certificate) {
      r.status = RunStatus::rejected;
      r.pair_rejected = true;
      r.errors.push_back("pair rejected: " + r.pair->rejection);
      if (!input.analyze_rejected_pair || !r.pair->candidate) return r;
      r.errors.push_back("analysis forced on the pencil through L(x, y) (analyze_rejected_pair)");
    }
    const GoodPairCertificate& cert = r.pair->certificate ? *r.pair->certificate : *r.pair->candidate;

    if (!want(Stage::fibration)) return r;
    r.pencil = build_pencil(*r.surface, cert, r.pair_rejected);
    r.model = to_weierstrass(*r.pencil);

    if (!want(Stage::divpoly)) return r;
    r.dps = build_division_set(*r.model, *r.pencil, input.scan.N);

    if (want(Stage::mwcheck)) r.resultants = finite_generation_check(*r.dps);

    if (!want(Stage::periodic)) return r;
    r.periodic = find_periodic_fibers(*r.surface, *r.pencil, *r.model, *r.dps);
    for (auto& f : r.periodic->fibers)
      for (const auto& a : input.ranks)
        if (a.fiber == f.t0) f.rank = a.rank;

    if (!want(Stage::residual)) return r;
    r.scan = residual_scan(r.global(), input.scan);
  } catch (const ConsistencyError& e) {
    r.status = RunStatus::consistency_error;
    r.errors.push_back(std::string("consistency error: ") + e.what());
  } catch (const std::exception& e) {
    r.status = RunStatus::consistency_error;
    r.errors.push_back(std::string("internal error: ") + e.what());
  }
  return r;
}

int exit_code(const AnalysisReport& r) {
  switch (r.status) {
    case RunStatus::ok:
      return 0;
    case RunStatus::rejected:
      return 3;
    case RunStatus::consistency_error:
      return 4;
  }
  return 4;
}

// ---- reports -----------------------------------------------------------------

std::string report_json(const AnalysisReport& r, const ReportOptions& opt) {
  json out = envelope(r, opt);
  auto want = [&](Stage s) { return r.stages.count(s) > 0; };
  out["verify"] = verify_json(r);
  if (want(Stage::fibration) && r.pencil && r.model) out["fibration"] = fibration_json(r);
  if (want(Stage::divpoly) && r.dps) out["divpoly"] = divpoly_json(*r.dps);
  if (want(Stage::mwcheck) && r.resultants) out["mwcheck"] = mwcheck_json(*r.resultants);
  if (want(Stage::periodic) && r.periodic) out["periodic"] = periodic_json(r);
  if (want(Stage::residual) && r.scan) out["residual"] = residual_json(r);
  if (want(Stage::srp) && r.scan) out["srp"] = srp_json(r);
  return dump(out);
}

std::string oracle_json(const AnalysisReport& r, std::uint32_t p, const ReportOptions& opt, bool* consistent) {
  json out = envelope(r, opt);
  out["verify"] = verify_json(r);
  const GlobalSystem G = r.global();
  if (!is_prime(p) || p > 65521) throw InvalidInput("oracle: p must be a prime <= 65521");
  const ReducedSystem R = reduce_mod_p(G, p);
  json o = {{"p", p}, {"good_reduction", R.good_reduction}};
  if (consistent) *consistent = true;
  if (!R.good_reduction) {
    o["bad_reason"] = R.bad_reason;
    out["oracle"] = o;
    return dump(out);
  }
  const OrbitTable T = brute_force_orbits(R);
  const OracleReport O = oracle_check(G, R, T);
  if (consistent) *consistent = O.consistent();
  json pts = json::array();
  for (std::size_t i = 0; i < T.points.size(); ++i) {
    const FpPoint& w = T.points[i];
    const auto tau = fiber_of(R, w);
    json fib = nullptr;
    if (tau) fib = *tau == p ? json("inf") : json(*tau);
    auto fr = R.forbidden_points.find(w);
    pts.push_back({{"point", {w[0], w[1], w[2], w[3]}},
                   {"fiber", fib},
                   {"next", T.next[i] < 0 ? json(nullptr) : json(T.next[i])},
                   {"stop", T.next[i] < 0 ? json(T.stop[i]) : json(nullptr)},
                   {"period", T.period[i]},
                   {"forbidden", static_cast<bool>(T.forbidden[i])},
                   {"forbidden_origin", fr == R.forbidden_points.end() ? json(nullptr) : json(fr->second)},
                   {"predicted_period", O.predicted[i] < 0 ? json(nullptr) : json(O.predicted[i])}});
  }
  json fibers = json::array();
  for (const auto& f : O.fibers)
    fibers.push_back({{"t", f.tau == p ? json("inf") : json(f.tau)},
                      {"irreducible", f.irreducible},
                      {"singular", f.singular},
                      {"y_singular", f.y_singular},
                      {"order_of_y", f.order},
                      {"regular", f.regular},
                      {"psi_min", opt_int(f.psi_min)},
                      {"psi_agrees", f.psi_agrees}});
  json forb_fibers = json::array();
  for (const auto& t : R.forbidden_fibers) forb_fibers.push_back(t ? json(*t) : json("inf"));
  o["point_count"] = T.points.size();
  o["points"] = pts;
  o["fibers"] = fibers;
  o["forbidden_fibers"] = forb_fibers;
  o["ell"] = period_or_inf(true, T.ell);
  o["ell_unrestricted"] = period_or_inf(true, T.ell_unrestricted);
  o["summary"] = oracle_summary(O);
  o["mismatch_details"] = O.mismatch_details;
  o["provenance"] =
      "points: exhaustive enumeration; next: f = t_x t_y over F_p; predicted_period: group law on the fiber "
      "through the point (period 1 at a singular point, 0 on <y>, z + <y> and L(x, y))";
  out["oracle"] = o;
  return dump(out);
}

}  // namespace cubicdyn
