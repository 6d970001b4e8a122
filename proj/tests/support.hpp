#ifndef CUBICDYN_TESTS_SUPPORT_HPP
#define CUBICDYN_TESTS_SUPPORT_HPP

#include <random>
#include <set>
#include <string>
#include <vector>

#include "cubicdyn/pipeline.hpp"

namespace testing_support {

using namespace cubicdyn;

inline std::string fixture(const std::string& name) { return std::string(CUBICDYN_FIXTURE_DIR) + "/" + name; }

inline ProblemInput load(const std::string& name) { return read_input_file(fixture(name + ".json")); }

inline Form<Rational> surface_form(const ProblemInput& in) {
  Form<Rational> F(4, 3);
  for (const auto& [e, c] : in.surface) F.set(e, Rational(c));
  return F;
}

inline ProjPoint pt(std::initializer_list<long> c) {
  std::vector<Integer> v;
  for (long a : c) v.emplace_back(a);
  return ProjPoint(v);
}

inline UniPoly upoly(std::initializer_list<long> c) {
  std::vector<Rational> v;
  for (long a : c) v.emplace_back(a);
  return UniPoly(v);
}

inline Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

/// Image in F_p of a rational with denominator prime to p.
inline Fp fp(const Rational& r) {
  const std::uint32_t p = Fp::modulus();
  const long n = static_cast<long>(mpz_fdiv_ui(r.get_num_mpz_t(), p));
  const long d = static_cast<long>(mpz_fdiv_ui(r.get_den_mpz_t(), p));
  return Fp(n) / Fp(d);
}

inline Form<Fp> reduce_form(const Form<Rational>& F) {
  Form<Fp> r(F.arity(), F.degree());
  for (const auto& [e, c] : F.terms()) r.set(e, fp(c));
  return r;
}

/// Pipeline through the periodic stage on a fixture, with smaller scan
/// bounds than the defaults.
inline AnalysisReport analyze(const std::string& name, std::set<Stage> stages = {Stage::periodic, Stage::mwcheck}) {
  return run_pipeline(load(name), stages);
}

/// Rational points of S: points on the tangent sections at the seeds (the
/// tangent section is singular at the seed, so lines through it in the
/// tangent plane meet S once more), then third points of random pairs.
/// Heights stay moderate because only early points are combined.
inline std::vector<ProjPoint> surface_points(const CubicSurface& S, const std::vector<ProjPoint>& seeds,
                                             std::size_t count, unsigned seed = 7) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> small(-4, 4);
  std::vector<ProjPoint> pool;
  std::set<ProjPoint> seen(seeds.begin(), seeds.end());
  auto add = [&](const ProjPoint& p) {
    if (seen.insert(p).second) pool.push_back(p);
  };
  const Form<Rational>& F = S.form();
  for (const auto& s : seeds) {
    const Vec<Rational> x = s.to_rational();
    const Vec<Rational> g = S.cubic().gradient(x);
    for (int tries = 0; tries < 40 && pool.size() < count / 2; ++tries) {
      Vec<Rational> d(4);
      for (auto& a : d) a = small(rng);
      // project d into the tangent plane g . d = 0
      Rational gd = dot(g, d), gg = dot(g, g);
      for (int i = 0; i < 4; ++i) d[i] -= gd / gg * g[i];
      bool zero = true;
      for (const auto& a : d) zero = zero && sgn(a) == 0;
      if (zero) continue;
      // F(x + s d) = c2 s^2 + c3 s^3
      const Rational c3 = F(d);
      Vec<Rational> xd(4), xmd(4);
      for (int i = 0; i < 4; ++i) {
        xd[i] = x[i] + d[i];
        xmd[i] = x[i] - d[i];
      }
      const Rational c2 = (F(xd) + F(xmd)) / 2;
      if (sgn(c3) == 0) continue;
      const Rational s = -c2 / c3;
      Vec<Rational> w(4);
      for (int i = 0; i < 4; ++i) w[i] = x[i] + s * d[i];
      if (sgn(s) != 0) add(ProjPoint::from_rational(w));
    }
  }
  std::vector<ProjPoint> base = seeds;
  base.insert(base.end(), pool.begin(), pool.end());
  const std::size_t early = base.size();
  for (int tries = 0; pool.size() < count && tries < 20 * static_cast<int>(count); ++tries) {
    const ProjPoint& a = base[rng() % early];
    const ProjPoint& b = base[rng() % early];
    if (a == b) continue;
    const MapStep r = third_intersection(S, a, b);
    if (r.defined()) add(*r.point);
  }
  if (pool.size() > count) pool.resize(count);
  return pool;
}

/// (A2, B2) = (l^4 A1, l^6 B1) for some rational l, for nonzero A1, B1.
inline bool rescaled(const Rational& A1, const Rational& B1, const Rational& A2, const Rational& B2) {
  if (sgn(A1) == 0 || sgn(B1) == 0) return false;
  const Rational a = A2 / A1, b = B2 / B1;
  if (sgn(a) <= 0) return false;
  const Rational l2 = b / a;  // l^6 / l^4
  if (l2 * l2 != a) return false;
  mpz_class n = l2.get_num(), d = l2.get_den();
  return sgn(l2) > 0 && mpz_perfect_square_p(n.get_mpz_t()) && mpz_perfect_square_p(d.get_mpz_t());
}

}  // namespace testing_support

#endif  // CUBICDYN_TESTS_SUPPORT_HPP
