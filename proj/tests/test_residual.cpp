#include <algorithm>

#include "doctest.h"
#include "support.hpp"

using namespace cubicdyn;
using namespace testing_support;

namespace {

const std::vector<std::string> kFixtures{"period3_rank0", "period2_rank0", "period3_rank1", "nodal_fiber"};

GlobalSystem global(const std::string& name) { return analyze(name).global(); }

Form<Fp> surface_mod_p(const ReducedSystem& R) {
  Form<Fp> F(4, 3);
  for (const auto& [e, c] : R.surface) F.set(e, Fp(c));
  return F;
}

Vec<Fp> vec(const FpPoint& a) { return {Fp(a[0]), Fp(a[1]), Fp(a[2]), Fp(a[3])}; }

FpPoint canonical(Vec<Fp> v) {
  normalize(v);
  return {v[0].value(), v[1].value(), v[2].value(), v[3].value()};
}

FpPoint reduce_point(const ProjPoint& P) {
  Vec<Fp> v;
  for (const auto& c : P.c) v.push_back(fp(Rational(c)));
  return canonical(v);
}

int index_of(const OrbitTable& T, const FpPoint& w) {
  auto it = std::lower_bound(T.points.begin(), T.points.end(), w);
  return it != T.points.end() && *it == w ? static_cast<int>(it - T.points.begin()) : -1;
}

Matrix<Fp> to_matrix(const std::array<std::array<std::uint32_t, 4>, 4>& m) {
  Matrix<Fp> r(4, Vec<Fp>(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i][j] = Fp(m[i][j]);
  return r;
}

}  // namespace

TEST_CASE("reduction of the W = tX system") {
  const GlobalSystem G = global("period3_rank0");
  {
    ScopedPrime sp(5);
    const ReducedSystem R = reduce_mod_p(G, 5);
    CHECK(R.good_reduction);
    CHECK(R.x == reduce_point(G.pair.x));
    CHECK(R.y == reduce_point(G.pair.y));
    CHECK(R.z == reduce_point(G.pair.z));
  }
  {
    ScopedPrime sp(2);
    const ReducedSystem R = reduce_mod_p(G, 2);
    CHECK_FALSE(R.good_reduction);
    CHECK_FALSE(R.bad_reason.empty());
  }
  GlobalSystem scaled = G;
  Form<Rational> F = G.surface.form();
  for (const auto& [e, c] : G.surface.form().terms()) F.set(e, 3 * c);
  scaled.surface = CubicSurface(F);
  CHECK_THROWS_AS(reduce_mod_p(scaled, 3), InvalidInput);
}

TEST_CASE("point enumeration") {
  for (const auto& name : kFixtures) {
    CAPTURE(name);
    const GlobalSystem G = global(name);
    for (std::uint32_t p : {3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u}) {
      CAPTURE(p);
      ScopedPrime sp(p);
      const ReducedSystem R = reduce_mod_p(G, p);
      if (!R.good_reduction) continue;
      const auto pts = enumerate_surface_points(R);
      const Form<Fp> F = surface_mod_p(R);
      // chart by chart: W = 1, then W = 0, Z = 1, ...
      std::vector<FpPoint> slow;
      for (int lead = 3; lead >= 0; --lead) {
        const std::uint64_t free = lead;
        std::uint64_t total = 1;
        for (std::uint64_t k = 0; k < free; ++k) total *= p;
        for (std::uint64_t code = 0; code < total; ++code) {
          Vec<Fp> v(4, Fp(0));
          v[lead] = Fp(1);
          std::uint64_t c = code;
          for (int i = 0; i < lead; ++i, c /= p) v[i] = Fp(static_cast<long long>(c % p));
          if (F(v) == Fp(0)) slow.push_back(canonical(v));
        }
      }
      std::sort(slow.begin(), slow.end());
      CHECK(pts == slow);
      const long long n = static_cast<long long>(pts.size()), pp = p;
      CHECK(n >= pp * pp - 7 * pp + 1);
      CHECK(n <= pp * pp + 7 * pp + 1);
      if (p >= 11) CHECK(n > 0);
    }
  }
}

TEST_CASE("minimal residual periods on small primes") {
  {
    const GlobalSystem G = global("period2_rank0");
    ScopedPrime sp(7);
    const ReducedSystem R = reduce_mod_p(G, 7);
    REQUIRE(R.good_reduction);
    const OrbitTable T = brute_force_orbits(R);
    REQUIRE(T.ell);
    CHECK((*T.ell == 1 || *T.ell == 2));
  }
  {
    const GlobalSystem G = global("period3_rank1");
    int good = 0;
    for (std::uint32_t p : {5u, 7u, 11u, 13u, 17u}) {
      ScopedPrime sp(p);
      const ReducedSystem R = reduce_mod_p(G, p);
      if (!R.good_reduction) continue;
      ++good;
      const OrbitTable T = brute_force_orbits(R);
      REQUIRE(T.ell_unrestricted);
      CHECK(*T.ell_unrestricted <= 3);
    }
    CHECK(good >= 3);
  }
  {
    // rational fixed points on the nodal fibers reduce to fixed points
    const GlobalSystem G = global("nodal_fiber");
    for (std::uint32_t p : {5u, 7u, 11u, 13u}) {
      ScopedPrime sp(p);
      const ReducedSystem R = reduce_mod_p(G, p);
      if (!R.good_reduction) continue;
      const OrbitTable T = brute_force_orbits(R);
      CHECK(T.fixed_point);
      CHECK(T.ell_unrestricted == 1);
    }
  }
}

TEST_CASE("brute force agrees with the fiberwise predictions for p <= 31") {
  for (const auto& name : kFixtures) {
    CAPTURE(name);
    const GlobalSystem G = global(name);
    for (std::uint32_t p = 3; p <= 31; p += 2) {
      if (!is_prime(p)) continue;
      CAPTURE(p);
      ScopedPrime sp(p);
      const ReducedSystem R = reduce_mod_p(G, p);
      if (!R.good_reduction) continue;
      const OrbitTable T = brute_force_orbits(R);
      const OracleReport O = oracle_check(G, R, T);
      CHECK(O.consistent());
      CHECK(O.mismatches == 0);
      CHECK(O.psi_mismatches == 0);
      for (int n : O.predicted_periods)
        CHECK(std::find(O.realized_periods.begin(), O.realized_periods.end(), n) != O.realized_periods.end());
      if (T.ell && !O.predicted_periods.empty()) CHECK(*T.ell <= O.predicted_periods.front());
      if (O.psi1_root_in_P1) CHECK(T.fixed_point);
    }
  }
}

TEST_CASE("f_p is translation by y_p on the reduced fibers") {
  for (const std::string name : {"period2_rank0", "period3_rank1"}) {
    CAPTURE(name);
    const GlobalSystem G = global(name);
    for (std::uint32_t p : {11u, 13u, 17u}) {
      CAPTURE(p);
      ScopedPrime sp(p);
      const ReducedSystem R = reduce_mod_p(G, p);
      if (!R.good_reduction) continue;
      const OrbitTable T = brute_force_orbits(R);
      const Form<Fp> S = surface_mod_p(R);
      const Matrix<Fp> M = to_matrix(R.M), Minv = to_matrix(R.Minv);
      int translations = 0, periods = 0;
      for (std::uint32_t tau = 0; tau <= p; ++tau) {
        const bool inf = tau == p;
        const Matrix<Fp> E = fiber_plane_matrix(Minv, inf ? std::nullopt : std::optional<Fp>(Fp(tau)));
        const Cubic<Fp> C(S.substitute(E));
        if (!absolutely_irreducible_k(C.form())) continue;
        const Vec<Fp> xo = plane_coordinates(M, inf, vec(R.x)), yo = plane_coordinates(M, inf, vec(R.y));
        const CurveGroup<Fp> grp(C, xo);
        const int ord = grp.order(yo, 2 * static_cast<int>(p) + 2);
        for (std::size_t i = 0; i < T.points.size(); ++i) {
          const FpPoint& w = T.points[i];
          if (fiber_of(R, w) != tau || T.next[i] < 0) continue;
          const Vec<Fp> wo = plane_coordinates(M, inf, vec(w));
          if (is_zero_vec(C.gradient(wo))) continue;
          const auto sum = grp.add(wo, yo);
          REQUIRE(sum);
          const Vec<Fp> image = plane_coordinates(M, inf, vec(T.points[T.next[i]]));
          CHECK(proportional(*sum, image));
          ++translations;
          if (T.period[i] > 0) {
            CHECK(T.period[i] == ord);
            ++periods;
          }
        }
      }
      CHECK(translations > static_cast<int>(p * p) / 2);
      CHECK(periods > 0);
    }
  }
}

TEST_CASE("forbidden points are reductions of listed global objects") {
  for (const auto& name : kFixtures) {
    CAPTURE(name);
    const GlobalSystem G = global(name);
    const auto fset = forbidden_set(G.periodic);
    for (std::uint32_t p : {11u, 13u, 29u}) {
      ScopedPrime sp(p);
      const ReducedSystem R = reduce_mod_p(G, p);
      if (!R.good_reduction) continue;
      std::set<FpPoint> listed;
      std::set<std::optional<std::uint32_t>> whole;
      for (const auto& f : fset) {
        for (const auto& P : f.points) listed.insert(reduce_point(P));
        if (f.whole_fiber) {
          if (f.t0.is_infinity())
            whole.insert(std::nullopt);
          else
            whole.insert(fp(*f.t0.t).value());
        }
      }
      for (const auto& [w, origin] : R.forbidden_points) {
        CHECK_FALSE(origin.empty());
        CHECK(listed.count(w));
      }
      for (const auto& t : R.forbidden_fibers) CHECK(whole.count(t));
      const OrbitTable T = brute_force_orbits(R);
      for (std::size_t i = 0; i < T.points.size(); ++i) {
        if (!T.forbidden[i]) continue;
        const auto tau = fiber_of(R, T.points[i]);
        const bool on_fiber =
            tau && whole.count(*tau == p ? std::optional<std::uint32_t>() : std::optional<std::uint32_t>(*tau));
        CHECK((on_fiber || R.forbidden_points.count(T.points[i]) > 0));
      }
    }
  }
}

TEST_CASE("rational periodic points stay periodic mod p") {
  const GlobalSystem G = global("period3_rank1");
  // integral points of the W = 0 section: Y^2 = X^3 - 3024X + 81216
  std::vector<ProjPoint> pts;
  for (long X = -70; X <= 400; ++X) {
    const mpz_class rhs = mpz_class(X) * X * X - 3024 * mpz_class(X) + 81216;
    if (rhs < 0 || !mpz_perfect_square_p(rhs.get_mpz_t())) continue;
    const mpz_class Y = sqrt(rhs);
    for (const mpz_class& s : {Y, mpz_class(-Y)}) pts.push_back(ProjPoint({X, s, 1, 0}));
  }
  int periodic = 0;
  for (const auto& w : pts) {
    if (w == G.pair.y || w == G.pair.z) continue;
    REQUIRE(G.surface.contains(w));
    ProjPoint a = w;
    bool defined = true;
    for (int k = 0; k < 3 && defined; ++k) {
      const MapStep s = f_step(G.surface, G.pair, a);
      defined = s.defined();
      if (defined) a = *s.point;
    }
    if (!defined) continue;
    CHECK(a == w);
    ++periodic;
    for (std::uint32_t p : {5u, 7u, 11u, 13u, 17u, 19u, 23u}) {
      ScopedPrime sp(p);
      const ReducedSystem R = reduce_mod_p(G, p);
      if (!R.good_reduction) continue;
      const OrbitTable T = brute_force_orbits(R);
      const int i = index_of(T, reduce_point(w));
      REQUIRE(i >= 0);
      if (T.period[i] > 0) CHECK(3 % T.period[i] == 0);
    }
  }
  CHECK(periodic > 0);
}

TEST_CASE("theta scan on the W = tX system") {
  const GlobalSystem G = global("period2_rank0");
  std::vector<PrimeRecord> records;
  for (std::uint32_t p = 5; p <= 200; ++p) {
    if (!is_prime(p)) continue;
    PrimeRecord r;
    r.p = p;
    r.good_reduction = true;
    records.push_back(r);
  }
  theta_scan(G.dps, 12, records);
  bool tilde_rootless = false;
  for (const auto& r : records) {
    CAPTURE(r.p);
    // t divides Theta: the period-3 fiber at t = 0
    CHECK(r.theta_root);
    tilde_rootless = tilde_rootless || !r.theta_tilde_root;
    int sum = 0;
    for (int d : r.psi1_pattern) sum += d;
    if (r.psi1_squarefree_mod_p) CHECK(sum == 12);
    // 16t^12 - 27 never stays irreducible: see the README
    CHECK(r.psi1_pattern != std::vector<int>{12});
    CHECK(r.psi1_pattern == factor_degrees_mod_p(G.dps.psi(1), r.p).degrees);
  }
  CHECK(tilde_rootless);
}
