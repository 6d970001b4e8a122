#include "doctest.h"
#include "support.hpp"

using namespace cubicdyn;
using namespace testing_support;

namespace {

struct Division {
  AnalysisReport r;
  const CubicPencil& pencil() const { return *r.pencil; }
  const WeierstrassModel& W() const { return *r.model; }
  const DivisionPolynomialSet& dps() const { return *r.dps; }
};

Division division(const std::string& name) { return {analyze(name)}; }

const FiberAnalysis* fiber_at(const PeriodicFiberReport& rep, const FiberParam& t) {
  for (const auto& f : rep.fibers)
    if (f.t0 == t) return &f;
  return nullptr;
}

bool is_square(const Fp& a) { return a == Fp(0) || a.pow((Fp::modulus() - 1) / 2) == Fp(1); }

// Order of a point of E(F_p-bar) with the given u-coordinate, read off E or
// its quadratic twist by F(u).
int order_with_u(const Fp& A, const Fp& B, const Fp& u) {
  const Fp F = u * u * u + A * u + B;
  if (F == Fp(0)) return 2;
  if (is_square(F)) {
    Fp v(0);
    for (std::uint32_t s = 1; s < Fp::modulus(); ++s)
      if (Fp(s) * Fp(s) == F) {
        v = Fp(s);
        break;
      }
    return ShortCurve<Fp>{A, B}.order(WPoint<Fp>::affine(u, v), 4 * static_cast<int>(Fp::modulus()));
  }
  const ShortCurve<Fp> twist{A * F * F, B * F * F * F};
  return twist.order(WPoint<Fp>::affine(F * u, F * F), 4 * static_cast<int>(Fp::modulus()));
}

}  // namespace

TEST_CASE("division polynomials of a constant curve") {
  const auto f = psi_sequence(q(0), q(4), 5);
  CHECK(f[1] == upoly({1}));
  CHECK(f[2] == upoly({2}));
  CHECK(f[3] == upoly({0, 48, 0, 0, 3}));
  CHECK(sgn(f[3](q(0))) == 0);
  CHECK_THROWS_AS(psi_sequence(q(0), q(4), 2), InvalidInput);
}

TEST_CASE("roots of psi_n are the u-coordinates of points of order dividing n, over F_p") {
  std::mt19937 rng(8);
  for (std::uint32_t p : {11u, 13u, 17u, 19u, 23u}) {
    ScopedPrime sp(p);
    std::uniform_int_distribution<std::uint32_t> c(0, p - 1);
    for (int curve = 0; curve < 3; ++curve) {
      Fp A(c(rng)), B(c(rng));
      if (ShortCurve<Fp>{A, B}.singular()) continue;
      const auto f = psi_sequence(A, B, 12);
      for (std::uint32_t a = 0; a < p; ++a) {
        const Fp u(a);
        const int ord = order_with_u(A, B, u);
        for (int n = 3; n <= 12; ++n) {
          CAPTURE(p);
          CAPTURE(n);
          CHECK((f[n](u) == Fp(0)) == (ord >= 3 && n % ord == 0));
        }
      }
    }
  }
}

TEST_CASE("torsion points over Q lie on psi_n, on the curve or its twist") {
  // y^2 = x^3 + 4: (0, 2) has order 3; y^2 = x^3 - 4x has full 2-torsion
  for (const auto& [A, B] : std::vector<std::pair<long, long>>{{0, 4}, {-4, 0}, {-3024, 81216}, {-36, 0}}) {
    const auto f = psi_sequence(q(A), q(B), 12);
    for (int n = 3; n <= 12; ++n) {
      if (n == 11) continue;
      for (const auto& root : rational_roots(f[n])) {
        const Rational u = root.value;
        const Rational F = u * u * u + q(A) * u + q(B);
        REQUIRE(sgn(F) != 0);
        const ShortCurve<Rational> twist{q(A) * F * F, q(B) * F * F * F};
        const int ord = twist.order(WPoint<Rational>::affine(F * u, F * F), 12);
        CAPTURE(n);
        CHECK(ord >= 3);
        CHECK(n % ord == 0);
      }
    }
  }
  CHECK(sgn(psi_sequence(q(-3024), q(81216), 3)[3](q(12))) == 0);
}

TEST_CASE("division set of the W = tX pencil") {
  const Division d = division("period2_rank0");
  const UniPoly delta = upoly({-6912, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 4096});
  CHECK(monic(d.dps().psi(1)) == monic(delta));
  CHECK(d.dps().psi(2).degree() == 0);
  CHECK(sgn(d.dps().psi(3)(q(0))) == 0);
  CHECK(sgn(d.dps().phi(3)(q(0))) == 0);
  for (int n = 4; n <= 12; ++n) {
    for (const auto& r : rational_roots(d.dps().phi(n))) {
      CAPTURE(n);
      CHECK(sgn(r.value) != 0);
    }
  }
  const auto res = finite_generation_check(d.dps());
  REQUIRE(res.size() == 4);
  for (const auto& [n, v] : res) CHECK(sgn(v) != 0);
}

TEST_CASE("order of y on individual fibers") {
  const Division d = division("period2_rank0");
  CHECK(fiber_order_of_y(d.pencil(), d.W(), FiberParam::at(q(0))) == 3);
  CHECK(fiber_order_of_y(d.pencil(), d.W(), FiberParam::infinity()) == 2);
  CHECK(fiber_order_of_y(d.pencil(), d.W(), FiberParam::at(q(1))) == 0);

  const Division e = division("period3_rank1");
  CHECK(fiber_order_of_y(e.pencil(), e.W(), FiberParam::at(q(0))) == 3);

  const Division g = division("nodal_fiber");
  CHECK(fiber_order_of_y(g.pencil(), g.W(), FiberParam::at(q(0))) == 2);
}

TEST_CASE("periodic fibers of the W = tX pencil") {
  const Division d = division("period2_rank0");
  const PeriodicFiberReport& rep = *d.r.periodic;
  std::vector<std::pair<FiberParam, int>> periodic;
  for (const auto& f : rep.fibers)
    if (f.exact_period > 0) periodic.emplace_back(f.t0, f.exact_period);
  REQUIRE(periodic.size() == 2);
  CHECK(periodic[0].first == FiberParam::at(q(0)));
  CHECK(periodic[0].second == 3);
  CHECK(periodic[1].first == FiberParam::infinity());
  CHECK(periodic[1].second == 2);
  for (const auto& f : rep.fibers) CHECK_FALSE(f.singular);
  CHECK(rep.fixed_points_over_closure == 12);
  CHECK(rep.period2.consistent);
}

TEST_CASE("Z_inf on periodic fibers") {
  const Division d = division("period2_rank0");
  const auto& c = *d.r.pair->certificate;

  const FiberAnalysis* f0 = fiber_at(*d.r.periodic, FiberParam::at(q(0)));
  REQUIRE(f0);
  std::set<ProjPoint> z0(f0->z_infinity.begin(), f0->z_infinity.end());
  CHECK(z0 == std::set<ProjPoint>{c.x, c.y, c.z});

  // rank 0 and torsion (Z/2)^2: all four rational points are in Z_inf
  const FiberAnalysis* inf = fiber_at(*d.r.periodic, FiberParam::infinity());
  REQUIRE(inf);
  std::set<ProjPoint> zi(inf->z_infinity.begin(), inf->z_infinity.end());
  std::set<ProjPoint> torsion(inf->torsion_points.begin(), inf->torsion_points.end());
  CHECK(zi.size() == 4);
  CHECK(zi == torsion);

  const DirectFiber D = analyze_fiber(d.pencil(), FiberParam::at(q(1)));
  CHECK_THROWS_AS(z_infinity_on_fiber(d.pencil(), D, 0), InvalidInput);
}

TEST_CASE("finite generation resultants") {
  const Division g = division("nodal_fiber");
  const auto res = finite_generation_check(g.dps());
  REQUIRE(res.count(2));
  CHECK(sgn(res.at(2)) == 0);
  CHECK(gcd(g.dps().psi(1), g.dps().psi(2)).degree() > 0);
}

TEST_CASE("degree bounds, fixed points and root/order agreement on every fixture") {
  for (const std::string name : {"period3_rank0", "period2_rank0", "period3_rank1", "nodal_fiber"}) {
    CAPTURE(name);
    const Division d = division(name);
    CHECK(d.dps().psi(1).degree() <= 12);
    CHECK(d.dps().psi(2).degree() <= 3);
    CHECK(d.r.periodic->fixed_points_over_closure <= 12);
    CHECK(d.r.periodic->period2.consistent);
    UniPoly theta = UniPoly::constant(1);
    for (int n = 1; n <= 12; ++n) theta = theta * d.dps().phi(n);
    CHECK(monic(theta) == monic(d.dps().theta(12)));

    for (int n = 3; n <= 12; ++n) {
      for (const auto& r : rational_roots(d.dps().phi(n))) {
        CAPTURE(n);
        CHECK(fiber_order_of_y(d.pencil(), d.W(), FiberParam::at(r.value)) == n);
      }
    }
    std::mt19937 rng(21);
    std::uniform_int_distribution<int> num(-12, 12), den(1, 6);
    for (int trial = 0; trial < 40; ++trial) {
      const Rational t0 = trial == 0 ? q(0) : q(num(rng), den(rng));
      const auto ord = fiber_order_of_y(d.pencil(), d.W(), FiberParam::at(t0));
      if (ord && *ord >= 3) CHECK(sgn(d.dps().phi(*ord)(t0)) == 0);
    }
  }
}

TEST_CASE("Psi_n specializes to psi_n of the fiber at u_y") {
  for (const std::string name : {"period2_rank0", "period3_rank1"}) {
    CAPTURE(name);
    const Division d = division(name);
    std::set<int> adjusted;
    for (const auto& a : d.dps().adjustments)
      if (a.polynomial == "Psi") adjusted.insert(a.n);
    std::mt19937 rng(4);
    std::uniform_int_distribution<int> num(-9, 9), den(1, 4);
    std::map<int, std::optional<Rational>> ratio;
    int used = 0;
    for (int trial = 0; trial < 80 && used < 20; ++trial) {
      const Rational t0 = q(num(rng), den(rng));
      if (d.W().is_exceptional(FiberParam::at(t0)) || sgn(d.W().d(t0)) == 0) continue;
      ++used;
      const auto f = psi_sequence(d.W().A(t0), d.W().B(t0), 9);
      const Rational u = d.W().u_y(t0);
      for (int n = 3; n <= 9; ++n) {
        const Rational lhs = d.dps().psi(n)(t0), rhs = f[n](u);
        CHECK((sgn(lhs) == 0) == (sgn(rhs) == 0));
        if (adjusted.count(n) || sgn(rhs) == 0) continue;
        // Psi_n = c * d^(2 deg f_n) * f_n(a / d^2)
        Rational dpow = 1;
        for (int k = 0; k < 2 * f[n].degree(); ++k) dpow *= d.W().d(t0);
        const Rational scaled = lhs / (rhs * dpow);
        auto& r = ratio[n];
        if (!r) r = scaled;
        CHECK(*r == scaled);
      }
    }
    CHECK(used == 20);
  }
}
