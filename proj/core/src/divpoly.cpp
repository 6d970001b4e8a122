#include "cubicdyn/divpoly.hpp"

#include <algorithm>
#include <set>

namespace cubicdyn {

UniPoly DivisionPolynomialSet::theta(int N) const {
  UniPoly r = UniPoly::constant(1);
  for (int n = 1; n <= std::min(N, n_max); ++n) r *= Phi[n];
  return r;
}

UniPoly DivisionPolynomialSet::theta_tilde(int N) const {
  UniPoly r = theta(N);
  for (const auto& root : rational_roots(r)) {
    const UniPoly lin{-root.value, Rational(1)};
    for (int k = 0; k < root.multiplicity; ++k) r = exact_div(r, lin);
  }
  return r;
}

namespace {

UniPoly strip_common(const UniPoly& f, const UniPoly& d, int power) {
  if (d.degree() <= 0) return f;
  const UniPoly g = gcd(f, d.pow(power));
  return g.degree() <= 0 ? f : exact_div(f, g);
}

UniPoly linear(const Rational& t0) { return UniPoly{-t0, Rational(1)}; }

UniPoly remove_root(UniPoly f, const Rational& t0) {
  const UniPoly lin = linear(t0);
  while (!f.is_zero() && is_zero(f(t0))) f = exact_div(f, lin);
  return f;
}

}  // namespace

std::vector<UniPoly> surface_division_polynomials(const WeierstrassModel& W, int n_max) {
  if (n_max < 3) throw InvalidInput("division polynomials: n_max must be at least 3");
  const UniPoly &a = W.a, &c = W.c, &d = W.d, &A = W.A, &B = W.B;
  if (c.is_zero()) throw ConsistencyError("division polynomials: y is 2-torsion on the generic fiber");
  const UniPoly d4 = d.pow(4), d6 = d.pow(6), d8 = d.pow(8), d10 = d.pow(10), d12 = d.pow(12);
  const UniPoly a2 = a * a;
  const UniPoly a3 = a2 * a;
  const UniPoly a4 = a2 * a2;
  const UniPoly AA = A * A;

  std::vector<UniPoly> w(std::max(n_max + 1, 5));
  w[0] = UniPoly();
  w[1] = UniPoly::constant(1);
  w[2] = Rational(2) * c;
  w[3] = Rational(3) * a4 + Rational(6) * A * a2 * d4 + Rational(12) * B * a * d6 - AA * d8;
  w[4] = Rational(4) * c *
         (a4 * a2 + Rational(5) * A * a4 * d4 + Rational(20) * B * a3 * d6 - Rational(5) * AA * a2 * d8 -
          Rational(4) * A * B * a * d10 - (Rational(8) * B * B + AA * A) * d12);
  const UniPoly two_c = Rational(2) * c;
  for (int n = 5; n <= n_max; ++n) {
    const int m = n / 2;
    if (n % 2 == 1)
      w[n] = w[m + 2] * w[m].pow(3) - w[m - 1] * w[m + 1].pow(3);
    else
      w[n] = exact_div(w[m] * (w[m + 2] * w[m - 1] * w[m - 1] - w[m - 2] * w[m + 1] * w[m + 1]), two_c);
  }

  std::vector<UniPoly> psi(n_max + 1);
  psi[1] = W.discriminant();
  psi[2] = W.v_y.num();
  for (int n = 3; n <= n_max; ++n) {
    if (w[n].is_zero())
      throw ConsistencyError("division polynomials: Psi_" + std::to_string(n) +
                             " vanishes identically (y is torsion on the generic fiber)");
    if (n % 2 == 1)
      psi[n] = strip_common(w[n], d, n * n - 1);
    else
      psi[n] = strip_common(exact_div(w[n], c), d, n * n - 4);
  }
  return psi;
}

std::optional<int> order_of_y(const DirectFiber& F) {
  if (F.curve.is_singular_point(F.y)) return std::nullopt;
  return F.curve.order(F.y, 12);
}

std::optional<int> fiber_order_of_y(const CubicPencil& pencil, const WeierstrassModel& W, const FiberParam& t0) {
  if (!W.is_exceptional(t0)) {
    const SpecializedFiber s = specialize(pencil, W, t0);
    const ShortCurve<Rational> E{s.A0, s.B0};
    if (E.is_singular_point(s.y)) return std::nullopt;
    return E.order(s.y, 12);
  }
  return order_of_y(analyze_fiber(pencil, t0));
}

namespace {

bool expected_psi_root(int n, bool singular, std::optional<int> ord) {
  if (n == 1) return singular;
  if (!ord || *ord < 2) return false;
  if (n == 2) return *ord == 2;
  if (*ord == 2) return false;
  return n % *ord == 0;
}

bool expected_phi_root(int n, bool singular, std::optional<int> ord) {
  if (n == 1) return singular;
  return ord && *ord == n;
}

void adjust(UniPoly& f, const Rational& t0, bool expected, int n, const char* which,
            std::vector<ExceptionalAdjustment>& log) {
  const bool present = is_zero(f(t0));
  if (present == expected) return;
  ExceptionalAdjustment adj;
  adj.polynomial = which;
  adj.t0 = t0;
  adj.n = n;
  adj.inserted = expected;
  if (expected) {
    f = f * linear(t0);
    adj.reason = std::string(which) + ": fiber computed directly has the property, root inserted";
  } else {
    f = remove_root(f, t0);
    adj.reason = std::string(which) + ": fiber computed directly lacks the property, root removed";
  }
  log.push_back(adj);
}

}  // namespace

DivisionPolynomialSet build_division_set(const WeierstrassModel& W, const CubicPencil& pencil, int n_max) {
  if (n_max < 3 || n_max > 12) throw InvalidInput("build_division_set: n_max must lie in [3, 12]");
  DivisionPolynomialSet D;
  D.n_max = n_max;
  D.Psi = surface_division_polynomials(W, n_max);

  struct Direct {
    Rational t0;
    bool singular;
    std::optional<int> ord;
  };
  std::vector<Direct> direct;
  for (const auto& t0 : W.exceptional) {
    const DirectFiber F = analyze_fiber(pencil, FiberParam::at(t0));
    direct.push_back({t0, F.singular, order_of_y(F)});
  }
  for (const auto& e : direct)
    for (int n = 1; n <= n_max; ++n) adjust(D.Psi[n], e.t0, expected_psi_root(n, e.singular, e.ord), n, "Psi", D.adjustments);

  D.Phi.assign(n_max + 1, UniPoly());
  for (int n = 1; n <= n_max; ++n) {
    UniPoly p = D.Psi[n].degree() <= 0 ? UniPoly::constant(1) : squarefree_part(D.Psi[n]);
    if (n >= 3)
      for (int d = 3; d < n; ++d) {
        if (n % d != 0 || D.Psi[d].degree() <= 0) continue;
        const UniPoly g = gcd(p, D.Psi[d]);
        if (g.degree() > 0) p = exact_div(p, g);
      }
    D.Phi[n] = p;
  }
  for (const auto& e : direct)
    for (int n = 1; n <= n_max; ++n) adjust(D.Phi[n], e.t0, expected_phi_root(n, e.singular, e.ord), n, "Phi", D.adjustments);
  return D;
}

// ---- individual fibers --------------------------------------------------------

namespace {

std::optional<Rational> rational_sqrt(const Rational& q) {
  if (sgn(q) < 0) return std::nullopt;
  if (!mpz_perfect_square_p(q.get_num_mpz_t()) || !mpz_perfect_square_p(q.get_den_mpz_t())) return std::nullopt;
  Integer n, d;
  mpz_sqrt(n.get_mpz_t(), q.get_num_mpz_t());
  mpz_sqrt(d.get_mpz_t(), q.get_den_mpz_t());
  return Rational(n, d);
}

ProjPoint to_surface(const CubicPencil& pencil, const DirectFiber& F, const WPoint<Rational>& P) {
  return ProjPoint::from_rational(pencil.to_space(F.t0, F.backward(P)));
}

std::optional<ProjPoint> singular_point_of(const CubicPencil& pencil, const DirectFiber& F) {
  if (!F.singular) return std::nullopt;
  const Rational u0 = sgn(F.curve.A) == 0 ? Rational(0) : Rational(-3) * F.curve.B / (Rational(2) * F.curve.A);
  try {
    const Vec<Rational> X = F.backward(WPoint<Rational>::affine(u0, Rational(0)));
    for (int i = 0; i < 3; ++i)
      if (!is_zero(F.cubic.partial(i)(X))) return std::nullopt;
    return ProjPoint::from_rational(pencil.to_space(F.t0, X));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<ProjPoint> z_infinity_on_fiber(const CubicPencil& pencil, const DirectFiber& F, int period) {
  if (period < 1) throw InvalidInput("z_infinity_on_fiber: fiber is not periodic");
  std::set<ProjPoint> out;
  const ShortCurve<Rational>& E = F.curve;
  for (int k = 1; k <= period; ++k) {
    const WPoint<Rational> ky = E.mul(k, F.y);
    out.insert(to_surface(pencil, F, E.add(F.y, E.neg(ky))));
    out.insert(to_surface(pencil, F, E.add(F.z, E.neg(ky))));
  }
  return {out.begin(), out.end()};
}

std::vector<ProjPoint> rational_torsion_points(const CubicPencil& pencil, const DirectFiber& F) {
  if (F.singular) throw InvalidInput("rational_torsion_points: fiber is singular");
  const ShortCurve<Rational>& E = F.curve;
  std::set<std::pair<Rational, Rational>> pts;
  const UniPoly cubic{E.B, E.A, Rational(0), Rational(1)};
  for (const auto& r : rational_roots(cubic)) pts.insert({r.value, Rational(0)});
  const auto f = psi_sequence(E.A, E.B, 12);
  for (int n = 3; n <= 12; ++n) {
    if (n == 11) continue;
    for (const auto& r : rational_roots(f[n])) {
      const auto v = rational_sqrt(cubic(r.value));
      if (!v) continue;
      pts.insert({r.value, *v});
      pts.insert({r.value, -*v});
    }
  }
  std::set<ProjPoint> out;
  out.insert(to_surface(pencil, F, WPoint<Rational>::origin()));
  for (const auto& [u, v] : pts) {
    const WPoint<Rational> P = WPoint<Rational>::affine(u, v);
    if (E.order(P, 12) == 0) throw ConsistencyError("rational_torsion_points: root of psi_n is not torsion");
    out.insert(to_surface(pencil, F, P));
  }
  return {out.begin(), out.end()};
}

FiberAnalysis analyze_periodic_candidate(const CubicPencil& pencil, const FiberParam& t0) {
  FiberAnalysis A;
  A.t0 = t0;
  const DirectFiber F = analyze_fiber(pencil, t0);
  A.singular = F.singular;
  A.type = F.type;
  A.curve = F.curve;
  A.y = F.y;
  const std::optional<int> ord = order_of_y(F);
  A.y_is_singular_point = !ord;
  A.order_of_y = ord.value_or(0);
  if (A.order_of_y == 1) throw ConsistencyError("y coincides with x on fiber " + to_string(t0));
  A.exact_period = A.order_of_y >= 2 ? A.order_of_y : 0;
  A.singular_point = singular_point_of(pencil, F);
  if (A.exact_period) {
    A.z_infinity = z_infinity_on_fiber(pencil, F, A.exact_period);
    if (!A.singular) A.torsion_points = rational_torsion_points(pencil, F);
  }
  return A;
}

namespace {

Period2CrossCheck period2_crosscheck(const CubicSurface& S, const CubicPencil& pencil,
                                     const std::vector<FiberAnalysis>& fibers) {
  Period2CrossCheck pc;
  for (const auto& f : fibers)
    if (f.order_of_y == 2) pc.from_analysis.push_back(f.t0);
  const Cubic<Rational>& C = S.cubic();
  const Vec<Rational> gx = C.gradient(pencil.x3), gy = C.gradient(pencil.y3);
  if (proportional(gx, gy)) {
    pc.note = "tangent planes at x and y coincide";
    return pc;
  }
  const Matrix<Rational> ker = kernel(Matrix<Rational>{gx, gy}, 4);
  const Vec<Rational>&p = ker[0], &q = ker[1];
  const Matrix<Rational> four{p, q, pencil.x3, pencil.y3};
  if (rank(four) < 4) {
    pc.note = "the line T_x ∩ T_y meets L(x, y)";
    return pc;
  }
  // g(s) = F(s p + q); the point p itself is the root at infinity.
  std::vector<Rational> vals;
  for (int s = 0; s <= 3; ++s) {
    Vec<Rational> w(4);
    for (int i = 0; i < 4; ++i) w[i] = Rational(s) * p[i] + q[i];
    vals.push_back(C.form()(w));
  }
  // Newton interpolation through s = 0..3.
  UniPoly g;
  {
    std::vector<Rational> dd = vals;
    for (int k = 1; k <= 3; ++k)
      for (int i = 3; i >= k; --i) dd[i] = (dd[i] - dd[i - 1]) / Rational(k);
    UniPoly basis = UniPoly::constant(1);
    for (int k = 0; k <= 3; ++k) {
      g += dd[k] * basis;
      basis *= UniPoly{Rational(-k), Rational(1)};
    }
  }
  if (g.is_zero()) {
    pc.note = "the line T_x ∩ T_y lies on the surface";
    return pc;
  }
  pc.applicable = true;
  std::vector<Vec<Rational>> points;
  for (const auto& r : rational_roots(g)) {
    Vec<Rational> w(4);
    for (int i = 0; i < 4; ++i) w[i] = r.value * p[i] + q[i];
    points.push_back(w);
  }
  if (g.degree() < 3) points.push_back(p);
  std::set<FiberParam> params;
  for (const auto& w : points)
    if (auto t = pencil.parameter_of(w)) params.insert(*t);
  pc.from_tangent_line.assign(params.begin(), params.end());
  std::set<FiberParam> an(pc.from_analysis.begin(), pc.from_analysis.end());
  pc.consistent = an == params;
  return pc;
}

}  // namespace

PeriodicFiberReport find_periodic_fibers(const CubicSurface& S, const CubicPencil& pencil,
                                         const WeierstrassModel& W, const DivisionPolynomialSet& dps) {
  std::map<FiberParam, std::vector<std::string>> cand;
  std::map<FiberParam, int> phi_claim;
  std::set<FiberParam> psi1_roots;
  for (const auto& r : rational_roots(dps.psi(1))) {
    cand[FiberParam::at(r.value)].push_back("root of Psi_1");
    psi1_roots.insert(FiberParam::at(r.value));
  }
  for (int n = 2; n <= dps.n_max; ++n) {
    if (n == 11 || dps.phi(n).degree() <= 0) continue;
    for (const auto& r : rational_roots(dps.phi(n))) {
      const FiberParam t = FiberParam::at(r.value);
      cand[t].push_back("root of Phi_" + std::to_string(n));
      phi_claim[t] = n;
    }
  }
  for (const auto& t0 : W.exceptional) cand[FiberParam::at(t0)].push_back("exceptional parameter");
  cand[FiberParam::infinity()].push_back("fiber at infinity");

  PeriodicFiberReport rep;
  for (const auto& [t, sources] : cand) {
    FiberAnalysis A = analyze_periodic_candidate(pencil, t);
    A.sources = sources;
    if (!W.is_exceptional(t)) {
      auto it = phi_claim.find(t);
      if (it != phi_claim.end() && A.order_of_y != it->second)
        throw ConsistencyError("fiber " + to_string(t) + " is a root of Phi_" + std::to_string(it->second) +
                               " but y has order " + std::to_string(A.order_of_y));
      if (psi1_roots.count(t) && !A.singular)
        throw ConsistencyError("fiber " + to_string(t) + " is a root of Psi_1 but nonsingular");
    }
    if (t.is_infinity() || A.singular || A.exact_period > 0) rep.fibers.push_back(std::move(A));
  }
  rep.fixed_points_over_closure = std::max(0, squarefree_part(dps.psi(1)).degree());
  if (rep.fibers.back().singular) ++rep.fixed_points_over_closure;
  rep.period2 = period2_crosscheck(S, pencil, rep.fibers);
  return rep;
}

std::map<int, Rational> finite_generation_check(const DivisionPolynomialSet& dps) {
  std::map<int, Rational> out;
  for (int n : {2, 3, 4, 6})
    if (n <= dps.n_max) out[n] = resultant(dps.psi(1), dps.psi(n));
  return out;
}

}  // namespace cubicdyn
