#include "cubicdyn/fibration.hpp"

#include <algorithm>
#include <set>

namespace cubicdyn {

std::string to_string(const FiberParam& p) { return p.is_infinity() ? "inf" : to_string(*p.t); }

FiberParam parse_fiber_param(const std::string& s) {
  if (s == "inf" || s == "infinity") return FiberParam::infinity();
  return FiberParam::at(parse_rational(s));
}

std::string to_string(SingularityType s) {
  switch (s) {
    case SingularityType::none:
      return "none";
    case SingularityType::node:
      return "node";
    case SingularityType::cusp:
      return "cusp";
  }
  return "unknown";
}

// ---- pencil -----------------------------------------------------------------

Matrix<Rational> CubicPencil::plane(const FiberParam& t) const { return fiber_plane_matrix(Minv, t.t); }

Form<Rational> CubicPencil::fiber(const FiberParam& t) const { return surface.substitute(plane(t)); }

std::optional<FiberParam> CubicPencil::parameter_of(const Vec<Rational>& w) const {
  const Vec<Rational> l = mat_vec(M, w);
  if (is_zero(l[0]) && is_zero(l[1])) return std::nullopt;
  if (is_zero(l[0])) return FiberParam::infinity();
  return FiberParam::at(l[1] / l[0]);
}

Vec<Rational> CubicPencil::to_plane(const FiberParam& t, const Vec<Rational>& w) const {
  Vec<Rational> X = plane_coordinates(M, t.is_infinity(), w);
  normalize(X);
  return X;
}

Vec<Rational> CubicPencil::to_space(const FiberParam& t, const Vec<Rational>& X) const {
  Vec<Rational> w = mat_vec(plane(t), X);
  normalize(w);
  return w;
}

namespace {

bool fiber_nonsingular(const Form<Rational>& C, const Vec<Rational>& x) {
  try {
    WeierstrassTransform<Rational> wt(C, {x[0], x[1], x[2]});
    return !wt.curve().singular();
  } catch (const InvalidInput&) {
    return false;
  }
}

}  // namespace

CubicPencil build_pencil(const CubicSurface& S, const GoodPairCertificate& cert, bool allow_rejected) {
  if (!cert.valid() && !allow_rejected) throw InvalidInput("build_pencil: certificate is not valid");
  if (cert.x == cert.y) throw InvalidInput("build_pencil: x and y coincide");
  CubicPencil P;
  P.surface = S.form();
  P.x3 = cert.x.to_rational();
  P.y3 = cert.y.to_rational();
  P.z3 = cert.z.to_rational();

  const Matrix<Rational> xy{P.x3, P.y3};
  const Echelon<Rational> e = rref(xy);
  const Matrix<Rational> ker = kernel(xy, 4);
  Vec<Rational> m1(4, 0), m2(4, 0);
  m1[e.pivots[0]] = 1;
  m2[e.pivots[1]] = 1;
  const Vec<Rational> l1 = ker[0], l2 = ker[1];

  for (int k = 0; k <= 12; ++k) {
    Vec<Rational> l1k(4);
    for (int i = 0; i < 4; ++i) l1k[i] = l1[i] + Rational(k) * l2[i];
    P.M = {l1k, l2, m1, m2};
    auto inv = inverse(P.M);
    if (!inv) throw ConsistencyError("build_pencil: dependent linear forms");
    P.Minv = *inv;
    P.x = P.to_plane(FiberParam::at(0), P.x3);
    P.y = P.to_plane(FiberParam::at(0), P.y3);
    P.z = P.to_plane(FiberParam::at(0), P.z3);
    P.attempts = k + 1;
    if (!fiber_nonsingular(P.fiber(FiberParam::infinity()), P.x)) continue;

    auto lin = [](const Vec<Rational>& v) {
      static const char* names[] = {"X", "Y", "Z", "W"};
      std::string s;
      for (int i = 0; i < 4; ++i) {
        if (sgn(v[i]) == 0) continue;
        if (!s.empty()) s += sgn(v[i]) > 0 ? " + " : " - ";
        else if (sgn(v[i]) < 0) s += "-";
        Rational a = abs(v[i]);
        if (a != 1) s += a.get_str() + "*";
        s += names[i];
      }
      return s;
    };
    P.provenance = "fibers l2 = t*l1 with l1 = " + lin(l1k) + ", l2 = " + lin(l2) +
                   "; plane coordinates (l1, m1, m2) = (" + lin(l1k) + ", " + lin(m1) + ", " + lin(m2) + ")";
    if (k > 0)
      P.provenance += "; l1 shifted by " + std::to_string(k) + "*l2 after " + std::to_string(k) +
                      " singular fiber(s) at infinity";

    Matrix<RatFunc> MinvK(4, Vec<RatFunc>(4));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) MinvK[i][j] = RatFunc(P.Minv[i][j]);
    const Form<RatFunc> FK = S.form().map<RatFunc>([](const Rational& c) { return RatFunc(c); });
    P.generic = FK.substitute(fiber_plane_matrix(MinvK, std::optional<RatFunc>(RatFunc::t())));
    return P;
  }
  throw ConsistencyError("build_pencil: no parametrization with a nonsingular fiber at infinity");
}

// ---- generic Weierstrass model ---------------------------------------------

namespace {

UniPoly part_with_multiplicity_at_least(const UniPoly& f, int k) {
  UniPoly r = UniPoly::constant(1);
  const auto dec = squarefree_decomposition(f);
  for (std::size_t i = k - 1; i < dec.size(); ++i) r *= dec[i];
  return r;
}

Integer content_of(const UniPoly& f) {
  Integer g = 0;
  for (const auto& c : f.coeffs()) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num_mpz_t());
  return g;
}

Integer den_lcm(const UniPoly& f) {
  Integer l = 1;
  for (const auto& c : f.coeffs()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
  return l;
}

// Largest l (found by trial division plus the leftover cofactor) with
// l^4 | a and l^6 | b, for integers a, b not both zero.
Integer common_power_divisor(Integer a, Integer b) {
  a = abs(a);
  b = abs(b);
  Integer g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  Integer lambda = 1;
  auto try_divide = [&](const Integer& l) {
    Integer l4 = l * l * l * l, l6 = l4 * l * l;
    bool any = false;
    while ((a == 0 || a % l4 == 0) && (b == 0 || b % l6 == 0) && !(a == 0 && b == 0)) {
      a = a == 0 ? a : a / l4;
      b = b == 0 ? b : b / l6;
      lambda *= l;
      any = true;
    }
    return any;
  };
  if (g <= 1) return 1;
  Integer rest = g;
  for (unsigned long q = 2; q < 100000 && Integer(q) * q <= rest; ++q) {
    if (rest % q != 0) continue;
    while (rest % q == 0) rest /= q;
    try_divide(Integer(q));
  }
  if (rest > 1) try_divide(rest);
  return lambda;
}

void add_rational_roots(const UniPoly& f, std::set<Rational>& out) {
  if (f.degree() <= 0) return;
  for (const auto& r : rational_roots(f)) out.insert(r.value);
}

}  // namespace

UniPoly WeierstrassModel::discriminant() const {
  return Rational(-16) * (Rational(4) * A * A * A + Rational(27) * B * B);
}

bool WeierstrassModel::is_exceptional(const FiberParam& t) const {
  if (t.is_infinity()) return true;
  return std::binary_search(exceptional.begin(), exceptional.end(), *t.t);
}

WPoint<RatFunc> WeierstrassModel::forward(const Vec<RatFunc>& X) const {
  WPoint<RatFunc> P = transform->forward({X[0], X[1], X[2]});
  if (P.infinity) return P;
  return WPoint<RatFunc>::affine(mu * mu * P.u, mu * mu * mu * P.v);
}

WeierstrassModel to_weierstrass(const CubicPencil& pencil) {
  WeierstrassModel W;
  auto lift = [](const Vec<Rational>& v) {
    return std::array<RatFunc, 3>{RatFunc(v[0]), RatFunc(v[1]), RatFunc(v[2])};
  };
  auto wt = std::make_shared<WeierstrassTransform<RatFunc>>(pencil.generic, lift(pencil.x));
  W.transform = wt;
  W.provenance.push_back(wt->flex() ? "x is a flex of the generic fiber" : "x is not a flex of the generic fiber");
  const ShortCurve<RatFunc>& raw = wt->curve();
  if (is_zero(raw.discriminant())) throw InvalidInput("to_weierstrass: generic fiber is singular");
  const WPoint<RatFunc> Y = wt->forward(lift(pencil.y));
  if (Y.infinity) throw ConsistencyError("to_weierstrass: y maps to the origin");
  if (!raw.contains(Y)) throw ConsistencyError("to_weierstrass: image of y is not on the curve");

  std::set<Rational> exc;
  for (const auto& d : wt->divisors()) {
    add_rational_roots(d.num(), exc);
    add_rational_roots(d.den(), exc);
  }
  add_rational_roots(Y.u.den(), exc);
  add_rational_roots(Y.v.den(), exc);

  // Clear denominators.
  UniPoly m = raw.A.den() * raw.B.den();
  UniPoly A = raw.A.num() * exact_div(m.pow(4), raw.A.den());
  UniPoly B = raw.B.num() * exact_div(m.pow(6), raw.B.den());
  RatFunc mu(m);
  int removed = 0;
  // Remove q with q^4 | A and q^6 | B.
  while (true) {
    UniPoly q;
    if (A.is_zero())
      q = part_with_multiplicity_at_least(B, 6);
    else if (B.is_zero())
      q = part_with_multiplicity_at_least(A, 4);
    else
      q = gcd(part_with_multiplicity_at_least(A, 4), part_with_multiplicity_at_least(B, 6));
    if (q.degree() <= 0) break;
    A = A.is_zero() ? A : exact_div(A, q.pow(4));
    B = B.is_zero() ? B : exact_div(B, q.pow(6));
    mu = mu / RatFunc(q);
    removed += q.degree();
  }
  if (removed) W.provenance.push_back("removed a degree-" + std::to_string(removed) + " factor q with q^4 | A, q^6 | B");

  // Integral coefficients, then reduced content.
  Integer l = den_lcm(A) * den_lcm(B);
  if (l != 1) {
    A = Rational(l * l * l * l) * A;
    B = Rational(l * l * l * l * l * l) * B;
    mu = mu * RatFunc(Rational(l));
  }
  const Integer red = common_power_divisor(A.is_zero() ? Integer(0) : content_of(A), B.is_zero() ? Integer(0) : content_of(B));
  if (red != 1) {
    A = Rational(1, 1) / Rational(red * red * red * red) * A;
    B = Rational(1, 1) / Rational(red * red * red * red * red * red) * B;
    mu = mu / RatFunc(Rational(red));
  }
  W.A = A;
  W.B = B;
  W.u_y = mu * mu * Y.u;
  W.v_y = mu * mu * mu * Y.v;
  if (!W.v_y.num().is_zero() && sgn(W.v_y.num().leading()) < 0) {
    W.v_y = -W.v_y;
    mu = -mu;
  }
  W.mu = mu;
  add_rational_roots(mu.num(), exc);
  add_rational_roots(mu.den(), exc);

  // u_y = a / d^2, v_y = c / d^3.
  if (W.u_y.is_polynomial() && W.v_y.is_polynomial()) {
    W.d = UniPoly::constant(1);
  } else {
    W.d = monic(exact_div(W.v_y.den(), W.u_y.den()));
    if (monic(W.d * W.d) != W.u_y.den()) throw ConsistencyError("to_weierstrass: denominators of y are not d^2, d^3");
  }
  W.a = W.u_y.num() * exact_div(W.d * W.d, W.u_y.den());
  W.c = W.v_y.num() * exact_div(W.d * W.d * W.d, W.v_y.den());
  add_rational_roots(W.d, exc);

  const ShortCurve<RatFunc> E{RatFunc(W.A), RatFunc(W.B)};
  if (!E.contains(WPoint<RatFunc>::affine(W.u_y, W.v_y)))
    throw ConsistencyError("to_weierstrass: v_y^2 != u_y^3 + A u_y + B");
  W.exceptional.assign(exc.begin(), exc.end());
  return W;
}

// ---- constant models ---------------------------------------------------------

ConstantModel reduce_constant_model(const ShortCurve<Rational>& E) {
  Integer l = 1;
  mpz_lcm(l.get_mpz_t(), E.A.get_den_mpz_t(), E.B.get_den_mpz_t());
  Rational lambda(l);
  Rational l2 = lambda * lambda;
  Rational A = E.A * l2 * l2, B = E.B * l2 * l2 * l2;
  if (sgn(A) != 0 || sgn(B) != 0) {
    const Integer red = common_power_divisor(A.get_num(), B.get_num());
    Rational r(red);
    Rational r2 = r * r;
    A /= r2 * r2;
    B /= r2 * r2 * r2;
    lambda /= r;
  }
  return {ShortCurve<Rational>{A, B}, lambda};
}

namespace {

bool is_kth_power(const Rational& q, unsigned k) {
  if (sgn(q) < 0 && k % 2 == 0) return false;
  Integer n = abs(Integer(q.get_num())), d = q.get_den();
  return mpz_root(Integer().get_mpz_t(), n.get_mpz_t(), k) != 0 && mpz_root(Integer().get_mpz_t(), d.get_mpz_t(), k) != 0;
}

bool scalings_compatible(const std::optional<Rational>& ra, const std::optional<Rational>& rb) {
  // ra = l^4 (if A nonzero), rb = l^6 (if B nonzero).
  if (ra && rb) {
    const Rational r = *rb / *ra;  // l^2
    return r * r == *ra && is_kth_power(r, 2);
  }
  if (ra) return is_kth_power(*ra, 4);
  if (rb) return is_kth_power(*rb, 6);
  return true;
}

}  // namespace

bool isomorphic_over_q(const ShortCurve<Rational>& E1, const ShortCurve<Rational>& E2) {
  if ((sgn(E1.A) == 0) != (sgn(E2.A) == 0) || (sgn(E1.B) == 0) != (sgn(E2.B) == 0)) return false;
  std::optional<Rational> ra, rb;
  if (sgn(E1.A) != 0) ra = E2.A / E1.A;
  if (sgn(E1.B) != 0) rb = E2.B / E1.B;
  return scalings_compatible(ra, rb);
}

bool equivalent_models(const UniPoly& A1, const UniPoly& B1, const UniPoly& A2, const UniPoly& B2) {
  if (A1.is_zero() != A2.is_zero() || B1.is_zero() != B2.is_zero()) return false;
  std::optional<Rational> ra, rb;
  if (!A1.is_zero()) {
    ra = A2.leading() / A1.leading();
    if (A2 != *ra * A1) return false;
  }
  if (!B1.is_zero()) {
    rb = B2.leading() / B1.leading();
    if (B2 != *rb * B1) return false;
  }
  return scalings_compatible(ra, rb);
}

// ---- individual fibers ----------------------------------------------------------

WPoint<Rational> DirectFiber::forward(const Vec<Rational>& X) const {
  WPoint<Rational> P = transform->forward({X[0], X[1], X[2]});
  if (P.infinity) return P;
  return WPoint<Rational>::affine(lambda * lambda * P.u, lambda * lambda * lambda * P.v);
}

Vec<Rational> DirectFiber::backward(const WPoint<Rational>& P) const {
  std::array<Rational, 3> X;
  if (P.infinity) {
    X = transform->backward(P);
  } else {
    const Rational l2 = lambda * lambda;
    X = transform->backward(WPoint<Rational>::affine(P.u / l2, P.v / (l2 * lambda)));
  }
  Vec<Rational> v(X.begin(), X.end());
  normalize(v);
  if (!is_zero(cubic(v))) throw ConsistencyError("backward map left the fiber");
  return v;
}

DirectFiber analyze_fiber(const CubicPencil& pencil, const FiberParam& t0) {
  DirectFiber F;
  F.t0 = t0;
  F.cubic = pencil.fiber(t0);
  const Vec<Rational>& x = pencil.x;
  auto wt = std::make_shared<WeierstrassTransform<Rational>>(F.cubic, std::array<Rational, 3>{x[0], x[1], x[2]});
  F.transform = wt;
  const ConstantModel cm = reduce_constant_model(wt->curve());
  F.curve = cm.curve;
  F.lambda = cm.lambda;
  F.y = F.forward(pencil.y);
  F.z = F.forward(pencil.z);
  F.singular = F.curve.singular();
  if (F.singular) F.type = sgn(F.curve.A) == 0 ? SingularityType::cusp : SingularityType::node;
  if (!F.curve.contains(F.y) || !F.curve.contains(F.z)) throw ConsistencyError("analyze_fiber: image off the curve");
  return F;
}

SpecializedFiber specialize(const CubicPencil& pencil, const WeierstrassModel& W, const FiberParam& t0) {
  SpecializedFiber s;
  s.t0 = t0;
  s.exceptional = W.is_exceptional(t0);
  if (!s.exceptional) {
    const Rational t = *t0.t;
    s.A0 = W.A(t);
    s.B0 = W.B(t);
    s.y = WPoint<Rational>::affine(W.u_y(t), W.v_y(t));
    s.source = "global model";
  } else {
    const DirectFiber F = analyze_fiber(pencil, t0);
    s.A0 = F.curve.A;
    s.B0 = F.curve.B;
    s.y = F.y;
    s.source = "direct fiber transform";
  }
  const ShortCurve<Rational> E{s.A0, s.B0};
  s.singular = E.singular();
  if (s.singular) s.type = sgn(s.A0) == 0 ? SingularityType::cusp : SingularityType::node;
  return s;
}

}  // namespace cubicdyn
