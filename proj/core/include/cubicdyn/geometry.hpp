// Projective geometry of a cubic surface: the composition law, tangent
// planes, Geiser involutions, f = t_x t_y, goodness certificates and the
// chord-tangent group law on plane cubics. The templates work over Q, F_p
// and Q(t); the ProjPoint-level API is over Q.

#ifndef CUBICDYN_GEOMETRY_HPP
#define CUBICDYN_GEOMETRY_HPP

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cubicdyn/form.hpp"
#include "cubicdyn/linalg.hpp"
#include "cubicdyn/poly.hpp"
#include "cubicdyn/ratfunc.hpp"

namespace cubicdyn {

template <class K>
using Vec = std::vector<K>;

/// Integer homogeneous coordinates, primitive, first nonzero entry positive.
struct ProjPoint {
  std::vector<Integer> c;

  ProjPoint() = default;
  explicit ProjPoint(std::vector<Integer> coords);
  static ProjPoint from_rational(const Vec<Rational>& v);
  Vec<Rational> to_rational() const;
  std::size_t size() const { return c.size(); }
  friend bool operator==(const ProjPoint& a, const ProjPoint& b) { return a.c == b.c; }
  friend bool operator!=(const ProjPoint& a, const ProjPoint& b) { return !(a == b); }
  friend bool operator<(const ProjPoint& a, const ProjPoint& b) { return a.c < b.c; }
};

std::string to_string(const ProjPoint& p);

/// Coefficients of a linear form in X, Y, Z, W, normalized like ProjPoint.
struct ProjPlane {
  ProjPoint coeffs;
  friend bool operator==(const ProjPlane& a, const ProjPlane& b) { return a.coeffs == b.coeffs; }
};

inline void normalize(Vec<Rational>& v) {
  Integer l = 1, g = 0;
  for (const auto& a : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), a.get_den_mpz_t());
  std::vector<Integer> z;
  for (const auto& a : v) {
    z.push_back(Integer(a.get_num()) * (l / Integer(a.get_den())));
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), z.back().get_mpz_t());
  }
  if (g == 0) throw InvalidInput("normalize: zero vector");
  for (const auto& a : z)
    if (a != 0) {
      if (a < 0) g = -g;
      break;
    }
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = Rational(z[i] / g);
}

template <class K>
void normalize(Vec<K>& v) {
  for (const auto& a : v)
    if (!is_zero(a)) {
      const K inv = K(1) / a;
      for (auto& b : v) b = b * inv;
      return;
    }
  throw InvalidInput("normalize: zero vector");
}

template <class K>
bool is_zero_vec(const Vec<K>& v) {
  for (const auto& a : v)
    if (!is_zero(a)) return false;
  return true;
}

template <class K>
bool proportional(const Vec<K>& a, const Vec<K>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if (!is_zero(a[i] * b[j] - a[j] * b[i])) return false;
  return true;
}

template <class K>
K dot(const Vec<K>& a, const Vec<K>& b) {
  K r(0);
  for (std::size_t i = 0; i < a.size(); ++i) r = r + a[i] * b[i];
  return r;
}

enum class Indeterminacy { none, base_point, line_on_surface, singular_point };

std::string to_string(Indeterminacy r);

template <class P>
struct Step {
  std::optional<P> point;
  Indeterminacy reason = Indeterminacy::none;
  bool defined() const { return point.has_value(); }
  static Step ok(P p) { return {std::move(p), Indeterminacy::none}; }
  static Step fail(Indeterminacy r) { return {std::nullopt, r}; }
};

using MapStep = Step<ProjPoint>;

/// A cubic hypersurface (plane curve or surface) with cached gradient.
template <class K>
class Cubic {
 public:
  Cubic() = default;
  explicit Cubic(Form<K> f) : f_(std::move(f)) {
    for (int i = 0; i < f_.arity(); ++i) grad_.push_back(f_.partial(i));
  }
  const Form<K>& form() const { return f_; }
  int arity() const { return f_.arity(); }
  K operator()(const Vec<K>& p) const { return f_(p); }
  bool contains(const Vec<K>& p) const { return is_zero(f_(p)); }
  Vec<K> gradient(const Vec<K>& p) const {
    Vec<K> g;
    for (const auto& d : grad_) g.push_back(d(p));
    return g;
  }

 private:
  Form<K> f_;
  std::vector<Form<K>> grad_;
};

/// Third point of the line through distinct points a, b of the cubic.
/// Restricted to the line, the cubic is l*m*(c1 l + c2 m) with
/// c1 = grad(a).b, c2 = grad(b).a.
template <class K>
Step<Vec<K>> third_point(const Cubic<K>& S, const Vec<K>& a, const Vec<K>& b) {
  const K c1 = dot(S.gradient(a), b);
  const K c2 = dot(S.gradient(b), a);
  if (is_zero(c1) && is_zero(c2)) return Step<Vec<K>>::fail(Indeterminacy::line_on_surface);
  Vec<K> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c2 * a[i] - c1 * b[i];
  normalize(r);
  return Step<Vec<K>>::ok(std::move(r));
}

/// Third point of the tangent line at P of a plane cubic.
template <class K>
Step<Vec<K>> tangent_third_point(const Cubic<K>& C, const Vec<K>& P) {
  const Vec<K> g = C.gradient(P);
  if (is_zero_vec(g)) return Step<Vec<K>>::fail(Indeterminacy::singular_point);
  // The tangent line is ker(g); it contains P, so take a basis vector off P.
  const Matrix<K> ker = kernel(Matrix<K>{g}, 3);
  const Vec<K>& v = proportional(ker[0], P) ? ker[1] : ker[0];
  Vec<K> pv(3);
  for (int i = 0; i < 3; ++i) pv[i] = P[i] + v[i];
  const K c3 = C(v);
  const K c2 = C(pv) - c3;
  if (is_zero(c2) && is_zero(c3)) return Step<Vec<K>>::fail(Indeterminacy::line_on_surface);
  Vec<K> r(3);
  for (int i = 0; i < 3; ++i) r[i] = c3 * P[i] - c2 * v[i];
  normalize(r);
  return Step<Vec<K>>::ok(std::move(r));
}

/// a o b on a plane cubic (tangent line when a = b).
template <class K>
Step<Vec<K>> compose(const Cubic<K>& C, const Vec<K>& a, const Vec<K>& b) {
  if (proportional(a, b)) return tangent_third_point(C, a);
  if (is_zero_vec(C.gradient(a)) || is_zero_vec(C.gradient(b))) return Step<Vec<K>>::fail(Indeterminacy::singular_point);
  return third_point(C, a, b);
}

/// t_x(w) on a surface.
template <class K>
Step<Vec<K>> geiser_step(const Cubic<K>& S, const Vec<K>& x, const Vec<K>& w) {
  if (proportional(x, w)) return Step<Vec<K>>::fail(Indeterminacy::base_point);
  return third_point(S, x, w);
}

/// f(w) = t_x(t_y(w)).
template <class K>
Step<Vec<K>> f_step_k(const Cubic<K>& S, const Vec<K>& x, const Vec<K>& y, const Vec<K>& w) {
  auto a = geiser_step(S, y, w);
  if (!a.defined()) return a;
  return geiser_step(S, x, *a.point);
}

/// Chord-tangent group on the nonsingular points of a plane cubic with
/// identity O: P + Q = O o (P o Q).
template <class K>
class CurveGroup {
 public:
  CurveGroup(Cubic<K> C, Vec<K> O) : C_(std::move(C)), O_(std::move(O)) { normalize(O_); }
  const Vec<K>& identity() const { return O_; }
  const Cubic<K>& curve() const { return C_; }

  std::optional<Vec<K>> add(const Vec<K>& P, const Vec<K>& Q) const {
    auto r = compose(C_, P, Q);
    if (!r.defined()) return std::nullopt;
    auto s = compose(C_, O_, *r.point);
    if (!s.defined()) return std::nullopt;
    return *s.point;
  }
  std::optional<Vec<K>> neg(const Vec<K>& P) const {
    auto oo = compose(C_, O_, O_);
    if (!oo.defined()) return std::nullopt;
    auto r = compose(C_, P, *oo.point);
    if (!r.defined()) return std::nullopt;
    return *r.point;
  }
  std::optional<Vec<K>> mul(long long k, const Vec<K>& P) const {
    Vec<K> base = P;
    if (k < 0) {
      auto n = neg(P);
      if (!n) return std::nullopt;
      base = *n;
      k = -k;
    }
    Vec<K> r = O_;
    for (long long i = 0; i < k; ++i) {
      auto s = add(r, base);
      if (!s) return std::nullopt;
      r = *s;
    }
    return r;
  }
  /// Least k in [1, bound] with kP = O, 0 if none.
  int order(const Vec<K>& P, int bound) const {
    Vec<K> Q = P;
    for (int k = 1; k <= bound; ++k) {
      if (proportional(Q, O_)) return k;
      auto s = add(Q, P);
      if (!s) return 0;
      Q = *s;
    }
    return 0;
  }

 private:
  Cubic<K> C_;
  Vec<K> O_;
};

/// 4x3 matrix whose columns span the plane with the given coefficients.
template <class K>
Matrix<K> plane_parametrization(const Vec<K>& plane) {
  Matrix<K> ker = kernel(Matrix<K>{plane}, static_cast<int>(plane.size()));
  Matrix<K> m(plane.size(), Vec<K>(ker.size()));
  for (std::size_t j = 0; j < ker.size(); ++j)
    for (std::size_t i = 0; i < plane.size(); ++i) m[i][j] = ker[j][i];
  return m;
}

/// No common projective zero of the partials, certified by the rank of the
/// degree-5 Macaulay matrix of the four partial derivatives.
template <class K>
bool surface_is_smooth(const Form<K>& F) {
  std::vector<Exponent> cub, quint;
  for (int a = 0; a <= 5; ++a)
    for (int b = 0; a + b <= 5; ++b)
      for (int c = 0; a + b + c <= 5; ++c) {
        quint.push_back(Exponent{a, b, c, 5 - a - b - c});
      }
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; a + b <= 3; ++b)
      for (int c = 0; a + b + c <= 3; ++c) cub.push_back(Exponent{a, b, c, 3 - a - b - c});
  std::map<Exponent, int> col;
  for (std::size_t i = 0; i < quint.size(); ++i) col[quint[i]] = static_cast<int>(i);
  Matrix<K> m;
  for (int i = 0; i < 4; ++i) {
    const Form<K> d = F.partial(i);
    for (const auto& mono : cub) {
      Vec<K> row(quint.size(), K(0));
      for (const auto& [e, c] : d.terms()) {
        Exponent s;
        for (int k = 0; k < 4; ++k) s[k] = e[k] + mono[k];
        row[col.at(s)] = c;
      }
      m.push_back(std::move(row));
    }
  }
  return rank(m) == static_cast<int>(quint.size());
}

namespace detail {

template <class K>
Poly<K> inverse_mod(const Poly<K>& a, const Poly<K>& m) {
  Poly<K> r0 = m, r1 = a % m, s0, s1 = Poly<K>::constant(K(1));
  while (!r1.is_zero()) {
    auto [q, r] = divmod(r0, r1);
    Poly<K> s = s0 - q * s1;
    r0 = std::move(r1);
    r1 = std::move(r);
    s0 = std::move(s1);
    s1 = std::move(s);
  }
  if (r0.degree() != 0) throw ConsistencyError("inverse_mod: not invertible");
  return (K(1) / r0.leading()) * s0 % m;
}

template <class K>
bool no_line_through_simple_points(const Form<K>& C) {
  // g(n) = C(0,1,n): the line X = 0 meets C in three simple points.
  using P = Poly<K>;
  std::vector<K> gc(4, K(0));
  std::vector<K> fx(3, K(0));
  for (const auto& [e, c] : C.terms()) {
    if (e[0] == 0) gc[e[2]] = gc[e[2]] + c;
    if (e[0] == 1) fx[e[2]] = fx[e[2]] + c;
  }
  const P g(gc);
  const P m = (-P(fx) * inverse_mod(g.derivative(), g)) % g;
  std::vector<P> mp{P::constant(K(1))}, np{P::constant(K(1))};
  for (int k = 1; k <= 3; ++k) {
    mp.push_back(mp.back() * m % g);
    np.push_back(np.back() * P::var() % g);
  }
  std::vector<P> h(4);
  for (const auto& [e, c] : C.terms()) {
    const int a = e[0], cz = e[2];
    long long binom = 1;
    for (int i = 0; i <= cz; ++i) {
      if (a + i <= 3) h[a + i] = h[a + i] + c * K(static_cast<long>(binom)) * (mp[i] * np[cz - i] % g);
      binom = binom * (cz - i) / (i + 1);
    }
  }
  P common = g;
  for (const auto& hj : h) common = euclid_gcd(common, hj % g);
  return common.degree() == 0;
}

}  // namespace detail

/// True iff the plane cubic has no linear factor over the algebraic closure.
/// A reducible cubic contains a line; through a simple point of C on a
/// transversal line that component is the tangent line there.
template <class K>
bool absolutely_irreducible_k(const Form<K>& C, unsigned trials = 64) {
  if (C.is_zero()) throw InvalidInput("absolutely_irreducible: zero form");
  if (C.arity() != 3 || C.degree() != 3) throw InvalidInput("absolutely_irreducible: expected a plane cubic");
  std::mt19937 rng(12345);
  std::uniform_int_distribution<int> dist(-7, 7);
  for (unsigned t = 0; t < trials; ++t) {
    Matrix<K> M(3, Vec<K>(3, K(0)));
    if (t == 0) {
      for (int i = 0; i < 3; ++i) M[i][i] = K(1);
    } else {
      for (auto& row : M)
        for (auto& a : row) a = K(dist(rng));
      if (rank(M) < 3) continue;
    }
    const Form<K> D = C.substitute(M);
    if (is_zero(D.coeff(Exponent{0, 0, 3, 0}))) continue;
    std::vector<K> gc(4, K(0));
    for (const auto& [e, c] : D.terms())
      if (e[0] == 0) gc[e[2]] = c;
    const Poly<K> g(gc);
    if (euclid_gcd(g, g.derivative()).degree() != 0) continue;
    return detail::no_line_through_simple_points(D);
  }
  // Every transversal meets C non-reducedly: C has a multiple component.
  return false;
}

// ---- API over Q ------------------------------------------------------------

class CubicSurface {
 public:
  /// Throws InvalidInput when the form is zero, not a cubic in four
  /// variables, or singular.
  explicit CubicSurface(const Form<Rational>& F);
  const Form<Rational>& form() const { return cubic_.form(); }
  const Cubic<Rational>& cubic() const { return cubic_; }
  const std::string& smoothness_evidence() const { return evidence_; }
  bool contains(const ProjPoint& p) const { return cubic_.contains(p.to_rational()); }

 private:
  Cubic<Rational> cubic_;
  std::string evidence_;
};

struct GoodPairCertificate {
  ProjPoint x, y, z;
  bool line_not_tangent = false;
  bool all_three_good = false;
  bool distinct = false;
  bool valid() const { return line_not_tangent && all_three_good && distinct; }
};

struct GoodPairResult {
  std::optional<GoodPairCertificate> certificate;
  std::string rejection;  // empty when certified
  /// Filled whenever the third intersection point exists, even on rejection.
  std::optional<GoodPairCertificate> candidate;
};

MapStep third_intersection(const CubicSurface& S, const ProjPoint& a, const ProjPoint& b);
ProjPlane tangent_plane(const CubicSurface& S, const ProjPoint& x);
MapStep geiser(const CubicSurface& S, const ProjPoint& x, const ProjPoint& w);
MapStep f_step(const CubicSurface& S, const GoodPairCertificate& cert, const ProjPoint& w);
bool absolutely_irreducible(const Form<Rational>& C);
/// Tangent-plane section of S at x, in coordinates of the plane.
Form<Rational> tangent_section(const CubicSurface& S, const ProjPoint& x);
bool is_good_point(const CubicSurface& S, const ProjPoint& x);
GoodPairResult is_good_pair(const CubicSurface& S, const ProjPoint& x, const ProjPoint& y);

/// Generic versions of the goodness checks, used for reductions mod p.
template <class K>
bool is_good_point_k(const Cubic<K>& S, const Vec<K>& x) {
  const Vec<K> g = S.gradient(x);
  if (is_zero_vec(g)) return false;
  const Matrix<K> L = plane_parametrization(g);
  return absolutely_irreducible_k(S.form().substitute(L));
}

template <class K>
bool is_good_pair_k(const Cubic<K>& S, const Vec<K>& x, const Vec<K>& y, Vec<K>* z_out = nullptr) {
  if (proportional(x, y) || !S.contains(x) || !S.contains(y)) return false;
  auto z = third_point(S, x, y);
  if (!z.defined()) return false;
  if (proportional(*z.point, x) || proportional(*z.point, y)) return false;
  if (z_out) *z_out = *z.point;
  return is_good_point_k(S, x) && is_good_point_k(S, y) && is_good_point_k(S, *z.point);
}

}  // namespace cubicdyn

#endif  // CUBICDYN_GEOMETRY_HPP
