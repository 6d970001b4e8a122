// Short Weierstrass curves over an exact field, their group law and
// division polynomials, and the transformation of a plane cubic with a
// chosen nonsingular point into short Weierstrass form.

#ifndef CUBICDYN_WEIERSTRASS_HPP
#define CUBICDYN_WEIERSTRASS_HPP

#include <array>
#include <optional>
#include <vector>

#include "cubicdyn/form.hpp"
#include "cubicdyn/linalg.hpp"
#include "cubicdyn/poly.hpp"

namespace cubicdyn {

template <class K>
struct WPoint {
  bool infinity = true;
  K u{}, v{};
  static WPoint origin() { return {}; }
  static WPoint affine(K u, K v) { return {false, std::move(u), std::move(v)}; }
  friend bool operator==(const WPoint& a, const WPoint& b) {
    if (a.infinity || b.infinity) return a.infinity == b.infinity;
    return a.u == b.u && a.v == b.v;
  }
  friend bool operator!=(const WPoint& a, const WPoint& b) { return !(a == b); }
};

/// v^2 = u^3 + A u + B. Singular curves are allowed; the group law is then
/// the one on the nonsingular locus.
template <class K>
struct ShortCurve {
  K A{}, B{};

  K discriminant() const { return K(-16) * (K(4) * A * A * A + K(27) * B * B); }
  bool singular() const { return is_zero(discriminant()); }
  bool contains(const WPoint<K>& P) const {
    return P.infinity || is_zero(P.v * P.v - P.u * P.u * P.u - A * P.u - B);
  }
  /// The point (u0, 0) with 3u0^2 + A = 0 on a singular curve.
  bool is_singular_point(const WPoint<K>& P) const {
    return !P.infinity && is_zero(P.v) && is_zero(K(3) * P.u * P.u + A) && singular();
  }

  WPoint<K> neg(const WPoint<K>& P) const {
    if (P.infinity) return P;
    return WPoint<K>::affine(P.u, -P.v);
  }

  WPoint<K> add(const WPoint<K>& P, const WPoint<K>& Q) const {
    if (P.infinity) return Q;
    if (Q.infinity) return P;
    K lambda;
    if (P.u == Q.u) {
      if (is_zero(P.v + Q.v)) return WPoint<K>::origin();
      lambda = (K(3) * P.u * P.u + A) / (K(2) * P.v);
    } else {
      lambda = (Q.v - P.v) / (Q.u - P.u);
    }
    K u3 = lambda * lambda - P.u - Q.u;
    K v3 = lambda * (P.u - u3) - P.v;
    return WPoint<K>::affine(u3, v3);
  }

  WPoint<K> mul(long long k, const WPoint<K>& P) const {
    WPoint<K> base = k < 0 ? neg(P) : P;
    unsigned long long e = k < 0 ? static_cast<unsigned long long>(-k) : static_cast<unsigned long long>(k);
    WPoint<K> r = WPoint<K>::origin();
    while (e) {
      if (e & 1) r = add(r, base);
      base = add(base, base);
      e >>= 1;
    }
    return r;
  }

  /// Least k in [1, bound] with kP = O, or 0 when there is none.
  int order(const WPoint<K>& P, int bound) const {
    WPoint<K> Q = P;
    for (int k = 1; k <= bound; ++k) {
      if (Q.infinity) return k;
      Q = add(Q, P);
    }
    return 0;
  }
};

/// Division polynomials in u, with the factor v removed from even indices:
/// f_0 = 0, f_1 = 1, f_2 = 2, f_3, f_4, ... up to n_max.
template <class K>
std::vector<Poly<K>> psi_sequence(const K& A, const K& B, int n_max) {
  if (n_max < 3) throw InvalidInput("psi_sequence: n_max must be at least 3");
  using P = Poly<K>;
  const P u = P::var();
  const P a = P::constant(A), b = P::constant(B);
  const P F = u * u * u + a * u + b;
  const P F2 = F * F;
  std::vector<P> f(std::max(n_max + 1, 5));
  f[0] = P();
  f[1] = P::constant(K(1));
  f[2] = P::constant(K(2));
  f[3] = P{-(A * A), K(12) * B, K(6) * A, K(0), K(3)};
  f[4] = K(4) * P{-(K(8) * B * B) - A * A * A, -(K(4) * A * B), -(K(5) * A * A), K(20) * B, K(5) * A, K(0), K(1)};
  for (int n = 5; n <= n_max; ++n) {
    const int m = n / 2;
    if (n % 2 == 1) {
      P t1 = f[m + 2] * f[m].pow(3);
      P t2 = f[m - 1] * f[m + 1].pow(3);
      f[n] = (m % 2 == 0) ? F2 * t1 - t2 : t1 - F2 * t2;
    } else {
      P inner = f[m + 2] * f[m - 1] * f[m - 1] - f[m - 2] * f[m + 1] * f[m + 1];
      f[n] = (K(1) / K(2)) * (f[m] * inner);
    }
  }
  f.resize(n_max + 1);
  return f;
}

/// Transformation of a plane cubic C(X0,X1,X2) with a nonsingular point x
/// to v^2 = u^3 + A u + B sending x to the origin.
template <class K>
class WeierstrassTransform {
 public:
  using Pt = std::array<K, 3>;

  WeierstrassTransform(const Form<K>& C, const Pt& x) : x_(x) {
    if (C.arity() != 3 || C.degree() != 3) throw InvalidInput("Weierstrass: expected a plane cubic");
    if (!is_zero(C(x))) throw InvalidInput("Weierstrass: base point not on the curve");
    std::vector<K> T(3);
    for (int i = 0; i < 3; ++i) T[i] = C.partial(i)(x);
    if (is_zero(T[0]) && is_zero(T[1]) && is_zero(T[2])) throw InvalidInput("Weierstrass: base point is singular");

    // Rows: X' (vanishes at x, independent of T), Y' (nonzero at x), Z' = T.
    int j = 0;
    while (is_zero(x[j])) ++j;
    Matrix<K> xs{{x[0], x[1], x[2]}};
    Matrix<K> ker = kernel(xs, 3);
    std::vector<K> xrow = ker[0];
    if (is_zero(xrow[0] * T[1] - xrow[1] * T[0]) && is_zero(xrow[0] * T[2] - xrow[2] * T[0]) &&
        is_zero(xrow[1] * T[2] - xrow[2] * T[1]))
      xrow = ker[1];
    std::vector<K> yrow(3, K(0));
    yrow[j] = K(1);
    to_primed_ = {xrow, yrow, T};
    auto inv = inverse(to_primed_);
    if (!inv) throw ConsistencyError("Weierstrass: singular coordinate change");
    from_primed_ = *inv;
    {
      Matrix<K> aug = to_primed_;
      for (auto& d : rref(aug).divisors) divisors_.push_back(d);
    }

    const Form<K> G = C.substitute(from_primed_);
    auto co = [&](int a, int b, int c) { return G.coeff(Exponent{a, b, c, 0}); };
    if (!is_zero(co(0, 3, 0)) || !is_zero(co(1, 2, 0)))
      throw ConsistencyError("Weierstrass: tangent normalization failed");
    alpha_ = co(0, 2, 1);
    beta_ = co(2, 1, 0);
    gamma_ = co(1, 1, 1);
    delta_ = co(0, 1, 2);
    c3_ = co(3, 0, 0);
    c2_ = co(2, 0, 1);
    c1_ = co(1, 0, 2);
    c0_ = co(0, 0, 3);
    if (is_zero(alpha_)) throw ConsistencyError("Weierstrass: vanishing tangent coefficient");
    divisors_.push_back(alpha_);
    flex_ = is_zero(beta_);

    using P = Poly<K>;
    const P s = P::var();
    const P q{delta_, gamma_, beta_};
    const P c{c0_, c1_, c2_, c3_};
    Elem u0, v0;
    if (flex_) {
      if (is_zero(c3_)) throw InvalidInput("Weierstrass: curve contains its inflectional tangent");
      divisors_.push_back(c3_);
      r1_ = (K(-1) / alpha_) * q;
      r0_ = (K(-1) / alpha_) * c;
      m_ = -c3_ / alpha_;
      u0 = {m_ * s, P()};
      v0 = {P(), P::constant(m_)};
    } else {
      divisors_.push_back(beta_);
      d3_ = K(2) * beta_ * gamma_ - K(4) * alpha_ * c3_;
      d2_ = gamma_ * gamma_ + K(2) * beta_ * delta_ - K(4) * alpha_ * c2_;
      d1_ = K(2) * gamma_ * delta_ - K(4) * alpha_ * c1_;
      d0_ = delta_ * delta_ - K(4) * alpha_ * c0_;
      e_ = d3_ / (K(2) * beta_);
      e0_ = d2_ / (K(2) * beta_) - d3_ * d3_ / (K(8) * beta_ * beta_ * beta_);
      e1_ = (d1_ - K(2) * e_ * e0_) / (K(2) * beta_);
      r1_ = P();
      r0_ = P{d0_, d1_, d2_, d3_, beta_ * beta_};
      const K k = K(-1) / (K(2) * beta_);
      // g = w - beta s^2 - e s,  h = s (g - e0)
      u0 = {k * P{K(0), -e_, -beta_}, P::constant(k)};
      v0 = {k * P{K(0), -e0_, -e_, -beta_}, k * s};
    }

    // Solve v0^2 + a1 u0 v0 + a3 v0 = u0^3 + a2 u0^2 + a4 u0 + a6.
    const Elem one{P::constant(K(1)), P()};
    const Elem rhs = sub(mul(mul(u0, u0), u0), mul(v0, v0));
    const std::array<Elem, 5> cols{mul(u0, v0), neg(mul(u0, u0)), v0, neg(u0), neg(one)};
    int top = 0;
    for (const auto& e : cols) top = std::max({top, e.p.degree(), e.q.degree()});
    top = std::max({top, rhs.p.degree(), rhs.q.degree()});
    Matrix<K> sys;
    std::vector<K> b;
    for (int half = 0; half < 2; ++half)
      for (int k = 0; k <= top; ++k) {
        std::vector<K> row;
        for (const auto& e : cols) row.push_back(half ? e.q.coeff(k) : e.p.coeff(k));
        sys.push_back(row);
        b.push_back(half ? rhs.q.coeff(k) : rhs.p.coeff(k));
      }
    auto sol = solve(sys, b);
    if (!sol) throw ConsistencyError("Weierstrass: no general Weierstrass equation fits");
    {
      Matrix<K> aug = sys;
      for (auto& d : rref(aug).divisors) divisors_.push_back(d);
    }
    a1_ = (*sol)[0];
    a2_ = (*sol)[1];
    a3_ = (*sol)[2];
    a4_ = (*sol)[3];
    a6_ = (*sol)[4];
    Elem check = rhs;
    for (int i = 0; i < 5; ++i) check = sub(check, scale((*sol)[i], cols[i]));
    if (!check.p.is_zero() || !check.q.is_zero()) throw ConsistencyError("Weierstrass: identity check failed");

    b2_ = a1_ * a1_ + K(4) * a2_;
    const K b4 = K(2) * a4_ + a1_ * a3_;
    const K b6 = a3_ * a3_ + K(4) * a6_;
    const K c4 = b2_ * b2_ - K(24) * b4;
    const K c6 = -(b2_ * b2_ * b2_) + K(36) * b2_ * b4 - K(216) * b6;
    curve_.A = K(-27) * c4;
    curve_.B = K(-54) * c6;
  }

  const ShortCurve<K>& curve() const { return curve_; }
  bool flex() const { return flex_; }
  /// Every field element the construction divided by.
  const std::vector<K>& divisors() const { return divisors_; }
  const Matrix<K>& to_primed() const { return to_primed_; }

  /// Image of a curve point. The base point maps to the origin.
  WPoint<K> forward(const Pt& X) const {
    const std::vector<K> Xp = mat_vec(to_primed_, std::vector<K>(X.begin(), X.end()));
    K u0, v0;
    if (is_zero(Xp[2])) {
      if (is_zero(Xp[0])) return WPoint<K>::origin();
      if (flex_) throw InvalidInput("Weierstrass: point on the inflectional tangent is not on the curve");
      u0 = -e0_ / (K(2) * beta_);
      v0 = -e1_ / (K(2) * beta_);
    } else {
      const K s = Xp[0] / Xp[2], Y = Xp[1] / Xp[2];
      if (flex_) {
        u0 = m_ * s;
        v0 = m_ * Y;
      } else {
        const K w = K(2) * alpha_ * Y + beta_ * s * s + gamma_ * s + delta_;
        const K g = w - beta_ * s * s - e_ * s;
        u0 = -g / (K(2) * beta_);
        v0 = -(s * (g - e0_)) / (K(2) * beta_);
      }
    }
    return WPoint<K>::affine(K(36) * u0 + K(3) * b2_, K(108) * (K(2) * v0 + a1_ * u0 + a3_));
  }

  /// Preimage on the plane cubic of a point of the short model.
  Pt backward(const WPoint<K>& P) const {
    if (P.infinity) return x_;
    const K u0 = (P.u - K(3) * b2_) / K(36);
    const K v0 = (P.v / K(108) - a1_ * u0 - a3_) / K(2);
    std::vector<K> Xp;
    if (flex_) {
      Xp = {u0 / m_, v0 / m_, K(1)};
    } else {
      const K g = K(-2) * beta_ * u0, h = K(-2) * beta_ * v0;
      K s;
      if (!is_zero(g - e0_)) {
        s = h / (g - e0_);
      } else {
        const K r1 = d1_ - K(2) * e_ * e0_, r0 = d0_ - e0_ * e0_;
        if (is_zero(r1) || !is_zero(v0)) {
          Xp = {beta_, -c3_, K(0)};
        } else {
          s = -r0 / r1;
        }
      }
      if (Xp.empty()) {
        const K w = g + beta_ * s * s + e_ * s;
        Xp = {s, (w - beta_ * s * s - gamma_ * s - delta_) / (K(2) * alpha_), K(1)};
      }
    }
    const std::vector<K> X = mat_vec(from_primed_, Xp);
    return {X[0], X[1], X[2]};
  }

 private:
  using P = Poly<K>;
  struct Elem {
    P p, q;  // p + q * theta
  };
  Elem mul(const Elem& a, const Elem& b) const {
    P qq = a.q * b.q;
    return {a.p * b.p + qq * r0_, a.p * b.q + a.q * b.p + qq * r1_};
  }
  static Elem sub(const Elem& a, const Elem& b) { return {a.p - b.p, a.q - b.q}; }
  static Elem neg(const Elem& a) { return {-a.p, -a.q}; }
  static Elem scale(const K& k, const Elem& a) { return {k * a.p, k * a.q}; }

  Pt x_;
  Matrix<K> to_primed_, from_primed_;
  K alpha_{}, beta_{}, gamma_{}, delta_{}, c0_{}, c1_{}, c2_{}, c3_{};
  bool flex_ = false;
  K m_{};
  K d0_{}, d1_{}, d2_{}, d3_{}, e_{}, e0_{}, e1_{};
  P r0_, r1_;
  K a1_{}, a2_{}, a3_{}, a4_{}, a6_{}, b2_{};
  ShortCurve<K> curve_;
  std::vector<K> divisors_;
};

}  // namespace cubicdyn

#endif  // CUBICDYN_WEIERSTRASS_HPP
