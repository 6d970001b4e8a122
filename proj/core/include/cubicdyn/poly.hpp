// Dense univariate polynomials over a field, plus the Q- and F_p-specific
// algorithms the rest of the library leans on (resultants, rational roots,
// squarefree parts, distinct-degree factorization).

#ifndef CUBICDYN_POLY_HPP
#define CUBICDYN_POLY_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cubicdyn/field.hpp"

namespace cubicdyn {

/// Coefficients indexed by degree; the leading coefficient is nonzero unless
/// the polynomial is zero (empty coefficient vector).
template <class F>
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<F> c) : c_(std::move(c)) { trim(); }
  Poly(std::initializer_list<F> c) : c_(c) { trim(); }

  static Poly constant(const F& a) { return Poly(std::vector<F>{a}); }
  static Poly monomial(const F& a, std::size_t k) {
    std::vector<F> c(k + 1, F(0));
    c[k] = a;
    return Poly(std::move(c));
  }
  static Poly var() { return monomial(F(1), 1); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  bool is_constant() const { return c_.size() <= 1; }
  const std::vector<F>& coeffs() const { return c_; }
  F coeff(std::size_t k) const { return k < c_.size() ? c_[k] : F(0); }
  F leading() const { return c_.empty() ? F(0) : c_.back(); }

  F operator()(const F& x) const {
    F r(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
    return r;
  }

  Poly derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<F> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = F(static_cast<long>(k)) * c_[k];
    return Poly(std::move(d));
  }

  Poly operator-() const {
    Poly r = *this;
    for (auto& a : r.c_) a = -a;
    return r;
  }
  Poly& operator+=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), F(0));
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
    trim();
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), F(0));
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
    trim();
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<F> r(a.c_.size() + b.c_.size() - 1, F(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      if (detail::zero(a.c_[i])) continue;
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    }
    return Poly(std::move(r));
  }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }
  friend Poly operator*(const F& s, Poly a) {
    for (auto& x : a.c_) x = s * x;
    a.trim();
    return a;
  }
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  Poly pow(unsigned e) const {
    Poly r = constant(F(1)), b = *this;
    while (e) {
      if (e & 1u) r *= b;
      b *= b;
      e >>= 1;
    }
    return r;
  }

  /// Substitute another polynomial for the variable.
  Poly compose(const Poly& g) const {
    Poly r;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * g + constant(*it);
    return r;
  }

  template <class G, class Fn>
  Poly<G> map(Fn&& fn) const {
    std::vector<G> r;
    r.reserve(c_.size());
    for (const auto& a : c_) r.push_back(fn(a));
    return Poly<G>(std::move(r));
  }

 private:
  void trim() {
    while (!c_.empty() && detail::zero(c_.back())) c_.pop_back();
  }
  std::vector<F> c_;
};

template <class F>
bool is_zero(const Poly<F>& p) {
  return p.is_zero();
}

template <class F>
Poly<F> monic(const Poly<F>& p) {
  if (p.is_zero()) return p;
  return (F(1) / p.leading()) * p;
}

template <class F>
std::pair<Poly<F>, Poly<F>> divmod(const Poly<F>& a, const Poly<F>& b) {
  if (b.is_zero()) throw std::domain_error("polynomial division by zero");
  if (a.degree() < b.degree()) return {Poly<F>{}, a};
  std::vector<F> r = a.coeffs();
  std::vector<F> q(a.degree() - b.degree() + 1, F(0));
  const F inv_lead = F(1) / b.leading();
  const int db = b.degree();
  for (int k = a.degree() - db; k >= 0; --k) {
    F t = r[k + db] * inv_lead;
    q[k] = t;
    if (is_zero(t)) continue;
    for (int j = 0; j <= db; ++j) r[k + j] -= t * b.coeffs()[j];
  }
  r.resize(db);
  return {Poly<F>(std::move(q)), Poly<F>(std::move(r))};
}

template <class F>
Poly<F> operator%(const Poly<F>& a, const Poly<F>& b) {
  return divmod(a, b).second;
}

/// Exact quotient; throws ConsistencyError if b does not divide a.
template <class F>
Poly<F> exact_div(const Poly<F>& a, const Poly<F>& b) {
  auto [q, r] = divmod(a, b);
  if (!r.is_zero()) throw ConsistencyError("exact_div: nonzero remainder");
  return q;
}

/// Monic gcd by the Euclidean algorithm (gcd(0,0) = 0).
template <class F>
Poly<F> euclid_gcd(Poly<F> a, Poly<F> b) {
  while (!b.is_zero()) {
    Poly<F> r = a % b;
    a = std::move(b);
    b = std::move(r);
  }
  return monic(a);
}

template <class F>
Poly<F> powmod(const Poly<F>& base, Integer e, const Poly<F>& mod) {
  Poly<F> r = Poly<F>::constant(F(1)) % mod;
  Poly<F> b = base % mod;
  while (e > 0) {
    if (mpz_odd_p(e.get_mpz_t())) r = (r * b) % mod;
    b = (b * b) % mod;
    e >>= 1;
  }
  return r;
}

using UniPoly = Poly<Rational>;
using ModPPoly = Poly<Fp>;

// ---- Q-specific algorithms -------------------------------------------------

/// Monic gcd over Q via a primitive pseudo-remainder sequence over Z.
UniPoly gcd(const UniPoly& a, const UniPoly& b);

/// Integer polynomial with content 1 and positive leading coefficient,
/// proportional to f. Zero maps to zero.
std::vector<Integer> primitive_integer(const UniPoly& f);
UniPoly from_integers(const std::vector<Integer>& c);

/// Sylvester resultant, computed by the Euclidean remainder recursion.
Rational resultant(const UniPoly& f, const UniPoly& g);

/// Sylvester resultant via the explicit determinant (slow; kept as an oracle).
Rational sylvester_resultant(const UniPoly& f, const UniPoly& g);

/// f / gcd(f, f'), monic.
UniPoly squarefree_part(const UniPoly& f);

/// Yun decomposition: f = c * prod_i s[i-1]^i with s[i] monic, squarefree and
/// pairwise coprime.
std::vector<UniPoly> squarefree_decomposition(const UniPoly& f);

struct RootWithMultiplicity {
  Rational value;
  int multiplicity = 0;
  friend bool operator==(const RootWithMultiplicity&, const RootWithMultiplicity&) = default;
};

/// All roots in Q with multiplicities, sorted ascending.
std::vector<RootWithMultiplicity> rational_roots(const UniPoly& f);

/// Exhaustive rational-root-theorem scan (divisor enumeration); only
/// practical for small coefficients. Independent of rational_roots().
std::vector<Rational> rational_roots_by_divisors(const UniPoly& f);

/// f reduced mod the current ScopedPrime. Throws std::domain_error if p
/// divides a denominator.
ModPPoly reduce_mod_p(const UniPoly& f);

/// Squarefree part over F_p (monic), valid in any characteristic.
ModPPoly squarefree_part(const ModPPoly& f);

struct FactorPattern {
  std::vector<int> degrees;       // sorted ascending
  bool squarefree_input = true;   // false when the pattern is of the squarefree part
};

/// Distinct-degree factor pattern of f mod p. Throws InvalidInput when p
/// divides the leading coefficient of the primitive integer model.
FactorPattern factor_degrees_mod_p(const UniPoly& f, std::uint32_t p);

/// Same, for a polynomial already over the current F_p.
std::vector<int> distinct_degree_pattern(const ModPPoly& f);

/// Roots in F_p of f (current ScopedPrime), without multiplicity, ascending.
std::vector<std::uint32_t> roots_mod_p(const ModPPoly& f);
bool has_root_mod_p(const ModPPoly& f);

std::string to_string(const UniPoly& f, const std::string& var = "t");
std::vector<std::string> to_strings(const UniPoly& f);

}  // namespace cubicdyn

#endif  // CUBICDYN_POLY_HPP
