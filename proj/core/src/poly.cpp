#include "cubicdyn/poly.hpp"

#include <algorithm>
#include <sstream>

namespace cubicdyn {

thread_local std::uint32_t Fp::p_ = 2;

std::string to_string(const Rational& x) {
  return x.get_num().get_str() + "/" + x.get_den().get_str();
}

Rational parse_rational(const std::string& s) {
  Rational q;
  if (s.empty() || q.set_str(s, 10) != 0 || sgn(Integer(q.get_den())) == 0)
    throw InvalidInput("malformed rational: '" + s + "'");
  q.canonicalize();
  return q;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

namespace {

using ZPoly = std::vector<Integer>;

void ztrim(ZPoly& a) {
  while (!a.empty() && sgn(a.back()) == 0) a.pop_back();
}

Integer zcontent(const ZPoly& a) {
  Integer g = 0;
  for (const auto& c : a) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    if (g == 1) break;
  }
  return g;
}

void zprimitive(ZPoly& a) {
  ztrim(a);
  if (a.empty()) return;
  Integer g = zcontent(a);
  if (a.back() < 0) g = -g;
  for (auto& c : a) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), g.get_mpz_t());
}

// Pseudo-remainder of a by b over Z (content is not removed).
ZPoly zprem(ZPoly a, const ZPoly& b) {
  const int db = static_cast<int>(b.size()) - 1;
  const Integer& lb = b.back();
  while (static_cast<int>(a.size()) - 1 >= db && !a.empty()) {
    const int da = static_cast<int>(a.size()) - 1;
    Integer la = a.back();
    for (auto& c : a) c *= lb;
    for (int j = 0; j <= db; ++j) a[da - db + j] -= la * b[j];
    ztrim(a);
  }
  return a;
}

Integer zeval(const ZPoly& a, const Integer& x, const Integer& m) {
  Integer r = 0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) {
    r = r * x + *it;
    r %= m;
  }
  if (r < 0) r += m;
  return r;
}

}  // namespace

std::vector<Integer> primitive_integer(const UniPoly& f) {
  if (f.is_zero()) return {};
  Integer l = 1;
  for (const auto& c : f.coeffs()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
  ZPoly a;
  a.reserve(f.coeffs().size());
  for (const auto& c : f.coeffs()) a.push_back(Integer(c.get_num()) * (l / Integer(c.get_den())));
  zprimitive(a);
  return a;
}

UniPoly from_integers(const std::vector<Integer>& c) {
  std::vector<Rational> r;
  r.reserve(c.size());
  for (const auto& z : c) r.emplace_back(z);
  return UniPoly(std::move(r));
}

UniPoly gcd(const UniPoly& a, const UniPoly& b) {
  if (a.is_zero()) return monic(b);
  if (b.is_zero()) return monic(a);
  ZPoly x = primitive_integer(a), y = primitive_integer(b);
  if (x.size() < y.size()) std::swap(x, y);
  if (y.size() == 1) return UniPoly::constant(1);
  // A coprime image mod one prime not dividing either leading coefficient
  // already proves coprimality over Q.
  int tried = 0;
  for (std::uint32_t p = 65521; p > 30000 && tried < 2; p -= 2) {
    if (!is_prime(p) || x.back() % p == 0 || y.back() % p == 0) continue;
    ++tried;
    ScopedPrime sp(p);
    if (euclid_gcd(reduce_mod_p(from_integers(x)), reduce_mod_p(from_integers(y))).degree() == 0)
      return UniPoly::constant(1);
  }
  while (!y.empty()) {
    ZPoly r = zprem(x, y);
    zprimitive(r);
    x = std::move(y);
    y = std::move(r);
  }
  return monic(from_integers(x));
}

Rational resultant(const UniPoly& f, const UniPoly& g) {
  if (f.is_zero() && g.is_zero()) throw InvalidInput("resultant: both inputs are zero");
  if (f.is_zero() || g.is_zero()) return 0;
  UniPoly a = f, b = g;
  Rational result = 1;
  while (true) {
    if (b.degree() == 0) {
      Rational p = 1;
      for (int k = 0; k < a.degree(); ++k) p *= b.leading();
      return result * p;
    }
    UniPoly r = a % b;
    if (r.is_zero()) return 0;
    if ((a.degree() % 2 == 1) && (b.degree() % 2 == 1)) result = -result;
    const Rational lb = b.leading();
    for (int k = 0; k < a.degree() - r.degree(); ++k) result *= lb;
    a = std::move(b);
    b = std::move(r);
  }
}

Rational sylvester_resultant(const UniPoly& f, const UniPoly& g) {
  if (f.is_zero() && g.is_zero()) throw InvalidInput("resultant: both inputs are zero");
  if (f.is_zero() || g.is_zero()) return 0;
  const int m = f.degree(), n = g.degree();
  const int sz = m + n;
  if (sz == 0) return 1;
  std::vector<std::vector<Rational>> s(sz, std::vector<Rational>(sz, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= m; ++j) s[i][i + j] = f.coeff(m - j);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= n; ++j) s[n + i][i + j] = g.coeff(n - j);
  Rational det = 1;
  for (int c = 0; c < sz; ++c) {
    int piv = -1;
    for (int r = c; r < sz; ++r)
      if (sgn(s[r][c]) != 0) {
        piv = r;
        break;
      }
    if (piv < 0) return 0;
    if (piv != c) {
      std::swap(s[piv], s[c]);
      det = -det;
    }
    det *= s[c][c];
    for (int r = c + 1; r < sz; ++r) {
      if (sgn(s[r][c]) == 0) continue;
      Rational t = s[r][c] / s[c][c];
      for (int k = c; k < sz; ++k) s[r][k] -= t * s[c][k];
    }
  }
  return det;
}

UniPoly squarefree_part(const UniPoly& f) {
  if (f.is_zero()) throw InvalidInput("squarefree_part: zero polynomial");
  if (f.degree() == 0) return UniPoly::constant(1);
  return monic(exact_div(f, gcd(f, f.derivative())));
}

std::vector<UniPoly> squarefree_decomposition(const UniPoly& f) {
  if (f.is_zero()) throw InvalidInput("squarefree_decomposition: zero polynomial");
  std::vector<UniPoly> out;
  if (f.degree() == 0) return out;
  const UniPoly d = f.derivative();
  const UniPoly a0 = gcd(f, d);
  UniPoly b = exact_div(f, a0);
  UniPoly c = exact_div(d, a0);
  UniPoly e = c - b.derivative();
  while (b.degree() > 0) {
    UniPoly a = gcd(b, e);
    out.push_back(monic(a));
    b = exact_div(b, a);
    c = exact_div(e, a);
    e = c - b.derivative();
  }
  return out;
}

ModPPoly reduce_mod_p(const UniPoly& f) {
  return f.map<Fp>([](const Rational& c) { return Fp::from(c); });
}

namespace {

bool squarefree_mod_p(const ModPPoly& f) {
  ModPPoly d = f.derivative();
  if (d.is_zero()) return f.degree() <= 0;
  return euclid_gcd(f, d).degree() == 0;
}

// Rational reconstruction: a/b with |a| <= n_bound, 0 < b <= d_bound and
// a == b*r (mod m).
std::optional<Rational> reconstruct(const Integer& r, const Integer& m, const Integer& n_bound,
                                    const Integer& d_bound) {
  Integer r0 = m, r1 = r % m, s0 = 0, s1 = 1;
  if (r1 < 0) r1 += m;
  while (r1 > n_bound) {
    Integer q = r0 / r1;
    Integer t = r0 - q * r1;
    r0 = r1;
    r1 = t;
    t = s0 - q * s1;
    s0 = s1;
    s1 = t;
  }
  if (sgn(s1) == 0) return std::nullopt;
  Integer a = r1, b = s1;
  if (b < 0) {
    a = -a;
    b = -b;
  }
  if (b > d_bound) return std::nullopt;
  Rational q(a, b);
  q.canonicalize();
  return q;
}

}  // namespace

std::vector<RootWithMultiplicity> rational_roots(const UniPoly& f) {
  if (f.is_zero()) throw InvalidInput("rational_roots: zero polynomial");
  std::vector<RootWithMultiplicity> out;

  int zero_mult = 0;
  while (zero_mult < static_cast<int>(f.coeffs().size()) && sgn(f.coeffs()[zero_mult]) == 0) ++zero_mult;
  if (zero_mult > 0) out.push_back({Rational(0), zero_mult});
  UniPoly rest(std::vector<Rational>(f.coeffs().begin() + zero_mult, f.coeffs().end()));
  if (rest.degree() <= 0) return out;

  const ZPoly g = primitive_integer(squarefree_part(rest));
  const Integer lc = abs(g.back()), tc = abs(g.front());

  // A prime not dividing lc for which g stays squarefree.
  std::uint32_t p = 3;
  for (;; p += 2) {
    if (p > 65521) throw ConsistencyError("rational_roots: no suitable prime found");
    if (!is_prime(p) || lc % p == 0) continue;
    ScopedPrime sp(p);
    if (squarefree_mod_p(reduce_mod_p(from_integers(g)))) break;
  }

  std::vector<std::uint32_t> seeds;
  {
    ScopedPrime sp(p);
    seeds = roots_mod_p(reduce_mod_p(from_integers(g)));
  }

  const Integer bound = 2 * lc * tc + 1;
  ZPoly dg(g.size() > 1 ? g.size() - 1 : 0);
  for (std::size_t k = 1; k < g.size(); ++k) dg[k - 1] = g[k] * static_cast<unsigned long>(k);

  UniPoly reduced = rest;
  for (std::uint32_t seed : seeds) {
    Integer r = seed, m = p;
    while (m <= bound) {
      Integer m2 = m * m;
      Integer fv = zeval(g, r, m2), dv = zeval(dg, r, m2), inv;
      if (mpz_invert(inv.get_mpz_t(), dv.get_mpz_t(), m2.get_mpz_t()) == 0)
        throw ConsistencyError("rational_roots: Hensel lift hit a singular root");
      r = (r - fv * inv) % m2;
      if (r < 0) r += m2;
      m = m2;
    }
    auto cand = reconstruct(r, m, tc, lc);
    if (!cand || sgn(from_integers(g)(*cand)) != 0) continue;
    UniPoly lin{-*cand, Rational(1)};
    int mult = 0;
    while (true) {
      auto [q, rem] = divmod(reduced, lin);
      if (!rem.is_zero()) break;
      reduced = std::move(q);
      ++mult;
    }
    out.push_back({*cand, mult});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  return out;
}

namespace {

std::vector<Integer> divisors(Integer n) {
  n = abs(n);
  std::vector<std::pair<Integer, int>> fac;
  for (Integer d = 2; d * d <= n; ++d) {
    int e = 0;
    while (n % d == 0) {
      n /= d;
      ++e;
    }
    if (e) fac.emplace_back(d, e);
  }
  if (n > 1) fac.emplace_back(n, 1);
  std::vector<Integer> divs{1};
  for (const auto& [q, e] : fac) {
    const std::size_t sz = divs.size();
    Integer pw = 1;
    for (int k = 1; k <= e; ++k) {
      pw *= q;
      for (std::size_t i = 0; i < sz; ++i) divs.push_back(divs[i] * pw);
    }
  }
  return divs;
}

}  // namespace

std::vector<Rational> rational_roots_by_divisors(const UniPoly& f) {
  if (f.is_zero()) throw InvalidInput("rational_roots_by_divisors: zero polynomial");
  std::vector<Rational> out;
  int z = 0;
  while (sgn(f.coeffs()[z]) == 0) ++z;
  if (z > 0) out.emplace_back(0);
  ZPoly g = primitive_integer(UniPoly(std::vector<Rational>(f.coeffs().begin() + z, f.coeffs().end())));
  if (g.size() <= 1) return out;
  const UniPoly gq = from_integers(g);
  for (const auto& a : divisors(g.front()))
    for (const auto& b : divisors(g.back()))
      for (int s : {1, -1}) {
        Rational c(a * s, b);
        c.canonicalize();
        if (sgn(gq(c)) == 0 && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
      }
  std::sort(out.begin(), out.end());
  return out;
}

ModPPoly squarefree_part(const ModPPoly& f) {
  if (f.is_zero()) throw InvalidInput("squarefree_part: zero polynomial");
  if (f.degree() == 0) return ModPPoly::constant(Fp(1));
  const ModPPoly fm = monic(f);
  const ModPPoly d = fm.derivative();
  const std::uint32_t p = Fp::modulus();
  if (d.is_zero()) {
    // fm(x) = h(x^p) = h~(x)^p since a^p = a in F_p.
    std::vector<Fp> h;
    for (std::size_t k = 0; k < fm.coeffs().size(); k += p) h.push_back(fm.coeffs()[k]);
    return squarefree_part(ModPPoly(std::move(h)));
  }
  const ModPPoly g = euclid_gcd(fm, d);
  const ModPPoly a = exact_div(fm, g);
  if (g.degree() == 0) return a;
  const ModPPoly rg = squarefree_part(g);
  return monic(exact_div(a * rg, euclid_gcd(a, rg)));
}

std::vector<int> distinct_degree_pattern(const ModPPoly& input) {
  std::vector<int> out;
  ModPPoly f = monic(input);
  if (f.degree() <= 0) return out;
  const ModPPoly x = ModPPoly::var();
  const Integer p = Fp::modulus();
  ModPPoly h = x % f;
  for (int d = 1; f.degree() >= 2 * d; ++d) {
    h = powmod(h, p, f);
    ModPPoly g = euclid_gcd(f, h - x);
    if (g.degree() > 0) {
      for (int k = 0; k < g.degree() / d; ++k) out.push_back(d);
      f = exact_div(f, g);
      h = h % f;
    }
  }
  if (f.degree() > 0) out.push_back(f.degree());
  std::sort(out.begin(), out.end());
  return out;
}

FactorPattern factor_degrees_mod_p(const UniPoly& f, std::uint32_t p) {
  if (f.is_zero()) throw InvalidInput("factor_degrees_mod_p: zero polynomial");
  if (!is_prime(p)) throw InvalidInput("factor_degrees_mod_p: modulus is not prime");
  const ZPoly g = primitive_integer(f);
  if (g.back() % p == 0) throw InvalidInput("factor_degrees_mod_p: p divides the leading coefficient");
  ScopedPrime sp(p);
  const ModPPoly fp = reduce_mod_p(from_integers(g));
  const ModPPoly sq = squarefree_part(fp);
  FactorPattern r;
  r.squarefree_input = sq.degree() == fp.degree();
  r.degrees = distinct_degree_pattern(sq);
  return r;
}

std::vector<std::uint32_t> roots_mod_p(const ModPPoly& f) {
  std::vector<std::uint32_t> out;
  if (f.degree() <= 0) return out;
  const ModPPoly fm = monic(f);
  const ModPPoly x = ModPPoly::var();
  const ModPPoly h = euclid_gcd(fm, powmod(x, Integer(Fp::modulus()), fm) - x);
  if (h.degree() <= 0) return out;
  for (std::uint32_t a = 0; a < Fp::modulus() && static_cast<int>(out.size()) < h.degree(); ++a)
    if (is_zero(h(Fp(a)))) out.push_back(a);
  return out;
}

bool has_root_mod_p(const ModPPoly& f) {
  if (f.degree() <= 0) return false;
  const ModPPoly fm = monic(f);
  const ModPPoly x = ModPPoly::var();
  return euclid_gcd(fm, powmod(x, Integer(Fp::modulus()), fm) - x).degree() > 0;
}

std::string to_string(const UniPoly& f, const std::string& var) {
  if (f.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int k = f.degree(); k >= 0; --k) {
    const Rational& c = f.coeffs()[k];
    if (sgn(c) == 0) continue;
    Rational a = abs(c);
    if (!first) os << (sgn(c) < 0 ? " - " : " + ");
    else if (sgn(c) < 0) os << "-";
    first = false;
    const bool unit = a == 1;
    if (!unit || k == 0) os << a.get_str();
    if (k > 0) {
      if (!unit) os << "*";
      os << var;
      if (k > 1) os << "^" << k;
    }
  }
  return os.str();
}

std::vector<std::string> to_strings(const UniPoly& f) {
  std::vector<std::string> out;
  for (const auto& c : f.coeffs()) out.push_back(to_string(c));
  return out;
}

}  // namespace cubicdyn
