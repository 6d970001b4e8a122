#include "cubicdyn/ratfunc.hpp"

namespace cubicdyn {

RatFunc::RatFunc(UniPoly n, UniPoly d) {
  if (d.is_zero()) throw std::domain_error("RatFunc: zero denominator");
  if (n.is_zero()) {
    den_ = UniPoly::constant(1);
    return;
  }
  if (d.degree() > 0) {
    UniPoly g = gcd(n, d);
    if (g.degree() > 0) {
      n = exact_div(n, g);
      d = exact_div(d, g);
    }
  }
  const Rational l = d.leading();
  if (l != 1) {
    const Rational inv = 1 / l;
    n = inv * n;
    d = inv * d;
  }
  num_ = std::move(n);
  den_ = std::move(d);
}

RatFunc RatFunc::operator+(const RatFunc& o) const {
  if (den_ == o.den_) return RatFunc(num_ + o.num_, den_);
  return RatFunc(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

RatFunc RatFunc::operator-(const RatFunc& o) const {
  if (den_ == o.den_) return RatFunc(num_ - o.num_, den_);
  return RatFunc(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

RatFunc RatFunc::operator-() const {
  RatFunc r = *this;
  r.num_ = -r.num_;
  return r;
}

RatFunc RatFunc::operator*(const RatFunc& o) const {
  if (is_polynomial() && o.is_polynomial()) return RatFunc(num_ * o.num_);
  return RatFunc(num_ * o.num_, den_ * o.den_);
}

RatFunc RatFunc::operator/(const RatFunc& o) const {
  if (o.num_.is_zero()) throw std::domain_error("RatFunc: division by zero");
  return RatFunc(num_ * o.den_, den_ * o.num_);
}

Rational RatFunc::operator()(const Rational& t0) const {
  const Rational d = den_(t0);
  if (sgn(d) == 0) throw std::domain_error("RatFunc: evaluation at a pole");
  return num_(t0) / d;
}

std::string to_string(const RatFunc& f, const std::string& var) {
  if (f.is_polynomial()) return to_string(f.num(), var);
  return "(" + to_string(f.num(), var) + ")/(" + to_string(f.den(), var) + ")";
}

}  // namespace cubicdyn
