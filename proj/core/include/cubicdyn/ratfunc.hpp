// Rational functions in one variable over Q, kept in lowest terms with a
// monic denominator.

#ifndef CUBICDYN_RATFUNC_HPP
#define CUBICDYN_RATFUNC_HPP

#include "cubicdyn/poly.hpp"

namespace cubicdyn {

class RatFunc {
 public:
  RatFunc() : num_(), den_(UniPoly::constant(1)) {}
  RatFunc(long long c)  // NOLINT(google-explicit-constructor)
      : num_(c == 0 ? UniPoly() : UniPoly::constant(Rational(static_cast<long>(c)))), den_(UniPoly::constant(1)) {}
  RatFunc(const Rational& c)  // NOLINT(google-explicit-constructor)
      : num_(sgn(c) == 0 ? UniPoly() : UniPoly::constant(c)), den_(UniPoly::constant(1)) {}
  RatFunc(UniPoly p)  // NOLINT(google-explicit-constructor)
      : num_(std::move(p)), den_(UniPoly::constant(1)) {}
  RatFunc(UniPoly n, UniPoly d);

  static RatFunc t() { return RatFunc(UniPoly::var()); }

  const UniPoly& num() const { return num_; }
  const UniPoly& den() const { return den_; }
  bool is_polynomial() const { return den_.degree() == 0; }

  RatFunc operator+(const RatFunc& o) const;
  RatFunc operator-(const RatFunc& o) const;
  RatFunc operator-() const;
  RatFunc operator*(const RatFunc& o) const;
  RatFunc operator/(const RatFunc& o) const;
  RatFunc& operator+=(const RatFunc& o) { return *this = *this + o; }
  RatFunc& operator-=(const RatFunc& o) { return *this = *this - o; }
  RatFunc& operator*=(const RatFunc& o) { return *this = *this * o; }
  RatFunc& operator/=(const RatFunc& o) { return *this = *this / o; }
  bool operator==(const RatFunc& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const RatFunc& o) const { return !(*this == o); }

  /// Value at t0; throws std::domain_error at a pole.
  Rational operator()(const Rational& t0) const;

 private:
  UniPoly num_, den_;
};

inline bool is_zero(const RatFunc& f) { return f.num().is_zero(); }

std::string to_string(const RatFunc& f, const std::string& var = "t");

}  // namespace cubicdyn

#endif  // CUBICDYN_RATFUNC_HPP
