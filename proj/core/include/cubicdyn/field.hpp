// Scalar fields used throughout the library: the rationals (GMP), and the
// prime field F_p with a per-thread modulus.
//
// Generic algorithms in this library are written against a small implicit
// interface: construction from an int, the four field operations, equality,
// and the free function is_zero().

#ifndef CUBICDYN_FIELD_HPP
#define CUBICDYN_FIELD_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cubicdyn {

using Integer = mpz_class;
using Rational = mpq_class;

/// Raised when an operation receives input outside its contract.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when two computations that must agree do not.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool is_zero(const Rational& x) { return sgn(x) == 0; }
inline bool is_zero(const Integer& x) { return sgn(x) == 0; }

namespace detail {
// Unqualified, so that overloads declared later are found by ADL.
template <class T>
bool zero(const T& x) {
  return is_zero(x);
}
}  // namespace detail

/// "num/den" with den > 0 (den printed even when 1).
std::string to_string(const Rational& x);
Rational parse_rational(const std::string& s);

bool is_prime(std::uint64_t n);

/// Element of F_p. The modulus is thread-local and installed by ScopedPrime;
/// values are only meaningful inside that scope.
class Fp {
 public:
  Fp() = default;
  Fp(long long v) : v_(reduce(v)) {}  // NOLINT(google-explicit-constructor)

  static std::uint32_t modulus() { return p_; }
  std::uint32_t value() const { return v_; }

  Fp operator+(Fp o) const {
    std::uint32_t s = v_ + o.v_;
    return raw(s >= p_ ? s - p_ : s);
  }
  Fp operator-(Fp o) const { return raw(v_ >= o.v_ ? v_ - o.v_ : v_ + p_ - o.v_); }
  Fp operator-() const { return raw(v_ == 0 ? 0 : p_ - v_); }
  Fp operator*(Fp o) const {
    return raw(static_cast<std::uint32_t>(static_cast<std::uint64_t>(v_) * o.v_ % p_));
  }
  Fp operator/(Fp o) const { return *this * o.inverse(); }
  Fp& operator+=(Fp o) { return *this = *this + o; }
  Fp& operator-=(Fp o) { return *this = *this - o; }
  Fp& operator*=(Fp o) { return *this = *this * o; }
  Fp& operator/=(Fp o) { return *this = *this / o; }
  bool operator==(const Fp& o) const { return v_ == o.v_; }
  bool operator!=(const Fp& o) const { return v_ != o.v_; }

  Fp pow(std::uint64_t e) const {
    Fp base = *this, r = raw(1 % p_);
    while (e) {
      if (e & 1) r *= base;
      base *= base;
      e >>= 1;
    }
    return r;
  }
  Fp inverse() const {
    if (v_ == 0) throw std::domain_error("Fp: division by zero");
    return pow(p_ - 2);
  }

  static Fp from(const Integer& z) {
    Integer r = z % p_;
    if (r < 0) r += p_;
    return raw(static_cast<std::uint32_t>(r.get_ui()));
  }
  /// Throws std::domain_error when p divides the denominator.
  static Fp from(const Rational& q) {
    return from(Integer(q.get_num())) / from(Integer(q.get_den()));
  }

 private:
  friend class ScopedPrime;
  static Fp raw(std::uint32_t v) {
    Fp r;
    r.v_ = v;
    return r;
  }
  static std::uint32_t reduce(long long v) {
    long long r = v % static_cast<long long>(p_);
    return static_cast<std::uint32_t>(r < 0 ? r + p_ : r);
  }

  std::uint32_t v_ = 0;
  static thread_local std::uint32_t p_;
};

inline bool is_zero(const Fp& x) { return x.value() == 0; }
inline std::string to_string(const Fp& x) { return std::to_string(x.value()); }

/// Installs p as the F_p modulus for the current thread until destruction.
class ScopedPrime {
 public:
  explicit ScopedPrime(std::uint32_t p) : prev_(Fp::p_) {
    if (p < 2 || p > 65521 || !is_prime(p)) throw InvalidInput("ScopedPrime: unsupported modulus");
    Fp::p_ = p;
  }
  ~ScopedPrime() { Fp::p_ = prev_; }
  ScopedPrime(const ScopedPrime&) = delete;
  ScopedPrime& operator=(const ScopedPrime&) = delete;

 private:
  std::uint32_t prev_;
};

}  // namespace cubicdyn

#endif  // CUBICDYN_FIELD_HPP
