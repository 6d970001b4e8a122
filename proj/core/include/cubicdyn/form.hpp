// Homogeneous forms in 3 or 4 variables with coefficients in a commutative
// ring R (R(int), + - *, is_zero).

#ifndef CUBICDYN_FORM_HPP
#define CUBICDYN_FORM_HPP

#include <array>
#include <map>
#include <stdexcept>
#include <vector>

#include "cubicdyn/field.hpp"

namespace cubicdyn {

using Exponent = std::array<int, 4>;

template <class R>
class Form {
 public:
  Form() = default;
  Form(int arity, int degree) : arity_(arity), degree_(degree) {
    if (arity < 1 || arity > 4 || degree < 0) throw InvalidInput("Form: bad arity or degree");
  }

  static Form variable(int arity, int i) {
    Form f(arity, 1);
    Exponent e{0, 0, 0, 0};
    e[i] = 1;
    f.set(e, R(1));
    return f;
  }
  static Form constant(int arity, const R& c) {
    Form f(arity, 0);
    f.set(Exponent{0, 0, 0, 0}, c);
    return f;
  }

  int arity() const { return arity_; }
  int degree() const { return degree_; }
  const std::map<Exponent, R>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  R coeff(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? R(0) : it->second;
  }
  void set(const Exponent& e, const R& c) {
    int s = 0;
    for (int i = 0; i < 4; ++i) {
      if (e[i] < 0 || (i >= arity_ && e[i] != 0)) throw InvalidInput("Form: exponent outside arity");
      s += e[i];
    }
    if (s != degree_) throw InvalidInput("Form: exponent does not match degree");
    if (detail::zero(c))
      terms_.erase(e);
    else
      terms_[e] = c;
  }
  void add(const Exponent& e, const R& c) { set(e, coeff(e) + c); }

  template <class V>
  R operator()(const V& pt) const {
    R r(0);
    for (const auto& [e, c] : terms_) {
      R m = c;
      for (int i = 0; i < arity_; ++i)
        for (int k = 0; k < e[i]; ++k) m = m * pt[i];
      r = r + m;
    }
    return r;
  }

  Form partial(int i) const {
    Form d(arity_, degree_ > 0 ? degree_ - 1 : 0);
    if (degree_ == 0) return d;
    for (const auto& [e, c] : terms_) {
      if (e[i] == 0) continue;
      Exponent f = e;
      --f[i];
      d.add(f, R(e[i]) * c);
    }
    return d;
  }

  friend Form operator+(const Form& a, const Form& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    check_same(a, b);
    Form r = a;
    for (const auto& [e, c] : b.terms_) r.add(e, c);
    return r;
  }
  friend Form operator-(const Form& a, const Form& b) {
    Form nb = b;
    for (auto& kv : nb.terms_) kv.second = -kv.second;
    return a + nb;
  }
  friend Form operator*(const Form& a, const Form& b) {
    if (a.arity_ != b.arity_) throw InvalidInput("Form: arity mismatch");
    Form r(a.arity_, a.degree_ + b.degree_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        Exponent e;
        for (int i = 0; i < 4; ++i) e[i] = ea[i] + eb[i];
        r.add(e, ca * cb);
      }
    return r;
  }
  friend Form operator*(const R& s, const Form& a) {
    Form r(a.arity_, a.degree_);
    for (const auto& [e, c] : a.terms_) r.set(e, s * c);
    return r;
  }
  friend bool operator==(const Form& a, const Form& b) {
    return a.arity_ == b.arity_ && a.degree_ == b.degree_ && a.terms_ == b.terms_;
  }

  /// Substitute X_i -> sum_j L[i][j] Y_j; the result has arity L[0].size().
  Form substitute(const std::vector<std::vector<R>>& L) const {
    if (static_cast<int>(L.size()) != arity_) throw InvalidInput("Form: substitution size mismatch");
    const int m = static_cast<int>(L[0].size());
    std::vector<Form> lin;
    for (int i = 0; i < arity_; ++i) {
      Form l(m, 1);
      for (int j = 0; j < m; ++j) {
        Exponent e{0, 0, 0, 0};
        e[j] = 1;
        l.set(e, L[i][j]);
      }
      lin.push_back(std::move(l));
    }
    std::vector<std::vector<Form>> pw(arity_);
    for (int i = 0; i < arity_; ++i) {
      pw[i].push_back(constant(m, R(1)));
      for (int k = 1; k <= degree_; ++k) pw[i].push_back(pw[i].back() * lin[i]);
    }
    Form r(m, degree_);
    for (const auto& [e, c] : terms_) {
      Form t = constant(m, c);
      for (int i = 0; i < arity_; ++i)
        if (e[i]) t = t * pw[i][e[i]];
      r = r + t;
    }
    return r;
  }

  template <class S, class Fn>
  Form<S> map(Fn&& fn) const {
    Form<S> r(arity_, degree_);
    for (const auto& [e, c] : terms_) r.set(e, fn(c));
    return r;
  }

 private:
  static void check_same(const Form& a, const Form& b) {
    if (a.arity_ != b.arity_ || a.degree_ != b.degree_) throw InvalidInput("Form: shape mismatch");
  }
  int arity_ = 0;
  int degree_ = 0;
  std::map<Exponent, R> terms_;
};

}  // namespace cubicdyn

#endif  // CUBICDYN_FORM_HPP
