// The linear fibration through a good pair: the pencil of plane sections
// through L(x, y), its generic fiber in short Weierstrass form over Q(t),
// and specialization to individual fibers.

#ifndef CUBICDYN_FIBRATION_HPP
#define CUBICDYN_FIBRATION_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cubicdyn/geometry.hpp"
#include "cubicdyn/ratfunc.hpp"
#include "cubicdyn/weierstrass.hpp"

namespace cubicdyn {

/// A point of the base P^1: a rational t or infinity.
struct FiberParam {
  std::optional<Rational> t;

  static FiberParam infinity() { return {}; }
  static FiberParam at(Rational v) { return {std::move(v)}; }
  bool is_infinity() const { return !t.has_value(); }
  friend bool operator==(const FiberParam& a, const FiberParam& b) { return a.t == b.t; }
  friend bool operator!=(const FiberParam& a, const FiberParam& b) { return !(a == b); }
  friend bool operator<(const FiberParam& a, const FiberParam& b) {
    if (a.is_infinity() || b.is_infinity()) return !a.is_infinity() && b.is_infinity();
    return *a.t < *b.t;
  }
};

std::string to_string(const FiberParam& p);
FiberParam parse_fiber_param(const std::string& s);

/// Columns span the plane l2 = t l1 (or l1 = 0 at infinity) in P^3, given
/// the inverse of the matrix with rows l1, l2, m1, m2.
template <class K>
Matrix<K> fiber_plane_matrix(const Matrix<K>& Minv, const std::optional<K>& t) {
  Matrix<K> E(4, Vec<K>(3, K(0)));
  if (t) {
    E[0][0] = K(1);
    E[1][0] = *t;
  } else {
    E[1][0] = K(1);
  }
  E[2][1] = K(1);
  E[3][2] = K(1);
  return mat_mul(Minv, E);
}

/// Coordinates of a P^3 point in the plane of fiber t (see fiber_plane_matrix).
template <class K>
Vec<K> plane_coordinates(const Matrix<K>& M, bool infinity, const Vec<K>& w) {
  const Vec<K> l = mat_vec(M, w);
  return {infinity ? l[1] : l[0], l[2], l[3]};
}

struct CubicPencil {
  Form<Rational> surface;
  Matrix<Rational> M, Minv;  // rows of M: l1, l2, m1, m2
  Form<RatFunc> generic;     // F_t(X0, X1, X2)
  Vec<Rational> x, y, z;     // plane coordinates, the same on every fiber
  Vec<Rational> x3, y3, z3;  // the same points in P^3
  int attempts = 1;
  std::string provenance;

  Matrix<Rational> plane(const FiberParam& t) const;
  Form<Rational> fiber(const FiberParam& t) const;
  /// Parameter of the fiber through w, or nullopt when w lies on L(x, y).
  std::optional<FiberParam> parameter_of(const Vec<Rational>& w) const;
  Vec<Rational> to_plane(const FiberParam& t, const Vec<Rational>& w) const;
  Vec<Rational> to_space(const FiberParam& t, const Vec<Rational>& X) const;
};

/// Throws ConsistencyError when no parametrization with a nonsingular fiber
/// at infinity is found, and InvalidInput for a rejected pair unless
/// allow_rejected is set (the pencil of planes through L(x, y) still exists).
CubicPencil build_pencil(const CubicSurface& S, const GoodPairCertificate& cert, bool allow_rejected = false);

/// Integral short model over Q[t] of the generic fiber, with y's image.
struct WeierstrassModel {
  UniPoly A, B;
  RatFunc u_y, v_y;
  UniPoly a, c, d;  // u_y = a / d^2, v_y = c / d^3
  RatFunc mu;       // scaling applied to the raw transform
  std::vector<Rational> exceptional;  // finite part of the exceptional set; infinity always belongs to it
  std::vector<std::string> provenance;
  std::shared_ptr<const WeierstrassTransform<RatFunc>> transform;

  UniPoly discriminant() const;
  bool is_exceptional(const FiberParam& t) const;
  /// Image of a generic-fiber point in the integral model.
  WPoint<RatFunc> forward(const Vec<RatFunc>& X) const;
};

WeierstrassModel to_weierstrass(const CubicPencil& pencil);

enum class SingularityType { none, node, cusp };
std::string to_string(SingularityType s);

/// A model over Q with integer A, B, reduced at every prime where this can
/// be done by trial division; lambda is the scaling used: (A, B) -> (l^4 A, l^6 B).
struct ConstantModel {
  ShortCurve<Rational> curve;
  Rational lambda;
};
ConstantModel reduce_constant_model(const ShortCurve<Rational>& E);

/// Isomorphic over Q (short models).
bool isomorphic_over_q(const ShortCurve<Rational>& E1, const ShortCurve<Rational>& E2);

/// A2 = l^4 A1 and B2 = l^6 B1 for some l in Q*.
bool equivalent_models(const UniPoly& A1, const UniPoly& B1, const UniPoly& A2, const UniPoly& B2);

/// A single rational fiber, transformed on its own.
struct DirectFiber {
  FiberParam t0;
  Form<Rational> cubic;
  std::shared_ptr<const WeierstrassTransform<Rational>> transform;
  Rational lambda;
  ShortCurve<Rational> curve;  // reduced model
  WPoint<Rational> y, z;
  bool singular = false;
  SingularityType type = SingularityType::none;

  WPoint<Rational> forward(const Vec<Rational>& X) const;
  Vec<Rational> backward(const WPoint<Rational>& P) const;
};

DirectFiber analyze_fiber(const CubicPencil& pencil, const FiberParam& t0);

struct SpecializedFiber {
  FiberParam t0;
  Rational A0, B0;
  bool singular = false;
  SingularityType type = SingularityType::none;
  WPoint<Rational> y;
  bool exceptional = false;
  std::string source;
};

SpecializedFiber specialize(const CubicPencil& pencil, const WeierstrassModel& W, const FiberParam& t0);

}  // namespace cubicdyn

#endif  // CUBICDYN_FIBRATION_HPP
