#include "cubicdyn/geometry.hpp"

namespace cubicdyn {

ProjPoint::ProjPoint(std::vector<Integer> coords) {
  Vec<Rational> v;
  for (auto& a : coords) v.emplace_back(a);
  normalize(v);
  for (const auto& a : v) c.push_back(a.get_num());
}

ProjPoint ProjPoint::from_rational(const Vec<Rational>& v) {
  Vec<Rational> w = v;
  normalize(w);
  ProjPoint p;
  for (const auto& a : w) p.c.push_back(a.get_num());
  return p;
}

Vec<Rational> ProjPoint::to_rational() const {
  Vec<Rational> v;
  for (const auto& a : c) v.emplace_back(a);
  return v;
}

std::string to_string(const ProjPoint& p) {
  std::string s = "[";
  for (std::size_t i = 0; i < p.c.size(); ++i) {
    if (i) s += ":";
    s += p.c[i].get_str();
  }
  return s + "]";
}

std::string to_string(Indeterminacy r) {
  switch (r) {
    case Indeterminacy::none:
      return "none";
    case Indeterminacy::base_point:
      return "base point of involution";
    case Indeterminacy::line_on_surface:
      return "line contained in surface";
    case Indeterminacy::singular_point:
      return "singular point of curve";
  }
  return "unknown";
}

namespace {

Form<Fp> reduce_form(const Form<Rational>& F) {
  return F.map<Fp>([](const Rational& c) { return Fp::from(c); });
}

void require_on(const CubicSurface& S, const ProjPoint& p) {
  if (p.size() != 4) throw InvalidInput("point " + to_string(p) + " does not have four coordinates");
  if (!S.contains(p)) throw InvalidInput("point " + to_string(p) + " is not on the surface");
}

MapStep to_map_step(const Step<Vec<Rational>>& s) {
  if (!s.defined()) return MapStep::fail(s.reason);
  return MapStep::ok(ProjPoint::from_rational(*s.point));
}

}  // namespace

CubicSurface::CubicSurface(const Form<Rational>& F) {
  if (F.is_zero()) throw InvalidInput("surface form is zero");
  if (F.arity() != 4 || F.degree() != 3) throw InvalidInput("surface form must be a cubic in four variables");
  cubic_ = Cubic<Rational>(F);
  bool all_integral = true;
  for (const auto& [e, c] : F.terms()) all_integral = all_integral && c.get_den() == 1;
  if (all_integral) {
    for (std::uint32_t p : {101u, 103u, 107u}) {
      ScopedPrime sp(p);
      if (surface_is_smooth(reduce_form(F))) {
        evidence_ = "partials have no common zero mod " + std::to_string(p) +
                    " (degree-5 Macaulay matrix of rank 56), hence none over Q";
        return;
      }
    }
  }
  if (!surface_is_smooth(F)) throw InvalidInput("surface is singular");
  evidence_ = "partials have no common zero over Q (degree-5 Macaulay matrix of rank 56)";
}

MapStep third_intersection(const CubicSurface& S, const ProjPoint& a, const ProjPoint& b) {
  require_on(S, a);
  require_on(S, b);
  if (a == b) throw InvalidInput("third_intersection: the two points coincide");
  return to_map_step(third_point(S.cubic(), a.to_rational(), b.to_rational()));
}

ProjPlane tangent_plane(const CubicSurface& S, const ProjPoint& x) {
  require_on(S, x);
  const Vec<Rational> g = S.cubic().gradient(x.to_rational());
  if (is_zero_vec(g)) throw ConsistencyError("tangent_plane: vanishing gradient on a smooth surface");
  return ProjPlane{ProjPoint::from_rational(g)};
}

MapStep geiser(const CubicSurface& S, const ProjPoint& x, const ProjPoint& w) {
  require_on(S, x);
  require_on(S, w);
  return to_map_step(geiser_step(S.cubic(), x.to_rational(), w.to_rational()));
}

MapStep f_step(const CubicSurface& S, const GoodPairCertificate& cert, const ProjPoint& w) {
  require_on(S, w);
  return to_map_step(f_step_k(S.cubic(), cert.x.to_rational(), cert.y.to_rational(), w.to_rational()));
}

bool absolutely_irreducible(const Form<Rational>& C) { return absolutely_irreducible_k(C); }

Form<Rational> tangent_section(const CubicSurface& S, const ProjPoint& x) {
  const ProjPlane T = tangent_plane(S, x);
  return S.form().substitute(plane_parametrization(T.coeffs.to_rational()));
}

bool is_good_point(const CubicSurface& S, const ProjPoint& x) {
  return absolutely_irreducible(tangent_section(S, x));
}

GoodPairResult is_good_pair(const CubicSurface& S, const ProjPoint& x, const ProjPoint& y) {
  require_on(S, x);
  require_on(S, y);
  if (x == y) throw InvalidInput("is_good_pair: x and y coincide");
  GoodPairResult r;
  const MapStep z = third_intersection(S, x, y);
  if (!z.defined()) {
    r.rejection = "the line through x and y lies on the surface";
    return r;
  }
  GoodPairCertificate c{x, y, *z.point};
  c.distinct = c.z != x && c.z != y;
  c.line_not_tangent = c.distinct;
  c.all_three_good = true;
  for (const ProjPoint* p : std::initializer_list<const ProjPoint*>{&x, &y, &c.z})
    if (!is_good_point(S, *p)) {
      if (r.rejection.empty()) r.rejection = "point " + to_string(*p) + " lies on a line of the surface";
      c.all_three_good = false;
    }
  if (!c.distinct) r.rejection = "the line through x and y is tangent to the surface at " + to_string(c.z);
  r.candidate = c;
  if (c.valid()) r.certificate = c;
  return r;
}

}  // namespace cubicdyn
