#include "cubicdyn/residual.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace cubicdyn {

std::vector<ForbiddenFiber> forbidden_set(const PeriodicFiberReport& periodic) {
  std::vector<ForbiddenFiber> out;
  for (const auto& f : periodic.fibers) {
    ForbiddenFiber ff;
    ff.t0 = f.t0;
    if (f.exact_period > 0) {
      if (f.singular) {
        ff.whole_fiber = true;
        ff.reason = "singular periodic fiber";
      } else if (!f.rank) {
        ff.whole_fiber = true;
        ff.reason = "periodic fiber without rank annotation";
      } else if (*f.rank > 0) {
        ff.whole_fiber = true;
        ff.reason = "periodic fiber of positive rank";
      } else {
        std::set<ProjPoint> pts(f.torsion_points.begin(), f.torsion_points.end());
        pts.insert(f.z_infinity.begin(), f.z_infinity.end());
        ff.points.assign(pts.begin(), pts.end());
        ff.reason = "rank 0: rational torsion and Z_inf points";
      }
    } else if (f.singular) {
      if (f.singular_point) {
        ff.points = {*f.singular_point};
        ff.reason = "rational fixed point";
      } else {
        ff.whole_fiber = true;
        ff.reason = "singular fiber with unlocated fixed point";
      }
    } else {
      continue;
    }
    out.push_back(std::move(ff));
  }
  return out;
}

namespace {

std::uint32_t mod_of(const Rational& q) { return Fp::from(q).value(); }

FpPoint key_of(Vec<Fp> v) {
  normalize(v);
  FpPoint k{};
  for (std::size_t i = 0; i < v.size() && i < 4; ++i) k[i] = v[i].value();
  return k;
}

Vec<Fp> vec_of(const FpPoint& k, int n = 4) {
  Vec<Fp> v(n);
  for (int i = 0; i < n; ++i) v[i] = Fp(k[i]);
  return v;
}

Form<Fp> surface_mod(const ReducedSystem& R) {
  Form<Fp> F(4, 3);
  for (const auto& [e, c] : R.surface) F.set(e, Fp(c));
  return F;
}

Matrix<Fp> matrix_mod(const std::array<std::array<std::uint32_t, 4>, 4>& m) {
  Matrix<Fp> r(4, Vec<Fp>(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i][j] = Fp(m[i][j]);
  return r;
}

std::optional<std::uint32_t> reduce_param(const FiberParam& t) {
  if (t.is_infinity()) return std::nullopt;
  const Integer den = t.t->get_den();
  if (den % Fp::modulus() == 0) return std::nullopt;
  return mod_of(*t.t);
}

std::uint32_t tau_code(const std::optional<std::uint32_t>& t) { return t ? *t : Fp::modulus(); }

}  // namespace

ReducedSystem reduce_mod_p(const GlobalSystem& G, std::uint32_t p) {
  ReducedSystem R;
  R.p = p;
  if (!is_prime(p) || p > 65521) throw InvalidInput("reduce_mod_p: unsupported modulus");
  ScopedPrime sp(p);
  bool any_nonzero = false;
  bool denominators_ok = true;
  for (const auto& [e, c] : G.surface.form().terms()) {
    if (c.get_den() % p == 0) {
      denominators_ok = false;
      continue;
    }
    const std::uint32_t v = mod_of(c);
    if (v) {
      R.surface[e] = v;
      any_nonzero = true;
    }
  }
  if (!any_nonzero && denominators_ok) throw InvalidInput("reduce_mod_p: p divides every coefficient of the surface");
  auto bad = [&](std::string why) {
    R.good_reduction = false;
    R.bad_reason = std::move(why);
    return R;
  };
  if (!denominators_ok) return bad("p divides a denominator of the surface");
  if (p < 5) return bad("p < 5");

  auto reduce_point = [&](const ProjPoint& P, FpPoint& out) {
    Vec<Fp> v(4);
    for (int i = 0; i < 4; ++i) v[i] = Fp::from(P.c[i]);
    if (is_zero_vec(v)) return false;
    out = key_of(v);
    return true;
  };
  if (!reduce_point(G.pair.x, R.x) || !reduce_point(G.pair.y, R.y) || !reduce_point(G.pair.z, R.z))
    return bad("a point of the pair reduces to zero");
  try {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        R.M[i][j] = mod_of(G.pencil.M[i][j]);
        R.Minv[i][j] = mod_of(G.pencil.Minv[i][j]);
      }
  } catch (const std::domain_error&) {
    return bad("p divides a denominator of the pencil coordinates");
  }

  const Form<Fp> F = surface_mod(R);
  if (!surface_is_smooth(F)) return bad("surface is singular mod p");
  const Cubic<Fp> S(F);
  const Vec<Fp> x = vec_of(R.x), y = vec_of(R.y), z = vec_of(R.z);
  if (proportional(x, y)) return bad("x and y coincide mod p");
  if (!G.pair_rejected) {
    Vec<Fp> zz;
    if (!is_good_pair_k(S, x, y, &zz)) return bad("x, y is not a good pair mod p");
    if (!proportional(zz, z)) return bad("third intersection does not reduce compatibly");
  } else {
    const auto t = third_point(S, x, y);
    if (!t.defined() || !proportional(*t.point, z)) return bad("third intersection does not reduce compatibly");
    for (const auto* v : {&x, &y, &z})
      if (!is_good_point_k(S, *v)) return bad("a point of the pair lies on a line mod p");
  }
  if (reduce_mod_p(G.dps.psi(1)).is_zero()) return bad("Psi_1 vanishes identically mod p");

  for (const auto& ff : forbidden_set(G.periodic)) {
    if (ff.whole_fiber) {
      R.forbidden_fibers.push_back(reduce_param(ff.t0));
      continue;
    }
    for (const auto& P : ff.points) {
      FpPoint k;
      if (reduce_point(P, k)) R.forbidden_points.emplace(k, "fiber " + to_string(ff.t0) + ": " + ff.reason);
    }
  }
  R.good_reduction = true;
  return R;
}

std::vector<FpPoint> enumerate_surface_points(const ReducedSystem& R) {
  const std::uint32_t p = R.p;
  ScopedPrime sp(p);
  struct Term {
    Exponent e;
    Fp c;
  };
  std::vector<Term> terms;
  for (const auto& [e, c] : R.surface) terms.push_back({e, Fp(c)});
  std::vector<FpPoint> out;
  FpPoint w{};
  std::array<std::array<Fp, 4>, 4> pw{};
  auto eval = [&]() {
    for (int i = 0; i < 4; ++i) {
      pw[i][0] = Fp(1);
      for (int k = 1; k < 4; ++k) pw[i][k] = pw[i][k - 1] * Fp(w[i]);
    }
    Fp s(0);
    for (const auto& t : terms) s += t.c * pw[0][t.e[0]] * pw[1][t.e[1]] * pw[2][t.e[2]] * pw[3][t.e[3]];
    return is_zero(s);
  };
  for (int lead = 0; lead < 4; ++lead) {
    const int free = 3 - lead;
    std::uint64_t count = 1;
    for (int k = 0; k < free; ++k) count *= p;
    for (std::uint64_t idx = 0; idx < count; ++idx) {
      w = FpPoint{};
      w[lead] = 1;
      std::uint64_t r = idx;
      for (int k = 3; k > lead; --k) {
        w[k] = static_cast<std::uint32_t>(r % p);
        r /= p;
      }
      if (eval()) out.push_back(w);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::uint32_t> fiber_of(const ReducedSystem& R, const FpPoint& w) {
  ScopedPrime sp(R.p);
  const Vec<Fp> l = mat_vec(matrix_mod(R.M), vec_of(w));
  if (is_zero(l[0]) && is_zero(l[1])) return std::nullopt;
  if (is_zero(l[0])) return R.p;
  return (l[1] / l[0]).value();
}

OrbitTable brute_force_orbits(const ReducedSystem& R) {
  if (!R.good_reduction) throw InvalidInput("brute_force_orbits: bad reduction");
  OrbitTable T;
  T.p = R.p;
  T.points = enumerate_surface_points(R);
  ScopedPrime sp(R.p);
  const Cubic<Fp> S(surface_mod(R));
  const Vec<Fp> x = vec_of(R.x), y = vec_of(R.y);
  std::map<FpPoint, int> index;
  for (std::size_t i = 0; i < T.points.size(); ++i) index[T.points[i]] = static_cast<int>(i);
  const std::size_t n = T.points.size();
  T.next.assign(n, -1);
  T.stop.assign(n, "");
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = f_step_k(S, x, y, vec_of(T.points[i]));
    if (!s.defined()) {
      T.stop[i] = to_string(s.reason);
      continue;
    }
    auto it = index.find(key_of(*s.point));
    if (it == index.end()) throw ConsistencyError("brute force: f(w) is not on the reduced surface");
    T.next[i] = it->second;
  }

  // Cycles of the functional graph; everything else is not periodic.
  T.period.assign(n, 0);
  std::vector<int> state(n, 0), pos(n, -1);
  for (std::size_t s = 0; s < n; ++s) {
    if (state[s]) continue;
    std::vector<int> path;
    int cur = static_cast<int>(s);
    while (cur >= 0 && state[cur] == 0) {
      state[cur] = 1;
      pos[cur] = static_cast<int>(path.size());
      path.push_back(cur);
      cur = T.next[cur];
    }
    if (cur >= 0 && state[cur] == 1) {
      const int len = static_cast<int>(path.size()) - pos[cur];
      for (std::size_t k = pos[cur]; k < path.size(); ++k) T.period[path[k]] = len;
    }
    for (int v : path) state[v] = 2;
  }

  std::set<std::uint32_t> whole;
  for (const auto& t : R.forbidden_fibers) whole.insert(tau_code(t));
  const Matrix<Fp> M = matrix_mod(R.M);
  T.forbidden.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    bool f = R.forbidden_points.count(T.points[i]) > 0;
    if (!f && !whole.empty()) {
      const Vec<Fp> l = mat_vec(M, vec_of(T.points[i]));
      if (!(is_zero(l[0]) && is_zero(l[1]))) f = whole.count(is_zero(l[0]) ? R.p : (l[1] / l[0]).value()) > 0;
    }
    T.forbidden[i] = f;
    if (T.period[i] == 0) continue;
    if (T.period[i] == 1) T.fixed_point = true;
    if (!T.ell_unrestricted || T.period[i] < *T.ell_unrestricted) T.ell_unrestricted = T.period[i];
    if (!f && (!T.ell || T.period[i] < *T.ell)) T.ell = T.period[i];
  }
  return T;
}

// ---- predictions ---------------------------------------------------------------

namespace {

struct FiberMod {
  FiberPrediction pred;
  std::optional<Cubic<Fp>> C;
  Vec<Fp> xs, ys, zs;
  std::set<FpPoint> z_inf;  // plane coordinates, padded
};

Vec<Fp> plane_coords_mod(const Matrix<Fp>& M, std::uint32_t tau, const Vec<Fp>& w) {
  Vec<Fp> X = plane_coordinates(M, tau == Fp::modulus(), w);
  normalize(X);
  return X;
}

// Requires an active ScopedPrime.
class ModPContext {
 public:
  ModPContext(const GlobalSystem& G, const ReducedSystem& R)
      : G_(G), R_(R), S_(surface_mod(R)), M_(matrix_mod(R.M)), Minv_(matrix_mod(R.Minv)) {
    x_ = vec_of(R.x);
    y_ = vec_of(R.y);
    z_ = vec_of(R.z);
    try {
      A_ = reduce_mod_p(G.model.A);
      B_ = reduce_mod_p(G.model.B);
      a_ = reduce_mod_p(G.model.a);
      c_ = reduce_mod_p(G.model.c);
      d_ = reduce_mod_p(G.model.d);
      model_ok_ = !d_.is_zero();
    } catch (const std::domain_error&) {
      model_ok_ = false;
    }
    for (int n = 1; n <= G.dps.n_max; ++n) {
      try {
        ModPPoly f = reduce_mod_p(G.dps.psi(n));
        if (f.is_zero() && !G.dps.psi(n).is_zero()) psi_ok_ = false;
        psi_.push_back(f);
      } catch (const std::domain_error&) {
        psi_ok_ = false;
        psi_.push_back(ModPPoly());
      }
    }
    for (const auto& b : G.model.exceptional) {
      if (b.get_den() % R.p == 0) continue;
      B_set_.insert(mod_of(b));
    }
  }

  const FiberMod& fiber(std::uint32_t tau) {
    auto it = cache_.find(tau);
    if (it != cache_.end()) return it->second;
    FiberMod fm;
    fm.pred.tau = tau;
    const std::uint32_t p = R_.p;
    const Matrix<Fp> plane = fiber_plane_matrix(Minv_, tau == p ? std::optional<Fp>() : std::optional<Fp>(Fp(tau)));
    const Form<Fp> Cf = S_.substitute(plane);
    fm.xs = plane_coords_mod(M_, tau, x_);
    fm.ys = plane_coords_mod(M_, tau, y_);
    fm.zs = plane_coords_mod(M_, tau, z_);
    fm.pred.irreducible = absolutely_irreducible_k(Cf);
    const Cubic<Fp> C(Cf);
    fm.C = C;
    fm.pred.y_singular = is_zero_vec(C.gradient(fm.ys));
    if (fm.pred.irreducible && !fm.pred.y_singular) {
      const CurveGroup<Fp> grp(C, fm.xs);
      fm.pred.order = grp.order(fm.ys, static_cast<int>(2 * p + 3));
      if (fm.pred.order > 0) {
        Vec<Fp> ky = fm.xs;
        for (int k = 0; k < fm.pred.order; ++k) {
          fm.z_inf.insert(key_of(ky));
          auto zk = grp.add(fm.zs, ky);
          if (zk) fm.z_inf.insert(key_of(*zk));
          auto nk = grp.add(ky, fm.ys);
          if (!nk) break;
          ky = *nk;
        }
      }
    }
    classify_singular(fm, Cf);
    if (tau != p && fm.pred.irreducible && !fm.pred.y_singular && fm.pred.order > 0) check_psi(fm, Cf);
    return cache_.emplace(tau, std::move(fm)).first->second;
  }

  /// Some F_p-point of fiber tau outside L(x, y), Z_inf and the forbidden
  /// set has the fiber's period.
  bool realizable(std::uint32_t tau) {
    const FiberMod& fm = fiber(tau);
    if (!fm.pred.irreducible || fm.pred.y_singular || fm.pred.order == 0) return false;
    for (const auto& t : R_.forbidden_fibers)
      if (tau_code(t) == tau) return false;
    const std::uint32_t p = R_.p;
    const Matrix<Fp> plane = fiber_plane_matrix(Minv_, tau == p ? std::optional<Fp>() : std::optional<Fp>(Fp(tau)));
    for (int lead = 0; lead < 3; ++lead) {
      const std::uint64_t count = lead == 0 ? std::uint64_t(p) * p : lead == 1 ? p : 1;
      for (std::uint64_t idx = 0; idx < count; ++idx) {
        Vec<Fp> X(3, Fp(0));
        X[lead] = Fp(1);
        std::uint64_t r = idx;
        for (int k = 2; k > lead; --k) {
          X[k] = Fp(static_cast<long long>(r % p));
          r /= p;
        }
        if (!fm.C->contains(X) || is_zero_vec(fm.C->gradient(X)) || fm.z_inf.count(key_of(X))) continue;
        const Vec<Fp> w = mat_vec(plane, X);
        const Vec<Fp> l = mat_vec(M_, w);
        if (is_zero(l[0]) && is_zero(l[1])) continue;
        if (R_.forbidden_points.count(key_of(w))) continue;
        return true;
      }
    }
    return false;
  }

  bool psi_ok() const { return psi_ok_; }
  const std::vector<ModPPoly>& psi() const { return psi_; }
  const ModPPoly& A() const { return A_; }
  const Matrix<Fp>& M() const { return M_; }

 private:
  void classify_singular(FiberMod& fm, const Form<Fp>& Cf) {
    if (!fm.pred.irreducible) {
      fm.pred.singular = true;
      return;
    }
    try {
      WeierstrassTransform<Fp> wt(Cf, std::array<Fp, 3>{fm.xs[0], fm.xs[1], fm.xs[2]});
      fm.pred.singular = wt.curve().singular();
      return;
    } catch (const std::exception&) {
    }
    // Fallback: the singular point of an irreducible cubic is rational.
    const std::uint32_t p = R_.p;
    std::vector<Form<Fp>> grad{Cf.partial(0), Cf.partial(1), Cf.partial(2)};
    for (int lead = 0; lead < 3 && !fm.pred.singular; ++lead) {
      const std::uint64_t count = lead == 0 ? std::uint64_t(p) * p : lead == 1 ? p : 1;
      for (std::uint64_t idx = 0; idx < count; ++idx) {
        Vec<Fp> v(3, Fp(0));
        v[lead] = Fp(1);
        std::uint64_t r = idx;
        for (int k = 2; k > lead; --k) {
          v[k] = Fp(static_cast<long long>(r % p));
          r /= p;
        }
        if (is_zero(grad[0](v)) && is_zero(grad[1](v)) && is_zero(grad[2](v))) {
          fm.pred.singular = true;
          break;
        }
      }
    }
  }

  void check_psi(FiberMod& fm, const Form<Fp>& Cf) {
    if (!model_ok_ || !psi_ok_) return;
    const Fp t(fm.pred.tau);
    if (B_set_.count(fm.pred.tau)) return;
    const Fp dt = d_(t);
    if (is_zero(dt)) return;
    const Fp A0 = A_(t), B0 = B_(t);
    const ShortCurve<Fp> E{A0, B0};
    if (E.singular()) return;
    const Fp u = a_(t) / (dt * dt), v = c_(t) / (dt * dt * dt);
    std::optional<WeierstrassTransform<Fp>> wt;
    try {
      wt.emplace(Cf, std::array<Fp, 3>{fm.xs[0], fm.xs[1], fm.xs[2]});
    } catch (const std::exception&) {
      return;
    }
    const ShortCurve<Fp>& E2 = wt->curve();
    const WPoint<Fp> Y2 = wt->forward({fm.ys[0], fm.ys[1], fm.ys[2]});
    if (Y2.infinity) return;
    bool iso = false;
    for (std::uint32_t l = 1; l < R_.p && !iso; ++l) {
      const Fp L(l), L2 = L * L, L3 = L2 * L;
      iso = L2 * L2 * A0 == E2.A && L3 * L3 * B0 == E2.B && L2 * u == Y2.u && L3 * v == Y2.v;
    }
    if (!iso) return;
    fm.pred.regular = true;
    for (int n = 2; n <= G_.dps.n_max; ++n)
      if (is_zero(psi_[n - 1](t))) {
        fm.pred.psi_min = n;
        break;
      }
    const std::optional<int> expected =
        fm.pred.order <= G_.dps.n_max ? std::optional<int>(fm.pred.order) : std::nullopt;
    fm.pred.psi_agrees = fm.pred.psi_min == expected;
  }

  const GlobalSystem& G_;
  const ReducedSystem& R_;
  Form<Fp> S_;
  Matrix<Fp> M_, Minv_;
  Vec<Fp> x_, y_, z_;
  ModPPoly A_, B_, a_, c_, d_;
  bool model_ok_ = true;
  bool psi_ok_ = true;
  std::vector<ModPPoly> psi_;  // psi_[n-1] = Psi_n mod p
  std::set<std::uint32_t> B_set_;
  std::map<std::uint32_t, FiberMod> cache_;
};

bool psi1_root_in_P1(const GlobalSystem& G, ModPContext& ctx, std::uint32_t p) {
  const ModPPoly& f = ctx.psi()[0];
  if (has_root_mod_p(f)) return true;
  if (G.model.A.degree() <= 4 && G.model.B.degree() <= 6) return f.degree() < 12;
  return ctx.fiber(p).pred.singular;
}

// Least period realized on a fiber singled out by a root of some Phi_n mod p
// or by the reduction of a rational periodic fiber.
std::optional<int> theta_bound_impl(const GlobalSystem& G, const ReducedSystem& R, ModPContext& ctx, int N) {
  std::set<std::uint32_t> whole;
  for (const auto& t : R.forbidden_fibers) whole.insert(tau_code(t));
  std::set<std::uint32_t> global_singular, candidates;
  std::optional<int> best;
  auto offer = [&](int n) {
    if (!best || n < *best) best = n;
  };
  for (const auto& f : G.periodic.fibers) {
    const std::uint32_t tau = tau_code(reduce_param(f.t0));
    if (f.singular) global_singular.insert(tau);
    if (f.exact_period > 0) candidates.insert(tau);
  }
  for (int n = 1; n <= std::min(N, G.dps.n_max); ++n) {
    ModPPoly phi;
    try {
      phi = reduce_mod_p(from_integers(primitive_integer(G.dps.phi(n))));
    } catch (const std::domain_error&) {
      continue;
    }
    for (std::uint32_t tau : roots_mod_p(phi)) {
      if (whole.count(tau)) continue;
      if (n == 1) {
        if (!global_singular.count(tau)) offer(1);
        continue;
      }
      const FiberMod& fm = ctx.fiber(tau);
      if (fm.pred.regular && fm.pred.order == n) candidates.insert(tau);
    }
  }
  for (std::uint32_t tau : candidates)
    if (ctx.realizable(tau)) offer(ctx.fiber(tau).pred.order);
  return best;
}

}  // namespace

bool OracleReport::consistent() const {
  if (mismatches || psi_mismatches) return false;
  for (int n : predicted_periods)
    if (!std::binary_search(realized_periods.begin(), realized_periods.end(), n)) return false;
  if (!predicted_periods.empty() && !realized_periods.empty() && realized_periods.front() > predicted_periods.front())
    return false;
  if (fixed_point != psi1_root_in_P1) return false;
  if (theta_bound && (realized_periods.empty() || realized_periods.front() > *theta_bound)) return false;
  return true;
}

OracleReport oracle_check(const GlobalSystem& G, const ReducedSystem& R, const OrbitTable& T) {
  OracleReport O;
  O.p = R.p;
  ScopedPrime sp(R.p);
  ModPContext ctx(G, R);
  const std::uint32_t p = R.p;
  O.predicted.assign(T.points.size(), -1);
  std::set<int> predicted, realized;
  for (std::size_t i = 0; i < T.points.size(); ++i) {
    const Vec<Fp> w = vec_of(T.points[i]);
    const Vec<Fp> l = mat_vec(ctx.M(), w);
    int pred = -1;
    if (is_zero(l[0]) && is_zero(l[1])) {
      pred = 0;
    } else {
      const std::uint32_t tau = is_zero(l[0]) ? p : (l[1] / l[0]).value();
      const FiberMod& fm = ctx.fiber(tau);
      const Vec<Fp> X = plane_coords_mod(ctx.M(), tau, w);
      if (fm.pred.irreducible && !fm.pred.y_singular && fm.pred.order > 0) {
        if (is_zero_vec(fm.C->gradient(X)))
          pred = 1;
        else if (fm.z_inf.count(key_of(X)))
          pred = 0;
        else
          pred = fm.pred.order;
      }
    }
    O.predicted[i] = pred;
    if (T.period[i] > 0 && !T.forbidden[i]) realized.insert(T.period[i]);
    if (pred < 0) {
      ++O.points_unpredicted;
      continue;
    }
    ++O.points_compared;
    if (pred > 0 && !T.forbidden[i]) predicted.insert(pred);
    if (pred != T.period[i]) {
      ++O.mismatches;
      if (O.mismatch_details.size() < 5) {
        std::string s = "point (";
        for (int k = 0; k < 4; ++k) s += (k ? "," : "") + std::to_string(T.points[i][k]);
        s += ") predicted " + std::to_string(pred) + ", brute force " + std::to_string(T.period[i]);
        O.mismatch_details.push_back(s);
      }
    }
  }
  for (std::uint32_t tau = 0; tau <= p; ++tau) {
    const FiberMod& fm = ctx.fiber(tau);
    if (!fm.pred.psi_agrees) {
      ++O.psi_mismatches;
      if (O.mismatch_details.size() < 10)
        O.mismatch_details.push_back("fiber " + std::to_string(tau) + ": order " + std::to_string(fm.pred.order) +
                                     " but least vanishing Psi_n is " +
                                     (fm.pred.psi_min ? std::to_string(*fm.pred.psi_min) : "none"));
    }
    O.fibers.push_back(fm.pred);
  }
  O.predicted_periods.assign(predicted.begin(), predicted.end());
  O.realized_periods.assign(realized.begin(), realized.end());
  O.psi1_root_in_P1 = psi1_root_in_P1(G, ctx, p);
  O.fixed_point = T.fixed_point;
  O.theta_bound = theta_bound_impl(G, R, ctx, G.dps.n_max);
  return O;
}

// ---- scans ---------------------------------------------------------------------

void theta_scan(const DivisionPolynomialSet& dps, int N, std::vector<PrimeRecord>& records) {
  std::vector<UniPoly> phi_tilde(dps.n_max + 1), phi_int(dps.n_max + 1);
  for (int n = 1; n <= dps.n_max; ++n) {
    UniPoly f = dps.phi(n);
    for (const auto& r : rational_roots(f)) f = exact_div(f, UniPoly{-r.value, Rational(1)});
    phi_tilde[n] = from_integers(primitive_integer(f));
    phi_int[n] = from_integers(primitive_integer(dps.phi(n)));
  }
  for (auto& rec : records) {
    if (!rec.good_reduction) continue;
    ScopedPrime sp(rec.p);
    rec.theta_root = false;
    rec.least_tilde_n.reset();
    for (int n = 1; n <= std::min(N, dps.n_max); ++n) {
      if (has_root_mod_p(reduce_mod_p(phi_int[n]))) rec.theta_root = true;
      if (!rec.least_tilde_n && has_root_mod_p(reduce_mod_p(phi_tilde[n]))) rec.least_tilde_n = n;
    }
    rec.theta_tilde_root = rec.least_tilde_n.has_value();
    try {
      const FactorPattern fp = factor_degrees_mod_p(dps.psi(1), rec.p);
      rec.psi1_pattern = fp.degrees;
      rec.psi1_squarefree_mod_p = fp.squarefree_input;
    } catch (const InvalidInput&) {
      rec.psi1_pattern.clear();
      rec.psi1_squarefree_mod_p = false;
    }
  }
}

Verdict srp_verdict(const GlobalSystem& G, const ScanReport& scan) {
  Verdict v;
  const int N = std::min(scan.options.N, G.dps.n_max);

  bool infinite = false, unknown = false, finite_nonempty = false;
  std::optional<int> branch_a;
  std::vector<std::string> missing;
  for (const auto& f : G.periodic.fibers) {
    if (f.singular && f.singular_point &&
        std::find(f.z_infinity.begin(), f.z_infinity.end(), *f.singular_point) == f.z_infinity.end())
      finite_nonempty = true;
    if (f.exact_period == 0) continue;
    if (f.singular) {
      infinite = true;
      continue;
    }
    if (!f.rank) {
      unknown = true;
      missing.push_back(to_string(f.t0));
      continue;
    }
    if (*f.rank > 0) {
      infinite = true;
      continue;
    }
    if (!branch_a || f.exact_period < *branch_a) branch_a = f.exact_period;
    for (const auto& P : f.torsion_points)
      if (std::find(f.z_infinity.begin(), f.z_infinity.end(), P) == f.z_infinity.end()) finite_nonempty = true;
  }
  v.rational_periodic_points = infinite ? "infinite" : unknown ? "unknown" : finite_nonempty ? "finite" : "none";

  const std::string range = "good primes 5 <= p <= " + std::to_string(scan.options.p_max);
  auto note_exceptions = [&] {
    for (const auto& rec : scan.primes)
      if (rec.good_reduction && rec.method == "brute-force" && (!rec.ell || *rec.ell > v.n))
        v.exceptions.push_back(rec.p);
  };
  if (branch_a) {
    v.kind = "SRP";
    v.n = *branch_a;
    v.branch = "a";
    v.reason = "a periodic nonsingular fiber of exact period " + std::to_string(*branch_a) +
               " has rank 0 (annotation), so its rational points are finite; its reductions supply period-" +
               std::to_string(*branch_a) + " points outside the forbidden set for all large p";
    note_exceptions();
    return v;
  }
  if (unknown) {
    v.kind = "inconclusive";
    std::string fibers;
    for (const auto& m : missing) fibers += (fibers.empty() ? "" : ", ") + m;
    v.reason = "missing rank annotation for periodic fiber(s) " + fibers;
    return v;
  }
  int good = 0, worst = 0;
  for (const auto& rec : scan.primes) {
    if (!rec.good_reduction) continue;
    ++good;
    if (!rec.least_tilde_n || *rec.least_tilde_n > N)
      v.witnesses.push_back(rec.p);
    else
      worst = std::max(worst, *rec.least_tilde_n);
  }
  if (good == 0) {
    v.kind = "inconclusive";
    v.reason = "no prime of good reduction in range (" + range + ")";
    return v;
  }
  if (v.witnesses.empty()) {
    v.kind = "SRP";
    v.n = worst;
    v.branch = "b";
    v.reason = "Theta~_" + std::to_string(worst) + " has a root modulo every " + range +
               " (finite scan; density is not proved)";
    note_exceptions();
    return v;
  }
  v.kind = "not-SRP";
  v.reason = "no periodic fiber with finitely many rational points, and Theta~_" + std::to_string(N) +
             " has no root modulo the witness primes (" + range + "; finite-scan evidence)";
  return v;
}

ScanReport residual_scan(const GlobalSystem& G, const ScanOptions& opt) {
  if (opt.p_max < 2) throw InvalidInput("residual_scan: p_max must be at least 2");
  ScanReport rep;
  rep.options = opt;
  for (std::uint32_t p = 2; p <= opt.p_max; ++p) {
    if (!is_prime(p)) continue;
    PrimeRecord rec;
    rec.p = p;
    const ReducedSystem R = reduce_mod_p(G, p);
    rec.good_reduction = R.good_reduction;
    rec.bad_reason = R.bad_reason;
    if (R.good_reduction) {
      if (p <= opt.brute_p_max) {
        const OrbitTable T = brute_force_orbits(R);
        OracleReport O = oracle_check(G, R, T);
        if (!O.consistent()) {
          std::string msg = "mod " + std::to_string(p) + ": brute force contradicts the fiber predictions";
          for (const auto& d : O.mismatch_details) msg += "; " + d;
          if (O.fixed_point != O.psi1_root_in_P1) msg += "; fixed point existence disagrees with Psi_1 roots";
          auto list = [](const std::vector<int>& v) {
            std::string s;
            for (int n : v) s += (s.empty() ? "" : ",") + std::to_string(n);
            return "{" + s + "}";
          };
          msg += "; predicted " + list(O.predicted_periods) + ", realized " + list(O.realized_periods);
          if (O.theta_bound) msg += ", theta bound " + std::to_string(*O.theta_bound);
          throw ConsistencyError(msg);
        }
        rec.method = "brute-force";
        rec.ell = T.ell;
        rec.ell_unrestricted = T.ell_unrestricted;
        rec.theta_bound = O.theta_bound;
        rec.oracle = std::move(O);
      } else {
        ScopedPrime sp(p);
        ModPContext ctx(G, R);
        rec.method = "theta-roots";
        rec.theta_bound = theta_bound_impl(G, R, ctx, opt.N);
        rec.ell = rec.theta_bound;
      }
    }
    rep.primes.push_back(std::move(rec));
  }
  theta_scan(G.dps, opt.N, rep.primes);
  for (const auto& rec : rep.primes)
    if (rec.good_reduction && rec.psi1_squarefree_mod_p && rec.psi1_pattern == std::vector<int>{12}) {
      rep.irreducible_psi1_prime = rec.p;
      break;
    }
  rep.verdict = srp_verdict(G, rep);
  return rep;
}

}  // namespace cubicdyn
