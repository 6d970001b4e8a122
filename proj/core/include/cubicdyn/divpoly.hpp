// Division polynomials of the fibration, exact-period polynomials, and the
// analysis of individual periodic fibers.

#ifndef CUBICDYN_DIVPOLY_HPP
#define CUBICDYN_DIVPOLY_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cubicdyn/fibration.hpp"

namespace cubicdyn {

/// A root inserted into or removed from Psi_n / Phi_n at a parameter of the
/// exceptional set, after computing the order of y on that fiber directly.
struct ExceptionalAdjustment {
  std::string polynomial;  // "Psi" or "Phi"
  Rational t0;
  int n = 0;
  bool inserted = false;  // false: removed
  std::string reason;
};

struct DivisionPolynomialSet {
  int n_max = 12;
  std::vector<UniPoly> Psi;  // index 1..n_max (index 0 unused)
  std::vector<UniPoly> Phi;
  std::vector<ExceptionalAdjustment> adjustments;

  const UniPoly& psi(int n) const { return Psi.at(n); }
  const UniPoly& phi(int n) const { return Phi.at(n); }
  /// Phi_1 ... Phi_N.
  UniPoly theta(int N) const;
  /// theta(N) with every linear factor over Q removed.
  UniPoly theta_tilde(int N) const;
};

/// Numerators of psi_n(u_y(t)) for 1 <= n <= N_max (even n divided by v),
/// with Psi_1 the discriminant and Psi_2 the numerator of v_y.
std::vector<UniPoly> surface_division_polynomials(const WeierstrassModel& W, int n_max);

DivisionPolynomialSet build_division_set(const WeierstrassModel& W, const CubicPencil& pencil, int n_max = 12);

/// Order of y on the fiber at t0 (group of the nonsingular locus on a singular
/// fiber): the least k <= 12 with k y = O, 0 when there is none, and nullopt
/// when y is the singular point of the fiber.
std::optional<int> fiber_order_of_y(const CubicPencil& pencil, const WeierstrassModel& W, const FiberParam& t0);
std::optional<int> order_of_y(const DirectFiber& F);

struct FiberAnalysis {
  FiberParam t0;
  bool singular = false;
  SingularityType type = SingularityType::none;
  int order_of_y = 0;    // 0: infinite order
  int exact_period = 0;  // 0: the fiber is not periodic
  bool y_is_singular_point = false;
  ShortCurve<Rational> curve;  // reduced model of this fiber
  WPoint<Rational> y;
  std::optional<ProjPoint> singular_point;  // the fixed point of f on this fiber
  std::vector<ProjPoint> z_infinity;       // rational points of the fiber in Z_inf
  std::vector<ProjPoint> torsion_points;   // rational points of finite order (nonsingular fibers)
  std::vector<std::string> sources;        // why this parameter was examined
  std::optional<int> rank;                 // external annotation
};

struct Period2CrossCheck {
  bool applicable = false;
  std::string note;
  std::vector<FiberParam> from_tangent_line;  // fibers through rational points of (T_x ∩ T_y) ∩ S
  std::vector<FiberParam> from_analysis;      // fibers with y of order 2
  bool consistent = true;
};

struct PeriodicFiberReport {
  std::vector<FiberAnalysis> fibers;  // sorted by parameter, infinity last; always includes infinity
  Period2CrossCheck period2;
  int fixed_points_over_closure = 0;  // number of singular fibers over the algebraic closure
};

/// Throws ConsistencyError when a root of Phi_n outside the exceptional set
/// does not carry a fiber with y of order n.
PeriodicFiberReport find_periodic_fibers(const CubicSurface& S, const CubicPencil& pencil,
                                         const WeierstrassModel& W, const DivisionPolynomialSet& dps);

FiberAnalysis analyze_periodic_candidate(const CubicPencil& pencil, const FiberParam& t0);

/// Rational points among (1 - k) y and z - k y, 1 <= k <= n, in P^3.
/// Throws InvalidInput on a fiber that is not periodic.
std::vector<ProjPoint> z_infinity_on_fiber(const CubicPencil& pencil, const DirectFiber& F, int period);

/// Rational points of finite order on a nonsingular fiber, in P^3 (includes x).
std::vector<ProjPoint> rational_torsion_points(const CubicPencil& pencil, const DirectFiber& F);

/// Res(Psi_1, Psi_n) for n in {2, 3, 4, 6} (those n <= n_max).
std::map<int, Rational> finite_generation_check(const DivisionPolynomialSet& dps);

}  // namespace cubicdyn

#endif  // CUBICDYN_DIVPOLY_HPP
