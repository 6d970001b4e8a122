// Reduction of the dynamical system modulo primes: exhaustive orbits over
// F_p, the fiberwise prediction they are checked against, root scans of the
// exact-period polynomials, and the SRP verdict.

#ifndef CUBICDYN_RESIDUAL_HPP
#define CUBICDYN_RESIDUAL_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cubicdyn/divpoly.hpp"

namespace cubicdyn {

/// Everything computed over Q that the residual analysis consumes.
struct GlobalSystem {
  CubicSurface surface;
  GoodPairCertificate pair;
  bool pair_rejected = false;  // analysis forced on a pair that is not good
  CubicPencil pencil;
  WeierstrassModel model;
  DivisionPolynomialSet dps;
  PeriodicFiberReport periodic;
};

/// The part of the forbidden set contributed by one rational fiber.
struct ForbiddenFiber {
  FiberParam t0;
  bool whole_fiber = false;
  std::vector<ProjPoint> points;  // used when !whole_fiber
  std::string reason;
};

/// Whole fibers when their rational points are Zariski dense (positive or
/// unknown rank, singular periodic fibers); otherwise the finitely many
/// rational periodic and Z_inf points.
std::vector<ForbiddenFiber> forbidden_set(const PeriodicFiberReport& periodic);

using FpPoint = std::array<std::uint32_t, 4>;

struct ReducedSystem {
  std::uint32_t p = 0;
  bool good_reduction = false;
  std::string bad_reason;
  std::map<Exponent, std::uint32_t> surface;
  FpPoint x{}, y{}, z{};
  std::array<std::array<std::uint32_t, 4>, 4> M{}, Minv{};
  std::vector<std::optional<std::uint32_t>> forbidden_fibers;  // nullopt: infinity
  std::map<FpPoint, std::string> forbidden_points;            // point -> global origin
};

/// pre: p does not divide every coefficient of the surface (InvalidInput).
ReducedSystem reduce_mod_p(const GlobalSystem& G, std::uint32_t p);

/// All F_p-points of the reduced surface, first nonzero coordinate 1, sorted.
std::vector<FpPoint> enumerate_surface_points(const ReducedSystem& R);

/// Fiber parameter of a point mod p: nullopt when the point lies on L(x, y);
/// otherwise a value in [0, p] with p standing for infinity.
std::optional<std::uint32_t> fiber_of(const ReducedSystem& R, const FpPoint& w);

struct OrbitTable {
  std::uint32_t p = 0;
  std::vector<FpPoint> points;
  std::vector<int> next;              // index of f(w), -1 where undefined
  std::vector<std::string> stop;      // indeterminacy reason where next = -1
  std::vector<int> period;            // 0: not periodic
  std::vector<bool> forbidden;
  std::optional<int> ell;             // min period outside the forbidden set
  std::optional<int> ell_unrestricted;
  bool fixed_point = false;           // some point (forbidden or not) is fixed
};

OrbitTable brute_force_orbits(const ReducedSystem& R);

/// Prediction for one fiber over F_p from the chord-tangent group law on the
/// fiber itself, and from the division polynomials where the global model
/// specializes to it.
struct FiberPrediction {
  std::uint32_t tau = 0;  // p = infinity
  bool irreducible = false;
  bool singular = false;
  bool y_singular = false;
  int order = 0;  // order of y in the group of nonsingular points
  bool regular = false;         // global model specializes to this fiber's model
  std::optional<int> psi_min;   // least n <= 12 with Psi_n(tau) = 0 (regular fibers)
  bool psi_agrees = true;
};

struct OracleReport {
  std::uint32_t p = 0;
  std::vector<FiberPrediction> fibers;
  std::vector<int> predicted;       // predicted period per point of the orbit table, -1 unknown
  int points_compared = 0;
  int points_unpredicted = 0;
  int mismatches = 0;
  int psi_mismatches = 0;
  std::vector<std::string> mismatch_details;  // first few
  std::vector<int> predicted_periods;  // outside the forbidden set, sorted, unique
  std::vector<int> realized_periods;   // brute force, outside the forbidden set
  bool psi1_root_in_P1 = false;
  bool fixed_point = false;
  std::optional<int> theta_bound;      // least period predicted from theta roots and global fibers
  bool consistent() const;
};

OracleReport oracle_check(const GlobalSystem& G, const ReducedSystem& R, const OrbitTable& T);

struct PrimeRecord {
  std::uint32_t p = 0;
  bool good_reduction = false;
  std::string bad_reason;
  std::string method;  // "brute-force" or "theta-roots"
  std::optional<int> ell;
  std::optional<int> ell_unrestricted;
  std::optional<int> theta_bound;
  bool theta_root = false;        // Theta_N has a root mod p
  bool theta_tilde_root = false;  // same for Theta~_N
  std::optional<int> least_tilde_n;  // least n with Phi~_n having a root mod p
  std::vector<int> psi1_pattern;
  bool psi1_squarefree_mod_p = true;
  std::optional<OracleReport> oracle;
};

struct Verdict {
  std::string kind;  // "SRP", "not-SRP", "inconclusive"
  int n = 0;
  std::string branch;  // "a", "b", ""
  std::vector<std::uint32_t> witnesses;
  std::vector<std::uint32_t> exceptions;  // brute-force primes with ell_p > n under an SRP(n) verdict
  std::string reason;
  std::string rational_periodic_points;  // "none", "finite", "infinite", "unknown"
};

struct ScanOptions {
  int N = 12;
  std::uint32_t p_max = 200;
  std::uint32_t brute_p_max = 97;
};

struct ScanReport {
  ScanOptions options;
  std::vector<PrimeRecord> primes;
  std::optional<std::uint32_t> irreducible_psi1_prime;  // first p with pattern {12}
  Verdict verdict;
};

/// Per-prime root existence and Psi_1 factor patterns, filled in for the
/// records marked as good reduction.
void theta_scan(const DivisionPolynomialSet& dps, int N, std::vector<PrimeRecord>& records);

Verdict srp_verdict(const GlobalSystem& G, const ScanReport& scan);

/// The whole residual stage. Throws ConsistencyError when brute force and
/// the predictions disagree.
ScanReport residual_scan(const GlobalSystem& G, const ScanOptions& opt);

}  // namespace cubicdyn

#endif  // CUBICDYN_RESIDUAL_HPP
