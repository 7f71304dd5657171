#pragma once

// Wasserstein distances between walk laws and Haar measure on T^d.
//
// Throughout, W_p(m1, m2) = inf over couplings of E d(x, y)^p with NO outer
// 1/p root, for 0 < p <= 1; since d^p is again a metric, W_p is a metric,
// and W_p <= W_1^p by Jensen applied to the optimal W_1 coupling.
//
// Three independent routes to W_p(nu^k, Haar) are implemented and play off
// each other:
//   * exact: the circle closed form (d = 1, p = 1) via the CDF-difference
//     median formula, plus a min-cost-flow transport solver for finite
//     discrete pairs in any dimension;
//   * upper: the smoothing inequality
//       W_1 <= 6d/H + (sqrt(d)/2pi) (sum_{0<|h|_inf<H} |nu1hat - nu2hat|^2/|h|^2)^{1/2}
//     minimized over H, with a sharper Jackson-constant variant behind a
//     flag, bridged to W_p by the power-p map;
//   * lower: the R-net volumetric bound
//       W_p >= d/(d+p) (omega_d |A|)^{-p/d} - R^p (1 - theta(A)),
//     with A an explicit box of lattice translates around the walk's drift,
//     theta from a Chebyshev bound, and R measured by a grid cover check.
//
// bound_sandwich assembles all three per step count k and enforces the
// definitional inequalities lower <= exact <= upper.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "walklab/spectral.hpp"
#include "walklab/torus.hpp"

namespace walklab {

// Volume of the d-dimensional Euclidean unit ball (omega_1 = 2, omega_2 = pi).
double unit_ball_volume(int d);

// ── exact transport on the circle (d = 1) ───────────────────────────────────

// Exact W_1 via W_1 = min_c int_0^1 |F(x) - c| dx with F the difference of
// CDFs; F is piecewise constant here, c* its length-weighted median.
double exact_w1_circle(const DiscreteMeasure& a, const DiscreteMeasure& b);

// Same against Haar: F(x) = CDF_a(x) - x is piecewise linear of slope -1.
double exact_w1_circle_uniform(const DiscreteMeasure& a);

// The optimal monotone plan behind exact_w1_circle_uniform, as a sampler:
// for V uniform on [0,1), the pair (transport(V), V) has marginals (a, Haar)
// and E d(transport(V), V) equals cost() = W_1(a, Haar) exactly.
class CircleCoupling {
 public:
  static CircleCoupling versus_uniform(const DiscreteMeasure& a);

  double transport(double v) const;  // quantile map at level (v + shift) mod 1
  double cost() const { return cost_; }
  double shift() const { return shift_; }

 private:
  std::vector<double> atoms_;  // sorted positions
  std::vector<double> cum_;    // cumulative masses, back() == 1
  double shift_ = 0.0;         // the median level c*
  double cost_ = 0.0;
};

// ── exact transport for finite discrete pairs (any d <= small) ──────────────

// Exact W_p between two finite discrete measures: min-cost flow with cost
// torus_distance^p, solved by successive shortest paths with potentials.
// Combined support larger than atom_cap throws CapExceeded.
double exact_wp_grid(const DiscreteMeasure& a, const DiscreteMeasure& b,
                     double p, int atom_cap = 4000);

inline double exact_w1_grid(const DiscreteMeasure& a, const DiscreteMeasure& b,
                            int atom_cap = 4000) {
  return exact_wp_grid(a, b, 1.0, atom_cap);
}

// ── smoothing upper bounds ───────────────────────────────────────────────────

// The W_1 smoothing bound between the two cached transforms at level H.
// sharp = false: 6d/H with the discrepancy summed over 0 < |h|_inf < H.
// sharp = true: (3 pi^2 log 2) d / (8H + 4/H), summed over 0 < |h|_inf < 2H-1
// (the Jackson-kernel constant; the kernel has degree 2H-2).
double berry_esseen_upper(const SpectralCache& nu1, const SpectralCache& nu2,
                          int H, bool sharp = false);

struct UpperScan {
  double value = 0.0;  // W_p upper bound: min(best W_1 bound^p, (sqrt(d)/2)^p)
  double w1 = 0.0;     // best W_1 smoothing bound over the scanned H range
  int H = 0;           // attaining H; 0 means the trivial diameter bound won
};

// Minimize the W_1 bound for nu^k vs Haar over 1 <= H <= H_max (the cache
// must cover the needed box), then bridge to W_p.
UpperScan optimize_upper(const SpectralCache& walk, long long k, double p,
                         bool sharp = false);
UpperScan optimize_upper(const StepDistribution& nu, long long k, int H_max,
                         double p, bool sharp = false);

// ── R-net lower bounds ───────────────────────────────────────────────────────

struct RnetBound {
  double value = 0.0;
  bool vacuous = false;  // value <= 0: formally correct but useless
};

// W_p(m, Haar) >= d/(d+p) (omega_d |A|)^{-p/d} - R^p (1 - theta) for any m
// with m(A) >= theta and any R >= the covering radius of A.  theta is read
// off A's masses (covered_mass, clamped to [0,1]).
RnetBound rnet_lower_bound(const PointSet& A, double R, double p);

struct SupportNet {
  PointSet net;          // box of reachable lattice translates; masses encode
                         // the aggregate Chebyshev bound (sum == mass_lb)
  double R = 0.0;        // measured covering radius + grid safety margin
  double mass_lb = 0.0;  // 1 - r B / lambda^2, clamped to [0,1]
};

// A = { sum_i n_i alpha_i : n_i in [E_i k - lambda sqrt(k), E_i k + lambda sqrt(k)] },
// E_i = sel_i E xi_i.  R is measured by a cover check on a grid (2^14 points
// for d=1, 2^9 per axis for d=2) plus the grid's half-cell diagonal, so the
// reported R really is a covering radius.  Box size beyond enum_cap throws.
SupportNet walk_support_net(const StepDistribution& nu, long long k,
                            double lambda,
                            std::size_t enum_cap = kDefaultEnumCap);

// ── exact convolution powers ─────────────────────────────────────────────────

// nu^k materialized exactly as a discrete measure.  Rank 1 walks use dense
// repeated squaring on the step law's value lattice; rank >= 2 walks run a
// dense dynamic program over the per-direction translate counts.  More than
// atom_cap atoms throws CapExceeded.
DiscreteMeasure convolution_power_measure(const StepDistribution& nu,
                                          long long k,
                                          std::size_t atom_cap = 1000000);

// ── the sandwich ─────────────────────────────────────────────────────────────

struct BoundRecord {
  long long k = 0;
  double p = 1.0;
  double lower = 0.0;
  double exact = std::numeric_limits<double>::quiet_NaN();
  std::string exact_method;  // "circle" when the closed form applied, else ""
  double upper = 0.0;
  int upper_H = 0;

  bool has_exact() const { return exact_method != ""; }
};

struct SandwichOptions {
  double p = 1.0;
  int H_max = 1 << 14;
  bool sharp = false;
  std::vector<double> lambdas = {2, 3, 4, 6, 8, 12, 16};
  std::size_t conv_cap = 1000000;   // atoms for exact convolution powers
  std::size_t net_cap = 1 << 22;    // atoms for the lower-bound net
  bool want_exact = true;           // exact entries need d == 1 and p == 1
  int threads = 1;
};

// Per k: upper via optimize_upper, lower via the best lambda on the grid
// (CapExceeded lambdas skipped), exact circle value when d == 1, p == 1 and
// the support fits.  Enforces lower <= exact <= upper (1e-9 slack) and that
// exact values are nonincreasing in k; violations throw InvariantViolation.
std::vector<BoundRecord> bound_sandwich(const StepDistribution& nu,
                                        const std::vector<long long>& ks,
                                        const SandwichOptions& opt = {});

}  // namespace walklab
