#pragma once

// Lattice systems of translation vectors alpha_1..alpha_r in T^d built from
// algebraic numbers, plus a measured badly-approximable quality constant.
//
// Construction: a monic integer polynomial of degree r+d with r+d distinct
// real roots a_1 < ... < a_{r+d} is split into d "spare" roots and r "used"
// roots (the r largest; the result depends only on the chosen set, since
// column j of M = V^{-1} W lists the coefficients of x^{r+j-1} reduced
// modulo the monic polynomial vanishing on the used roots).  With
// V_ij = a_i^{j-1} (r x r) and W_ij = a_i^{r+j-1} (r x d), the rows of M
// reduced mod 1 are alpha_1..alpha_r.  Conjugate-root arguments give these
// systems the optimal simultaneous-approximation exponent d/r.
//
// Quality: K(H) = min over 0 < |h|_inf <= H of
//     max_i ||<h, alpha_i>||_{R/Z} * |h|_inf^{d/r},
// a nonincreasing function of H whose positive infimum is exactly the badly
// approximable property.  The argmin h is reported in sign-canonical form
// (first nonzero coordinate positive; h and -h carry the same information).

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "walklab/errors.hpp"
#include "walklab/torus.hpp"

namespace walklab {

inline constexpr std::uint64_t kDefaultEnumCap = std::uint64_t{1} << 22;

struct QualityEstimate {
  double K_hat = 0.0;
  IVec argmin_h;       // sign-canonical representative
  long long H_max = 0; // box radius the scan covered
};

struct LatticeSystem {
  int r = 0;
  int d = 0;
  Eigen::MatrixXd alphas;             // r x d, entries in [0,1)
  std::vector<long long> polynomial;  // constant term first; empty if direct
  std::optional<QualityEstimate> quality;

  void validate() const;
};

// All roots of a monic integer polynomial (constant term first), required to
// be real and distinct; returned ascending, refined to ~1e-14.  Sturm-chain
// isolation + bisection + Newton polish.  Throws ValidationError when the
// root count over R falls short of the degree (complex or repeated roots)
// or when an integer root reveals the polynomial as reducible.
std::vector<double> real_roots(const std::vector<long long>& coeffs);

LatticeSystem construct_from_polynomial(const std::vector<long long>& coeffs,
                                        int r, int d);

QualityEstimate diophantine_quality(const LatticeSystem& sys, long long H_max,
                                    std::uint64_t enum_cap = kDefaultEnumCap);

// psi(x) = x^a * log(e + x)^b on [1, inf); power laws have b = 0.  These are
// the approximation-speed gauges the rate theorems invert: the convergence
// rate is 1/psi^{-1}(sqrt k).
class PsiFunction {
 public:
  static PsiFunction power(double gamma) { return PsiFunction(gamma, 0.0); }
  static PsiFunction power_log(double a, double b) { return PsiFunction(a, b); }

  double a() const { return a_; }
  double b() const { return b_; }
  double operator()(double x) const;

  struct InverseResult {
    double x = 1.0;
    bool clamped_at_one = false;  // y was below psi(1)
  };
  // Generalized inverse sup{x >= 1 : psi(x) <= y}, to 1e-10 (closed form
  // for pure powers).
  InverseResult inverse(double y) const;

  // Grid check that psi(x) * x^{-d/r} is nondecreasing, as the lower-bound
  // rate theorem requires.
  bool admissible_for(int r, int d, int grid = 4096, double x_max = 1e6) const;

 private:
  PsiFunction(double a, double b);
  double a_;
  double b_;
};

}  // namespace walklab
