#pragma once

// Fourier analysis of lattice random walks on T^d.
//
// A walk step picks index i with probability sel_i, draws an integer n from
// the i-th step law, and translates by n * alpha_i.  Its Fourier transform
// at frequency h is
//     nuhat(h) = sum_i sel_i * phi_i(-2 pi <h, alpha_i>),
// where phi_i is the characteristic function of the i-th integer law, and
// the k-step walk has transform nuhat(h)^k.  Everything downstream — the
// smoothing upper bounds, the spectral variance
//     C(f) = sum_{h != 0} |fhat(h)|^2 (1 - |nuhat(h)|^2) / |1 - nuhat(h)|^2,
// the gap diagnostics — reads off this one function, so the cache below
// stores it over a centered box once per walk.
//
// Kernels: the Fejer kernel F_H (triangle coefficients 1 - |h|/H) and the
// Jackson kernel K_H = F_H^2 / ||F_H||_2^2, a nonnegative trigonometric
// polynomial of degree < 2H - 1 with coefficients a_h given by normalized
// autocorrelation of the triangle.  Convolving f with K_H contracts Holder
// seminorms and keeps sup |f - f*K_H| = O(1/H) for Lipschitz f, which is
// what turns Fourier-side decay into Wasserstein bounds.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "walklab/errors.hpp"
#include "walklab/lattice.hpp"
#include "walklab/torus.hpp"

namespace walklab {

using Complex = std::complex<double>;

// ── integer step laws ────────────────────────────────────────────────────────

struct IntegerLaw {
  // (value, probability) pairs; probabilities sum to 1 within 1e-12.
  std::vector<std::pair<long long, double>> atoms;

  void validate() const;
  double mean() const;
  double second_moment() const;
  static IntegerLaw pm_one();  // +/-1 with probability 1/2 each
};

// Characteristic function phi(t) = E exp(i t xi).
Complex characteristic(const IntegerLaw& law, double t);

// gcd of the support differences: the lattice the recentred law lives on.
// Needs at least two atoms.
long long maximal_span(const IntegerLaw& law);

// Largest c with |phi(2 pi x)| <= 1 - c ||D x||^2 on a grid of 1e4 points,
// D the maximal span.  Positive for every genuine (non-degenerate) law.
double fitted_char_bound_constant(const IntegerLaw& law);

// ── the walk ─────────────────────────────────────────────────────────────────

class StepDistribution {
 public:
  StepDistribution(Vec selector, std::vector<IntegerLaw> steps,
                   Eigen::MatrixXd alphas);

  // Symmetric +/-1 steps with a uniform selector over the system's rows.
  static StepDistribution symmetric_pm1(const LatticeSystem& sys);

  int r() const { return static_cast<int>(selector_.size()); }
  int d() const { return static_cast<int>(alphas_.cols()); }
  const Vec& selector() const { return selector_; }
  const std::vector<IntegerLaw>& steps() const { return steps_; }
  const Eigen::MatrixXd& alphas() const { return alphas_; }

  double drift(int i) const;          // E_i = sel_i * E xi_i
  double moment_bound() const;        // B = max_i sel_i * E xi_i^2

 private:
  Vec selector_;
  std::vector<IntegerLaw> steps_;
  Eigen::MatrixXd alphas_;
};

Complex nu_hat(const StepDistribution& nu, const Eigen::Ref<const IVec>& h);

// z^k for the k-step walk's transform at one frequency.
Complex convolution_power_hat(Complex z, long long k);

// max |nuhat(h)| over 0 < |h|_inf < H (strict box).
double spectral_gap(const StepDistribution& nu, int H);

// ── cached spectra over a box ────────────────────────────────────────────────

// Values of a Hermitian transform on the canonical half of the punctured box
// 0 < |h|_inf < H, grouped by shell |h|_inf = m.  Each stored h represents
// the pair {h, -h}.
class SpectralCache {
 public:
  static SpectralCache build(const StepDistribution& nu, int H);
  static SpectralCache from_measure(const DiscreteMeasure& m, int H);
  static SpectralCache from_function(int d, int H,
                                     const std::function<Complex(const IVec&)>& fn);
  static SpectralCache uniform_measure(int d, int H);

  int d() const { return d_; }
  int H() const { return H_; }

  struct Entry {
    IVec h;
    int shell;        // |h|_inf
    double h_norm_sq; // Euclidean |h|^2
    Complex value;
  };
  const std::vector<Entry>& entries() const { return entries_; }

  // Value at any h with |h|_inf < H (Hermitian reflection applied).
  Complex value(const Eigen::Ref<const IVec>& h) const;

  // s_m = sum over the full shell |h|_inf = m of |a(h)^k1 - b(h)^k2|^2/|h|^2.
  static std::vector<double> shell_discrepancy(const SpectralCache& a,
                                               const SpectralCache& b,
                                               long long k1 = 1, long long k2 = 1);

  void write_csv(std::ostream& os) const;  // h_1..h_d, re, im

 private:
  SpectralCache(int d, int H) : d_(d), H_(H) {}
  static SpectralCache enumerate(int d, int H,
                                 const std::function<Complex(const IVec&)>& fn);
  int d_;
  int H_;
  std::vector<Entry> entries_;  // sorted by shell
};

// ── kernels ──────────────────────────────────────────────────────────────────

double fejer_kernel(int H, double x);
double fejer_kernel_series(int H, double x);

// a_0..a_{2H-2}; a_0 = 1, symmetric unimodal, exactly zero beyond.
Vec jackson_coefficients(int H);
double jackson_kernel(int H, double x);
double jackson_kernel_series(int H, double x);

// ── test functions ───────────────────────────────────────────────────────────

// Mean-zero observables f : T^d -> R for the ergodic experiments; either an
// explicit trigonometric polynomial or ||x - x0||^p recentred, with Fourier
// coefficients from trapezoid quadrature in the latter case.
class TestFunction {
 public:
  struct Harmonic {
    IVec h;
    Complex c;
  };

  // Hermitian closure is applied: pass one representative per +/-h pair.
  static TestFunction trig(int d, std::vector<Harmonic> half_coeffs);
  static TestFunction distance_power(const TorusPoint& x0, double p);

  int dim() const { return d_; }
  bool is_zero() const;
  double holder_exponent() const { return holder_p_; }

  double evaluate(const double* x) const;
  double evaluate(const TorusPoint& x) const { return evaluate(x.coords().data()); }

  Complex fourier(const Eigen::Ref<const IVec>& h) const;

  // Nonzero canonical harmonics with |h|_inf < H (pairs {h,-h} once).
  std::vector<Harmonic> harmonics_in_box(int H) const;

  // Smallest box radius that provably captures the spectrum: exact for trig
  // polynomials; for distance powers, the box where the measured tail of
  // sum |fhat|^2 falls below `tail`.
  int spectral_box(double tail = 1e-8) const;

  // Max grid quotient |f(x)-f(y)| / d(x,y)^p times a 1.05 safety factor.
  double holder_norm_estimate() const;

  // sum over harmonics (both signs) of |fhat|^2.
  double coefficient_energy() const;

 private:
  friend TestFunction smooth_test_function(const TestFunction& f, int H);

  TestFunction() = default;
  void ensure_quadrature(int box) const;

  enum class Kind { kTrig, kDistancePower };
  Kind kind_ = Kind::kTrig;
  int d_ = 1;
  double holder_p_ = 1.0;

  // trig: canonical harmonics (first nonzero coordinate > 0), h = 0 dropped.
  std::vector<Harmonic> harmonics_;

  // distance-power state
  TorusPoint x0_;
  mutable double mean_ = 0.0;
  mutable bool mean_ready_ = false;
  mutable int quad_box_ = 0;                    // coefficients valid for |h|_inf < quad_box_
  mutable std::map<std::vector<int>, Complex> quad_coeffs_;
  mutable double holder_norm_cache_ = -1.0;
};

// f * K_H as a trigonometric polynomial: coefficients scaled by
// prod_j a_{|h_j|}, support |h|_inf <= 2H - 2.
TestFunction smooth_test_function(const TestFunction& f, int H);

// ratio = (4 pi^2 / d) * sum_{0<|h|_inf<H} |fhat|^2 |h|^2 / L^2, which is
// <= 1 + tol for every 1-Lipschitz-normalized f.  Requires Holder exponent 1.
double lipschitz_fourier_decay_check(const TestFunction& f, int H);

// C(f, nu) over the box |h|_inf < H; H = 0 picks spectral_box() + gap-based
// tail rule.  Throws if some |nuhat(h)| = 1 meets a live harmonic.
double asymptotic_variance_spectral(const TestFunction& f,
                                    const StepDistribution& nu, int H = 0);

}  // namespace walklab
