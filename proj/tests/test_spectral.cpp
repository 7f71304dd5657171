#include <doctest.h>

#include <cmath>
#include <complex>

#include "walklab/errors.hpp"
#include "walklab/lattice.hpp"
#include "walklab/rng.hpp"
#include "walklab/spectral.hpp"

using namespace walklab;

namespace {
constexpr double kPi = 3.14159265358979323846264338328;

StepDistribution golden_walk() {
  return StepDistribution::symmetric_pm1(
      construct_from_polynomial({-1, -1, 1}, 1, 1));
}

double golden_alpha() { return (std::sqrt(5.0) - 1.0) / 2.0; }
}  // namespace

TEST_CASE("integer laws and their transforms") {
  IntegerLaw pm;
  pm.atoms = {{-1, 0.5}, {1, 0.5}};
  pm.validate();
  CHECK(pm.mean() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(pm.second_moment() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(characteristic(pm, 0.7).real() ==
        doctest::Approx(std::cos(0.7)).epsilon(1e-14));
  CHECK(characteristic(pm, 0.7).imag() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(maximal_span(pm) == 2);

  IntegerLaw wide;
  wide.atoms = {{0, 0.2}, {2, 0.5}, {6, 0.3}};
  wide.validate();
  CHECK(maximal_span(wide) == 2);

  IntegerLaw bad;
  bad.atoms = {{1, 0.7}, {1, 0.3}};
  CHECK_THROWS_AS(bad.validate(), ValidationError);  // duplicate support

  CHECK(fitted_char_bound_constant(pm) > 0.0);
}

TEST_CASE("walk transform on the golden circle") {
  const StepDistribution nu = golden_walk();
  const double rho = std::cos(2.0 * kPi * golden_alpha());

  IVec h(1);
  h << 1;
  CHECK(nu_hat(nu, h).real() == doctest::Approx(rho).epsilon(1e-12));
  CHECK(nu_hat(nu, h).imag() == doctest::Approx(0.0).epsilon(1e-14));

  // Hermitian symmetry and |nuhat| <= 1 at random frequencies
  RngStream rng = RngStream::derive(101, 0);
  for (int t = 0; t < 2000; ++t) {
    h[0] = static_cast<int>(rng.bits() % 20001) - 10000;
    if (h[0] == 0) continue;
    const Complex z = nu_hat(nu, h);
    IVec neg = -h;
    const Complex zb = nu_hat(nu, neg);
    REQUIRE(std::abs(z) <= 1.0 + 1e-12);
    REQUIRE(std::abs(z - std::conj(zb)) <= 1e-12);
  }

  // k-step transform is the k-th power
  h[0] = 3;
  const Complex z = nu_hat(nu, h);
  CHECK(std::abs(convolution_power_hat(z, 5) - std::pow(z, 5)) <= 1e-12);
  CHECK(convolution_power_hat(z, 0) == Complex(1.0, 0.0));
  CHECK_THROWS_AS(convolution_power_hat(z, -1), ValidationError);

  CHECK(spectral_gap(nu, 2) == doctest::Approx(std::abs(rho)).epsilon(1e-12));
}

TEST_CASE("spectral caches agree with direct evaluation") {
  const StepDistribution nu = golden_walk();
  const SpectralCache cache = SpectralCache::build(nu, 32);
  CHECK(cache.d() == 1);
  CHECK(cache.H() == 32);

  IVec h(1);
  for (int m = -31; m < 32; ++m) {
    if (m == 0) continue;
    h[0] = m;
    REQUIRE(std::abs(cache.value(h) - nu_hat(nu, h)) <= 1e-13);
  }

  const SpectralCache unif = SpectralCache::uniform_measure(1, 32);
  for (const auto& e : unif.entries()) REQUIRE(std::abs(e.value) == 0.0);

  // shell sums against the closed form for walk vs uniform
  const auto shells = SpectralCache::shell_discrepancy(cache, unif, 3, 1);
  REQUIRE(shells.size() == 32);
  for (int m = 1; m < 32; ++m) {
    h[0] = m;
    const double expect =
        2.0 * std::norm(std::pow(nu_hat(nu, h), 3)) / (double(m) * m);
    REQUIRE(shells[static_cast<std::size_t>(m)] ==
            doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("two-dimensional cache enumerates the canonical half-box") {
  const LatticeSystem sys = construct_from_polynomial({1, -3, 0, 1}, 1, 2);
  const StepDistribution nu = StepDistribution::symmetric_pm1(sys);
  const SpectralCache cache = SpectralCache::build(nu, 6);
  // full box minus origin, halved by Hermitian symmetry
  CHECK(static_cast<int>(cache.entries().size()) == (11 * 11 - 1) / 2);
  IVec h(2);
  RngStream rng = RngStream::derive(102, 0);
  for (int t = 0; t < 500; ++t) {
    h[0] = static_cast<int>(rng.bits() % 11) - 5;
    h[1] = static_cast<int>(rng.bits() % 11) - 5;
    if (h[0] == 0 && h[1] == 0) continue;
    REQUIRE(std::abs(cache.value(h) - nu_hat(nu, h)) <= 1e-13);
  }
}

TEST_CASE("kernel identities") {
  SUBCASE("fejer: nonnegative approximate identity") {
    for (int H : {2, 5, 16}) {
      double mean = 0.0;
      const int G = 4096;
      for (int g = 0; g < G; ++g) {
        const double x = static_cast<double>(g) / G;
        const double v = fejer_kernel(H, x);
        REQUIRE(v >= -1e-12);
        mean += v;
      }
      // trig polynomial of degree < G: the grid mean is the exact integral
      CHECK(mean / G == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("closed form matches the series") {
    RngStream rng = RngStream::derive(103, 0);
    for (int t = 0; t < 10000; ++t) {
      const double x = rng.uniform();
      for (int H : {2, 7, 33}) {
        REQUIRE(fejer_kernel(H, x) ==
                doctest::Approx(fejer_kernel_series(H, x)).epsilon(1e-10));
        REQUIRE(jackson_kernel(H, x) ==
                doctest::Approx(jackson_kernel_series(H, x)).epsilon(1e-10));
      }
    }
    // near-integer arguments take the series fallback internally
    CHECK(fejer_kernel(8, 1e-9) == doctest::Approx(8.0).epsilon(1e-6));
    CHECK(jackson_kernel(8, 1e-9) ==
          doctest::Approx(jackson_kernel_series(8, 0.0)).epsilon(1e-6));
  }
  SUBCASE("jackson coefficients") {
    for (int H : {2, 3, 8, 64}) {
      const Vec a = jackson_coefficients(H);
      REQUIRE(a.size() == 2 * H - 1);
      CHECK(a[0] == doctest::Approx(1.0).epsilon(1e-12));  // unit mass
      for (int i = 1; i < a.size(); ++i) {
        REQUIRE(a[i] >= -1e-15);
        REQUIRE(a[i] <= a[i - 1] + 1e-15);  // unimodal decay
      }
    }
    const Vec a2 = jackson_coefficients(2);
    CHECK(a2[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(a2[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  }
}

TEST_CASE("trigonometric test functions") {
  IVec h1(1);
  h1 << 1;
  const TestFunction f =
      TestFunction::trig(1, {{h1, Complex(std::sqrt(2.0) / 2.0, 0.0)}});
  CHECK_FALSE(f.is_zero());
  CHECK(f.holder_exponent() == 1.0);

  const double x = 0.3;
  CHECK(f.evaluate(&x) ==
        doctest::Approx(std::sqrt(2.0) * std::cos(2.0 * kPi * x)).epsilon(1e-12));

  CHECK(std::abs(f.fourier(h1) - Complex(std::sqrt(2.0) / 2.0, 0.0)) <= 1e-14);
  IVec hm(1);
  hm << -1;
  CHECK(std::abs(f.fourier(hm) - Complex(std::sqrt(2.0) / 2.0, 0.0)) <= 1e-14);
  IVec h0(1);
  h0 << 0;
  CHECK(std::abs(f.fourier(h0)) == 0.0);  // mean zero by construction

  CHECK(f.coefficient_energy() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.spectral_box(1e-8) == 2);

  // L2 energy on a grid equals the coefficient energy (Parseval)
  double energy = 0.0;
  const int G = 8192;
  for (int g = 0; g < G; ++g) {
    const double xs = static_cast<double>(g) / G;
    const double v = f.evaluate(&xs);
    energy += v * v;
  }
  CHECK(energy / G == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("distance-power test functions") {
  const TestFunction f =
      TestFunction::distance_power(TorusPoint::zero(1), 1.0);
  const double x = 0.1;
  CHECK(f.evaluate(&x) == doctest::Approx(-0.15).epsilon(1e-10));
  const double y = 0.5;
  CHECK(f.evaluate(&y) == doctest::Approx(0.25).epsilon(1e-10));

  // fhat(h) = -1/(pi h)^2 for odd h, 0 for even nonzero h
  IVec h(1);
  for (int m : {1, 3, 5}) {
    h << m;
    CHECK(f.fourier(h).real() ==
          doctest::Approx(-1.0 / (kPi * kPi * m * m)).epsilon(1e-7));
    CHECK(std::abs(f.fourier(h).imag()) <= 1e-9);
  }
  h << 2;
  CHECK(std::abs(f.fourier(h)) <= 1e-9);

  CHECK(f.holder_exponent() == 1.0);
  const double ratio = lipschitz_fourier_decay_check(f, 64);
  CHECK(ratio <= 1.0 + 1e-9);
  CHECK(ratio >= 0.85);
}

TEST_CASE("smoothing by the jackson kernel") {
  IVec h1(1), h3(1);
  h1 << 1;
  h3 << 3;
  const TestFunction f = TestFunction::trig(
      1, {{h1, Complex(0.5, 0.0)}, {h3, Complex(0.0, 0.25)}});
  const int H = 3;
  const TestFunction g = smooth_test_function(f, H);
  const Vec a = jackson_coefficients(H);
  CHECK(std::abs(g.fourier(h1) - Complex(0.5, 0.0) * a[1]) <= 1e-12);
  CHECK(std::abs(g.fourier(h3) - Complex(0.0, 0.25) * a[3]) <= 1e-12);
  // support clipped beyond 2H-2
  IVec h5(1);
  h5 << 5;
  CHECK(std::abs(g.fourier(h5)) == 0.0);

  const double ratio = lipschitz_fourier_decay_check(f, 16);
  CHECK(ratio <= 1.0 + 1e-9);
}

TEST_CASE("spectral variance oracle on the golden walk") {
  const StepDistribution nu = golden_walk();
  IVec h1(1);
  h1 << 1;
  const TestFunction f =
      TestFunction::trig(1, {{h1, Complex(std::sqrt(2.0) / 2.0, 0.0)}});
  const double rho = std::cos(2.0 * kPi * golden_alpha());
  const double expect = (1.0 + rho) / (1.0 - rho);
  CHECK(asymptotic_variance_spectral(f, nu) ==
        doctest::Approx(expect).epsilon(1e-10));

  // explicit box gives the same value for a finitely supported f
  CHECK(asymptotic_variance_spectral(f, nu, 8) ==
        doctest::Approx(expect).epsilon(1e-12));

  // a walk that fixes the frequency of f has no normalized limit
  LatticeSystem half;
  half.r = 1;
  half.d = 1;
  half.alphas.resize(1, 1);
  half.alphas(0, 0) = 0.5;
  const StepDistribution bad = StepDistribution::symmetric_pm1(half);
  IVec h2(1);
  h2 << 2;
  const TestFunction f2 = TestFunction::trig(1, {{h2, Complex(1.0, 0.0)}});
  CHECK_THROWS_AS(asymptotic_variance_spectral(f2, bad, 4), ValidationError);
}
