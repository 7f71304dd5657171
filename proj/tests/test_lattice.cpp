#include <doctest.h>

#include <cmath>

#include "walklab/errors.hpp"
#include "walklab/lattice.hpp"

using namespace walklab;

namespace {
// x^3 - 3x + 1: three real roots 2cos(2pi/9), 2cos(4pi/9), 2cos(8pi/9)
const std::vector<long long> kCubic = {1, -3, 0, 1};
}  // namespace

TEST_CASE("real roots of integer polynomials") {
  SUBCASE("quadratic with golden roots") {
    const auto roots = real_roots({-1, -1, 1});  // x^2 - x - 1
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == doctest::Approx((1.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-13));
    CHECK(roots[1] == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-13));
  }
  SUBCASE("totally real cubic") {
    const auto roots = real_roots(kCubic);
    REQUIRE(roots.size() == 3);
    const double pi = 3.14159265358979323846;
    CHECK(roots[0] == doctest::Approx(2.0 * std::cos(8.0 * pi / 9.0)).epsilon(1e-12));
    CHECK(roots[1] == doctest::Approx(2.0 * std::cos(4.0 * pi / 9.0)).epsilon(1e-12));
    CHECK(roots[2] == doctest::Approx(2.0 * std::cos(2.0 * pi / 9.0)).epsilon(1e-12));
  }
  SUBCASE("complex roots are rejected") {
    CHECK_THROWS_AS(real_roots({1, 0, 1}), ValidationError);  // x^2 + 1
  }
  SUBCASE("repeated roots are rejected") {
    CHECK_THROWS_AS(real_roots({1, -2, 1}), ValidationError);  // (x-1)^2
  }
}

TEST_CASE("polynomial constructions hit the symbolic translates") {
  SUBCASE("golden ratio, rank 1 on the circle") {
    const LatticeSystem sys = construct_from_polynomial({-1, -1, 1}, 1, 1);
    REQUIRE(sys.r == 1);
    REQUIRE(sys.d == 1);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;  // 1/golden
    CHECK(sys.alphas(0, 0) == doctest::Approx(phi).epsilon(1e-12));
  }
  SUBCASE("sqrt2, rank 1 on the circle") {
    const LatticeSystem sys = construct_from_polynomial({-2, 0, 1}, 1, 1);
    CHECK(sys.alphas(0, 0) ==
          doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));
  }
  SUBCASE("cubic, rank 2 on the circle") {
    const LatticeSystem sys = construct_from_polynomial(kCubic, 2, 1);
    REQUIRE(sys.r == 2);
    REQUIRE(sys.d == 1);
    const auto roots = real_roots(kCubic);
    const double unused = roots[0];
    // Vandermonde through the two largest roots: row 0 is -a2*a3 = 1/a1,
    // row 1 is a2 + a3 = -a1, both mod 1.
    CHECK(sys.alphas(0, 0) ==
          doctest::Approx(1.0 / unused + 1.0).epsilon(1e-10));
    CHECK(sys.alphas(1, 0) == doctest::Approx(-unused - 1.0).epsilon(1e-10));
  }
  SUBCASE("cubic, rank 1 on the 2-torus") {
    const LatticeSystem sys = construct_from_polynomial(kCubic, 1, 2);
    REQUIRE(sys.r == 1);
    REQUIRE(sys.d == 2);
    const double a = real_roots(kCubic)[2];  // largest root, ~1.532
    CHECK(sys.alphas(0, 0) == doctest::Approx(a - 1.0).epsilon(1e-10));
    CHECK(sys.alphas(0, 1) == doctest::Approx(a * a - 2.0).epsilon(1e-10));
  }
  SUBCASE("degree must match r + d") {
    CHECK_THROWS_AS(construct_from_polynomial(kCubic, 1, 1), ValidationError);
  }
  SUBCASE("construction is deterministic") {
    const LatticeSystem a = construct_from_polynomial(kCubic, 2, 1);
    const LatticeSystem b = construct_from_polynomial(kCubic, 2, 1);
    CHECK((a.alphas - b.alphas).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("diophantine quality estimates") {
  SUBCASE("golden ratio attains its minimum at h = 1") {
    const LatticeSystem sys = construct_from_polynomial({-1, -1, 1}, 1, 1);
    const QualityEstimate q = diophantine_quality(sys, 100000);
    // |h| * dist(h alpha) is minimized at h = +-1 with value 1 - alpha;
    // along the Fibonacci subsequence the products approach 1/sqrt(5)
    // from below, so the h = 1 value is never undercut.
    CHECK(q.K_hat ==
          doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    CHECK(std::abs(q.argmin_h[0]) == 1);
    CHECK(q.H_max == 100000);
  }
  SUBCASE("rational translate collapses to zero") {
    LatticeSystem sys;
    sys.r = 1;
    sys.d = 1;
    sys.alphas.resize(1, 1);
    sys.alphas(0, 0) = 0.5;
    const QualityEstimate q = diophantine_quality(sys, 100);
    CHECK(q.K_hat == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q.argmin_h[0] == 2);
  }
  SUBCASE("sqrt2 stays badly approximable") {
    const LatticeSystem sys = construct_from_polynomial({-2, 0, 1}, 1, 1);
    const QualityEstimate q = diophantine_quality(sys, 10000);
    CHECK(q.K_hat > 0.2);
  }
  SUBCASE("rank-2 cubic stays positive with exponent d/r = 1/2") {
    const LatticeSystem sys = construct_from_polynomial(kCubic, 2, 1);
    const QualityEstimate q = diophantine_quality(sys, 10000);
    CHECK(q.K_hat > 0.05);
  }
  SUBCASE("brute-force cross-check on the 2-torus") {
    const LatticeSystem sys = construct_from_polynomial(kCubic, 1, 2);
    const QualityEstimate q = diophantine_quality(sys, 50);
    // independent direct scan over the full box
    double best = 1e300;
    for (int h1 = -50; h1 <= 50; ++h1)
      for (int h2 = -50; h2 <= 50; ++h2) {
        if (h1 == 0 && h2 == 0) continue;
        const double ip =
            h1 * sys.alphas(0, 0) + h2 * sys.alphas(0, 1);
        const double dist = nearest_integer_norm(ip);
        const double hnorm = std::max(std::abs(h1), std::abs(h2));
        best = std::min(best, dist * std::pow(hnorm, 2.0));
      }
    CHECK(q.K_hat == doctest::Approx(best).epsilon(1e-12));
  }
  SUBCASE("enumeration cap guards the box size") {
    const LatticeSystem sys = construct_from_polynomial(kCubic, 1, 2);
    CHECK_THROWS_AS(diophantine_quality(sys, 100000), CapExceeded);
  }
}

TEST_CASE("admissibility scale psi") {
  CHECK(PsiFunction::power(1.0).admissible_for(1, 1));
  CHECK(PsiFunction::power(2.0).admissible_for(1, 2));
  CHECK(PsiFunction::power(0.5).admissible_for(2, 1));
  // too-slow growth fails the d/r requirement
  CHECK_FALSE(PsiFunction::power(0.4).admissible_for(2, 2));

  const PsiFunction psi = PsiFunction::power(2.0);
  CHECK(psi(3.0) == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(psi.inverse(9.0).x == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_FALSE(psi.inverse(9.0).clamped_at_one);
  CHECK(psi.inverse(0.5).clamped_at_one);

  const PsiFunction pl = PsiFunction::power_log(1.0, 2.0);
  const double y = pl(7.0);
  CHECK(pl.inverse(y).x == doctest::Approx(7.0).epsilon(1e-8));
}
