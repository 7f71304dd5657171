// Acceptance suite: one pass/fail line per criterion, pinned tolerances.
//
// Each criterion exercises the library end to end the way the batch CLI
// does, with fixed seeds so every run produces identical numbers.  A
// criterion with a stated time budget also fails if it blows the budget.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "walklab/ergodic.hpp"
#include "walklab/errors.hpp"
#include "walklab/lattice.hpp"
#include "walklab/rng.hpp"
#include "walklab/spectral.hpp"
#include "walklab/stats.hpp"
#include "walklab/torus.hpp"
#include "walklab/wasserstein.hpp"

using namespace walklab;

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  // Records a condition; failures are prepended to the detail line.
  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass_ = false;
      failures_ += (failures_.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& s) {
    notes_ += (notes_.empty() ? "" : ", ") + s;
  }
  Outcome outcome() const {
    Outcome oc;
    oc.pass = pass_;
    oc.detail = pass_ ? notes_ : failures_ + (notes_.empty() ? "" : " | " + notes_);
    return oc;
  }

 private:
  bool pass_ = true;
  std::string failures_;
  std::string notes_;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

int g_failures = 0;

void run(const char* name, double budget_s, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome oc;
  try {
    oc = fn();
  } catch (const std::exception& e) {
    oc.pass = false;
    oc.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (budget_s > 0.0 && secs > budget_s) {
    oc.pass = false;
    oc.detail += " [exceeded " + fmt(budget_s, 3) + "s budget]";
  }
  std::printf("[%s] %s (%.1fs) %s\n", oc.pass ? "PASS" : "FAIL", name, secs,
              oc.detail.c_str());
  std::fflush(stdout);
  if (!oc.pass) ++g_failures;
}

StepDistribution golden_walk() {
  return StepDistribution::symmetric_pm1(
      construct_from_polynomial({-1, -1, 1}, 1, 1));
}

StepDistribution cubic_rank2_walk() {
  return StepDistribution::symmetric_pm1(
      construct_from_polynomial({1, -3, 0, 1}, 2, 1));
}

// sqrt(2) cos(2 pi x); the constructor supplies the conjugate harmonic.
TestFunction sqrt2_cosine() {
  IVec h(1);
  h << 1;
  return TestFunction::trig(1, {{h, Complex(std::sqrt(2.0) / 2.0, 0.0)}});
}

double golden_variance_closed_form() {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double rho = std::cos(2.0 * kPi * phi);
  return (1.0 + rho) / (1.0 - rho);
}

// ── criterion 1: decay-rate exponents ────────────────────────────────────────

Outcome rate_exponent() {
  Check c;
  std::vector<double> ks, exact_vals;
  const StepDistribution golden = golden_walk();
  for (int e = 4; e <= 14; ++e) {
    const long long k = 1LL << e;
    const DiscreteMeasure m = convolution_power_measure(golden, k);
    ks.push_back(static_cast<double>(k));
    exact_vals.push_back(exact_w1_circle_uniform(m));
  }
  const double slope_golden = log_log_slope(ks, exact_vals);
  c.require(std::abs(slope_golden + 0.5) <= 0.1,
            "golden exact-distance slope " + fmt(slope_golden) +
                " outside -0.5 +/- 0.1");
  c.note("golden slope " + fmt(slope_golden) + " (want -0.5 +/- 0.1)");

  // Rank-2 cubic walk: exact supports blow past the atom caps, so the decay
  // is read off the smoothing upper bound instead.  The box must be deep
  // enough that the 6/H smoothing floor sits below the Fourier mass at the
  // largest k, or the tail records flatten and drag the fitted slope up.
  const SpectralCache cache = SpectralCache::build(cubic_rank2_walk(), 1 << 20);
  std::vector<double> upper_vals;
  for (double k : ks)
    upper_vals.push_back(
        optimize_upper(cache, static_cast<long long>(k), 1.0).w1);
  const double slope_cubic = log_log_slope(ks, upper_vals);
  c.require(slope_cubic <= -0.85,
            "rank-2 cubic upper-bound slope " + fmt(slope_cubic) + " > -0.85");
  c.note("rank-2 cubic upper-bound slope " + fmt(slope_cubic) +
         " (want <= -0.85)");
  return c.outcome();
}

// ── criterion 2: sandwich validity ───────────────────────────────────────────

Outcome sandwich_validity() {
  Check c;
  const std::vector<long long> ks = {4, 16, 64, 256, 1024, 4096};
  const auto records = bound_sandwich(golden_walk(), ks);
  int with_exact = 0, sandwich_ok = 0, upper_ok = 0;
  for (const auto& rec : records) {
    if (!rec.has_exact()) continue;
    ++with_exact;
    if (rec.lower - 1e-9 <= rec.exact && rec.exact <= rec.upper + 1e-9)
      ++sandwich_ok;
    if (rec.upper >= rec.exact) ++upper_ok;
  }
  c.require(with_exact == static_cast<int>(ks.size()),
            "only " + std::to_string(with_exact) + "/" +
                std::to_string(ks.size()) + " records carry an exact value");
  c.require(sandwich_ok == with_exact,
            std::to_string(with_exact - sandwich_ok) +
                " records violate lower <= exact <= upper");
  c.require(upper_ok == with_exact,
            "smoothing upper bound below the exact value on " +
                std::to_string(with_exact - upper_ok) + " records");
  c.note(std::to_string(sandwich_ok) + "/" + std::to_string(with_exact) +
         " records sandwich-valid, upper >= exact on " +
         std::to_string(upper_ok) + "/" + std::to_string(with_exact));
  return c.outcome();
}

// ── criterion 3: exact-transport oracle fixtures ─────────────────────────────

Outcome exact_oracles() {
  Check c;
  const DiscreteMeasure dirac0 = DiscreteMeasure::dirac(TorusPoint::zero(1));
  const DiscreteMeasure two_atoms = DiscreteMeasure::uniform_atoms_1d({0.0, 0.5});
  Vec h(1);
  h << 0.5;
  const DiscreteMeasure dirac_half = DiscreteMeasure::dirac(TorusPoint(h));

  const double w_dirac = exact_w1_circle_uniform(dirac0);
  const double w_pair = exact_w1_circle_uniform(two_atoms);
  const double w_atoms = exact_w1_circle(dirac0, dirac_half);
  c.require(std::abs(w_dirac - 0.25) <= 1e-9,
            "point mass vs uniform: " + fmt(w_dirac, 12) + " != 1/4");
  c.require(std::abs(w_pair - 0.125) <= 1e-9,
            "antipodal pair vs uniform: " + fmt(w_pair, 12) + " != 1/8");
  c.require(std::abs(w_atoms - 0.5) <= 1e-9,
            "antipodal point masses: " + fmt(w_atoms, 12) + " != 1/2");

  // Volumetric lower bound, equality case: the closed 1/4-balls around
  // {0, 1/2} tile the circle, so the bound is attained exactly.
  Eigen::MatrixXd pts(2, 1);
  pts << 0.0, 0.5;
  Vec mass(2);
  mass << 0.5, 0.5;
  const RnetBound net = rnet_lower_bound(PointSet(pts, mass), 0.25, 1.0);
  c.require(!net.vacuous, "equality-case net bound reported vacuous");
  c.require(net.value == 0.125,
            "equality-case net bound " + fmt(net.value, 17) + " != 1/8 exactly");
  c.require(net.value == w_pair,
            "net bound does not reproduce the exact distance bit for bit");
  c.note("fixtures 1/4, 1/8, 1/2 all within 1e-9; net lower bound == 1/8 exactly");
  return c.outcome();
}

// ── criterion 4: kernel identities ───────────────────────────────────────────

Outcome kernel_identities() {
  Check c;
  // Unit mass via the zeroth coefficient, all H up to 64.
  double worst_a0 = 0.0;
  for (int H = 1; H <= 64; ++H)
    worst_a0 = std::max(worst_a0, std::abs(jackson_coefficients(H)(0) - 1.0));
  c.require(worst_a0 <= 1e-12,
            "max |a_0 - 1| = " + fmt(worst_a0, 3) + " over H <= 64");

  // Unit mass again by quadrature: the kernels are trigonometric polynomials
  // of degree < 2H - 1 <= 127, far below the grid Nyquist limit, so the
  // trapezoid mean is exact up to rounding.
  const int quad_n = 1 << 12;
  double worst_quad = 0.0;
  for (int H : {4, 16, 64}) {
    double mean = 0.0;
    for (int i = 0; i < quad_n; ++i)
      mean += jackson_kernel(H, static_cast<double>(i) / quad_n);
    mean /= quad_n;
    worst_quad = std::max(worst_quad, std::abs(mean - 1.0));
  }
  c.require(worst_quad <= 1e-12,
            "max |quadrature mass - 1| = " + fmt(worst_quad, 3));

  // Closed form vs truncated series at random points.
  RngStream rng = RngStream::derive(1104, 0);
  double worst_series = 0.0;
  for (int H : {4, 16, 64}) {
    for (int i = 0; i < 10000; ++i) {
      const double x = rng.uniform();
      worst_series = std::max(
          worst_series, std::abs(fejer_kernel(H, x) - fejer_kernel_series(H, x)));
      worst_series = std::max(
          worst_series,
          std::abs(jackson_kernel(H, x) - jackson_kernel_series(H, x)));
    }
  }
  c.require(worst_series <= 1e-10,
            "closed form vs series disagree by " + fmt(worst_series, 3));

  // Smoothing error bound for the recentred distance function: the sup of
  // |f - f * K_H| over a dense grid must respect the kernel's approximation
  // constant (3 pi^2 log 2) / (16 H + 8 / H) for 1-Lipschitz f.
  const TestFunction f = TestFunction::distance_power(TorusPoint::zero(1), 1.0);
  const int grid_n = 1 << 16;
  std::string sups;
  for (int H : {4, 16, 64}) {
    const TestFunction g = smooth_test_function(f, H);
    double sup = 0.0;
    for (int i = 0; i < grid_n; ++i) {
      const double x = static_cast<double>(i) / grid_n;
      sup = std::max(sup, std::abs(f.evaluate(&x) - g.evaluate(&x)));
    }
    const double allowed =
        3.0 * kPi * kPi * std::log(2.0) / (16.0 * H + 8.0 / H);
    c.require(sup <= allowed, "H=" + std::to_string(H) + ": smoothing sup " +
                                  fmt(sup) + " > bound " + fmt(allowed));
    sups += (sups.empty() ? "" : ", ") + std::string("H=") +
            std::to_string(H) + " sup " + fmt(sup, 3) + " <= " +
            fmt(allowed, 3);
  }
  c.note("a_0, quadrature mass, series agreement all within tolerance; " + sups);
  return c.outcome();
}

// ── criterion 5: variance consistency ────────────────────────────────────────

Outcome variance_consistency() {
  Check c;
  const StepDistribution golden = golden_walk();
  const TestFunction f = sqrt2_cosine();
  const double spectral = asymptotic_variance_spectral(f, golden);
  const double closed = golden_variance_closed_form();
  c.require(std::abs(spectral - closed) <= 1e-10,
            "spectral series " + fmt(spectral, 12) + " vs closed form " +
                fmt(closed, 12));

  const VarianceEstimate mc = monte_carlo_variance(golden, f, 40, 100000, 1105);
  const double z = std::abs(mc.value - spectral) / mc.std_error;
  c.require(z <= 3.0, "Monte Carlo variance off by " + fmt(z, 3) +
                          " standard errors (limit 3)");
  c.note("series " + fmt(spectral, 9) + " == closed form to 1e-10; MC " +
         fmt(mc.value, 4) + " at " + fmt(z, 2) + " standard errors");
  return c.outcome();
}

// ── criterion 6: central-limit band ──────────────────────────────────────────

Outcome clt_band() {
  Check c;
  const ExperimentReport rep =
      clt_experiment(golden_walk(), sqrt2_cosine(), 20000, 2000, 1106);
  c.require(!rep.degenerate, "experiment reported a degenerate variance");
  c.require(rep.ks_distance < 0.05, "KS distance " + fmt(rep.ks_distance, 4) +
                                        " >= 0.05 at N=20000, 2000 trials");
  c.note("KS distance " + fmt(rep.ks_distance, 4) + " (< 0.05) to Normal(0, " +
         fmt(rep.variance, 4) + ")");
  return c.outcome();
}

// ── criterion 7: iterated-logarithm band ─────────────────────────────────────

Outcome lil_band() {
  Check c;
  const ExperimentReport rep =
      lil_experiment(golden_walk(), sqrt2_cosine(), 1000000, 50, 1107);
  const double sigma = std::sqrt(rep.variance);
  int in_band = 0, over4 = 0;
  for (double r : rep.lil_ratios) {
    if (r >= 0.3 * sigma && r <= 2.0 * sigma) ++in_band;
    if (r > 4.0 * sigma) ++over4;
  }
  c.require(in_band >= 48, "only " + std::to_string(in_band) +
                               "/50 window suprema inside [0.3, 2.0] sigma");
  c.require(over4 == 0,
            std::to_string(over4) + " window suprema above 4 sigma");
  c.note(std::to_string(in_band) +
         "/50 window suprema in [0.3, 2.0] sigma, none above 4 sigma");
  return c.outcome();
}

// ── criterion 8: block coupling ──────────────────────────────────────────────

Outcome block_coupling() {
  Check c;
  const StepDistribution golden = golden_walk();
  const TestFunction f = sqrt2_cosine();

  // Pooled starred positions across independent replications are uniform.
  std::vector<double> pooled;
  for (int rep = 0; rep < 8; ++rep) {
    const BlockCouplingResult r =
        coupled_block_sums(golden, f, 4000, 1108 + rep);
    pooled.insert(pooled.end(), r.w_star_samples.begin(),
                  r.w_star_samples.end());
  }
  c.require(pooled.size() >= 10000, "only " + std::to_string(pooled.size()) +
                                        " pooled starred positions (< 10^4)");
  const double ks = ks_statistic(
      pooled, [](double x) { return std::min(1.0, std::max(0.0, x)); });
  c.require(ks < 0.02, "pooled starred positions: KS " + fmt(ks, 4) +
                           " >= 0.02 vs uniform");

  // 500 short replications: starred block sums decorrelate, and the realized
  // per-block transport cost matches the optimal-plan cost within noise.
  const int reps = 500;
  const int pairs = 12;  // complete (H_i, J_i) pairs inside 1..40
  std::vector<std::vector<double>> ys(pairs), costs(pairs);
  std::vector<double> delta(pairs, 0.0);
  for (int rep = 0; rep < reps; ++rep) {
    const BlockCouplingResult r = coupled_block_sums(golden, f, 40, 2108 + rep);
    if (static_cast<int>(r.Y_star.size()) != pairs) {
      c.require(false, "expected 12 complete pairs at N=40, got " +
                           std::to_string(r.Y_star.size()));
      return c.outcome();
    }
    for (int i = 0; i < pairs; ++i) {
      ys[i].push_back(r.Y_star[i]);
      costs[i].push_back(r.perturbation_errors[i]);
      delta[i] = r.delta_exact[i];
    }
  }
  double max_corr = 0.0;
  for (int i = 0; i < pairs; ++i)
    for (int j = i + 1; j < pairs; ++j)
      max_corr = std::max(max_corr,
                          std::abs(pearson_correlation(ys[i], ys[j])));
  const double corr_limit = 3.0 / std::sqrt(static_cast<double>(reps));
  c.require(max_corr < corr_limit, "max pairwise |corr| " + fmt(max_corr, 4) +
                                       " >= " + fmt(corr_limit, 4));

  int cost_ok = 0;
  for (int i = 0; i < pairs; ++i) {
    const double mean = sample_mean(costs[i]);
    const double se = sample_sd(costs[i]) / std::sqrt(static_cast<double>(reps));
    if (mean <= delta[i] + 3.0 * se) ++cost_ok;
  }
  c.require(cost_ok == pairs,
            std::to_string(pairs - cost_ok) +
                " blocks exceed the optimal cost by more than 3 standard errors");
  c.note("pooled KS " + fmt(ks, 4) + " over " + std::to_string(pooled.size()) +
         " samples; max |corr| " + fmt(max_corr, 3) + " < " +
         fmt(corr_limit, 3) + "; per-block cost within 3 SE on " +
         std::to_string(cost_ok) + "/12 blocks");
  return c.outcome();
}

// ── criterion 9: property suites ─────────────────────────────────────────────

// Circle CDF-difference segments for the duality check: val is the constant
// value of CDF_a - CDF_b on each arc between consecutive support points,
// len the arc length; the arcs tile the circle.
struct Segments {
  std::vector<double> val, len;
};

Segments cdf_difference(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  std::vector<std::pair<double, double>> jumps;
  for (int i = 0; i < a.size(); ++i)
    jumps.emplace_back(reduce_unit(a.points(i, 0)), a.mass[i]);
  for (int i = 0; i < b.size(); ++i)
    jumps.emplace_back(reduce_unit(b.points(i, 0)), -b.mass[i]);
  std::sort(jumps.begin(), jumps.end());
  // merge coincident support points
  std::vector<std::pair<double, double>> merged;
  for (const auto& j : jumps) {
    if (!merged.empty() && merged.back().first == j.first)
      merged.back().second += j.second;
    else
      merged.push_back(j);
  }
  Segments g;
  double F = 0.0;
  for (std::size_t s = 0; s < merged.size(); ++s) {
    F += merged[s].second;
    const double next =
        s + 1 < merged.size() ? merged[s + 1].first : merged[0].first + 1.0;
    g.val.push_back(F);
    g.len.push_back(next - merged[s].first);
  }
  return g;
}

// Dual objective of the potential with slope sign(F - c) off the level set
// F == c and slope t on it, recentred to close the loop and normalized to
// Lipschitz constant <= 1.
double level_set_dual(const Segments& g, double c, double t) {
  const std::size_t n = g.val.size();
  double m = 0.0, intF = 0.0;
  std::vector<double> slope(n);
  for (std::size_t s = 0; s < n; ++s) {
    slope[s] = g.val[s] > c ? 1.0 : (g.val[s] < c ? -1.0 : t);
    m += slope[s] * g.len[s];
    intF += g.val[s] * g.len[s];
  }
  double lip = 0.0, dual = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    lip = std::max(lip, std::abs(slope[s] - m));
    dual += slope[s] * g.val[s] * g.len[s];
  }
  dual -= m * intF;
  return std::abs(dual) / std::max(1.0, lip);
}

double balancing_t(const Segments& g, double c) {
  double m0 = 0.0, level_len = 0.0;
  for (std::size_t s = 0; s < g.val.size(); ++s) {
    if (g.val[s] == c)
      level_len += g.len[s];
    else
      m0 += (g.val[s] > c ? 1.0 : -1.0) * g.len[s];
  }
  if (level_len == 0.0) return 0.0;
  return std::clamp(-m0 / level_len, -1.0, 1.0);
}

DiscreteMeasure random_measure_1d(RngStream& rng, int max_atoms) {
  const int n =
      1 + static_cast<int>(rng.bits() % static_cast<std::uint64_t>(max_atoms));
  Eigen::MatrixXd pts(n, 1);
  Vec mass(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    pts(i, 0) = rng.uniform();
    mass[i] = 0.05 + rng.uniform();
    total += mass[i];
  }
  mass /= total;
  return DiscreteMeasure{pts, mass};
}

Outcome property_suites() {
  Check c;
  RngStream rng = RngStream::derive(1109, 0);

  // Torus metric axioms on random triples, dimensions 1..3.
  double worst_tri = 0.0, worst_sym = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int d = 1 + trial % 3;
    Vec x(d), y(d), z(d);
    for (int i = 0; i < d; ++i) {
      x[i] = 4.0 * rng.uniform() - 2.0;
      y[i] = 4.0 * rng.uniform() - 2.0;
      z[i] = 4.0 * rng.uniform() - 2.0;
    }
    const TorusPoint px(x), py(y), pz(z);
    const double dxy = torus_distance(px, py);
    const double dyx = torus_distance(py, px);
    const double dxz = torus_distance(px, pz);
    const double dyz = torus_distance(py, pz);
    if (dxy < 0.0 || torus_distance(px, px) != 0.0) {
      c.require(false, "metric axiom violated: nonnegativity or identity");
      return c.outcome();
    }
    worst_sym = std::max(worst_sym, std::abs(dxy - dyx));
    worst_tri = std::max(worst_tri, dxz - (dxy + dyz));
  }
  c.require(worst_sym == 0.0, "metric symmetry off by " + fmt(worst_sym, 3));
  c.require(worst_tri <= 1e-12,
            "triangle inequality violated by " + fmt(worst_tri, 3));

  // Transform properties: Hermitian symmetry and modulus at most 1.
  double worst_herm = 0.0, worst_mod = 0.0;
  for (const StepDistribution& nu : {golden_walk(), cubic_rank2_walk()}) {
    for (int trial = 0; trial < 2000; ++trial) {
      IVec h(nu.d());
      bool zero = true;
      for (int i = 0; i < nu.d(); ++i) {
        h[i] = static_cast<int>(rng.bits() % 101) - 50;
        zero = zero && h[i] == 0;
      }
      if (zero) h[0] = 1;
      const Complex zp = nu_hat(nu, h);
      const Complex zm = nu_hat(nu, IVec(-h));
      worst_herm = std::max(worst_herm, std::abs(zp - std::conj(zm)));
      worst_mod = std::max(worst_mod, std::abs(zp) - 1.0);
    }
  }
  c.require(worst_herm <= 1e-12,
            "Hermitian symmetry off by " + fmt(worst_herm, 3));
  c.require(worst_mod <= 1e-12, "|transform| exceeds 1 by " + fmt(worst_mod, 3));

  // The exact distance to uniform is nonincreasing in the step count.
  const StepDistribution golden = golden_walk();
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (long long k = 1; k <= 128; ++k) {
    const double w = exact_w1_circle_uniform(convolution_power_measure(golden, k));
    if (w > prev + 1e-12) monotone = false;
    prev = w;
  }
  c.require(monotone, "exact distance increased along k = 1..128");

  // Power-cost comparison W_p <= W_1^p on random discrete pairs.
  double worst_gap = -1.0;
  for (int trial = 0; trial < 40; ++trial) {
    const DiscreteMeasure a = random_measure_1d(rng, 8);
    const DiscreteMeasure b = random_measure_1d(rng, 8);
    const double w1 = exact_w1_grid(a, b);
    for (double p : {0.3, 0.5, 0.8})
      worst_gap = std::max(worst_gap,
                           exact_wp_grid(a, b, p) - std::pow(w1, p));
  }
  c.require(worst_gap <= 1e-9,
            "W_p exceeds W_1^p by " + fmt(worst_gap, 3));

  // Smoothing contracts Holder seminorms: grid quotients never grow.
  const int qn = 1 << 12;
  for (double p : {1.0, 0.5}) {
    Vec x0(1);
    x0 << (p == 1.0 ? 0.0 : 0.3);
    const TestFunction f = TestFunction::distance_power(TorusPoint(x0), p);
    for (int H : {4, 16, 64}) {
      const TestFunction g = smooth_test_function(f, H);
      double qf = 0.0, qg = 0.0;
      for (int i = 0; i < qn; ++i) {
        const double a = static_cast<double>(i) / qn;
        const double b = static_cast<double>(i + 1) / qn;
        const double dp = std::pow(wrapped_gap(a, b), p);
        qf = std::max(qf, std::abs(f.evaluate(&a) - f.evaluate(&b)) / dp);
        qg = std::max(qg, std::abs(g.evaluate(&a) - g.evaluate(&b)) / dp);
      }
      c.require(qg <= qf + 1e-9, "smoothing raised the Holder quotient at p=" +
                                     fmt(p, 2) + ", H=" + std::to_string(H));
    }
  }

  // Primal-dual spot checks on small instances: every sampled potential
  // stays weakly below the primal optimum, and the best one reaches it.
  double worst_dual_excess = -1.0, worst_ratio = 2.0;
  for (int inst = 0; inst < 5; ++inst) {
    const DiscreteMeasure a = random_measure_1d(rng, 12);
    const DiscreteMeasure b = random_measure_1d(rng, 12);
    const double primal = exact_w1_circle(a, b);
    const Segments g = cdf_difference(a, b);
    double lo = g.val[0], hi = g.val[0];
    for (double v : g.val) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    double best = 0.0;
    for (std::size_t s = 0; s < g.val.size(); ++s) {
      const double d = level_set_dual(g, g.val[s], balancing_t(g, g.val[s]));
      worst_dual_excess = std::max(worst_dual_excess, d - primal);
      best = std::max(best, d);
    }
    for (int s = 0; s < 20000; ++s) {
      double cc;
      if (s % 2 == 0) {
        cc = lo + (hi - lo) * rng.uniform();
      } else {
        const auto idx =
            static_cast<std::size_t>(rng.uniform() * double(g.val.size()));
        cc = g.val[std::min(idx, g.val.size() - 1)];
      }
      const double d = level_set_dual(g, cc, 2.0 * rng.uniform() - 1.0);
      worst_dual_excess = std::max(worst_dual_excess, d - primal);
      best = std::max(best, d);
    }
    if (primal > 1e-12) worst_ratio = std::min(worst_ratio, best / primal);
  }
  c.require(worst_dual_excess <= 1e-9,
            "a sampled dual value exceeds the primal by " +
                fmt(worst_dual_excess, 3));
  c.require(worst_ratio >= 0.98,
            "best sampled dual reaches only " + fmt(worst_ratio, 4) +
                " of the primal");
  c.note("metric axioms, transform bounds, monotone decay, power-cost "
         "comparison, smoothing contraction, duality (best/primal >= " +
         fmt(worst_ratio, 4) + ") all hold");
  return c.outcome();
}

}  // namespace

int main() {
  std::printf("walklab acceptance suite\n");
  run("rate-exponent", 120.0, rate_exponent);
  run("bound-sandwich", 60.0, sandwich_validity);
  run("exact-oracles", 0.0, exact_oracles);
  run("kernel-identities", 0.0, kernel_identities);
  run("variance-consistency", 60.0, variance_consistency);
  run("clt-band", 180.0, clt_band);
  run("lil-band", 0.0, lil_band);
  run("block-coupling", 0.0, block_coupling);
  run("property-suites", 0.0, property_suites);
  std::printf("%d/9 criteria passed\n", 9 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
