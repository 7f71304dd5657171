#include "walklab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace walklab {
namespace {

// ── dense polynomials over double, constant term first ──────────────────────

using Poly = std::vector<double>;

int degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

double eval(const Poly& p, double x) {
  double v = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + *it;
  return v;
}

Poly derivative(const Poly& p) {
  if (p.size() <= 1) return {0.0};
  Poly q(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i)
    q[i - 1] = p[i] * static_cast<double>(i);
  return q;
}

void trim(Poly& p, double eps) {
  while (p.size() > 1 && std::abs(p.back()) <= eps) p.pop_back();
}

// Remainder of a by b, with coefficient scaling to keep the chain tame.
Poly remainder(Poly a, const Poly& b) {
  const int db = degree(b);
  while (degree(a) >= db && !(a.size() == 1 && a[0] == 0.0)) {
    const double c = a.back() / b.back();
    const int shift = degree(a) - db;
    for (int i = 0; i <= db; ++i) a[static_cast<std::size_t>(i + shift)] -= c * b[static_cast<std::size_t>(i)];
    a.pop_back();
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    trim(a, scale * 1e-13);
  }
  return a;
}

std::vector<Poly> sturm_chain(const Poly& p) {
  std::vector<Poly> chain;
  chain.push_back(p);
  chain.push_back(derivative(p));
  while (degree(chain.back()) > 0) {
    Poly r = remainder(chain[chain.size() - 2], chain.back());
    double scale = 0.0;
    for (double v : r) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) {
      // Nontrivial gcd(p, p'): repeated roots.
      throw ValidationError("real_roots: repeated roots detected");
    }
    for (double& v : r) v = -v / scale;
    chain.push_back(std::move(r));
  }
  return chain;
}

int sign_changes(const std::vector<Poly>& chain, double x) {
  int changes = 0;
  int prev = 0;
  for (const Poly& p : chain) {
    double v = eval(p, x);
    int s = (v > 0) - (v < 0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  return changes;
}

double refine_root(const Poly& p, const Poly& dp, double lo, double hi) {
  double flo = eval(p, lo);
  // Bisection until the bracket is tight, then Newton.
  for (int it = 0; it < 80 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = eval(p, mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 32; ++it) {
    double f = eval(p, x);
    double df = eval(dp, x);
    if (df == 0.0) break;
    double step = f / df;
    double next = x - step;
    if (next < lo || next > hi) break;  // keep the bracket's guarantee
    x = next;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

// Integer-arithmetic polynomial evaluation with overflow guard; returns
// nullopt on overflow (treated as "nonzero").
std::optional<long long> eval_int(const std::vector<long long>& c, long long x) {
  __int128 v = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    v = v * x + *it;
    if (v > std::numeric_limits<long long>::max() ||
        v < std::numeric_limits<long long>::min())
      return std::nullopt;
  }
  return static_cast<long long>(v);
}

// Monic integer polynomials only have integer rational roots, and those
// divide the constant term.  Finding one proves reducibility.
void rational_root_smoke_test(const std::vector<long long>& coeffs) {
  const long long a0 = coeffs.front();
  if (a0 == 0) throw ValidationError("polynomial is reducible: root at 0");
  const long long bound = std::llabs(a0);
  for (long long m = 1; m * m <= bound && m <= 2'000'000; ++m) {
    if (bound % m != 0) continue;
    for (long long div : {m, bound / m}) {
      for (long long root : {div, -div}) {
        auto v = eval_int(coeffs, root);
        if (v && *v == 0)
          throw ValidationError("polynomial is reducible: integer root " +
                                std::to_string(root));
      }
    }
  }
}

}  // namespace

std::vector<double> real_roots(const std::vector<long long>& coeffs) {
  if (coeffs.size() < 2) throw ValidationError("real_roots: degree must be >= 1");
  if (coeffs.back() != 1) throw ValidationError("real_roots: polynomial must be monic");
  if (coeffs.size() > 33) throw ValidationError("real_roots: degree cap is 32");
  rational_root_smoke_test(coeffs);

  Poly p(coeffs.begin(), coeffs.end());
  const int n = degree(p);
  const Poly dp = derivative(p);
  const auto chain = sturm_chain(p);

  double cauchy = 0.0;
  for (int i = 0; i < n; ++i) cauchy = std::max(cauchy, std::abs(p[static_cast<std::size_t>(i)]));
  const double bound = 1.0 + cauchy;

  const int total = sign_changes(chain, -bound) - sign_changes(chain, bound);
  if (total != n)
    throw ValidationError(
        "real_roots: polynomial must have all roots real and distinct (found " +
        std::to_string(total) + " of " + std::to_string(n) + ")");

  // Subdivide until every interval isolates one root.
  struct Interval { double lo, hi; int count; };
  std::vector<Interval> stack{{-bound, bound, n}};
  std::vector<std::pair<double, double>> isolated;
  int guard = 0;
  while (!stack.empty()) {
    if (++guard > 100000)
      throw InvariantViolation("real_roots: isolation failed to converge");
    Interval iv = stack.back();
    stack.pop_back();
    if (iv.count == 0) continue;
    if (iv.count == 1) {
      isolated.emplace_back(iv.lo, iv.hi);
      continue;
    }
    double mid = 0.5 * (iv.lo + iv.hi);
    // Nudge off a root: Sturm counting needs nonzero endpoint values.
    while (eval(p, mid) == 0.0) mid += (iv.hi - iv.lo) * 1e-9;
    int left = sign_changes(chain, iv.lo) - sign_changes(chain, mid);
    stack.push_back({iv.lo, mid, left});
    stack.push_back({mid, iv.hi, iv.count - left});
  }

  std::vector<double> roots;
  roots.reserve(static_cast<std::size_t>(n));
  for (auto [lo, hi] : isolated) {
    // Tighten the bracket to an actual sign change before refining.
    double flo = eval(p, lo), fhi = eval(p, hi);
    if (flo == 0.0) { roots.push_back(lo); continue; }
    if (fhi == 0.0) { roots.push_back(hi); continue; }
    if ((flo > 0) == (fhi > 0))
      throw InvariantViolation("real_roots: isolated interval lost its sign change");
    roots.push_back(refine_root(p, dp, lo, hi));
  }
  std::sort(roots.begin(), roots.end());
  for (std::size_t i = 1; i < roots.size(); ++i)
    if (roots[i] - roots[i - 1] < 1e-9 * std::max(1.0, std::abs(roots[i])))
      throw ValidationError("real_roots: roots too close to separate");
  return roots;
}

void LatticeSystem::validate() const {
  if (r < 1 || d < 1) throw ValidationError("LatticeSystem: r and d must be >= 1");
  if (alphas.rows() != r || alphas.cols() != d)
    throw ValidationError("LatticeSystem: alphas must be r x d");
  for (Eigen::Index i = 0; i < alphas.rows(); ++i)
    for (Eigen::Index j = 0; j < alphas.cols(); ++j)
      if (!(alphas(i, j) >= 0.0 && alphas(i, j) < 1.0))
        throw ValidationError("LatticeSystem: alphas must lie in [0,1)");
}

LatticeSystem construct_from_polynomial(const std::vector<long long>& coeffs,
                                        int r, int d) {
  if (r < 1 || d < 1)
    throw ValidationError("construct_from_polynomial: r and d must be >= 1");
  if (static_cast<int>(coeffs.size()) != r + d + 1)
    throw ValidationError(
        "construct_from_polynomial: polynomial degree must equal r + d");
  const std::vector<double> roots = real_roots(coeffs);

  // The r largest roots are the used ones; the d smallest are the spares
  // whose conjugate growth underwrites the approximation exponent.
  Eigen::MatrixXd V(r, r), W(r, d);
  for (int i = 0; i < r; ++i) {
    const double a = roots[static_cast<std::size_t>(d + i)];
    double pw = 1.0;
    for (int j = 0; j < r; ++j) {
      V(i, j) = pw;
      pw *= a;
    }
    for (int j = 0; j < d; ++j) {
      W(i, j) = pw;
      pw *= a;
    }
  }
  Eigen::MatrixXd M = V.partialPivLu().solve(W);
  const double resid = (V * M - W).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, W.cwiseAbs().maxCoeff());
  if (resid > 1e-10 * scale)
    throw InvariantViolation("construct_from_polynomial: Vandermonde residual " +
                             std::to_string(resid));

  LatticeSystem sys;
  sys.r = r;
  sys.d = d;
  sys.alphas.resize(r, d);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < d; ++j) sys.alphas(i, j) = reduce_unit(M(i, j));
  sys.polynomial = coeffs;
  sys.validate();
  return sys;
}

QualityEstimate diophantine_quality(const LatticeSystem& sys, long long H_max,
                                    std::uint64_t enum_cap) {
  sys.validate();
  if (H_max < 1) throw ValidationError("diophantine_quality: H_max must be >= 1");
  const int d = sys.d;

  // Count sign-canonical h with 0 < |h|_inf <= H_max: ((2H+1)^d - 1) / 2.
  long double box = 1.0L;
  for (int j = 0; j < d; ++j) box *= static_cast<long double>(2 * H_max + 1);
  const long double canonical = (box - 1.0L) / 2.0L;
  if (canonical > static_cast<long double>(enum_cap))
    throw CapExceeded("diophantine_quality: enumeration of " +
                      std::to_string(static_cast<double>(canonical)) +
                      " frequencies exceeds cap " + std::to_string(enum_cap));

  const double exponent = static_cast<double>(d) / static_cast<double>(sys.r);
  double best = std::numeric_limits<double>::infinity();
  IVec best_h = IVec::Zero(d);

  IVec h = IVec::Zero(d);
  // Odometer over the full box; the canonical filter keeps h whose first
  // nonzero coordinate is positive.
  for (int j = 0; j < d; ++j) h[j] = -static_cast<int>(H_max);
  const int Hi = static_cast<int>(H_max);
  while (true) {
    int first_nonzero = 0;
    int linf = 0;
    for (int j = 0; j < d; ++j) {
      if (first_nonzero == 0 && h[j] != 0) first_nonzero = (h[j] > 0) ? 1 : -1;
      linf = std::max(linf, std::abs(h[j]));
    }
    if (first_nonzero == 1) {
      double worst = 0.0;
      for (int i = 0; i < sys.r; ++i) {
        double dot = 0.0;
        for (int j = 0; j < d; ++j) dot += h[j] * sys.alphas(i, j);
        worst = std::max(worst, nearest_integer_norm(dot));
      }
      const double value =
          worst * std::pow(static_cast<double>(linf), exponent);
      bool better = value < best;
      if (!better && value == best) {
        // Deterministic tie-break: lexicographically smallest canonical h.
        for (int j = 0; j < d; ++j) {
          if (h[j] != best_h[j]) {
            better = h[j] < best_h[j];
            break;
          }
        }
      }
      if (better) {
        best = value;
        best_h = h;
      }
    }
    int j = d - 1;
    while (j >= 0 && h[j] == Hi) {
      h[j] = -Hi;
      --j;
    }
    if (j < 0) break;
    ++h[j];
  }

  QualityEstimate q;
  q.K_hat = best;
  q.argmin_h = best_h;
  q.H_max = H_max;
  return q;
}

PsiFunction::PsiFunction(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0)) throw ValidationError("PsiFunction: power exponent must be > 0");
}

double PsiFunction::operator()(double x) const {
  if (x < 1.0) throw ValidationError("PsiFunction: domain is [1, inf)");
  double v = std::pow(x, a_);
  if (b_ != 0.0) v *= std::pow(std::log(std::exp(1.0) + x), b_);
  return v;
}

PsiFunction::InverseResult PsiFunction::inverse(double y) const {
  InverseResult res;
  if (!(y > 0.0)) throw ValidationError("PsiFunction::inverse: y must be > 0");
  if (y < (*this)(1.0)) {
    res.x = 1.0;
    res.clamped_at_one = true;
    return res;
  }
  if (b_ == 0.0) {
    res.x = std::pow(y, 1.0 / a_);
    return res;
  }
  double lo = 1.0, hi = 2.0;
  while ((*this)(hi) <= y) {
    hi *= 2.0;
    if (hi > 1e300) throw ValidationError("PsiFunction::inverse: y out of range");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, lo); ++it) {
    double mid = 0.5 * (lo + hi);
    if ((*this)(mid) <= y)
      lo = mid;
    else
      hi = mid;
  }
  res.x = lo;
  return res;
}

bool PsiFunction::admissible_for(int r, int d, int grid, double x_max) const {
  const double target = static_cast<double>(d) / static_cast<double>(r);
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    // Log-spaced grid on [1, x_max].
    double x = std::exp(std::log(x_max) * i / grid);
    double v = (*this)(x) * std::pow(x, -target);
    if (v < prev * (1.0 - 1e-12)) return false;
    prev = v;
  }
  return true;
}

}  // namespace walklab
