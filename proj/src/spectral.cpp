#include "walklab/spectral.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

namespace walklab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// e^{2 pi i t} with the argument reduced to [-1/2, 1/2] first; keeps trig
// arguments small when t is h * alpha with h in the hundred-thousands.
Complex unit_phase(double t) {
  double r = t - std::round(t);
  return std::polar(1.0, kTwoPi * r);
}
}  // namespace

// ── IntegerLaw ───────────────────────────────────────────────────────────────

void IntegerLaw::validate() const {
  if (atoms.empty()) throw ValidationError("IntegerLaw: no atoms");
  double total = 0.0;
  for (auto [n, p] : atoms) {
    (void)n;
    if (p < 0.0) throw ValidationError("IntegerLaw: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("IntegerLaw: probabilities must sum to 1");
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (std::size_t j = i + 1; j < atoms.size(); ++j)
      if (atoms[i].first == atoms[j].first)
        throw ValidationError("IntegerLaw: duplicate atom");
}

double IntegerLaw::mean() const {
  double m = 0.0;
  for (auto [n, p] : atoms) m += static_cast<double>(n) * p;
  return m;
}

double IntegerLaw::second_moment() const {
  double m = 0.0;
  for (auto [n, p] : atoms)
    m += static_cast<double>(n) * static_cast<double>(n) * p;
  return m;
}

IntegerLaw IntegerLaw::pm_one() { return IntegerLaw{{{-1, 0.5}, {1, 0.5}}}; }

Complex characteristic(const IntegerLaw& law, double t) {
  Complex v{0.0, 0.0};
  for (auto [n, p] : law.atoms)
    v += p * std::polar(1.0, t * static_cast<double>(n));
  return v;
}

long long maximal_span(const IntegerLaw& law) {
  law.validate();
  if (law.atoms.size() < 2)
    throw ValidationError("maximal_span: law is degenerate (single atom)");
  long long g = 0;
  const long long base = law.atoms.front().first;
  for (std::size_t i = 1; i < law.atoms.size(); ++i)
    g = std::gcd(g, std::llabs(law.atoms[i].first - base));
  return g;
}

double fitted_char_bound_constant(const IntegerLaw& law) {
  const long long D = maximal_span(law);
  const int grid = 10000;
  double c = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid; ++j) {
    const double x = (j + 0.5) / grid;
    const double dx = nearest_integer_norm(static_cast<double>(D) * x);
    if (dx < 1e-8) continue;
    const double mod = std::abs(characteristic(law, kTwoPi * x));
    c = std::min(c, (1.0 - mod) / (dx * dx));
  }
  return c;
}

// ── StepDistribution ─────────────────────────────────────────────────────────

StepDistribution::StepDistribution(Vec selector, std::vector<IntegerLaw> steps,
                                   Eigen::MatrixXd alphas)
    : selector_(std::move(selector)),
      steps_(std::move(steps)),
      alphas_(std::move(alphas)) {
  const int r = static_cast<int>(selector_.size());
  if (r < 1) throw ValidationError("StepDistribution: empty selector");
  if (static_cast<int>(steps_.size()) != r)
    throw ValidationError("StepDistribution: steps count != selector size");
  if (alphas_.rows() != r)
    throw ValidationError("StepDistribution: alphas rows != selector size");
  if (alphas_.cols() < 1)
    throw ValidationError("StepDistribution: dimension must be >= 1");
  double total = 0.0;
  for (int i = 0; i < r; ++i) {
    if (selector_[i] < 0.0)
      throw ValidationError("StepDistribution: negative selector probability");
    total += selector_[i];
    steps_[static_cast<std::size_t>(i)].validate();
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("StepDistribution: selector must sum to 1");
  for (Eigen::Index i = 0; i < alphas_.rows(); ++i)
    for (Eigen::Index j = 0; j < alphas_.cols(); ++j)
      alphas_(i, j) = reduce_unit(alphas_(i, j));
}

StepDistribution StepDistribution::symmetric_pm1(const LatticeSystem& sys) {
  sys.validate();
  Vec sel = Vec::Constant(sys.r, 1.0 / sys.r);
  std::vector<IntegerLaw> steps(static_cast<std::size_t>(sys.r),
                                IntegerLaw::pm_one());
  return StepDistribution(std::move(sel), std::move(steps), sys.alphas);
}

double StepDistribution::drift(int i) const {
  return selector_[i] * steps_[static_cast<std::size_t>(i)].mean();
}

double StepDistribution::moment_bound() const {
  double B = 0.0;
  for (int i = 0; i < r(); ++i)
    B = std::max(B, selector_[i] * steps_[static_cast<std::size_t>(i)].second_moment());
  return B;
}

Complex nu_hat(const StepDistribution& nu, const Eigen::Ref<const IVec>& h) {
  if (h.size() != nu.d()) throw ValidationError("nu_hat: frequency dimension mismatch");
  Complex v{0.0, 0.0};
  for (int i = 0; i < nu.r(); ++i) {
    double theta = 0.0;
    for (int j = 0; j < nu.d(); ++j)
      theta += static_cast<double>(h[j]) * nu.alphas()(i, j);
    Complex phi{0.0, 0.0};
    for (auto [n, p] : nu.steps()[static_cast<std::size_t>(i)].atoms)
      phi += p * unit_phase(-static_cast<double>(n) * theta);
    v += nu.selector()[i] * phi;
  }
  return v;
}

Complex convolution_power_hat(Complex z, long long k) {
  if (k < 0) throw ValidationError("convolution_power_hat: k must be >= 0");
  if (k == 0) return Complex{1.0, 0.0};
  const double m = std::abs(z);
  if (m == 0.0) return Complex{0.0, 0.0};
  return std::polar(std::pow(m, static_cast<double>(k)),
                    static_cast<double>(k) * std::arg(z));
}

double spectral_gap(const StepDistribution& nu, int H) {
  SpectralCache cache = SpectralCache::build(nu, H);
  double g = 0.0;
  for (const auto& e : cache.entries()) g = std::max(g, std::abs(e.value));
  return g;
}

// ── SpectralCache ────────────────────────────────────────────────────────────

SpectralCache SpectralCache::enumerate(
    int d, int H, const std::function<Complex(const IVec&)>& fn) {
  if (d < 1 || d > 2)
    throw ValidationError("SpectralCache: dimension must be 1 or 2");
  if (H < 1) throw ValidationError("SpectralCache: H must be >= 1");
  // Canonical half-box sizes: d=1 has H-1 entries, d=2 has 2m per shell side
  // pair, 4m per shell, 2(H-1)H total.
  const std::uint64_t count =
      d == 1 ? static_cast<std::uint64_t>(H - 1)
             : 2ull * static_cast<std::uint64_t>(H - 1) * static_cast<std::uint64_t>(H);
  if (count > (std::uint64_t{1} << 24))
    throw CapExceeded("SpectralCache: box too large (" + std::to_string(count) +
                      " canonical frequencies)");

  SpectralCache cache(d, H);
  cache.entries_.reserve(count);
  auto push = [&](const IVec& h, int shell) {
    Entry e;
    e.h = h;
    e.shell = shell;
    // squaredNorm on the integer vector would overflow past |h| ~ 46341
    e.h_norm_sq = h.cast<double>().squaredNorm();
    e.value = fn(h);
    cache.entries_.push_back(std::move(e));
  };
  if (d == 1) {
    IVec h(1);
    for (int m = 1; m < H; ++m) {
      h[0] = m;
      push(h, m);
    }
  } else {
    IVec h(2);
    for (int m = 1; m < H; ++m) {
      // Order matters: value() recomputes these offsets arithmetically.
      for (int h2 = -m; h2 <= m; ++h2) {
        h[0] = m;
        h[1] = h2;
        push(h, m);
      }
      for (int h1 = 1; h1 < m; ++h1) {
        h[0] = h1;
        h[1] = m;
        push(h, m);
        h[1] = -m;
        push(h, m);
      }
      h[0] = 0;
      h[1] = m;
      push(h, m);
    }
  }
  return cache;
}

SpectralCache SpectralCache::build(const StepDistribution& nu, int H) {
  return enumerate(nu.d(), H, [&](const IVec& h) { return nu_hat(nu, h); });
}

SpectralCache SpectralCache::from_measure(const DiscreteMeasure& m, int H) {
  m.validate();
  return enumerate(m.dim(), H, [&](const IVec& h) {
    Complex v{0.0, 0.0};
    for (int i = 0; i < m.size(); ++i) {
      double theta = 0.0;
      for (int j = 0; j < m.dim(); ++j)
        theta += static_cast<double>(h[j]) * m.points(i, j);
      v += m.mass[i] * unit_phase(-theta);
    }
    return v;
  });
}

SpectralCache SpectralCache::from_function(
    int d, int H, const std::function<Complex(const IVec&)>& fn) {
  return enumerate(d, H, fn);
}

SpectralCache SpectralCache::uniform_measure(int d, int H) {
  return enumerate(d, H, [](const IVec&) { return Complex{0.0, 0.0}; });
}

Complex SpectralCache::value(const Eigen::Ref<const IVec>& h) const {
  if (h.size() != d_) throw ValidationError("SpectralCache::value: dimension mismatch");
  int linf = 0;
  int first_nonzero = 0;
  for (int j = 0; j < d_; ++j) {
    if (first_nonzero == 0 && h[j] != 0) first_nonzero = h[j] > 0 ? 1 : -1;
    linf = std::max(linf, std::abs(h[j]));
  }
  if (linf == 0) return Complex{1.0, 0.0};
  if (linf >= H_)
    throw ValidationError("SpectralCache::value: frequency outside cached box");
  IVec c = h;
  const bool conj = first_nonzero < 0;
  if (conj) c = -c;

  std::size_t idx;
  const int m = linf;
  if (d_ == 1) {
    idx = static_cast<std::size_t>(m - 1);
  } else {
    const std::size_t shell_start =
        2ull * static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1);
    std::size_t off;
    if (c[0] == m)
      off = static_cast<std::size_t>(c[1] + m);
    else if (c[0] > 0)
      off = static_cast<std::size_t>(2 * m + 1 + 2 * (c[0] - 1) + (c[1] == m ? 0 : 1));
    else
      off = static_cast<std::size_t>(4 * m - 1);
    idx = shell_start + off;
  }
  const Entry& e = entries_[idx];
  if ((e.h - c).cwiseAbs().maxCoeff() != 0)
    throw InvariantViolation("SpectralCache::value: index arithmetic mismatch");
  return conj ? std::conj(e.value) : e.value;
}

std::vector<double> SpectralCache::shell_discrepancy(const SpectralCache& a,
                                                     const SpectralCache& b,
                                                     long long k1, long long k2) {
  if (a.d_ != b.d_)
    throw ValidationError("shell_discrepancy: caches must share dimension");
  // Enumeration order is deterministic per shell, so entry lists agree on the
  // prefix covered by the smaller box.
  const int H = std::min(a.H_, b.H_);
  const std::size_t n = std::min(a.entries_.size(), b.entries_.size());
  std::vector<double> s(static_cast<std::size_t>(H), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Entry& ea = a.entries_[i];
    const Entry& eb = b.entries_[i];
    const Complex diff =
        convolution_power_hat(ea.value, k1) - convolution_power_hat(eb.value, k2);
    s[static_cast<std::size_t>(ea.shell)] += 2.0 * std::norm(diff) / ea.h_norm_sq;
  }
  return s;
}

void SpectralCache::write_csv(std::ostream& os) const {
  for (int j = 1; j <= d_; ++j) os << "h_" << j << ",";
  os << "re,im\n";
  char buf[64];
  auto put = [&](double v) {
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    os.write(buf, r.ptr - buf);
  };
  for (const auto& e : entries_) {
    for (int j = 0; j < d_; ++j) os << e.h[j] << ",";
    put(e.value.real());
    os << ",";
    put(e.value.imag());
    os << "\n";
  }
}

// ── kernels ──────────────────────────────────────────────────────────────────

double fejer_kernel_series(int H, double x) {
  double v = 1.0;
  for (int h = 1; h < H; ++h)
    v += 2.0 * (1.0 - static_cast<double>(h) / H) * std::cos(kTwoPi * h * x);
  return v;
}

double fejer_kernel(int H, double x) {
  if (H < 1) throw ValidationError("fejer_kernel: H must be >= 1");
  const double s = std::sin(M_PI * x);
  if (std::abs(s) < 1e-6) return fejer_kernel_series(H, x);
  const double sH = std::sin(M_PI * static_cast<double>(H) * x);
  return (sH * sH) / (static_cast<double>(H) * s * s);
}

Vec jackson_coefficients(int H) {
  if (H < 1) throw ValidationError("jackson_coefficients: H must be >= 1");
  if (H > 4096) throw CapExceeded("jackson_coefficients: H cap is 4096");
  // Triangle weights w_j = 1 - |j|/H on |j| < H; a_h is their normalized
  // autocorrelation, so a_0 = 1 and support is |h| <= 2H-2.
  const int n = 2 * H - 1;
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int j = -(H - 1); j <= H - 1; ++j)
    w[static_cast<std::size_t>(j + H - 1)] =
        1.0 - std::abs(j) / static_cast<double>(H);
  double norm = 0.0;
  for (double v : w) norm += v * v;  // equals (2H^2+1)/(3H)
  Vec a(n);
  for (int h = 0; h < n; ++h) {
    double s = 0.0;
    for (int j = 0; j + h < n; ++j)
      s += w[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(j + h)];
    a[h] = s / norm;
  }
  return a;
}

namespace {
const Vec& cached_jackson_coefficients(int H) {
  thread_local std::unordered_map<int, Vec> cache;
  auto it = cache.find(H);
  if (it == cache.end()) it = cache.emplace(H, jackson_coefficients(H)).first;
  return it->second;
}
}  // namespace

double jackson_kernel_series(int H, double x) {
  const Vec& a = cached_jackson_coefficients(H);
  double v = a[0];
  for (int h = 1; h < a.size(); ++h) v += 2.0 * a[h] * std::cos(kTwoPi * h * x);
  return v;
}

double jackson_kernel(int H, double x) {
  if (H < 1) throw ValidationError("jackson_kernel: H must be >= 1");
  const double s = std::sin(M_PI * x);
  if (std::abs(s) < 1e-6) return jackson_kernel_series(H, x);
  const double Hd = static_cast<double>(H);
  const double sH = std::sin(M_PI * Hd * x);
  const double q = (sH * sH) / (s * s);
  return 3.0 / (2.0 * Hd * Hd * Hd + Hd) * q * q;
}

// ── TestFunction ─────────────────────────────────────────────────────────────

namespace {
// Canonicalize a harmonic: h = 0 dropped (mean zero), representative with
// positive first nonzero coordinate, coefficient conjugated as needed.
bool canonicalize(TestFunction::Harmonic& hc) {
  int first_nonzero = 0;
  for (Eigen::Index j = 0; j < hc.h.size(); ++j)
    if (hc.h[j] != 0) {
      first_nonzero = hc.h[j] > 0 ? 1 : -1;
      break;
    }
  if (first_nonzero == 0) return false;
  if (first_nonzero < 0) {
    hc.h = -hc.h;
    hc.c = std::conj(hc.c);
  }
  return true;
}
}  // namespace

TestFunction TestFunction::trig(int d, std::vector<Harmonic> half_coeffs) {
  if (d < 1 || d > 2) throw ValidationError("TestFunction: dimension must be 1 or 2");
  TestFunction f;
  f.kind_ = Kind::kTrig;
  f.d_ = d;
  f.holder_p_ = 1.0;
  std::map<std::vector<int>, Complex> merged;
  for (auto& hc : half_coeffs) {
    if (hc.h.size() != d)
      throw ValidationError("TestFunction: harmonic dimension mismatch");
    if (!canonicalize(hc)) continue;  // drops h = 0: mean zero by fiat
    std::vector<int> key(hc.h.data(), hc.h.data() + hc.h.size());
    merged[key] += hc.c;
  }
  for (auto& [key, c] : merged) {
    if (std::abs(c) == 0.0) continue;
    Harmonic hc;
    hc.h = Eigen::Map<const IVec>(key.data(), static_cast<Eigen::Index>(key.size()));
    hc.c = c;
    f.harmonics_.push_back(std::move(hc));
  }
  return f;
}

TestFunction TestFunction::distance_power(const TorusPoint& x0, double p) {
  if (!(p > 0.0 && p <= 1.0))
    throw ValidationError("TestFunction: exponent must lie in (0, 1]");
  if (x0.dim() < 1 || x0.dim() > 2)
    throw ValidationError("TestFunction: dimension must be 1 or 2");
  TestFunction f;
  f.kind_ = Kind::kDistancePower;
  f.d_ = x0.dim();
  f.holder_p_ = p;
  f.x0_ = x0;
  return f;
}

bool TestFunction::is_zero() const {
  return kind_ == Kind::kTrig && harmonics_.empty();
}

double TestFunction::evaluate(const double* x) const {
  if (kind_ == Kind::kTrig) {
    double v = 0.0;
    for (const auto& hc : harmonics_) {
      double theta = 0.0;
      for (int j = 0; j < d_; ++j) theta += hc.h[j] * x[j];
      theta -= std::round(theta);
      // pair {h,-h}: c e^{i t} + conj = 2 Re c cos t - 2 Im c sin t
      v += 2.0 * (hc.c.real() * std::cos(kTwoPi * theta) -
                  hc.c.imag() * std::sin(kTwoPi * theta));
    }
    return v;
  }
  ensure_quadrature(2);  // mean only
  double s = 0.0;
  for (int j = 0; j < d_; ++j) {
    const double g = nearest_integer_norm(x[j] - x0_[j]);
    s += g * g;
  }
  return std::pow(std::sqrt(s), holder_p_) - mean_;
}

void TestFunction::ensure_quadrature(int box) const {
  if (kind_ != Kind::kDistancePower) return;
  const int cap = d_ == 1 ? 512 : 64;
  if (box > cap)
    throw CapExceeded("TestFunction: quadrature box cap is " + std::to_string(cap));
  if (mean_ready_ && box <= quad_box_) return;

  const int N = d_ == 1 ? 65536 : 1024;
  if (d_ == 1) {
    std::vector<double> fv(static_cast<std::size_t>(N));
    double mean = 0.0;
    for (int j = 0; j < N; ++j) {
      const double x = static_cast<double>(j) / N;
      fv[static_cast<std::size_t>(j)] =
          std::pow(nearest_integer_norm(x - x0_[0]), holder_p_);
      mean += fv[static_cast<std::size_t>(j)];
    }
    mean /= N;
    mean_ = mean;
    mean_ready_ = true;
    for (int h = -(box - 1); h <= box - 1; ++h) {
      std::vector<int> key{h};
      if (quad_coeffs_.count(key)) continue;
      Complex c{0.0, 0.0};
      for (int j = 0; j < N; ++j)
        c += (fv[static_cast<std::size_t>(j)] - mean) *
             unit_phase(-static_cast<double>(h) * j / N);
      quad_coeffs_[key] = c / static_cast<double>(N);
    }
  } else {
    std::vector<double> fv(static_cast<std::size_t>(N) * N);
    double mean = 0.0;
    for (int j1 = 0; j1 < N; ++j1)
      for (int j2 = 0; j2 < N; ++j2) {
        const double g1 = nearest_integer_norm(static_cast<double>(j1) / N - x0_[0]);
        const double g2 = nearest_integer_norm(static_cast<double>(j2) / N - x0_[1]);
        const double v = std::pow(std::sqrt(g1 * g1 + g2 * g2), holder_p_);
        fv[static_cast<std::size_t>(j1) * N + j2] = v;
        mean += v;
      }
    mean /= static_cast<double>(N) * N;
    mean_ = mean;
    mean_ready_ = true;
    // Staged partial transform: inner axis first, then outer.
    const int B = box - 1;
    std::vector<Complex> stage(static_cast<std::size_t>(N) * (2 * B + 1));
    for (int j1 = 0; j1 < N; ++j1)
      for (int h2 = -B; h2 <= B; ++h2) {
        Complex c{0.0, 0.0};
        for (int j2 = 0; j2 < N; ++j2)
          c += (fv[static_cast<std::size_t>(j1) * N + j2] - mean) *
               unit_phase(-static_cast<double>(h2) * j2 / N);
        stage[static_cast<std::size_t>(j1) * (2 * B + 1) + (h2 + B)] = c;
      }
    for (int h1 = -B; h1 <= B; ++h1)
      for (int h2 = -B; h2 <= B; ++h2) {
        std::vector<int> key{h1, h2};
        if (quad_coeffs_.count(key)) continue;
        Complex c{0.0, 0.0};
        for (int j1 = 0; j1 < N; ++j1)
          c += stage[static_cast<std::size_t>(j1) * (2 * B + 1) + (h2 + B)] *
               unit_phase(-static_cast<double>(h1) * j1 / N);
        quad_coeffs_[key] = c / (static_cast<double>(N) * N);
      }
  }
  quad_box_ = std::max(quad_box_, box);
}

Complex TestFunction::fourier(const Eigen::Ref<const IVec>& h) const {
  if (h.size() != d_) throw ValidationError("TestFunction::fourier: dimension mismatch");
  int linf = 0;
  for (int j = 0; j < d_; ++j) linf = std::max(linf, std::abs(h[j]));
  if (linf == 0) return Complex{0.0, 0.0};  // mean zero
  if (kind_ == Kind::kTrig) {
    Harmonic probe;
    probe.h = h;
    probe.c = Complex{1.0, 0.0};
    canonicalize(probe);
    const bool mirrored = (probe.h - h).cwiseAbs().maxCoeff() != 0;
    for (const auto& hc : harmonics_)
      if ((hc.h - probe.h).cwiseAbs().maxCoeff() == 0)
        return mirrored ? std::conj(hc.c) : hc.c;
    return Complex{0.0, 0.0};
  }
  ensure_quadrature(linf + 1);
  std::vector<int> key(h.data(), h.data() + h.size());
  auto it = quad_coeffs_.find(key);
  return it == quad_coeffs_.end() ? Complex{0.0, 0.0} : it->second;
}

std::vector<TestFunction::Harmonic> TestFunction::harmonics_in_box(int H) const {
  std::vector<Harmonic> out;
  if (kind_ == Kind::kTrig) {
    for (const auto& hc : harmonics_)
      if (hc.h.cwiseAbs().maxCoeff() < H) out.push_back(hc);
    return out;
  }
  ensure_quadrature(H);
  for (const auto& [key, c] : quad_coeffs_) {
    int linf = 0;
    int first_nonzero = 0;
    for (int v : key) {
      if (first_nonzero == 0 && v != 0) first_nonzero = v > 0 ? 1 : -1;
      linf = std::max(linf, std::abs(v));
    }
    if (first_nonzero != 1 || linf >= H) continue;
    Harmonic hc;
    hc.h = Eigen::Map<const IVec>(key.data(), static_cast<Eigen::Index>(key.size()));
    hc.c = c;
    out.push_back(std::move(hc));
  }
  return out;
}

int TestFunction::spectral_box(double tail) const {
  if (kind_ == Kind::kTrig) {
    int box = 1;
    for (const auto& hc : harmonics_)
      box = std::max(box, hc.h.cwiseAbs().maxCoeff() + 1);
    return box;
  }
  const int cap = d_ == 1 ? 512 : 64;
  ensure_quadrature(16);
  // Grid-side energy (Parseval) to gauge what the tail still holds.
  const int N = d_ == 1 ? 65536 : 1024;
  double total = 0.0;
  if (d_ == 1) {
    for (int j = 0; j < N; ++j) {
      const double v =
          std::pow(nearest_integer_norm(static_cast<double>(j) / N - x0_[0]),
                   holder_p_) -
          mean_;
      total += v * v;
    }
    total /= N;
  } else {
    for (int j1 = 0; j1 < N; ++j1)
      for (int j2 = 0; j2 < N; ++j2) {
        const double g1 =
            nearest_integer_norm(static_cast<double>(j1) / N - x0_[0]);
        const double g2 =
            nearest_integer_norm(static_cast<double>(j2) / N - x0_[1]);
        const double v = std::pow(std::sqrt(g1 * g1 + g2 * g2), holder_p_) - mean_;
        total += v * v;
      }
    total /= static_cast<double>(N) * N;
  }
  for (int box = 16; box <= cap; box *= 2) {
    ensure_quadrature(box);
    double captured = 0.0;
    for (const auto& hc : harmonics_in_box(box)) captured += 2.0 * std::norm(hc.c);
    if (total - captured < tail) {
      // shrink to the smallest box still meeting the tail
      for (int H = box / 2 + 1; H <= box; ++H) {
        double cap_energy = 0.0;
        for (const auto& hc : harmonics_in_box(H)) cap_energy += 2.0 * std::norm(hc.c);
        if (total - cap_energy < tail) return H;
      }
      return box;
    }
  }
  return cap;
}

double TestFunction::holder_norm_estimate() const {
  if (holder_norm_cache_ >= 0.0) return holder_norm_cache_;
  double best = 0.0;
  if (d_ == 1) {
    const int G = 4096;
    std::vector<double> fv(static_cast<std::size_t>(G));
    for (int j = 0; j < G; ++j) {
      const double x = static_cast<double>(j) / G;
      fv[static_cast<std::size_t>(j)] = evaluate(&x);
    }
    for (int o = 1; o <= G / 2; ++o) {
      const double dist = std::pow(static_cast<double>(o) / G, holder_p_);
      double gap = 0.0;
      for (int j = 0; j < G; ++j) {
        const double diff =
            std::abs(fv[static_cast<std::size_t>(j)] -
                     fv[static_cast<std::size_t>((j + o) % G)]);
        if (diff > gap) gap = diff;
      }
      best = std::max(best, gap / dist);
    }
  } else {
    const int G = 64;
    std::vector<double> fv(static_cast<std::size_t>(G) * G);
    for (int j1 = 0; j1 < G; ++j1)
      for (int j2 = 0; j2 < G; ++j2) {
        const double x[2] = {static_cast<double>(j1) / G,
                             static_cast<double>(j2) / G};
        fv[static_cast<std::size_t>(j1) * G + j2] = evaluate(x);
      }
    for (int o1 = 0; o1 <= G / 2; ++o1)
      for (int o2 = -G / 2; o2 <= G / 2; ++o2) {
        if (o1 == 0 && o2 <= 0) continue;
        const double g1 = nearest_integer_norm(static_cast<double>(o1) / G);
        const double g2 = nearest_integer_norm(static_cast<double>(o2) / G);
        const double dist = std::pow(std::sqrt(g1 * g1 + g2 * g2), holder_p_);
        double gap = 0.0;
        for (int j1 = 0; j1 < G; ++j1)
          for (int j2 = 0; j2 < G; ++j2) {
            const double diff = std::abs(
                fv[static_cast<std::size_t>(j1) * G + j2] -
                fv[static_cast<std::size_t>((j1 + o1) % G) * G +
                   (j2 + o2 + G) % G]);
            if (diff > gap) gap = diff;
          }
        best = std::max(best, gap / dist);
      }
  }
  holder_norm_cache_ = best * 1.05;
  return holder_norm_cache_;
}

double TestFunction::coefficient_energy() const {
  double e = 0.0;
  for (const auto& hc : harmonics_in_box(spectral_box())) e += 2.0 * std::norm(hc.c);
  return e;
}

TestFunction smooth_test_function(const TestFunction& f, int H) {
  const Vec a = jackson_coefficients(H);
  std::vector<TestFunction::Harmonic> scaled;
  for (const auto& hc : f.harmonics_in_box(2 * H - 1)) {
    TestFunction::Harmonic s = hc;
    for (int j = 0; j < f.dim(); ++j) s.c *= a[std::abs(s.h[j])];
    scaled.push_back(std::move(s));
  }
  TestFunction g = TestFunction::trig(f.dim(), std::move(scaled));
  // Convolving against a nonnegative unit-mass kernel stays in the same
  // Holder class; keep the exponent so seminorms are compared like for like.
  g.holder_p_ = f.holder_exponent();
  return g;
}

double lipschitz_fourier_decay_check(const TestFunction& f, int H) {
  if (f.holder_exponent() != 1.0)
    throw ValidationError("lipschitz_fourier_decay_check: needs exponent 1");
  double sum = 0.0;
  for (const auto& hc : f.harmonics_in_box(H))
    sum += 2.0 * std::norm(hc.c) * hc.h.cast<double>().squaredNorm();
  const double L = f.holder_norm_estimate();
  if (L == 0.0) return 0.0;
  return sum * 4.0 * M_PI * M_PI / (static_cast<double>(f.dim()) * L * L);
}

double asymptotic_variance_spectral(const TestFunction& f,
                                    const StepDistribution& nu, int H) {
  if (f.dim() != nu.d())
    throw ValidationError("asymptotic_variance_spectral: dimension mismatch");
  if (f.is_zero()) return 0.0;
  if (H == 0) {
    const double g = spectral_gap(nu, 64);
    const double weight = 2.0 / ((1.0 - g) * (1.0 - g));
    H = f.spectral_box(1e-8 / std::max(weight, 1.0));
  }
  double C = 0.0;
  for (const auto& hc : f.harmonics_in_box(H)) {
    const Complex z = nu_hat(nu, hc.h);
    const double denom = std::norm(Complex{1.0, 0.0} - z);
    if (denom < 1e-24) {
      std::string hs;
      for (int j = 0; j < f.dim(); ++j)
        hs += (j ? "," : "") + std::to_string(hc.h[j]);
      throw ValidationError("asymptotic_variance_spectral: nuhat = 1 at h=(" +
                            hs + ")");
    }
    const double mod2 = std::min(std::norm(z), 1.0);
    C += 2.0 * std::norm(hc.c) * (1.0 - mod2) / denom;
  }
  return std::max(C, 0.0);
}

}  // namespace walklab
