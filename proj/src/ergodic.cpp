#include "walklab/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "walklab/parallel.hpp"
#include "walklab/stats.hpp"
#include "walklab/wasserstein.hpp"

namespace walklab {

namespace {

// Compensated accumulator for long ergodic sums.
struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double value() const { return s; }
};

}  // namespace

// ── simulation ───────────────────────────────────────────────────────────────

WalkSimulator::WalkSimulator(StepDistribution nu) : nu_(std::move(nu)) {
  const int r = nu_.r();
  sel_cdf_.resize(static_cast<std::size_t>(r));
  double acc = 0.0;
  for (int i = 0; i < r; ++i) {
    acc += nu_.selector()[i];
    sel_cdf_[static_cast<std::size_t>(i)] = acc;
  }
  law_cdf_.resize(static_cast<std::size_t>(r));
  law_val_.resize(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    double lacc = 0.0;
    for (const auto& [v, prob] : nu_.steps()[static_cast<std::size_t>(i)].atoms) {
      lacc += prob;
      law_cdf_[static_cast<std::size_t>(i)].push_back(lacc);
      law_val_[static_cast<std::size_t>(i)].push_back(v);
    }
  }
}

Move WalkSimulator::draw(RngStream& rng) const {
  // Two uniforms per step, always, so step streams are position-independent.
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const int i = sample_cdf(sel_cdf_, u1);
  const int j = sample_cdf(law_cdf_[static_cast<std::size_t>(i)], u2);
  return {i, law_val_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]};
}

void WalkSimulator::advance(Vec& x, const Move& mv) const {
  const double n = static_cast<double>(mv.translate_count);
  for (int j = 0; j < nu_.d(); ++j)
    x[j] = reduce_unit(x[j] + n * nu_.alphas()(mv.direction, j));
}

WalkPath::WalkPath(const StepDistribution& nu, long long N, std::uint64_t seed,
                   TorusPoint start)
    : sim_(nu), N_(N), seed_(seed) {
  if (N < 1) throw ValidationError("simulate_walk: N must be >= 1");
  if (start.dim() == 0) start = TorusPoint::zero(nu.d());
  if (start.dim() != nu.d())
    throw ValidationError("simulate_walk: start dimension mismatch");
  start_ = start.coords();
}

void WalkPath::for_each(
    const std::function<void(long long, const Vec&)>& fn) const {
  RngStream rng = RngStream::derive(seed_, 0);
  Vec x = start_;
  for (long long k = 1; k <= N_; ++k) {
    sim_.advance(x, sim_.draw(rng));
    fn(k, x);
  }
}

WalkPath simulate_walk(const StepDistribution& nu, long long N,
                       std::uint64_t seed, TorusPoint start) {
  return WalkPath(nu, N, seed, std::move(start));
}

double ergodic_sum(const WalkPath& path, const TestFunction& f) {
  if (f.dim() != path.dim())
    throw ValidationError("ergodic_sum: dimension mismatch");
  KahanSum sum;
  path.for_each([&](long long, const Vec& x) { sum.add(f.evaluate(x.data())); });
  return sum.value();
}

// ── asymptotic variance by simulation ────────────────────────────────────────

VarianceEstimate monte_carlo_variance(const StepDistribution& nu,
                                      const TestFunction& f, int K_max,
                                      int trials, std::uint64_t seed,
                                      int threads) {
  if (f.dim() != nu.d())
    throw ValidationError("monte_carlo_variance: dimension mismatch");
  if (K_max < 0) throw ValidationError("monte_carlo_variance: K_max must be >= 0");
  if (trials < 2) throw ValidationError("monte_carlo_variance: trials must be >= 2");
  if (f.is_zero()) return {0.0, 0.0, 0, trials};

  // Truncation admissibility: the geometric tail of the spectral bound for
  // the neglected lags must be below 1e-4.  (The box captures all but 1e-8
  // of the coefficient energy, a negligible addition.)
  {
    const int box = f.spectral_box(1e-8);
    double tail = 0.0;
    for (const auto& hc : f.harmonics_in_box(box)) {
      const double a = std::abs(nu_hat(nu, hc.h));
      if (a >= 1.0 - 1e-12)
        throw ValidationError(
            "monte_carlo_variance: walk does not mix on the support of f");
      tail += 2.0 * std::norm(hc.c) * std::pow(a, K_max + 1) / (1.0 - a);
    }
    if (tail >= 1e-4)
      throw ValidationError(
          "monte_carlo_variance: K_max=" + std::to_string(K_max) +
          " leaves a spectral tail of " + std::to_string(tail) +
          " (must be < 1e-4)");
  }

  const int d = nu.d();
  const WalkSimulator sim(nu);
  auto one = [&](int t) {
    RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(t));
    Vec x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.uniform();
    const double fU = f.evaluate(x.data());
    double y = fU * fU;
    for (int k = 0; k < K_max; ++k) {
      sim.advance(x, sim.draw(rng));
      y += 2.0 * fU * f.evaluate(x.data());
    }
    return y;
  };
  const std::vector<double> ys = parallel_map<double>(trials, threads, one);
  VarianceEstimate est;
  est.value = sample_mean(ys);
  est.std_error = sample_sd(ys) / std::sqrt(static_cast<double>(trials));
  est.lag_cap = K_max;
  est.trials = trials;
  return est;
}

// ── distributional experiments ───────────────────────────────────────────────

ExperimentReport clt_experiment(const StepDistribution& nu,
                                const TestFunction& f, long long N, int trials,
                                std::uint64_t seed, int threads) {
  if (f.dim() != nu.d())
    throw ValidationError("clt_experiment: dimension mismatch");
  if (N < 1) throw ValidationError("clt_experiment: N must be >= 1");
  if (trials < 1) throw ValidationError("clt_experiment: trials must be >= 1");

  ExperimentReport rep;
  rep.seed = seed;
  rep.N = N;
  rep.trials = trials;
  rep.variance = f.is_zero() ? 0.0 : asymptotic_variance_spectral(f, nu);
  rep.degenerate = f.is_zero() || rep.variance <= 0.0;

  const int d = nu.d();
  const WalkSimulator sim(nu);
  const double root_n = std::sqrt(static_cast<double>(N));
  auto one = [&](int t) {
    RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(t));
    Vec x = Vec::Zero(d);
    KahanSum sum;
    for (long long k = 0; k < N; ++k) {
      sim.advance(x, sim.draw(rng));
      sum.add(f.evaluate(x.data()));
    }
    return sum.value() / root_n;
  };
  rep.normalized_sums = parallel_map<double>(trials, threads, one);

  for (double v : rep.normalized_sums)
    rep.sup_abs = std::max(rep.sup_abs, std::abs(v));
  if (!rep.degenerate) {
    const double sigma = std::sqrt(rep.variance);
    rep.ks_distance = ks_statistic(
        rep.normalized_sums, [sigma](double x) { return normal_cdf(x / sigma); });
  }
  return rep;
}

ExperimentReport lil_experiment(const StepDistribution& nu,
                                const TestFunction& f, long long N_max,
                                int trials, std::uint64_t seed, int threads) {
  if (f.dim() != nu.d())
    throw ValidationError("lil_experiment: dimension mismatch");
  if (N_max < 100) throw ValidationError("lil_experiment: N_max must be >= 100");
  if (trials < 1) throw ValidationError("lil_experiment: trials must be >= 1");

  ExperimentReport rep;
  rep.seed = seed;
  rep.N = N_max;
  rep.trials = trials;
  rep.variance = f.is_zero() ? 0.0 : asymptotic_variance_spectral(f, nu);
  rep.degenerate = f.is_zero() || rep.variance <= 0.0;

  // Geometric recording schedule: ratio 1.25 starting where log log n > 0.
  for (long long n = 16; n <= N_max;
       n = std::max(n + 1, static_cast<long long>(std::llround(
                               static_cast<double>(n) * 1.25))))
    rep.checkpoints.push_back(n);
  if (rep.checkpoints.empty() || rep.checkpoints.back() != N_max)
    rep.checkpoints.push_back(N_max);

  const long long window_lo = std::max<long long>(16, N_max / 10);
  const int d = nu.d();
  const WalkSimulator sim(nu);

  struct TrialOut {
    double sup = 0.0;
    std::vector<double> at_checkpoints;
  };
  auto one = [&](int t) {
    RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(t));
    Vec x = Vec::Zero(d);
    KahanSum sum;
    TrialOut out;
    out.at_checkpoints.reserve(rep.checkpoints.size());
    std::size_t next_cp = 0;
    for (long long n = 1; n <= N_max; ++n) {
      sim.advance(x, sim.draw(rng));
      sum.add(f.evaluate(x.data()));
      double ratio = 0.0;
      const bool at_cp = next_cp < rep.checkpoints.size() &&
                         rep.checkpoints[next_cp] == n;
      if (n >= 16 && (at_cp || n >= window_lo)) {
        const double denom = std::sqrt(2.0 * static_cast<double>(n) *
                                       std::log(std::log(static_cast<double>(n))));
        ratio = std::abs(sum.value()) / denom;
      }
      if (at_cp) {
        out.at_checkpoints.push_back(ratio);
        ++next_cp;
      }
      if (n >= window_lo) out.sup = std::max(out.sup, ratio);
    }
    return out;
  };
  auto outs = parallel_map<TrialOut>(trials, threads, one);
  for (auto& o : outs) {
    rep.lil_ratios.push_back(o.sup);
    rep.sup_abs = std::max(rep.sup_abs, o.sup);
    rep.checkpoint_ratios.push_back(std::move(o.at_checkpoints));
  }
  return rep;
}

// ── block decomposition and coupling ─────────────────────────────────────────

namespace {

long long floor_root(long long i, int power) {
  // Exact integer floor of i^{1/power} (power 2 or 4).
  auto ipow = [power](long long s) {
    long long v = 1;
    for (int j = 0; j < power; ++j) v *= s;
    return v;
  };
  long long s = static_cast<long long>(
      std::floor(std::pow(static_cast<double>(i), 1.0 / power)));
  while (ipow(s + 1) <= i) ++s;
  while (s > 0 && ipow(s) > i) --s;
  return std::max<long long>(1, s);
}

}  // namespace

BlockDecomposition block_decomposition(long long N) {
  if (N < 2) throw ValidationError("block_decomposition: N must be >= 2");
  BlockDecomposition out;
  out.N = N;
  long long pos = 1;
  for (int i = 1; pos <= N; ++i) {
    for (int half = 0; half < 2 && pos <= N; ++half) {
      const bool is_h = half == 0;
      const long long size = is_h ? floor_root(i, 4) : floor_root(i, 2);
      Block b;
      b.is_h = is_h;
      b.index = i;
      b.start = pos;
      b.end = std::min(N, pos + size - 1);
      pos = b.end + 1;
      out.blocks.push_back(b);
      out.last_pair_index = i;
    }
  }
  return out;
}

BlockCouplingResult coupled_block_sums(const StepDistribution& nu,
                                       const TestFunction& f, long long N,
                                       std::uint64_t seed,
                                       const BlockCouplingOptions& opt) {
  if (nu.d() != 1)
    throw ValidationError("coupled_block_sums: dimension 1 required");
  if (f.dim() != 1)
    throw ValidationError("coupled_block_sums: dimension 1 required");
  if (N < 2 || N > 100000)
    throw ValidationError("coupled_block_sums: N must lie in [2, 1e5]");
  if (!(opt.p > 0.0 && opt.p <= 1.0))
    throw ValidationError("coupled_block_sums: exponent must lie in (0, 1]");

  const BlockDecomposition dec = block_decomposition(N);

  struct Plan {
    CircleCoupling coupling;
    double delta = 0.0;   // optimal transport cost to uniform
    double mix_w = 0.0;   // weight of the independent branch (inflate mode)
    std::vector<double> atom_cdf;
    std::vector<double> atom_pos;
  };
  std::map<long long, Plan> plans;
  auto plan_for = [&](long long h) -> const Plan& {
    auto it = plans.find(h);
    if (it != plans.end()) return it->second;
    const DiscreteMeasure m = convolution_power_measure(nu, h, opt.conv_cap);
    Plan plan;
    plan.coupling = CircleCoupling::versus_uniform(m);
    plan.delta = plan.coupling.cost();
    if (opt.inflate_to_contract) {
      // Mixing with an independent coupling of cost c_ind raises the
      // expected cost from delta to 2*delta when w = delta/(c_ind - delta).
      const double c_ind = std::pow(0.5, opt.p) / (opt.p + 1.0);
      plan.mix_w = (c_ind > 2.0 * plan.delta)
                       ? plan.delta / (c_ind - plan.delta)
                       : 1.0;
      double acc = 0.0;
      for (int i = 0; i < m.size(); ++i) {
        acc += m.mass[i];
        plan.atom_cdf.push_back(acc);
        plan.atom_pos.push_back(m.points(i, 0));
      }
    }
    return plans.emplace(h, std::move(plan)).first->second;
  };

  const WalkSimulator sim(nu);
  RngStream rng = RngStream::derive(seed, 0);
  BlockCouplingResult res;
  Vec real_pos(1), star_pos(1);
  real_pos[0] = 0.0;

  for (std::size_t b = 0; b + 1 < dec.blocks.size(); b += 2) {
    const Block& H = dec.blocks[b];
    const Block& J = dec.blocks[b + 1];
    // Only pairs untouched by the truncation at N contribute.
    if (H.size() != floor_root(H.index, 4)) break;
    if (J.size() != floor_root(J.index, 2)) break;

    const Plan& plan = plan_for(H.size());
    const double V = rng.uniform();
    double T;
    if (opt.inflate_to_contract && rng.uniform() < plan.mix_w) {
      const double u = rng.uniform();
      const auto it = std::lower_bound(plan.atom_cdf.begin(),
                                       plan.atom_cdf.end(), u);
      const std::size_t idx =
          it == plan.atom_cdf.end()
              ? plan.atom_cdf.size() - 1
              : static_cast<std::size_t>(it - plan.atom_cdf.begin());
      T = plan.atom_pos[idx];
    } else {
      T = plan.coupling.transport(V);
    }

    const double gap = wrapped_gap(T, V);
    res.perturbation_errors.push_back(
        opt.p == 1.0 ? gap : std::pow(gap, opt.p));
    res.delta_exact.push_back(plan.delta);
    res.h_sizes.push_back(H.size());
    res.j_sizes.push_back(J.size());

    star_pos[0] = reduce_unit(real_pos[0] + V);
    real_pos[0] = reduce_unit(real_pos[0] + T);

    double y = 0.0, y_star = 0.0;
    for (long long k = J.start; k <= J.end; ++k) {
      const Move mv = sim.draw(rng);
      sim.advance(real_pos, mv);
      sim.advance(star_pos, mv);
      y += f.evaluate(real_pos.data());
      y_star += f.evaluate(star_pos.data());
      res.w_star_samples.push_back(star_pos[0]);
    }
    res.Y.push_back(y);
    res.Y_star.push_back(y_star);
  }
  return res;
}

// ── variance growth ──────────────────────────────────────────────────────────

VarianceGrowthFit variance_growth_check(const StepDistribution& nu,
                                        const TestFunction& f,
                                        const std::vector<long long>& Ns,
                                        int trials, std::uint64_t seed,
                                        int threads) {
  if (f.dim() != nu.d())
    throw ValidationError("variance_growth_check: dimension mismatch");
  if (trials < 1000)
    throw ValidationError("variance_growth_check: trials must be >= 1000");
  if (Ns.empty()) throw ValidationError("variance_growth_check: no N values");
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    if (Ns[i] < 1) throw ValidationError("variance_growth_check: N must be >= 1");
    if (i > 0 && Ns[i] <= Ns[i - 1])
      throw ValidationError("variance_growth_check: Ns must be strictly increasing");
  }

  VarianceGrowthFit fit;
  fit.Ns = Ns;
  fit.c_spectral = f.is_zero() ? 0.0 : asymptotic_variance_spectral(f, nu);

  const int d = nu.d();
  const WalkSimulator sim(nu);
  for (std::size_t ni = 0; ni < Ns.size(); ++ni) {
    const long long N = Ns[ni];
    auto one = [&](int t) {
      RngStream rng = RngStream::derive(
          seed, static_cast<std::uint64_t>(ni) *
                        static_cast<std::uint64_t>(trials) +
                    static_cast<std::uint64_t>(t));
      Vec x(d);
      for (int j = 0; j < d; ++j) x[j] = rng.uniform();
      KahanSum sum;
      for (long long k = 0; k < N; ++k) {
        sim.advance(x, sim.draw(rng));
        sum.add(f.evaluate(x.data()));
      }
      return sum.value() * sum.value();
    };
    const std::vector<double> sq = parallel_map<double>(trials, threads, one);
    const double scale = static_cast<double>(N);
    fit.estimate_over_N.push_back(sample_mean(sq) / scale);
    fit.std_error_over_N.push_back(
        sample_sd(sq) / (std::sqrt(static_cast<double>(trials)) * scale));
    fit.deviation.push_back(fit.estimate_over_N.back() - fit.c_spectral);
  }
  return fit;
}

}  // namespace walklab
