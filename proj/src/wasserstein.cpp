#include "walklab/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <unordered_map>

#include "walklab/parallel.hpp"

namespace walklab {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;
// Numerator of the sharp smoothing constant: 3 pi^2 log 2.
const double kSharpNum = 3.0 * kPi * kPi * std::log(2.0);
}  // namespace

double unit_ball_volume(int d) {
  if (d < 1) throw ValidationError("unit_ball_volume: dimension must be >= 1");
  // omega_d = omega_{d-2} * 2 pi / d with omega_0 = 1, omega_1 = 2.  The
  // recurrence is exact at d = 1 (and d = 2 up to the rounding of pi), where
  // the lower bound's equality cases live; tgamma would lose the last ulp.
  double v = d % 2 == 0 ? 1.0 : 2.0;
  for (int j = d % 2 == 0 ? 2 : 3; j <= d; j += 2) v *= 2.0 * kPi / j;
  return v;
}

// ── circle machinery ─────────────────────────────────────────────────────────

namespace {

struct SortedAtoms {
  std::vector<double> x;    // ascending, deduplicated
  std::vector<double> cum;  // cumulative mass, back() == 1
};

SortedAtoms sorted_atoms_1d(const DiscreteMeasure& a) {
  a.validate();
  if (a.dim() != 1)
    throw ValidationError("circle transport requires dimension 1");
  std::vector<std::pair<double, double>> v;
  v.reserve(static_cast<std::size_t>(a.size()));
  for (int i = 0; i < a.size(); ++i)
    v.emplace_back(reduce_unit(a.points(i, 0)), a.mass[i]);
  std::sort(v.begin(), v.end());
  SortedAtoms out;
  for (const auto& [x, m] : v) {
    if (!out.x.empty() && x == out.x.back()) {
      out.cum.back() += m;
    } else {
      out.x.push_back(x);
      out.cum.push_back((out.cum.empty() ? 0.0 : out.cum.back()) + m);
    }
  }
  return out;
}

// A maximal interval on which F(x) = CDF_a(x) - x is affine with slope -1.
struct LinSeg {
  double v0, v1;  // F at the left and right ends (v1 = v0 - len)
  double len;
};

std::vector<LinSeg> uniform_diff_segments(const SortedAtoms& s) {
  const std::size_t n = s.x.size();
  std::vector<LinSeg> segs;
  segs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double next = (i + 1 < n) ? s.x[i + 1] : s.x[0] + 1.0;
    const double len = next - s.x[i];
    if (len <= 0.0) continue;
    segs.push_back({s.cum[i] - s.x[i], s.cum[i] - next, len});
  }
  return segs;
}

// Median of the value distribution of a piecewise-linear slope -1 function:
// each segment spreads its length uniformly over [v1, v0].  Sweep the
// activation/deactivation events; the mass-below function has slope equal to
// the number of active segments.
double linear_segment_median(const std::vector<LinSeg>& segs) {
  struct Event {
    double t;
    int delta;  // +1 activate, -1 deactivate
  };
  std::vector<Event> ev;
  ev.reserve(2 * segs.size());
  double total = 0.0;
  for (const auto& g : segs) {
    ev.push_back({std::min(g.v0, g.v1), +1});
    ev.push_back({std::max(g.v0, g.v1), -1});
    total += g.len;
  }
  std::sort(ev.begin(), ev.end(),
            [](const Event& a, const Event& b) { return a.t < b.t; });
  const double target = 0.5 * total;
  double mass = 0.0;
  int active = 0;
  double t = ev.front().t;
  for (const auto& e : ev) {
    const double m2 = mass + active * (e.t - t);
    if (m2 >= target && active > 0)
      return t + (target - mass) / active;
    mass = m2;
    t = e.t;
    active += e.delta;
  }
  return t;  // total mass is 1, so the crossing is found before this
}

double linear_segment_integral(const std::vector<LinSeg>& segs, double c) {
  double total = 0.0;
  for (const auto& g : segs) {
    const double u0 = g.v0 - c;
    const double u1 = g.v1 - c;
    if ((u0 >= 0.0) == (u1 >= 0.0) || std::abs(u1 - u0) < 1e-300) {
      total += g.len * 0.5 * std::abs(u0 + u1);
    } else {
      total += g.len * (u0 * u0 + u1 * u1) / (2.0 * std::abs(u1 - u0));
    }
  }
  return total;
}

struct CirclePlan {
  double shift;
  double cost;
};

CirclePlan circle_plan_vs_uniform(const SortedAtoms& s) {
  const auto segs = uniform_diff_segments(s);
  const double c = linear_segment_median(segs);
  return {c, linear_segment_integral(segs, c)};
}

}  // namespace

double exact_w1_circle_uniform(const DiscreteMeasure& a) {
  SortedAtoms s = sorted_atoms_1d(a);
  const double total = s.cum.back();
  for (double& c : s.cum) c /= total;
  return circle_plan_vs_uniform(s).cost;
}

double exact_w1_circle(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  a.validate();
  b.validate();
  if (a.dim() != 1 || b.dim() != 1)
    throw ValidationError("exact_w1_circle requires dimension 1");
  // Signed jump events of F = CDF_a - CDF_b.
  std::vector<std::pair<double, double>> ev;
  ev.reserve(static_cast<std::size_t>(a.size() + b.size()));
  for (int i = 0; i < a.size(); ++i)
    ev.emplace_back(reduce_unit(a.points(i, 0)), a.mass[i]);
  for (int i = 0; i < b.size(); ++i)
    ev.emplace_back(reduce_unit(b.points(i, 0)), -b.mass[i]);
  std::sort(ev.begin(), ev.end());

  struct Piece {
    double v, len;
  };
  std::vector<Piece> pieces;
  double run = 0.0;
  for (std::size_t i = 0; i < ev.size();) {
    std::size_t j = i;
    while (j < ev.size() && ev[j].first == ev[i].first) run += ev[j++].second;
    const double next = (j < ev.size()) ? ev[j].first : ev[0].first + 1.0;
    const double len = next - ev[i].first;
    if (len > 0.0) pieces.push_back({run, len});
    i = j;
  }
  // length-weighted median of the piece values
  std::vector<std::size_t> order(pieces.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return pieces[x].v < pieces[y].v;
  });
  double total = 0.0;
  for (const auto& p : pieces) total += p.len;
  double acc = 0.0;
  double median = pieces[order.back()].v;
  for (std::size_t idx : order) {
    acc += pieces[idx].len;
    if (acc >= 0.5 * total) {
      median = pieces[idx].v;
      break;
    }
  }
  double w = 0.0;
  for (const auto& p : pieces) w += p.len * std::abs(p.v - median);
  return w;
}

CircleCoupling CircleCoupling::versus_uniform(const DiscreteMeasure& a) {
  SortedAtoms s = sorted_atoms_1d(a);
  const double total = s.cum.back();
  for (double& c : s.cum) c /= total;
  const CirclePlan plan = circle_plan_vs_uniform(s);
  CircleCoupling out;
  out.atoms_ = std::move(s.x);
  out.cum_ = std::move(s.cum);
  out.shift_ = plan.shift;
  out.cost_ = plan.cost;
  return out;
}

double CircleCoupling::transport(double v) const {
  double q = v + shift_;
  q -= std::floor(q);
  auto it = std::lower_bound(cum_.begin(), cum_.end(), q);
  if (it == cum_.end()) --it;  // q numerically above cum.back() == 1
  return atoms_[static_cast<std::size_t>(it - cum_.begin())];
}

// ── exact finite transport: successive shortest paths ────────────────────────

double exact_wp_grid(const DiscreteMeasure& a, const DiscreteMeasure& b,
                     double p, int atom_cap) {
  a.validate();
  b.validate();
  if (a.dim() != b.dim())
    throw ValidationError("exact_wp_grid: dimension mismatch");
  if (!(p > 0.0 && p <= 1.0))
    throw ValidationError("exact_wp_grid: exponent must lie in (0, 1]");
  const int n = a.size();
  const int m = b.size();
  if (n + m > atom_cap)
    throw CapExceeded("exact_wp_grid: combined support of " +
                      std::to_string(n + m) + " atoms exceeds cap " +
                      std::to_string(atom_cap));

  auto cost = [&](int i, int j) {
    const double dd = torus_distance(a.points.row(i).transpose(),
                                     b.points.row(j).transpose());
    return p == 1.0 ? dd : std::pow(dd, p);
  };

  const int V = n + m;
  std::vector<double> supply(static_cast<std::size_t>(n));
  std::vector<double> demand(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) supply[static_cast<std::size_t>(i)] = a.mass[i];
  for (int j = 0; j < m; ++j) demand[static_cast<std::size_t>(j)] = b.mass[j];
  std::vector<double> pi(static_cast<std::size_t>(V), 0.0);
  // flow stored per sink: map source -> amount (only positive entries)
  std::vector<std::unordered_map<int, double>> flow(
      static_cast<std::size_t>(m));

  double remaining = 0.0;
  for (double s : supply) remaining += s;

  const int max_rounds = 16 * V + 256;
  int rounds = 0;
  std::vector<double> dist(static_cast<std::size_t>(V));
  std::vector<int> parent(static_cast<std::size_t>(V));
  std::vector<char> done(static_cast<std::size_t>(V));

  while (remaining > 1e-14) {
    if (++rounds > max_rounds)
      throw InvariantViolation("exact_wp_grid: flow failed to converge");
    const double INF = std::numeric_limits<double>::infinity();
    std::fill(dist.begin(), dist.end(), INF);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), char{0});
    for (int i = 0; i < n; ++i)
      if (supply[static_cast<std::size_t>(i)] > 0.0) dist[static_cast<std::size_t>(i)] = 0.0;

    int target = -1;
    for (int iter = 0; iter < V; ++iter) {
      int u = -1;
      double best = INF;
      for (int v = 0; v < V; ++v)
        if (!done[static_cast<std::size_t>(v)] && dist[static_cast<std::size_t>(v)] < best) {
          best = dist[static_cast<std::size_t>(v)];
          u = v;
        }
      if (u < 0) break;
      done[static_cast<std::size_t>(u)] = 1;
      if (u >= n && demand[static_cast<std::size_t>(u - n)] > 0.0) {
        target = u;
        break;
      }
      if (u < n) {
        for (int j = 0; j < m; ++j) {
          const double rc = cost(u, j) + pi[static_cast<std::size_t>(u)] -
                            pi[static_cast<std::size_t>(n + j)];
          if (rc < -1e-9)
            throw InvariantViolation("exact_wp_grid: negative reduced cost");
          const double cand = dist[static_cast<std::size_t>(u)] + std::max(rc, 0.0);
          if (cand < dist[static_cast<std::size_t>(n + j)]) {
            dist[static_cast<std::size_t>(n + j)] = cand;
            parent[static_cast<std::size_t>(n + j)] = u;
          }
        }
      } else {
        const int j = u - n;
        for (const auto& [i, f] : flow[static_cast<std::size_t>(j)]) {
          if (f <= 0.0) continue;
          const double rc = -cost(i, j) + pi[static_cast<std::size_t>(u)] -
                            pi[static_cast<std::size_t>(i)];
          if (rc < -1e-9)
            throw InvariantViolation("exact_wp_grid: negative reduced cost");
          const double cand = dist[static_cast<std::size_t>(u)] + std::max(rc, 0.0);
          if (cand < dist[static_cast<std::size_t>(i)]) {
            dist[static_cast<std::size_t>(i)] = cand;
            parent[static_cast<std::size_t>(i)] = u;
          }
        }
      }
    }
    if (target < 0)
      throw InvariantViolation("exact_wp_grid: no augmenting path");

    // bottleneck along the path (interior residual arcs carry flow caps)
    double delta = demand[static_cast<std::size_t>(target - n)];
    int v = target;
    int source = -1;
    while (parent[static_cast<std::size_t>(v)] >= 0) {
      const int u = parent[static_cast<std::size_t>(v)];
      if (v < n) {
        // residual arc sink u -> source v caps at the existing flow
        delta = std::min(delta, flow[static_cast<std::size_t>(u - n)].at(v));
      }
      v = u;
    }
    source = v;
    delta = std::min(delta, supply[static_cast<std::size_t>(source)]);

    v = target;
    while (parent[static_cast<std::size_t>(v)] >= 0) {
      const int u = parent[static_cast<std::size_t>(v)];
      if (v >= n)
        flow[static_cast<std::size_t>(v - n)][u] += delta;
      else
        flow[static_cast<std::size_t>(u - n)][v] -= delta;
      v = u;
    }
    supply[static_cast<std::size_t>(source)] -= delta;
    demand[static_cast<std::size_t>(target - n)] -= delta;
    remaining -= delta;

    const double reach = dist[static_cast<std::size_t>(target)];
    for (int w = 0; w < V; ++w)
      pi[static_cast<std::size_t>(w)] +=
          std::min(dist[static_cast<std::size_t>(w)], reach);
  }

  // Optimality certificate: all reduced costs nonnegative, flow arcs tight.
  double total = 0.0;
  for (int j = 0; j < m; ++j)
    for (const auto& [i, f] : flow[static_cast<std::size_t>(j)]) {
      if (f < -1e-12)
        throw InvariantViolation("exact_wp_grid: negative flow");
      if (f > 0.0) total += f * cost(i, j);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double rc = cost(i, j) + pi[static_cast<std::size_t>(i)] -
                        pi[static_cast<std::size_t>(n + j)];
      if (rc < -1e-9)
        throw InvariantViolation("exact_wp_grid: dual feasibility violated");
    }
  return total;
}

// ── smoothing upper bounds ───────────────────────────────────────────────────

namespace {

double smoothing_term(int d, int H, bool sharp) {
  if (sharp) return kSharpNum * d / (8.0 * H + 4.0 / H);
  return 6.0 * d / H;
}

int needed_box(int H, bool sharp) { return sharp ? 2 * H - 1 : H; }

double bound_from_prefix(const std::vector<double>& prefix, int d, int H,
                         bool sharp) {
  const int box = needed_box(H, sharp);
  const double S = prefix[static_cast<std::size_t>(box - 1)];
  return smoothing_term(d, H, sharp) +
         std::sqrt(static_cast<double>(d)) * std::sqrt(S) / (2.0 * kPi);
}

// prefix[m] = sum of shell discrepancies over shells 1..m (prefix[0] = 0)
std::vector<double> discrepancy_prefix(const std::vector<double>& shells) {
  std::vector<double> prefix(shells.size(), 0.0);
  for (std::size_t m = 1; m < shells.size(); ++m)
    prefix[m] = prefix[m - 1] + shells[m];
  return prefix;
}

}  // namespace

double berry_esseen_upper(const SpectralCache& nu1, const SpectralCache& nu2,
                          int H, bool sharp) {
  if (nu1.d() != nu2.d())
    throw ValidationError("berry_esseen_upper: dimension mismatch");
  if (H < 1) throw ValidationError("berry_esseen_upper: H must be >= 1");
  const int box = needed_box(H, sharp);
  if (box > std::min(nu1.H(), nu2.H()))
    throw ValidationError("berry_esseen_upper: caches do not cover the box");
  const auto shells = SpectralCache::shell_discrepancy(nu1, nu2, 1, 1);
  return bound_from_prefix(discrepancy_prefix(shells), nu1.d(), H, sharp);
}

UpperScan optimize_upper(const SpectralCache& walk, long long k, double p,
                         bool sharp) {
  if (!(p > 0.0 && p <= 1.0))
    throw ValidationError("optimize_upper: exponent must lie in (0, 1]");
  const int d = walk.d();
  const SpectralCache uniform = SpectralCache::uniform_measure(d, walk.H());
  const auto shells = SpectralCache::shell_discrepancy(walk, uniform, k, 1);
  const auto prefix = discrepancy_prefix(shells);

  const int H_hi = sharp ? (walk.H() + 1) / 2 : walk.H();
  if (H_hi < 1) throw ValidationError("optimize_upper: box too small");
  UpperScan scan;
  scan.w1 = std::numeric_limits<double>::infinity();
  for (int H = 1; H <= H_hi; ++H) {
    const double v = bound_from_prefix(prefix, d, H, sharp);
    if (v < scan.w1) {
      scan.w1 = v;
      scan.H = H;
    }
  }
  scan.value = p == 1.0 ? scan.w1 : std::pow(scan.w1, p);
  const double trivial = std::pow(0.5 * std::sqrt(static_cast<double>(d)), p);
  if (trivial < scan.value) {
    scan.value = trivial;
    scan.H = 0;
  }
  return scan;
}

UpperScan optimize_upper(const StepDistribution& nu, long long k, int H_max,
                         double p, bool sharp) {
  if (H_max < 2) throw ValidationError("optimize_upper: H_max must be >= 2");
  const int box = sharp ? 2 * H_max - 1 : H_max;
  return optimize_upper(SpectralCache::build(nu, box), k, p, sharp);
}

// ── R-net lower bounds ───────────────────────────────────────────────────────

RnetBound rnet_lower_bound(const PointSet& A, double R, double p) {
  if (!(p > 0.0 && p <= 1.0))
    throw ValidationError("rnet_lower_bound: exponent must lie in (0, 1]");
  if (R < 0.0) throw ValidationError("rnet_lower_bound: negative radius");
  const int d = A.dim();
  const double theta = std::clamp(A.covered_mass(), 0.0, 1.0);
  const double volume_term =
      static_cast<double>(d) / (d + p) *
      std::pow(unit_ball_volume(d) * static_cast<double>(A.size()),
               -p / static_cast<double>(d));
  const double value = volume_term - std::pow(R, p) * (1.0 - theta);
  return {value, value <= 0.0};
}

namespace {

// Largest wrapped distance from any grid point to the atom list (d = 1),
// via one sweep over the sorted positions.
double covering_radius_grid_1d(const std::vector<double>& sorted_xs, int G) {
  double worst = 0.0;
  for (int g = 0; g < G; ++g) {
    const double x = static_cast<double>(g) / G;
    auto it = std::lower_bound(sorted_xs.begin(), sorted_xs.end(), x);
    double best = 1.0;
    if (it != sorted_xs.end()) best = std::min(best, *it - x);
    if (it != sorted_xs.begin()) best = std::min(best, x - *(it - 1));
    best = std::min(best, sorted_xs.front() + 1.0 - x);  // wrap ahead
    best = std::min(best, x + 1.0 - sorted_xs.back());   // wrap behind
    worst = std::max(worst, best);
  }
  return worst + 0.5 / G;
}

double covering_radius_grid_2d(const Eigen::MatrixXd& pts, int G) {
  std::vector<std::vector<int>> cells(static_cast<std::size_t>(G) * G);
  auto cell_of = [&](double x) {
    int c = static_cast<int>(x * G);
    if (c >= G) c = G - 1;
    if (c < 0) c = 0;
    return c;
  };
  for (int i = 0; i < pts.rows(); ++i)
    cells[static_cast<std::size_t>(cell_of(pts(i, 0))) * G + cell_of(pts(i, 1))]
        .push_back(i);

  double worst = 0.0;
  Vec q(2);
  for (int gx = 0; gx < G; ++gx)
    for (int gy = 0; gy < G; ++gy) {
      q[0] = static_cast<double>(gx) / G;
      q[1] = static_cast<double>(gy) / G;
      double best = std::numeric_limits<double>::infinity();
      for (int ring = 0; ring <= G / 2; ++ring) {
        // A cell at Chebyshev ring `ring` holds no point closer than
        // (ring - 1)/G, so stop once that exceeds the best found.
        if (best < static_cast<double>(ring - 1) / G) break;
        for (int dx = -ring; dx <= ring; ++dx)
          for (int dy = -ring; dy <= ring; ++dy) {
            if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
            const int cx = ((gx + dx) % G + G) % G;
            const int cy = ((gy + dy) % G + G) % G;
            for (int idx : cells[static_cast<std::size_t>(cx) * G + cy]) {
              const double dd = torus_distance(pts.row(idx).transpose(), q);
              best = std::min(best, dd);
            }
          }
      }
      worst = std::max(worst, best);
    }
  return worst + 0.5 * std::sqrt(2.0) / G;
}

}  // namespace

SupportNet walk_support_net(const StepDistribution& nu, long long k,
                            double lambda, std::size_t enum_cap) {
  if (k < 0) throw ValidationError("walk_support_net: k must be >= 0");
  if (!(lambda > 0.0)) throw ValidationError("walk_support_net: lambda must be positive");
  const int r = nu.r();
  const int d = nu.d();
  if (d > 2)
    throw ValidationError("walk_support_net: cover measurement supports d <= 2");

  const double w = lambda * std::sqrt(static_cast<double>(k));
  std::vector<long long> lo(static_cast<std::size_t>(r)),
      hi(static_cast<std::size_t>(r));
  double count = 1.0;
  for (int i = 0; i < r; ++i) {
    const double center = nu.drift(i) * static_cast<double>(k);
    lo[static_cast<std::size_t>(i)] = static_cast<long long>(std::ceil(center - w));
    hi[static_cast<std::size_t>(i)] = static_cast<long long>(std::floor(center + w));
    if (lo[static_cast<std::size_t>(i)] > hi[static_cast<std::size_t>(i)])
      throw ValidationError("walk_support_net: empty translate box");
    count *= static_cast<double>(hi[static_cast<std::size_t>(i)] -
                                 lo[static_cast<std::size_t>(i)] + 1);
    if (count > static_cast<double>(enum_cap))
      throw CapExceeded("walk_support_net: net box exceeds cap of " +
                        std::to_string(enum_cap) + " atoms");
  }
  const std::size_t total = static_cast<std::size_t>(count);

  Eigen::MatrixXd pts(static_cast<Eigen::Index>(total), d);
  std::vector<long long> n(lo.begin(), lo.end());
  for (std::size_t row = 0; row < total; ++row) {
    for (int j = 0; j < d; ++j) {
      double x = 0.0;
      for (int i = 0; i < r; ++i)
        x += static_cast<double>(n[static_cast<std::size_t>(i)]) *
             nu.alphas()(i, j);
      pts(static_cast<Eigen::Index>(row), j) = reduce_unit(x);
    }
    for (int i = r - 1; i >= 0; --i) {
      if (++n[static_cast<std::size_t>(i)] <= hi[static_cast<std::size_t>(i)]) break;
      n[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)];
    }
  }

  double R;
  if (d == 1) {
    std::vector<double> xs(static_cast<std::size_t>(pts.rows()));
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
      xs[static_cast<std::size_t>(i)] = pts(i, 0);
    std::sort(xs.begin(), xs.end());
    R = covering_radius_grid_1d(xs, 1 << 14);
  } else {
    R = covering_radius_grid_2d(pts, 1 << 9);
  }

  const double mass_lb = std::clamp(
      1.0 - static_cast<double>(r) * nu.moment_bound() / (lambda * lambda),
      0.0, 1.0);
  Vec masses = Vec::Constant(static_cast<Eigen::Index>(total),
                             mass_lb / static_cast<double>(total));
  SupportNet out{PointSet(std::move(pts), std::move(masses)), R, mass_lb};
  return out;
}

// ── exact convolution powers ─────────────────────────────────────────────────

namespace {

std::vector<double> dense_convolve(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  std::vector<double> c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    const double ai = a[i];
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += ai * b[j];
  }
  return c;
}

DiscreteMeasure measure_from_rows(Eigen::MatrixXd pts, Vec mass) {
  const double total = mass.sum();
  if (!(total > 0.0))
    throw InvariantViolation("convolution power lost all mass");
  mass /= total;
  DiscreteMeasure m{std::move(pts), std::move(mass)};
  m.validate();
  return m;
}

DiscreteMeasure rank1_power(const StepDistribution& nu, long long k,
                            std::size_t atom_cap) {
  const IntegerLaw& law = nu.steps()[0];
  const int d = nu.d();
  auto atoms = law.atoms;
  std::sort(atoms.begin(), atoms.end());
  const long long vmin = atoms.front().first;
  const long long vmax = atoms.back().first;

  if (atoms.size() == 1) {
    Eigen::MatrixXd pts(1, d);
    for (int j = 0; j < d; ++j)
      pts(0, j) = reduce_unit(static_cast<double>(k) *
                              static_cast<double>(vmin) * nu.alphas()(0, j));
    return measure_from_rows(std::move(pts), Vec::Ones(1));
  }

  const long long D = maximal_span(law);
  const long long L = (vmax - vmin) / D;
  const double final_len = static_cast<double>(k) * static_cast<double>(L) + 1.0;
  if (final_len > static_cast<double>(atom_cap))
    throw CapExceeded("convolution_power_measure: " +
                      std::to_string(static_cast<long long>(final_len)) +
                      " atoms exceeds cap " + std::to_string(atom_cap));

  std::vector<double> base(static_cast<std::size_t>(L) + 1, 0.0);
  for (auto [v, prob] : atoms) base[static_cast<std::size_t>((v - vmin) / D)] = prob;

  std::vector<double> acc{1.0};
  std::vector<double> sq = base;
  long long e = k;
  while (e > 0) {
    if (e & 1) acc = dense_convolve(acc, sq);
    e >>= 1;
    if (e > 0) sq = dense_convolve(sq, sq);
  }

  std::size_t nz = 0;
  for (double v : acc) nz += v > 0.0;
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(nz), d);
  Vec mass(static_cast<Eigen::Index>(nz));
  Eigen::Index row = 0;
  for (std::size_t j = 0; j < acc.size(); ++j) {
    if (acc[j] <= 0.0) continue;
    const double value = static_cast<double>(k) * static_cast<double>(vmin) +
                         static_cast<double>(D) * static_cast<double>(j);
    for (int c = 0; c < d; ++c)
      pts(row, c) = reduce_unit(value * nu.alphas()(0, c));
    mass[row] = acc[j];
    ++row;
  }
  return measure_from_rows(std::move(pts), std::move(mass));
}

DiscreteMeasure rank_general_power(const StepDistribution& nu, long long k,
                                   std::size_t atom_cap) {
  const int r = nu.r();
  const int d = nu.d();

  std::vector<long long> g(static_cast<std::size_t>(r), 0);
  std::vector<long long> lo(static_cast<std::size_t>(r)),
      hi(static_cast<std::size_t>(r));
  double cells_d = 1.0;
  for (int i = 0; i < r; ++i) {
    long long vmin = 0, vmax = 0, gg = 0;
    for (auto [v, prob] : nu.steps()[static_cast<std::size_t>(i)].atoms) {
      (void)prob;
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
      gg = std::gcd(gg, std::llabs(v));
    }
    if (gg == 0) gg = 1;  // every atom is zero: the axis collapses
    g[static_cast<std::size_t>(i)] = gg;
    lo[static_cast<std::size_t>(i)] = k * vmin;
    hi[static_cast<std::size_t>(i)] = k * vmax;
    cells_d *= static_cast<double>((hi[static_cast<std::size_t>(i)] -
                                    lo[static_cast<std::size_t>(i)]) /
                                       gg +
                                   1);
    if (cells_d > static_cast<double>(atom_cap))
      throw CapExceeded("convolution_power_measure: translate grid exceeds cap of " +
                        std::to_string(atom_cap) + " atoms");
  }
  const std::size_t cells = static_cast<std::size_t>(cells_d);

  std::vector<std::size_t> len(static_cast<std::size_t>(r)),
      stride(static_cast<std::size_t>(r));
  std::size_t acc_stride = 1;
  for (int i = r - 1; i >= 0; --i) {
    len[static_cast<std::size_t>(i)] = static_cast<std::size_t>(
        (hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]) /
            g[static_cast<std::size_t>(i)] +
        1);
    stride[static_cast<std::size_t>(i)] = acc_stride;
    acc_stride *= len[static_cast<std::size_t>(i)];
  }

  struct Move {
    int axis;
    long long delta;  // in compressed units
    double weight;
  };
  std::vector<Move> moves;
  for (int i = 0; i < r; ++i)
    for (auto [v, prob] : nu.steps()[static_cast<std::size_t>(i)].atoms)
      moves.push_back({i, v / g[static_cast<std::size_t>(i)],
                       nu.selector()[i] * prob});

  std::vector<double> cur(cells, 0.0), next(cells, 0.0);
  std::size_t idx0 = 0;
  for (int i = 0; i < r; ++i)
    idx0 += static_cast<std::size_t>((0 - lo[static_cast<std::size_t>(i)]) /
                                     g[static_cast<std::size_t>(i)]) *
            stride[static_cast<std::size_t>(i)];
  cur[idx0] = 1.0;

  std::vector<std::size_t> coord(static_cast<std::size_t>(r));
  for (long long step = 0; step < k; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    std::fill(coord.begin(), coord.end(), std::size_t{0});
    for (std::size_t c = 0; c < cells; ++c) {
      const double mass = cur[c];
      if (mass != 0.0) {
        for (const auto& mv : moves) {
          const std::size_t ax = static_cast<std::size_t>(mv.axis);
          const long long tc =
              static_cast<long long>(coord[ax]) + mv.delta;
          if (tc < 0 || tc >= static_cast<long long>(len[ax])) continue;
          const long long tgt = static_cast<long long>(c) +
                                mv.delta * static_cast<long long>(stride[ax]);
          next[static_cast<std::size_t>(tgt)] += mass * mv.weight;
        }
      }
      for (int i = r - 1; i >= 0; --i) {
        if (++coord[static_cast<std::size_t>(i)] <
            len[static_cast<std::size_t>(i)])
          break;
        coord[static_cast<std::size_t>(i)] = 0;
      }
    }
    cur.swap(next);
  }

  double total = 0.0;
  std::size_t nz = 0;
  for (double v : cur) {
    total += v;
    nz += v > 0.0;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvariantViolation("convolution_power_measure: mass leaked");

  Eigen::MatrixXd pts(static_cast<Eigen::Index>(nz), d);
  Vec mass(static_cast<Eigen::Index>(nz));
  Eigen::Index row = 0;
  std::fill(coord.begin(), coord.end(), std::size_t{0});
  for (std::size_t c = 0; c < cells; ++c) {
    if (cur[c] > 0.0) {
      for (int j = 0; j < d; ++j) {
        double x = 0.0;
        for (int i = 0; i < r; ++i) {
          const double value =
              static_cast<double>(lo[static_cast<std::size_t>(i)]) +
              static_cast<double>(g[static_cast<std::size_t>(i)]) *
                  static_cast<double>(coord[static_cast<std::size_t>(i)]);
          x += value * nu.alphas()(i, j);
        }
        pts(row, j) = reduce_unit(x);
      }
      mass[row] = cur[c];
      ++row;
    }
    for (int i = r - 1; i >= 0; --i) {
      if (++coord[static_cast<std::size_t>(i)] < len[static_cast<std::size_t>(i)])
        break;
      coord[static_cast<std::size_t>(i)] = 0;
    }
  }
  return measure_from_rows(std::move(pts), std::move(mass));
}

}  // namespace

DiscreteMeasure convolution_power_measure(const StepDistribution& nu,
                                          long long k, std::size_t atom_cap) {
  if (k < 0) throw ValidationError("convolution_power_measure: k must be >= 0");
  if (k == 0) return DiscreteMeasure::dirac(TorusPoint::zero(nu.d()));
  if (nu.r() == 1) return rank1_power(nu, k, atom_cap);
  return rank_general_power(nu, k, atom_cap);
}

// ── the sandwich ─────────────────────────────────────────────────────────────

std::vector<BoundRecord> bound_sandwich(const StepDistribution& nu,
                                        const std::vector<long long>& ks,
                                        const SandwichOptions& opt) {
  if (ks.empty()) throw ValidationError("bound_sandwich: no step counts given");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1) throw ValidationError("bound_sandwich: step counts must be >= 1");
    if (i > 0 && ks[i] <= ks[i - 1])
      throw ValidationError("bound_sandwich: step counts must be strictly increasing");
  }
  if (!(opt.p > 0.0 && opt.p <= 1.0))
    throw ValidationError("bound_sandwich: exponent must lie in (0, 1]");
  if (opt.H_max < 2) throw ValidationError("bound_sandwich: H_max must be >= 2");
  if (opt.lambdas.empty())
    throw ValidationError("bound_sandwich: lambda grid is empty");

  const int box = opt.sharp ? 2 * opt.H_max - 1 : opt.H_max;
  const SpectralCache walk = SpectralCache::build(nu, box);

  auto one = [&](int idx) {
    const long long k = ks[static_cast<std::size_t>(idx)];
    BoundRecord rec;
    rec.k = k;
    rec.p = opt.p;

    const UpperScan scan = optimize_upper(walk, k, opt.p, opt.sharp);
    rec.upper = scan.value;
    rec.upper_H = scan.H;

    double lower = 0.0;
    for (double lambda : opt.lambdas) {
      try {
        const SupportNet net = walk_support_net(nu, k, lambda, opt.net_cap);
        const RnetBound rb = rnet_lower_bound(net.net, net.R, opt.p);
        lower = std::max(lower, rb.value);
      } catch (const CapExceeded&) {
        // this lambda's box is too large; smaller lambdas still contribute
      }
    }
    rec.lower = lower;

    if (opt.want_exact && nu.d() == 1 && opt.p == 1.0) {
      try {
        const DiscreteMeasure m = convolution_power_measure(nu, k, opt.conv_cap);
        rec.exact = exact_w1_circle_uniform(m);
        rec.exact_method = "circle";
      } catch (const CapExceeded&) {
        // support too large; bounds alone stand
      }
    }

    if (rec.lower > rec.upper + 1e-9)
      throw InvariantViolation("bound_sandwich: lower bound exceeds upper at k=" +
                               std::to_string(k));
    if (rec.has_exact()) {
      if (rec.lower - 1e-9 > rec.exact || rec.exact > rec.upper + 1e-9)
        throw InvariantViolation("bound_sandwich: sandwich violated at k=" +
                                 std::to_string(k));
    }
    return rec;
  };

  auto records = parallel_map<BoundRecord>(
      static_cast<int>(ks.size()), opt.threads, one);

  double prev = std::numeric_limits<double>::infinity();
  for (const auto& rec : records) {
    if (!rec.has_exact()) continue;
    if (rec.exact > prev + 1e-9)
      throw InvariantViolation(
          "bound_sandwich: exact distance increased at k=" +
          std::to_string(rec.k));
    prev = rec.exact;
  }
  return records;
}

}  // namespace walklab
