#pragma once

// Monte-Carlo side of the library: walk simulation, ergodic sums, the
// asymptotic variance estimated by simulation, central-limit and
// iterated-logarithm experiment harnesses, the alternating block
// decomposition, and the coupled block-sum construction that replaces each
// H-block increment by a uniform variable drawn from the optimal circle
// transport plan.
//
// Determinism contract: every driver takes a master seed; trial t draws from
// RngStream::derive(seed, t), and each walk step consumes exactly two
// uniforms (direction, then translate count).  Results are reduced in trial
// order, so outputs are identical for any thread count.

#include <cstdint>
#include <functional>
#include <vector>

#include "walklab/rng.hpp"
#include "walklab/spectral.hpp"
#include "walklab/torus.hpp"

namespace walklab {

/// One elementary move: a direction index and a signed translate count.
struct Move {
  int direction = 0;
  long long translate_count = 0;
};

/// Precomputed sampling tables for a step distribution.
class WalkSimulator {
 public:
  explicit WalkSimulator(StepDistribution nu);

  const StepDistribution& nu() const { return nu_; }
  int dim() const { return nu_.d(); }

  /// Draws a move, consuming exactly two uniforms from the stream.
  Move draw(RngStream& rng) const;

  /// Applies a move to a coordinate vector in place, reducing mod 1.
  void advance(Vec& x, const Move& mv) const;

 private:
  StepDistribution nu_;
  std::vector<double> sel_cdf_;
  std::vector<std::vector<double>> law_cdf_;
  std::vector<std::vector<long long>> law_val_;
};

/// A reproducible walk path S_1..S_N.  Positions are streamed, not stored:
/// `for_each` replays the path from the seed, visiting (k, S_k) in order.
class WalkPath {
 public:
  WalkPath(const StepDistribution& nu, long long N, std::uint64_t seed,
           TorusPoint start);

  long long steps() const { return N_; }
  std::uint64_t seed() const { return seed_; }
  int dim() const { return sim_.dim(); }

  void for_each(const std::function<void(long long, const Vec&)>& fn) const;

 private:
  WalkSimulator sim_;
  long long N_;
  std::uint64_t seed_;
  Vec start_;
};

/// Simulates N steps of the walk started at `start` (origin by default).
WalkPath simulate_walk(const StepDistribution& nu, long long N,
                       std::uint64_t seed,
                       TorusPoint start = TorusPoint());

/// Compensated (Kahan) sum of f along the path.
double ergodic_sum(const WalkPath& path, const TestFunction& f);

struct VarianceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int lag_cap = 0;    ///< number of lag terms summed
  int trials = 0;
};

/// Monte-Carlo estimate of the asymptotic variance
///   C = E f(U)^2 + 2 sum_{k>=1} E f(U) f(U + S_k)
/// truncated at lag K_max, with U uniform and independent of the walk.
/// Requires the spectral tail estimate
///   sum_{k>K_max} sum_h |f_hat(h)|^2 |nu_hat(h)|^k < 1e-4,
/// otherwise the truncation is refused.
VarianceEstimate monte_carlo_variance(const StepDistribution& nu,
                                      const TestFunction& f, int K_max,
                                      int trials, std::uint64_t seed,
                                      int threads = 1);

/// Shared report for the central-limit and iterated-logarithm experiments.
struct ExperimentReport {
  std::uint64_t seed = 0;
  long long N = 0;  ///< steps per trial (N_max for the LIL harness)
  int trials = 0;
  double variance = 0.0;  ///< spectral variance used in the normalization
  bool degenerate = false;
  double ks_distance = 0.0;  ///< CLT harness: KS distance to Normal(0, C)
  double sup_abs = 0.0;      ///< degenerate branch: sup |normalized sum|
  std::vector<double> normalized_sums;  ///< CLT: one per trial
  std::vector<double> lil_ratios;       ///< LIL: per-trial window sup
  std::vector<long long> checkpoints;   ///< LIL: geometric recording schedule
  std::vector<std::vector<double>> checkpoint_ratios;  ///< LIL: trial x checkpoint
};

/// Distribution of (sum_{k<=N} f(S_k)) / sqrt(N) over independent trials,
/// compared to Normal(0, C) with C from the spectral series.  When the
/// spectral variance vanishes the report switches to the degenerate branch
/// and records sup |normalized sums| instead of a KS distance.
ExperimentReport clt_experiment(const StepDistribution& nu,
                                const TestFunction& f, long long N, int trials,
                                std::uint64_t seed, int threads = 1);

/// Per-trial running values of |sum_{k<=n} f(S_k)| / sqrt(2 n log log n),
/// recorded at geometric checkpoints (ratio 1.25, starting at n = 16) and
/// reported as the supremum over the window n in [N_max/10, N_max].
ExperimentReport lil_experiment(const StepDistribution& nu,
                                const TestFunction& f, long long N_max,
                                int trials, std::uint64_t seed,
                                int threads = 1);

/// One block of the alternating decomposition; the interval is inclusive.
struct Block {
  bool is_h = true;
  int index = 0;  ///< pair index i (1-based)
  long long start = 0;
  long long end = 0;
  long long size() const { return end - start + 1; }
};

struct BlockDecomposition {
  long long N = 0;
  std::vector<Block> blocks;  ///< H_1, J_1, H_2, J_2, ... truncated at N
  int last_pair_index = 0;    ///< pair index of the block containing N
};

/// Alternating decomposition of 1..N into blocks of sizes
/// |H_i| = max(1, floor(i^{1/4})) and |J_i| = max(1, floor(i^{1/2})).
BlockDecomposition block_decomposition(long long N);

struct BlockCouplingOptions {
  double p = 1.0;  ///< exponent of the reported transport costs
  /// Mix in an independent coupling so the expected per-block cost hits the
  /// factor-2 contract 2*Delta instead of the optimal Delta.
  bool inflate_to_contract = false;
  std::size_t conv_cap = 1'000'000;  ///< atom cap for the H-block powers
};

struct BlockCouplingResult {
  std::vector<double> Y;       ///< per complete pair: sum of f over J_i (real chain)
  std::vector<double> Y_star;  ///< same sums along the starred chain
  std::vector<double> perturbation_errors;  ///< realized d(T_i, U_i)^p
  std::vector<double> delta_exact;  ///< optimal W_1(nu^{*|H_i|}, uniform)
  std::vector<long long> h_sizes;
  std::vector<long long> j_sizes;
  std::vector<double> w_star_samples;  ///< pooled starred positions over J-blocks
};

/// Runs the block-coupled chains over 1..N (dimension 1 only): each H-block
/// increment T_i ~ nu^{*|H_i|} is drawn jointly with a uniform U_i from the
/// optimal circle transport plan; the starred chain restarts each J-block
/// from the exactly-uniform position.  Only complete (H_i, J_i) pairs
/// contribute.
BlockCouplingResult coupled_block_sums(const StepDistribution& nu,
                                       const TestFunction& f, long long N,
                                       std::uint64_t seed,
                                       const BlockCouplingOptions& opt = {});

struct VarianceGrowthFit {
  std::vector<long long> Ns;
  std::vector<double> estimate_over_N;  ///< MC estimate of E(sum)^2 / N
  std::vector<double> std_error_over_N;
  double c_spectral = 0.0;
  std::vector<double> deviation;  ///< estimate_over_N - c_spectral
};

/// Monte-Carlo check that E (sum_{k<=N} f(U + S_k))^2 grows like C * N.
/// Requires trials >= 1000.
VarianceGrowthFit variance_growth_check(const StepDistribution& nu,
                                        const TestFunction& f,
                                        const std::vector<long long>& Ns,
                                        int trials, std::uint64_t seed,
                                        int threads = 1);

}  // namespace walklab
