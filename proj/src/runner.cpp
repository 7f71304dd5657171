#include "walklab/runner.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "walklab/ergodic.hpp"
#include "walklab/report.hpp"
#include "walklab/stats.hpp"
#include "walklab/wasserstein.hpp"

namespace walklab {

namespace {

using nlohmann::json;

// ── schema helpers ───────────────────────────────────────────────────────────

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw ValidationError(where + ": expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known = std::any_of(
        allowed.begin(), allowed.end(),
        [&](const char* k) { return it.key() == k; });
    if (!known)
      throw ValidationError(where + ": unknown field '" + it.key() + "'");
  }
}

const json& need(const json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ValidationError(where + ": missing required field '" + key + "'");
  return *it;
}

long long need_int(const json& obj, const std::string& where, const char* key) {
  const json& v = need(obj, where, key);
  if (!v.is_number_integer())
    throw ValidationError(where + ": field '" + key + "' must be an integer");
  return v.get<long long>();
}

double need_num(const json& obj, const std::string& where, const char* key) {
  const json& v = need(obj, where, key);
  if (!v.is_number())
    throw ValidationError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

long long opt_int(const json& obj, const std::string& where, const char* key,
                  long long fallback) {
  if (!obj.contains(key)) return fallback;
  return need_int(obj, where, key);
}

double opt_num(const json& obj, const std::string& where, const char* key,
               double fallback) {
  if (!obj.contains(key)) return fallback;
  return need_num(obj, where, key);
}

bool opt_bool(const json& obj, const std::string& where, const char* key,
              bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean())
    throw ValidationError(where + ": field '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::vector<long long> int_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty())
    throw ValidationError(where + ": expected a non-empty array of integers");
  std::vector<long long> out;
  for (const auto& e : v) {
    if (!e.is_number_integer())
      throw ValidationError(where + ": expected integer entries");
    out.push_back(e.get<long long>());
  }
  return out;
}

std::vector<double> num_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty())
    throw ValidationError(where + ": expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw ValidationError(where + ": expected numeric entries");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

// ── config parsers ───────────────────────────────────────────────────────────

LatticeSystem system_from_config(const json& walk) {
  reject_unknown_keys(walk, "walk",
                      {"polynomial", "r", "d", "alphas", "selector", "steps"});
  const bool has_poly = walk.contains("polynomial");
  const bool has_alphas = walk.contains("alphas");
  if (has_poly == has_alphas)
    throw ValidationError(
        "walk: exactly one of 'polynomial' and 'alphas' is required");

  if (has_poly) {
    const auto coeffs = int_list(walk.at("polynomial"), "walk.polynomial");
    const int r = static_cast<int>(need_int(walk, "walk", "r"));
    const int d = static_cast<int>(need_int(walk, "walk", "d"));
    return construct_from_polynomial(coeffs, r, d);
  }

  const json& rows = walk.at("alphas");
  if (!rows.is_array() || rows.empty())
    throw ValidationError("walk.alphas: expected a non-empty array of rows");
  const std::size_t r = rows.size();
  std::size_t d = 0;
  Eigen::MatrixXd alphas;
  for (std::size_t i = 0; i < r; ++i) {
    const auto row = num_list(rows[i], "walk.alphas");
    if (i == 0) {
      d = row.size();
      alphas.resize(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d));
    } else if (row.size() != d) {
      throw ValidationError("walk.alphas: ragged rows");
    }
    for (std::size_t j = 0; j < d; ++j)
      alphas(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          reduce_unit(row[j]);
  }
  if (walk.contains("r") &&
      need_int(walk, "walk", "r") != static_cast<long long>(r))
    throw ValidationError("walk: field 'r' contradicts the alphas row count");
  if (walk.contains("d") &&
      need_int(walk, "walk", "d") != static_cast<long long>(d))
    throw ValidationError("walk: field 'd' contradicts the alphas row width");
  LatticeSystem sys;
  sys.r = static_cast<int>(r);
  sys.d = static_cast<int>(d);
  sys.alphas = std::move(alphas);
  sys.validate();
  return sys;
}

StepDistribution walk_from_config(const json& walk) {
  const LatticeSystem sys = system_from_config(walk);
  const bool has_sel = walk.contains("selector");
  const bool has_steps = walk.contains("steps");
  if (!has_sel && !has_steps) return StepDistribution::symmetric_pm1(sys);

  Vec selector(sys.r);
  if (has_sel) {
    const auto sel = num_list(walk.at("selector"), "walk.selector");
    if (static_cast<int>(sel.size()) != sys.r)
      throw ValidationError("walk.selector: expected one weight per direction");
    for (int i = 0; i < sys.r; ++i) selector[i] = sel[static_cast<std::size_t>(i)];
  } else {
    selector.setConstant(1.0 / sys.r);
  }

  std::vector<IntegerLaw> laws;
  if (has_steps) {
    const json& steps = walk.at("steps");
    if (!steps.is_array() || static_cast<int>(steps.size()) != sys.r)
      throw ValidationError("walk.steps: expected one law per direction");
    for (const auto& law_json : steps) {
      if (!law_json.is_array() || law_json.empty())
        throw ValidationError("walk.steps: each law is a non-empty array of [value, prob] pairs");
      IntegerLaw law;
      for (const auto& atom : law_json) {
        if (!atom.is_array() || atom.size() != 2 ||
            !atom[0].is_number_integer() || !atom[1].is_number())
          throw ValidationError("walk.steps: atoms must be [integer, probability] pairs");
        law.atoms.emplace_back(atom[0].get<long long>(), atom[1].get<double>());
      }
      laws.push_back(std::move(law));
    }
  } else {
    IntegerLaw pm;
    pm.atoms = {{-1, 0.5}, {1, 0.5}};
    laws.assign(static_cast<std::size_t>(sys.r), pm);
  }
  return StepDistribution(std::move(selector), std::move(laws), sys.alphas);
}

TestFunction function_from_config(const json& f) {
  if (!f.is_object()) throw ValidationError("f: expected a JSON object");
  const json& kind_json = need(f, "f", "kind");
  if (!kind_json.is_string())
    throw ValidationError("f: field 'kind' must be a string");
  const std::string kind = kind_json.get<std::string>();

  if (kind == "trig") {
    reject_unknown_keys(f, "f", {"kind", "d", "harmonics"});
    const int d = static_cast<int>(need_int(f, "f", "d"));
    const json& hs = need(f, "f", "harmonics");
    if (!hs.is_array() || hs.empty())
      throw ValidationError("f.harmonics: expected a non-empty array");
    std::vector<TestFunction::Harmonic> harmonics;
    for (const auto& hj : hs) {
      reject_unknown_keys(hj, "f.harmonics[]", {"h", "re", "im"});
      const auto hv = int_list(need(hj, "f.harmonics[]", "h"), "f.harmonics[].h");
      if (static_cast<int>(hv.size()) != d)
        throw ValidationError("f.harmonics[].h: length must equal d");
      IVec h(d);
      for (int j = 0; j < d; ++j) {
        if (hv[static_cast<std::size_t>(j)] < -1000000 ||
            hv[static_cast<std::size_t>(j)] > 1000000)
          throw ValidationError("f.harmonics[].h: frequency out of range");
        h[j] = static_cast<int>(hv[static_cast<std::size_t>(j)]);
      }
      const double re = opt_num(hj, "f.harmonics[]", "re", 0.0);
      const double im = opt_num(hj, "f.harmonics[]", "im", 0.0);
      harmonics.push_back({std::move(h), Complex(re, im)});
    }
    return TestFunction::trig(d, std::move(harmonics));
  }

  if (kind == "distance_power") {
    reject_unknown_keys(f, "f", {"kind", "x0", "p"});
    const auto x0 = num_list(need(f, "f", "x0"), "f.x0");
    const double p = need_num(f, "f", "p");
    Vec v(static_cast<Eigen::Index>(x0.size()));
    for (std::size_t j = 0; j < x0.size(); ++j)
      v[static_cast<Eigen::Index>(j)] = x0[j];
    return TestFunction::distance_power(TorusPoint(std::move(v)), p);
  }

  throw ValidationError("f: unknown kind '" + kind + "'");
}

std::uint64_t effective_seed(const json& config) {
  if (const char* env = std::getenv("WALKLAB_SEED"); env && *env) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || end == env || *end != '\0' || env[0] == '-')
      throw ValidationError(
          "WALKLAB_SEED: must be an unsigned 64-bit decimal integer");
    return static_cast<std::uint64_t>(v);
  }
  if (!config.contains("seed")) return 0;
  const json& s = config.at("seed");
  if (!s.is_number_integer() || (s.is_number_integer() && s.get<long long>() < 0 &&
                                 !s.is_number_unsigned()))
    throw ValidationError("config: field 'seed' must be a non-negative integer");
  if (s.is_number_unsigned()) return s.get<std::uint64_t>();
  const long long v = s.get<long long>();
  if (v < 0)
    throw ValidationError("config: field 'seed' must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

// ── command handlers ─────────────────────────────────────────────────────────

namespace {

struct Emitter {
  std::string out_dir;
  ManifestInfo manifest;

  void json_artifact(const std::string& name, json j) {
    j["config_hash"] = hex64(manifest.config_hash);
    const std::string text = j.dump(2) + "\n";
    manifest.artifacts.emplace_back(
        name, write_text_artifact(out_dir + "/" + name, text));
  }
  void csv_artifact(const std::string& name, const CsvWriter& csv) {
    manifest.artifacts.emplace_back(name, csv.write(out_dir + "/" + name));
  }
};

json alphas_to_json(const Eigen::MatrixXd& alphas) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < alphas.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < alphas.cols(); ++j) row.push_back(alphas(i, j));
    rows.push_back(row);
  }
  return rows;
}

json cmd_construct(const json& config, Emitter& em) {
  reject_unknown_keys(config, "config", {"walk", "seed"});
  const LatticeSystem sys = system_from_config(need(config, "config", "walk"));
  json j;
  j["r"] = sys.r;
  j["d"] = sys.d;
  j["alphas"] = alphas_to_json(sys.alphas);
  j["polynomial"] = sys.polynomial;
  em.json_artifact("construct.json", j);
  return j;
}

json cmd_quality(const json& config, Emitter& em) {
  reject_unknown_keys(config, "config", {"walk", "H_max", "enum_cap", "seed"});
  const LatticeSystem sys = system_from_config(need(config, "config", "walk"));
  const long long H_max = need_int(config, "config", "H_max");
  const std::uint64_t enum_cap = static_cast<std::uint64_t>(opt_int(
      config, "config", "enum_cap", static_cast<long long>(kDefaultEnumCap)));
  const QualityEstimate q = diophantine_quality(sys, H_max, enum_cap);
  json j;
  j["K_hat"] = q.K_hat;
  json h = json::array();
  for (Eigen::Index i = 0; i < q.argmin_h.size(); ++i) h.push_back(q.argmin_h[i]);
  j["argmin_h"] = h;
  j["H_max"] = q.H_max;
  em.json_artifact("quality.json", j);
  return j;
}

CsvWriter bounds_csv(const std::vector<BoundRecord>& records) {
  CsvWriter csv({"k", "p", "lower", "exact", "exact_method", "upper", "upper_H"});
  for (const auto& rec : records)
    csv.row({format_number(rec.k), format_number(rec.p),
             format_number(rec.lower), format_number(rec.exact),
             rec.exact_method, format_number(rec.upper),
             format_number(rec.upper_H)});
  return csv;
}

SandwichOptions sandwich_options_from(const json& config, int threads) {
  SandwichOptions opt;
  opt.p = opt_num(config, "config", "p", 1.0);
  opt.H_max = static_cast<int>(opt_int(config, "config", "H_max", 1 << 14));
  opt.sharp = opt_bool(config, "config", "sharp", false);
  if (config.contains("lambdas"))
    opt.lambdas = num_list(config.at("lambdas"), "config.lambdas");
  opt.conv_cap = static_cast<std::size_t>(
      opt_int(config, "config", "conv_cap",
              static_cast<long long>(opt.conv_cap)));
  opt.net_cap = static_cast<std::size_t>(
      opt_int(config, "config", "net_cap", static_cast<long long>(opt.net_cap)));
  opt.want_exact = opt_bool(config, "config", "want_exact", true);
  opt.threads = threads;
  return opt;
}

json cmd_bounds(const json& config, Emitter& em, int threads) {
  reject_unknown_keys(config, "config",
                      {"walk", "ks", "p", "H_max", "sharp", "lambdas",
                       "conv_cap", "net_cap", "want_exact", "seed"});
  const StepDistribution nu = walk_from_config(need(config, "config", "walk"));
  const auto ks = int_list(need(config, "config", "ks"), "config.ks");
  const SandwichOptions opt = sandwich_options_from(config, threads);
  const auto records = bound_sandwich(nu, ks, opt);
  em.csv_artifact("bounds.csv", bounds_csv(records));
  int n_exact = 0;
  for (const auto& rec : records) n_exact += rec.has_exact();
  json j;
  j["records"] = static_cast<int>(records.size());
  j["exact_records"] = n_exact;
  j["p"] = opt.p;
  j["H_max"] = opt.H_max;
  j["sharp"] = opt.sharp;
  em.json_artifact("bounds.json", j);
  return j;
}

json cmd_variance(const json& config, Emitter& em, std::uint64_t seed,
                  int threads) {
  reject_unknown_keys(config, "config", {"walk", "f", "K_max", "trials", "seed"});
  const StepDistribution nu = walk_from_config(need(config, "config", "walk"));
  const TestFunction f = function_from_config(need(config, "config", "f"));
  const int K_max = static_cast<int>(need_int(config, "config", "K_max"));
  const int trials = static_cast<int>(need_int(config, "config", "trials"));
  const VarianceEstimate est =
      monte_carlo_variance(nu, f, K_max, trials, seed, threads);
  const double c_spectral =
      f.is_zero() ? 0.0 : asymptotic_variance_spectral(f, nu);
  json j;
  j["c_spectral"] = c_spectral;
  j["mc_value"] = est.value;
  j["mc_std_error"] = est.std_error;
  j["lag_cap"] = est.lag_cap;
  j["trials"] = est.trials;
  j["deviation_sigmas"] =
      est.std_error > 0.0 ? (est.value - c_spectral) / est.std_error : 0.0;
  em.json_artifact("variance.json", j);
  return j;
}

json cmd_clt(const json& config, Emitter& em, std::uint64_t seed, int threads) {
  reject_unknown_keys(config, "config", {"walk", "f", "N", "trials", "seed"});
  const StepDistribution nu = walk_from_config(need(config, "config", "walk"));
  const TestFunction f = function_from_config(need(config, "config", "f"));
  const long long N = need_int(config, "config", "N");
  const int trials = static_cast<int>(need_int(config, "config", "trials"));
  const ExperimentReport rep = clt_experiment(nu, f, N, trials, seed, threads);

  CsvWriter csv({"trial", "normalized_sum"});
  for (std::size_t t = 0; t < rep.normalized_sums.size(); ++t)
    csv.row({format_number(static_cast<long long>(t)),
             format_number(rep.normalized_sums[t])});
  em.csv_artifact("clt.csv", csv);

  json j;
  j["N"] = rep.N;
  j["trials"] = rep.trials;
  j["variance"] = rep.variance;
  j["degenerate"] = rep.degenerate;
  j["ks_distance"] = rep.ks_distance;
  j["sup_abs"] = rep.sup_abs;
  // Asymptotic one-sample 95% KS band, doubled to absorb finite-N CLT error.
  j["ks_band"] = 2.0 * 1.36 / std::sqrt(static_cast<double>(rep.trials));
  em.json_artifact("clt.json", j);
  return j;
}

json cmd_lil(const json& config, Emitter& em, std::uint64_t seed, int threads) {
  reject_unknown_keys(config, "config", {"walk", "f", "N_max", "trials", "seed"});
  const StepDistribution nu = walk_from_config(need(config, "config", "walk"));
  const TestFunction f = function_from_config(need(config, "config", "f"));
  const long long N_max = need_int(config, "config", "N_max");
  const int trials = static_cast<int>(need_int(config, "config", "trials"));
  const ExperimentReport rep =
      lil_experiment(nu, f, N_max, trials, seed, threads);

  CsvWriter sups({"trial", "window_sup"});
  for (std::size_t t = 0; t < rep.lil_ratios.size(); ++t)
    sups.row({format_number(static_cast<long long>(t)),
              format_number(rep.lil_ratios[t])});
  em.csv_artifact("lil.csv", sups);

  CsvWriter cps({"trial", "n", "ratio"});
  for (std::size_t t = 0; t < rep.checkpoint_ratios.size(); ++t)
    for (std::size_t c = 0; c < rep.checkpoint_ratios[t].size(); ++c)
      cps.row({format_number(static_cast<long long>(t)),
               format_number(rep.checkpoints[c]),
               format_number(rep.checkpoint_ratios[t][c])});
  em.csv_artifact("lil_checkpoints.csv", cps);

  json j;
  j["N_max"] = rep.N;
  j["trials"] = rep.trials;
  j["variance"] = rep.variance;
  j["sigma"] = std::sqrt(std::max(0.0, rep.variance));
  j["degenerate"] = rep.degenerate;
  j["window_lo"] = std::max<long long>(16, rep.N / 10);
  j["checkpoint_ratio"] = 1.25;
  j["checkpoints"] = rep.checkpoints;
  em.json_artifact("lil.json", j);
  return j;
}

json cmd_blocks(const json& config, Emitter& em, std::uint64_t seed) {
  reject_unknown_keys(config, "config",
                      {"walk", "f", "N", "p", "inflate_to_contract",
                       "conv_cap", "seed"});
  const StepDistribution nu = walk_from_config(need(config, "config", "walk"));
  const TestFunction f = function_from_config(need(config, "config", "f"));
  const long long N = need_int(config, "config", "N");
  BlockCouplingOptions opt;
  opt.p = opt_num(config, "config", "p", 1.0);
  opt.inflate_to_contract =
      opt_bool(config, "config", "inflate_to_contract", false);
  opt.conv_cap = static_cast<std::size_t>(opt_int(
      config, "config", "conv_cap", static_cast<long long>(opt.conv_cap)));
  const BlockCouplingResult res = coupled_block_sums(nu, f, N, seed, opt);

  CsvWriter csv({"pair", "h_size", "j_size", "Y", "Y_star",
                 "perturbation_error", "delta_exact"});
  for (std::size_t i = 0; i < res.Y.size(); ++i)
    csv.row({format_number(static_cast<long long>(i + 1)),
             format_number(res.h_sizes[i]), format_number(res.j_sizes[i]),
             format_number(res.Y[i]), format_number(res.Y_star[i]),
             format_number(res.perturbation_errors[i]),
             format_number(res.delta_exact[i])});
  em.csv_artifact("blocks.csv", csv);

  json j;
  j["N"] = N;
  j["pairs"] = static_cast<int>(res.Y.size());
  j["w_star_samples"] = static_cast<int>(res.w_star_samples.size());
  if (!res.w_star_samples.empty())
    j["w_star_ks_uniform"] = ks_statistic(
        res.w_star_samples,
        [](double x) { return std::clamp(x, 0.0, 1.0); });
  if (!res.perturbation_errors.empty()) {
    j["mean_perturbation"] = sample_mean(res.perturbation_errors);
    j["mean_delta"] = sample_mean(res.delta_exact);
  }
  em.json_artifact("blocks.json", j);
  return j;
}

json cmd_rates(Emitter& em, int threads) {
  struct Case {
    const char* name;
    int r, d;
    int H_max;
    bool want_exact;
  };
  const std::vector<long long> poly = {1, -3, 0, 1};  // three real roots
  const std::vector<Case> cases = {
      {"r1d1", 1, 1, 1 << 14, true},
      // the rank-2 walk needs a deep scan: the 6/H smoothing floor must sit
      // below the Fourier mass at k = 2^14 or the fitted slope flattens
      {"r2d1", 2, 1, 1 << 20, false},
      {"r1d2", 1, 2, 1 << 11, false},
  };
  std::vector<long long> ks;
  for (int e = 4; e <= 14; ++e) ks.push_back(1LL << e);

  json summary = json::object();
  for (const auto& c : cases) {
    const LatticeSystem sys =
        c.name == std::string("r1d1")
            ? construct_from_polynomial({-1, -1, 1}, 1, 1)
            : construct_from_polynomial(poly, c.r, c.d);
    const StepDistribution nu = StepDistribution::symmetric_pm1(sys);
    SandwichOptions opt;
    opt.H_max = c.H_max;
    opt.want_exact = c.want_exact;
    opt.threads = threads;
    const auto records = bound_sandwich(nu, ks, opt);
    em.csv_artifact(std::string("rates_") + c.name + ".csv",
                    bounds_csv(records));

    std::vector<double> xs, exacts, uppers, lowers_x, lowers;
    for (const auto& rec : records) {
      xs.push_back(static_cast<double>(rec.k));
      uppers.push_back(rec.upper);
      if (rec.has_exact()) exacts.push_back(rec.exact);
      if (rec.lower > 0.0) {
        lowers_x.push_back(static_cast<double>(rec.k));
        lowers.push_back(rec.lower);
      }
    }
    json cj;
    cj["r"] = c.r;
    cj["d"] = c.d;
    cj["predicted_slope"] = -0.5 * c.r / c.d;
    cj["slope_upper"] = log_log_slope(xs, uppers);
    if (exacts.size() == xs.size())
      cj["slope_exact"] = log_log_slope(xs, exacts);
    else
      cj["slope_exact"] = nullptr;
    if (lowers.size() >= 3)
      cj["slope_lower"] = log_log_slope(lowers_x, lowers);
    else
      cj["slope_lower"] = nullptr;
    cj["exact_records"] = static_cast<int>(exacts.size());
    summary[c.name] = cj;
  }
  em.json_artifact("rates.json", summary);
  return summary;
}

}  // namespace

json run_command_core(const std::string& command, const json& config,
                      const std::string& out_dir, int threads) {
  if (threads < 1) throw ValidationError("threads must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw ValidationError("cannot create output directory: " + out_dir);

  Emitter em;
  em.out_dir = out_dir;
  em.manifest.command = command;
  em.manifest.config_echo = config;
  em.manifest.config_hash = hash_config(config);
  em.manifest.threads = threads;
  em.manifest.seed_used = effective_seed(config);

  const auto t0 = std::chrono::steady_clock::now();
  json summary;
  if (command == "construct") {
    summary = cmd_construct(config, em);
  } else if (command == "quality") {
    summary = cmd_quality(config, em);
  } else if (command == "bounds") {
    summary = cmd_bounds(config, em, threads);
  } else if (command == "variance") {
    summary = cmd_variance(config, em, em.manifest.seed_used, threads);
  } else if (command == "clt") {
    summary = cmd_clt(config, em, em.manifest.seed_used, threads);
  } else if (command == "lil") {
    summary = cmd_lil(config, em, em.manifest.seed_used, threads);
  } else if (command == "blocks") {
    summary = cmd_blocks(config, em, em.manifest.seed_used);
  } else if (command == "rates") {
    reject_unknown_keys(config, "config", {"seed"});
    summary = cmd_rates(em, threads);
  } else {
    throw ValidationError("unknown command '" + command + "'");
  }
  em.manifest.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_manifest(out_dir, em.manifest);
  return summary;
}

int run_command(const RunContext& ctx) {
  auto fail = [](const char* type, const std::string& message, int code) {
    json err;
    err["error"] = {{"type", type}, {"message", message}, {"exit_code", code}};
    std::cout << err.dump() << "\n";
    return code;
  };
  try {
    json config = json::object();
    if (!ctx.config_path.empty()) {
      std::ifstream in(ctx.config_path, std::ios::binary);
      if (!in)
        throw ValidationError("cannot open config file: " + ctx.config_path);
      try {
        in >> config;
      } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: invalid JSON: ") + e.what());
      }
    } else if (ctx.command != "rates") {
      throw ValidationError("--config is required for command '" +
                            ctx.command + "'");
    }
    const json summary =
        run_command_core(ctx.command, config, ctx.out_dir, ctx.threads);
    json ok;
    ok["status"] = "ok";
    ok["command"] = ctx.command;
    ok["manifest"] = ctx.out_dir + "/manifest.json";
    ok["summary"] = summary;
    std::cout << ok.dump() << "\n";
    return 0;
  } catch (const ValidationError& e) {
    return fail("validation", e.what(), 2);
  } catch (const CapExceeded& e) {
    return fail("cap_exceeded", e.what(), 3);
  } catch (const InvariantViolation& e) {
    return fail("invariant", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
}

}  // namespace walklab
