#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "ptngarch/dgp.hpp"
#include "ptngarch/error.hpp"
#include "ptngarch/estimate.hpp"
#include "ptngarch/inference.hpp"
#include "ptngarch/network.hpp"
#include "ptngarch/rng.hpp"
#include "ptngarch/special.hpp"

namespace ptngarch {

enum class NetKind { band, random, powerlaw, block };

inline NetKind parse_net_kind(const std::string& s) {
  if (s == "band") return NetKind::band;
  if (s == "random") return NetKind::random;
  if (s == "powerlaw") return NetKind::powerlaw;
  if (s == "block") return NetKind::block;
  throw ValidationError("unknown network kind '" + s + "' (expected band|random|powerlaw|block)");
}

inline std::string to_string(NetKind k) {
  switch (k) {
    case NetKind::band: return "band";
    case NetKind::random: return "random";
    case NetKind::powerlaw: return "powerlaw";
    case NetKind::block: return "block";
  }
  return "band";
}

/// Generator choice and its arguments; unused fields are ignored.
struct NetworkSpec {
  NetKind kind = NetKind::band;
  long band = 2;
  double d_max = 5.0;
  double scaling = 2.5;
  std::size_t blocks = 3;
  double p_in = 0.5;
  double p_out_scale = 0.001;
};

inline Network make_network(const NetworkSpec& spec, std::size_t n_nodes, std::uint64_t seed) {
  switch (spec.kind) {
    case NetKind::band: return gen_d_neighbourhood(n_nodes, spec.band);
    case NetKind::random: return gen_random(n_nodes, spec.d_max, seed);
    case NetKind::powerlaw: return gen_power_law(n_nodes, spec.scaling, spec.d_max, seed);
    case NetKind::block:
      return gen_block(n_nodes, std::min(spec.blocks, n_nodes), spec.p_in, spec.p_out_scale, seed);
  }
  throw ValidationError("unknown network kind");
}

struct LadderPoint {
  std::size_t t_len = 200;
  std::size_t n_nodes = 14;
};

struct ExperimentConfig {
  NetworkSpec network;
  std::vector<LadderPoint> ladder;
  ThresholdParams true_params{0.5, 0.7, 0.6, 0.1, 0.1, 5};
  int m_reps = 200;
  std::uint64_t base_seed = 1;
  std::size_t burn_in = 500;
  FitOptions fit_opts;
  bool rotate_starts = true;  // jitter the multistart points with m
  unsigned threads = 0;       // 0: PTNGARCH_THREADS or hardware concurrency

  void validate() const {
    if (m_reps < 1) throw ValidationError("m_reps must be at least 1");
    if (ladder.empty()) throw ValidationError("ladder must not be empty");
    true_params.validate_recursive();
    fit_opts.validate();
  }
};

struct Replication {
  std::size_t m = 0;
  bool ok = false;
  std::string error;
  Theta theta{};
  long r_hat = 0;
  Vec5 se{};
  std::array<bool, 5> covered{};
  bool converged = false;
  double wald_threshold = 0.0;
  double wald_garch = 0.0;
  double wald_network = 0.0;
};

struct ExperimentRow {
  LadderPoint point;
  Vec5 rmse{};
  Vec5 cp{};
  double mean_r_hat = 0.0;
  int successes = 0;
  int failures = 0;
  bool valid = true;  // failures ≤ 10% of m_reps
  /// Share of successful replications rejecting at the 5% level.
  double reject_threshold = 0.0;
  double reject_garch = 0.0;
  double reject_network = 0.0;
  std::vector<Replication> replications;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
};

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PTNGARCH_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs job(k) for k in [0, count) on a small worker pool. Jobs write to
/// their own slot, so the outcome never depends on scheduling.
template <class Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = next++; k < count; k = next++) job(k);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace detail {
constexpr std::uint64_t kNetworkStream = 0x4e4554;  // "NET"
constexpr std::uint64_t kPanelStream = 1;
constexpr std::uint64_t kStartStream = 2;
}  // namespace detail

/// One replication: fresh panel on the shared network, two-step fit, CI hits
/// and the three canned Wald statistics.
inline Replication run_replication(const ExperimentConfig& cfg, std::size_t ladder_index,
                                   const Network& net, std::size_t m) {
  Replication rep;
  rep.m = m;
  const auto& pt = cfg.ladder[ladder_index];
  try {
    const Panel panel =
        simulate(cfg.true_params, net, pt.t_len, cfg.burn_in,
                 derive_seed(cfg.base_seed, {ladder_index, m, detail::kPanelStream}));
    FitOptions opts = cfg.fit_opts;
    if (cfg.rotate_starts) {
      opts.start_seed = derive_seed(cfg.base_seed, {ladder_index, m, detail::kStartStream});
    }
    const FitResult f = fit(panel, net, opts);
    rep.theta = f.theta_hat;
    rep.r_hat = f.r_hat;
    rep.se = f.se;
    rep.converged = f.converged;
    if (f.flagged) {
      rep.error = "no inner fit converged";
      return rep;
    }
    if (f.sigma_singular) {
      rep.error = f.sigma_message;
      return rep;
    }
    const Theta truth = cfg.true_params.theta();
    for (std::size_t k = 0; k < 5; ++k) {
      rep.covered[k] = f.ci95[k].first < truth[k] && truth[k] < f.ci95[k].second;
    }
    rep.wald_threshold = threshold_test(f).statistic;
    rep.wald_garch = garch_test(f).statistic;
    rep.wald_network = network_test(f).statistic;
    rep.ok = true;
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.error = e.what();
  }
  return rep;
}

/// Aggregates replications (sorted by m) into RMSE, coverage and mean r̂.
inline ExperimentRow summarize(const LadderPoint& pt, const Theta& truth,
                               std::vector<Replication> reps) {
  std::sort(reps.begin(), reps.end(), [](const auto& a, const auto& b) { return a.m < b.m; });
  ExperimentRow row;
  row.point = pt;
  constexpr double chi2_1_crit = 3.841458820694124;  // 95% quantile of χ²₁
  Vec5 sq{};
  Vec5 hits{};
  double rsum = 0.0;
  int rej_t = 0, rej_g = 0, rej_n = 0;
  for (const auto& rep : reps) {
    if (!rep.ok) {
      ++row.failures;
      continue;
    }
    ++row.successes;
    for (std::size_t k = 0; k < 5; ++k) {
      const double d = rep.theta[k] - truth[k];
      sq[k] += d * d;
      hits[k] += rep.covered[k] ? 1.0 : 0.0;
    }
    rsum += static_cast<double>(rep.r_hat);
    rej_t += rep.wald_threshold > chi2_1_crit;
    rej_g += rep.wald_garch > chi2_1_crit;
    rej_n += rep.wald_network > chi2_1_crit;
  }
  if (row.successes > 0) {
    const double m = row.successes;
    for (std::size_t k = 0; k < 5; ++k) {
      row.rmse[k] = std::sqrt(sq[k] / m);
      row.cp[k] = hits[k] / m;
    }
    row.mean_r_hat = rsum / m;
    row.reject_threshold = rej_t / m;
    row.reject_garch = rej_g / m;
    row.reject_network = rej_n / m;
  }
  const int total = row.successes + row.failures;
  row.valid = row.successes > 0 && 10 * row.failures <= total;
  row.replications = std::move(reps);
  return row;
}

/// For each ladder point: draw the network once, then M replications with
/// seeds derived from (base_seed, ladder index, m).
inline ExperimentReport run_experiment(
    const ExperimentConfig& cfg,
    const std::function<void(std::size_t, std::size_t)>& progress = {}) {
  cfg.validate();
  ExperimentReport report;
  const unsigned threads = resolve_threads(cfg.threads);
  for (std::size_t li = 0; li < cfg.ladder.size(); ++li) {
    const auto& pt = cfg.ladder[li];
    const Network net =
        make_network(cfg.network, pt.n_nodes, derive_seed(cfg.base_seed, {li, detail::kNetworkStream}));
    std::vector<Replication> reps(static_cast<std::size_t>(cfg.m_reps));
    std::atomic<std::size_t> done{0};
    parallel_for(reps.size(), threads, [&](std::size_t m) {
      reps[m] = run_replication(cfg, li, net, m);
      const std::size_t d = ++done;
      if (progress) progress(li, d);
    });
    report.rows.push_back(summarize(pt, cfg.true_params.theta(), std::move(reps)));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Q-Q data

enum class QQStandardize {
  sample,     // (θ̂ − mean) / sd with the population (1/M) sd
  reference,  // (θ̂ − θ0) / ŜE per replication
  none,       // raw estimates
};

struct QQSeries {
  std::string coefficient;
  std::vector<double> theoretical;
  std::vector<double> empirical;
  std::string diagnostic;  // set when the coefficient was rejected
};

/// Pairs sorted standardized estimates with Φ⁻¹((j − 0.5)/M), j = 1..M.
/// A coefficient with zero spread is rejected with a diagnostic instead of
/// producing a series.
inline std::vector<QQSeries> qq_data(const std::vector<Theta>& estimates, const Theta& theta0,
                                     const std::vector<Vec5>& se,
                                     QQStandardize mode = QQStandardize::sample) {
  const std::size_t m = estimates.size();
  if (m == 0) throw ValidationError("Q-Q data needs at least one replication");
  if (mode == QQStandardize::reference && se.size() != m) {
    throw ValidationError("reference standardization needs one standard-error vector per replication");
  }
  std::vector<double> theo(m);
  for (std::size_t j = 0; j < m; ++j) {
    theo[j] = normal_quantile((static_cast<double>(j) + 0.5) / static_cast<double>(m));
  }

  std::vector<QQSeries> out;
  for (std::size_t k = 0; k < 5; ++k) {
    QQSeries series;
    series.coefficient = std::string(kCoefNames[k]);
    std::vector<double> z(m);
    double mean = 0.0;
    for (std::size_t j = 0; j < m; ++j) mean += estimates[j][k];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t j = 0; j < m; ++j) var += (estimates[j][k] - mean) * (estimates[j][k] - mean);
    const double sd = std::sqrt(var / static_cast<double>(m));
    if (mode != QQStandardize::none && !(sd > 0.0)) {
      series.diagnostic = "zero sample spread; coefficient skipped";
      out.push_back(std::move(series));
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) {
      switch (mode) {
        case QQStandardize::sample: z[j] = (estimates[j][k] - mean) / sd; break;
        case QQStandardize::reference: z[j] = (estimates[j][k] - theta0[k]) / se[j][k]; break;
        case QQStandardize::none: z[j] = estimates[j][k]; break;
      }
    }
    std::sort(z.begin(), z.end());
    series.theoretical = theo;
    series.empirical = std::move(z);
    out.push_back(std::move(series));
  }
  return out;
}

/// Kolmogorov–Smirnov distance sup|F_M − Φ| of a sample from N(0, 1).
inline double ks_distance_normal(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double m = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t j = 0; j < sample.size(); ++j) {
    const double f = normal_cdf(sample[j]);
    d = std::max({d, std::abs(f - static_cast<double>(j) / m),
                  std::abs(static_cast<double>(j + 1) / m - f)});
  }
  return d;
}

}  // namespace ptngarch
