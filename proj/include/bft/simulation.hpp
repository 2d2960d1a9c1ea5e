#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bft/bayesfactor.hpp"
#include "bft/error.hpp"
#include "bft/models.hpp"
#include "bft/rng.hpp"
#include "bft/sampler.hpp"
#include "bft/stats.hpp"

namespace bft {

// One (effect variance, sample size) grid cell of the benchmark. g_effect
// is the variance of the per-dataset mean, not Eq. 3's integration variable.
struct SimulationCell {
  double g_effect = 0.0;
  std::size_t n_obs = 20;
  std::size_t n_datasets = 50;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(g_effect >= 0.0) || !std::isfinite(g_effect))
      throw parameter_error("simulation: g_effect must be finite and >= 0");
    if (n_obs < 2) throw parameter_error("simulation: N must be >= 2");
    if (n_datasets < 1) throw parameter_error("simulation: n_datasets must be >= 1");
  }
};

enum class Hypothesis { H0, H1 };

// selection rule: H0 iff log(B01) > 0, ties to H1
inline Hypothesis model_select(double log_bf01) {
  if (!std::isfinite(log_bf01)) throw parameter_error("model_select: non-finite log BF");
  return log_bf01 > 0.0 ? Hypothesis::H0 : Hypothesis::H1;
}

struct FiveNumberSummary {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

inline FiveNumberSummary five_number_summary(std::span<const double> values) {
  if (values.empty()) throw parameter_error("five_number_summary: empty input");
  std::vector<double> s(values.begin(), values.end());
  for (double v : s)
    if (!std::isfinite(v)) throw parameter_error("five_number_summary: non-finite value");
  std::sort(s.begin(), s.end());
  return {s.front(), quantile_type7_sorted(s, 0.25), quantile_type7_sorted(s, 0.5),
          quantile_type7_sorted(s, 0.75), s.back()};
}

namespace detail {

inline std::uint64_t cell_stream(const SimulationCell& cell, std::size_t index) {
  // counter-based: any single dataset is reproducible in isolation
  return derive_seed(cell.seed, std::bit_cast<std::uint64_t>(cell.g_effect),
                     static_cast<std::uint64_t>(cell.n_obs),
                     static_cast<std::uint64_t>(index));
}

}  // namespace detail

// y_i = mu + e_i with mu ~ Normal(0, g_effect) (exactly 0 when g_effect = 0)
// and e_i ~ Normal(0,1); deterministic given (seed, cell, index).
inline std::vector<double> generate_dataset(const SimulationCell& cell, std::size_t index) {
  cell.validate();
  Rng rng(detail::cell_stream(cell, index));
  const double mu = cell.g_effect > 0.0 ? std::sqrt(cell.g_effect) * rng.normal() : 0.0;
  std::vector<double> y(cell.n_obs);
  for (auto& v : y) v = mu + rng.normal();
  return y;
}

struct CellReport {
  SimulationCell cell;
  FiveNumberSummary jzs;       // five-number summary of log(bf01), JZS route
  FiveNumberSummary sampling;  // same, Savage-Dickey route
  double consistency = 0.0;    // fraction of datasets where both routes pick the same model
  double runtime_seconds = 0.0;
  std::size_t n_failed = 0;
  std::vector<std::pair<double, double>> log_bf_pairs;  // (jzs, sampling) per dataset
};

struct SimulationReport {
  std::vector<CellReport> cells;
  double prior_scale = 1.0;
  double total_runtime_seconds = 0.0;
};

inline std::vector<SimulationCell> default_grid(std::size_t n_datasets, std::uint64_t seed) {
  std::vector<SimulationCell> cells;
  for (double g : {0.0, 0.05, 0.2})
    for (std::size_t n : {std::size_t{20}, std::size_t{50}, std::size_t{80}})
      cells.push_back({g, n, n_datasets, seed});
  return cells;
}

inline std::size_t thread_budget() {
  if (const char* env = std::getenv("BFT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs the JZS and the sampling route on every dataset of every cell.
// Datasets are distributed over threads round-robin and reduced in index
// order, so reports are bit-identical regardless of the thread budget.
inline SimulationReport run_simulation(const std::vector<SimulationCell>& cells,
                                       const SamplerSettings& sampler_settings,
                                       double r_scale = 1.0, std::size_t n_threads = 0) {
  if (!(r_scale > 0.0)) throw parameter_error("run_simulation: r must be > 0");
  if (n_threads == 0) n_threads = thread_budget();
  const auto t_start = std::chrono::steady_clock::now();

  SimulationReport report;
  report.prior_scale = r_scale;
  const PriorSpec prior = PriorSpec::cauchy(r_scale);

  for (const auto& cell : cells) {
    cell.validate();
    const auto c_start = std::chrono::steady_clock::now();

    struct Slot {
      double log_jzs = 0.0, log_sd = 0.0;
      bool failed = false;
    };
    std::vector<Slot> slots(cell.n_datasets);

    auto worker = [&](std::size_t offset) {
      for (std::size_t i = offset; i < cell.n_datasets; i += n_threads) {
        try {
          const auto y = generate_dataset(cell, i);
          const auto sample = standardize(y);
          const auto ts = t_statistic(sample);
          const auto jzs = jzs_bf(ts.t, cell.n_obs, r_scale);
          SamplerSettings st = sampler_settings;
          st.seed = derive_seed(detail::cell_stream(cell, i), 0x5A3Dull);
          st.parallel_chains = false;  // datasets already saturate the budget
          const auto draws = sample_posterior(ModelSpec::one_sample(prior), sample, st);
          const auto sd = savage_dickey_bf(draws, prior, 0.0);
          slots[i].log_jzs = jzs.components.at("log_numerator") -
                             jzs.components.at("log_denominator");
          slots[i].log_sd = sd.components.at("log_bf01");
        } catch (const error&) {
          slots[i].failed = true;
        }
      }
    };

    if (n_threads > 1 && cell.n_datasets > 1) {
      std::vector<std::thread> pool;
      const std::size_t k = std::min(n_threads, cell.n_datasets);
      pool.reserve(k);
      for (std::size_t w = 0; w < k; ++w) pool.emplace_back(worker, w);
      for (auto& th : pool) th.join();
    } else {
      worker(0);
    }

    CellReport cr;
    cr.cell = cell;
    std::vector<double> jzs_logs, sd_logs;
    std::size_t agree = 0, ok = 0;
    for (const auto& s : slots) {
      if (s.failed) {
        ++cr.n_failed;
        continue;
      }
      ++ok;
      jzs_logs.push_back(s.log_jzs);
      sd_logs.push_back(s.log_sd);
      agree += model_select(s.log_jzs) == model_select(s.log_sd);
      cr.log_bf_pairs.emplace_back(s.log_jzs, s.log_sd);
    }
    if (ok > 0) {
      cr.jzs = five_number_summary(jzs_logs);
      cr.sampling = five_number_summary(sd_logs);
      cr.consistency = static_cast<double>(agree) / static_cast<double>(ok);
    }
    cr.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - c_start).count();
    report.cells.push_back(std::move(cr));
  }

  report.total_runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

}  // namespace bft
