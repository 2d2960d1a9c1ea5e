#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bft/error.hpp"
#include "bft/models.hpp"
#include "bft/rng.hpp"
#include "bft/stats.hpp"

namespace bft {

struct SamplerSettings {
  std::size_t n_chains = 4;
  std::size_t n_warmup = 1000;
  std::size_t n_keep = 5000;
  std::uint64_t seed = 0;
  double target_accept = 0.40;
  bool parallel_chains = true;  // execution policy only; results are identical

  void validate() const {
    if (n_chains < 2) throw parameter_error("sampler: n_chains must be >= 2");
    if (n_keep < 1000) throw parameter_error("sampler: n_keep must be >= 1000");
    if (!(target_accept > 0.0 && target_accept < 1.0))
      throw parameter_error("sampler: target_accept must lie in (0,1)");
  }
};

// Split-chain potential scale reduction. All-constant chains report 1.0;
// constant chains at different levels report +inf.
inline double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw shape_error("gelman_rubin: need >= 2 chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != n) throw shape_error("gelman_rubin: chains of unequal length");
  if (n < 4) throw shape_error("gelman_rubin: chains too short to split");

  const std::size_t half = n / 2;
  std::vector<double> seq_mean, seq_var;
  for (const auto& c : chains) {
    const std::span<const double> first(c.data(), half);
    const std::span<const double> second(c.data() + (n - half), half);
    for (auto seq : {first, second}) {
      seq_mean.push_back(mean(seq));
      seq_var.push_back(sample_variance(seq));
    }
  }
  const double w = mean(seq_var);
  const double b_over_len = sample_variance(seq_mean);
  if (w <= 0.0) return b_over_len <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double len = static_cast<double>(half);
  const double var_plus = (len - 1.0) / len * w + b_over_len;
  return std::sqrt(var_plus / w);
}

// Geyer initial-positive-sequence estimator on one chain; constant chains
// report 1 by convention and the result is capped at the chain length.
inline double effective_sample_size(std::span<const double> draws) {
  const std::size_t n = draws.size();
  if (n < 10) throw parameter_error("effective_sample_size: need >= 10 draws");
  const double m = mean(draws);
  double gamma0 = 0.0;
  for (double x : draws) gamma0 += (x - m) * (x - m);
  gamma0 /= static_cast<double>(n);
  if (gamma0 <= 0.0) return 1.0;

  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (draws[i] - m) * (draws[i + lag] - m);
    return s / static_cast<double>(n);
  };

  double tau = -1.0;
  for (std::size_t k = 0; k + 1 < n; k += 2) {
    const double pair = (k == 0 ? gamma0 : autocov(k)) + autocov(k + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair / gamma0;
  }
  tau = std::max(tau, 1.0);
  return std::min(static_cast<double>(n) / tau, static_cast<double>(n));
}

struct ParamChains {
  std::string name;
  std::vector<std::vector<double>> chains;  // [chain][iteration]
  double rhat = 1.0;
  double ess = 0.0;

  std::vector<double> pooled() const {
    std::vector<double> out;
    for (const auto& c : chains) out.insert(out.end(), c.begin(), c.end());
    return out;
  }
};

struct PosteriorDraws {
  Design design = Design::OneSample;
  PriorSpec delta_prior;  // identity carried through to the BF stage
  std::size_t n_chains = 0;
  std::size_t n_keep = 0;
  std::uint64_t seed = 0;
  std::vector<ParamChains> params;  // delta first, then sigma/mu when sampled
  std::vector<double> accept_rate;  // per chain, post-warmup
  bool converged = true;            // all rhat <= 1.01

  const ParamChains& param(const std::string& name) const {
    for (const auto& p : params)
      if (p.name == name) return p;
    throw parameter_error("no such parameter: " + name);
  }
  std::vector<double> pooled_delta() const { return params.front().pooled(); }
};

namespace detail {

struct ChainResult {
  std::vector<std::vector<double>> cols;  // one vector per parameter
  double accept_rate = 0.0;
};

struct CoordinateModel {
  std::size_t dim = 0;
  bool sigma_sampled = false;
  bool mu_sampled = false;
};

inline CoordinateModel coordinate_model(const ModelSpec& spec) {
  CoordinateModel cm;
  cm.sigma_sampled = !spec.fixed_sigma.has_value();
  cm.mu_sampled = spec.design == Design::TwoSample;
  cm.dim = 1 + (cm.sigma_sampled ? 1 : 0) + (cm.mu_sampled ? 1 : 0);
  return cm;
}

// theta layout: [delta, log sigma (if sampled), mu (if sampled)].
// log sigma is boxed to [-40, 40]: far beyond any attainable posterior
// mass at double precision, and it keeps the chain well defined on
// degenerate data (all observations equal) where the sigma posterior is
// improper at 0.
inline constexpr double log_sigma_box = 40.0;

inline double log_target(const ModelSpec& spec, const ObservedSample& sample,
                         const CoordinateModel& cm, std::span<const double> theta) {
  ModelParams p;
  p.delta = theta[0];
  double jacobian = 0.0;
  std::size_t idx = 1;
  if (cm.sigma_sampled) {
    if (std::fabs(theta[idx]) > log_sigma_box)
      return -std::numeric_limits<double>::infinity();
    p.sigma = std::exp(theta[idx]);
    jacobian = theta[idx];  // d sigma / d log sigma
    ++idx;
  }
  if (cm.mu_sampled) p.mu = theta[idx];
  const double lp = log_joint_density(spec, sample, p);
  return lp + jacobian;
}

inline double init_delta(const ObservedSample& sample) {
  if (sample.design == Design::OneSample) {
    const double sd = sample_sd(sample.z);
    return sd > 0.0 ? mean(sample.z) / sd : 0.0;
  }
  return mean(sample.zx) - mean(sample.zy);
}

// Per-coordinate prior in sampling coordinates, used by the independence
// component of the proposal mixture. For log sigma the Jacobian folds in.
struct CoordinatePrior {
  DistParams dist;
  bool log_transformed = false;

  double draw(Rng& rng) const {
    const double x = sample_one(dist, rng);
    return log_transformed ? std::log(x) : x;
  }
  double log_density(double coord) const {
    if (log_transformed) return log_pdf(dist, std::exp(coord)) + coord;
    return log_pdf(dist, coord);
  }
};

inline std::vector<CoordinatePrior> coordinate_priors(const ModelSpec& spec,
                                                      const CoordinateModel& cm) {
  std::vector<CoordinatePrior> priors;
  priors.push_back({spec.delta_prior.dist(), false});
  if (cm.sigma_sampled) priors.push_back({spec.sigma_prior, true});
  if (cm.mu_sampled) priors.push_back({spec.mu_prior, false});
  return priors;
}

inline ChainResult run_chain(const ModelSpec& spec, const ObservedSample& sample,
                             const SamplerSettings& st, const CoordinateModel& cm,
                             std::uint64_t chain_seed) {
  Rng rng(chain_seed);
  const std::size_t dim = cm.dim;

  std::vector<double> theta(dim, 0.0);
  double lp = -std::numeric_limits<double>::infinity();
  const double delta_center = init_delta(sample);
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
    theta[0] = delta_center + 0.5 * rng.normal();
    std::size_t idx = 1;
    if (cm.sigma_sampled) theta[idx++] = 0.25 * rng.normal();  // log sigma near 0
    if (cm.mu_sampled) theta[idx] = 0.25 * rng.normal();
    lp = log_target(spec, sample, cm, theta);
    ok = std::isfinite(lp);
  }
  if (!ok) throw init_error("sampler: no finite starting point after 100 attempts");

  const auto priors = coordinate_priors(spec, cm);
  std::vector<double> log_step(dim, std::log(0.5));
  ChainResult res;
  res.cols.resize(dim);
  for (auto& c : res.cols) c.reserve(st.n_keep);

  std::size_t accepted = 0;
  const std::size_t total = st.n_warmup + st.n_keep;
  for (std::size_t it = 0; it < total; ++it) {
    for (std::size_t j = 0; j < dim; ++j) {
      // Proposal mixture per coordinate move:
      //   1/3  independence draw from the coordinate's prior (MH-corrected);
      //        rescues the walk from Cauchy-tail excursions, and turns the
      //        empty-likelihood verification mode into near-iid sampling
      //   1/15 random walk at 10x the adapted step
      //   else random walk at the adapted step
      const double kind = rng.uniform();
      const bool independent = kind < 1.0 / 3.0;
      const bool wide = !independent && kind < 0.4;
      const double old = theta[j];
      double log_q_ratio = 0.0;  // log q(old)/q(proposed); 0 for symmetric walks
      if (independent) {
        theta[j] = priors[j].draw(rng);
        log_q_ratio = priors[j].log_density(old) - priors[j].log_density(theta[j]);
      } else {
        theta[j] = old + std::exp(log_step[j]) * (wide ? 10.0 : 1.0) * rng.normal();
      }
      const double lp_prop = log_target(spec, sample, cm, theta);
      // a NaN proposal density must never be accepted
      const double diff = lp_prop - lp + log_q_ratio;
      const double log_alpha = std::isnan(diff) ? -std::numeric_limits<double>::infinity()
                                                : std::min(0.0, diff);
      const bool accept = std::log(rng.uniform()) < log_alpha;
      if (accept) {
        lp = lp_prop;
      } else {
        theta[j] = old;
      }
      if (!independent && it < st.n_warmup) {
        // Robbins-Monro on the acceptance probability; frozen after warmup
        // so the kept draws obey detailed balance
        const double gain = std::pow(static_cast<double>(it + 1), -0.6);
        log_step[j] += gain * (std::exp(log_alpha) - st.target_accept);
      }
      if (accept && it >= st.n_warmup) ++accepted;
    }
    if (it >= st.n_warmup) {
      res.cols[0].push_back(theta[0]);
      std::size_t idx = 1;
      if (cm.sigma_sampled) {
        res.cols[idx].push_back(std::exp(theta[idx]));
        ++idx;
      }
      if (cm.mu_sampled) res.cols[idx].push_back(theta[idx]);
    }
  }
  res.accept_rate =
      static_cast<double>(accepted) / static_cast<double>(st.n_keep * dim);
  return res;
}

}  // namespace detail

// Component-wise adaptive Metropolis on (delta, log sigma [, mu]) with a
// walk/independence proposal mixture (see run_chain). Chains are independent
// given per-chain derived seeds and merge in chain order, so results are
// bit-identical regardless of execution policy.
inline PosteriorDraws sample_posterior(const ModelSpec& spec, const ObservedSample& sample,
                                       const SamplerSettings& settings) {
  settings.validate();
  spec.delta_prior.validate();
  const auto cm = detail::coordinate_model(spec);

  std::vector<detail::ChainResult> results(settings.n_chains);
  if (settings.parallel_chains) {
    std::vector<std::future<detail::ChainResult>> futures;
    futures.reserve(settings.n_chains);
    for (std::size_t c = 0; c < settings.n_chains; ++c)
      futures.push_back(std::async(std::launch::async, [&, c] {
        return detail::run_chain(spec, sample, settings, cm,
                                 derive_seed(settings.seed, 0xC0FFEEull, c));
      }));
    for (std::size_t c = 0; c < settings.n_chains; ++c) results[c] = futures[c].get();
  } else {
    for (std::size_t c = 0; c < settings.n_chains; ++c)
      results[c] = detail::run_chain(spec, sample, settings, cm,
                                     derive_seed(settings.seed, 0xC0FFEEull, c));
  }

  PosteriorDraws out;
  out.design = spec.design;
  out.delta_prior = spec.delta_prior;
  out.n_chains = settings.n_chains;
  out.n_keep = settings.n_keep;
  out.seed = settings.seed;

  std::vector<std::string> names = {"delta"};
  if (cm.sigma_sampled) names.emplace_back("sigma");
  if (cm.mu_sampled) names.emplace_back("mu");

  for (std::size_t p = 0; p < names.size(); ++p) {
    ParamChains pc;
    pc.name = names[p];
    for (auto& r : results) pc.chains.push_back(std::move(r.cols[p]));
    pc.rhat = gelman_rubin(pc.chains);
    double ess = 0.0;
    for (const auto& c : pc.chains) ess += effective_sample_size(c);
    pc.ess = std::min(ess, static_cast<double>(settings.n_chains * settings.n_keep));
    out.params.push_back(std::move(pc));
  }
  for (const auto& r : results) out.accept_rate.push_back(r.accept_rate);
  out.converged = std::all_of(out.params.begin(), out.params.end(),
                              [](const ParamChains& p) { return p.rhat <= 1.01; });
  return out;
}

}  // namespace bft
