#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bft/distributions.hpp"
#include "bft/error.hpp"
#include "bft/stats.hpp"

namespace bft {

enum class Design { OneSample, TwoSample };

// Effect-size prior under the unconstrained/encompassing model: either
// Cauchy(0, scale) or Normal(0, variance). Note the Normal case is
// parameterized by its *variance*.
struct PriorSpec {
  enum class Family { Cauchy, Normal };
  Family family = Family::Cauchy;
  double scale_or_variance = 1.0;

  static PriorSpec cauchy(double scale) { return {Family::Cauchy, scale}; }
  static PriorSpec normal_variance(double variance) { return {Family::Normal, variance}; }

  void validate() const {
    if (!std::isfinite(scale_or_variance) || scale_or_variance <= 0.0)
      throw parameter_error("prior: dispersion parameter must be finite and > 0");
  }

  DistParams dist() const {
    validate();
    if (family == Family::Cauchy) return DistParams::cauchy(0.0, scale_or_variance);
    return DistParams::normal(0.0, std::sqrt(scale_or_variance));
  }

  bool operator==(const PriorSpec&) const = default;
};

namespace detail {

inline void check_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw parameter_error(std::string(what) + ": non-finite value");
}

// sufficient statistics of a standardized vector; the normal likelihood
// needs only (n, sum, sumsq)
struct Moments {
  std::size_t n = 0;
  double sum = 0.0;
  double sumsq = 0.0;

  static Moments of(std::span<const double> v) {
    Moments m;
    m.n = v.size();
    for (double x : v) {
      m.sum += x;
      m.sumsq += x * x;
    }
    return m;
  }
};

inline double normal_loglik(const Moments& m, double mu, double sigma) {
  const double n = static_cast<double>(m.n);
  // quad can round slightly negative when the residuals are ~0; clamping
  // keeps sigma->0 well defined (x/0 -> +inf -> -inf log density, never NaN)
  const double quad = std::max(m.sumsq - 2.0 * mu * m.sum + n * mu * mu, 0.0);
  return -0.5 * n * std::log(2.0 * std::numbers::pi) - n * std::log(sigma) -
         quad / (2.0 * sigma * sigma);
}

}  // namespace detail

// Raw data plus its standardized form. One-sample: z = y / sd(y) (the
// mean is kept, matching the model's mu = delta*sigma parameterization).
// Two-sample: both groups are rescaled by the first group's mean and sd.
struct ObservedSample {
  Design design = Design::OneSample;
  std::vector<double> y;        // raw data (one-sample) or second group
  std::vector<double> x;        // first group (two-sample only)
  std::vector<double> z;        // standardized y (one-sample)
  std::vector<double> zx, zy;   // standardized groups (two-sample)
  detail::Moments mz, mzx, mzy;
};

inline ObservedSample standardize(std::span<const double> y) {
  detail::check_finite(y, "standardize");
  if (y.size() < 2) throw insufficient_data_error("standardize: need >= 2 observations");
  const double sd = sample_sd(y);
  if (sd <= 0.0) throw degenerate_data_error("standardize: zero sample variance");
  ObservedSample s;
  s.design = Design::OneSample;
  s.y.assign(y.begin(), y.end());
  s.z.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) s.z[i] = y[i] / sd;
  s.mz = detail::Moments::of(s.z);
  return s;
}

inline ObservedSample standardize(std::span<const double> x, std::span<const double> y) {
  detail::check_finite(x, "standardize");
  detail::check_finite(y, "standardize");
  if (x.size() < 2 || y.size() < 2)
    throw insufficient_data_error("standardize: need >= 2 observations per group");
  const double mx = mean(x);
  const double sdx = sample_sd(x);
  if (sdx <= 0.0) throw degenerate_data_error("standardize: zero variance in reference group");
  ObservedSample s;
  s.design = Design::TwoSample;
  s.x.assign(x.begin(), x.end());
  s.y.assign(y.begin(), y.end());
  s.zx.resize(x.size());
  s.zy.resize(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) s.zx[i] = (x[i] - mx) / sdx;
  for (std::size_t i = 0; i < y.size(); ++i) s.zy[i] = (y[i] - mx) / sdx;
  s.mzx = detail::Moments::of(s.zx);
  s.mzy = detail::Moments::of(s.zy);
  return s;
}

struct TStatistic {
  double t = 0.0;
  double dof = 0.0;
};

// Classical one-sample t on the raw data (invariant to standardization).
inline TStatistic t_statistic(const ObservedSample& sample) {
  if (sample.design != Design::OneSample)
    throw parameter_error("t_statistic: one-sample design only");
  const auto n = static_cast<double>(sample.y.size());
  const double sd = sample_sd(sample.y);
  if (sd <= 0.0) throw degenerate_data_error("t_statistic: zero sample variance");
  return {mean(sample.y) / (sd / std::sqrt(n)), n - 1.0};
}

// The two graphical models. One-sample: delta ~ prior, sigma ~ HalfCauchy(0,1),
// mu = delta*sigma, z_i ~ N(mu, sigma^2). Two-sample adds mu ~ Cauchy(0,1)
// and splits the group means as mu +- delta*sigma/2.
//
// Two verification hooks used by the test suites:
//   likelihood_enabled = false  samples the bare prior (prior-recovery checks)
//   fixed_sigma                 conjugate test model: sigma pinned, no sigma prior
struct ModelSpec {
  Design design = Design::OneSample;
  PriorSpec delta_prior = PriorSpec::cauchy(1.0);
  DistParams sigma_prior = DistParams::half_cauchy(1.0);
  DistParams mu_prior = DistParams::cauchy(0.0, 1.0);
  bool likelihood_enabled = true;
  std::optional<double> fixed_sigma;

  static ModelSpec one_sample(PriorSpec prior) {
    prior.validate();
    return {Design::OneSample, prior, DistParams::half_cauchy(1.0),
            DistParams::cauchy(0.0, 1.0), true, std::nullopt};
  }
  static ModelSpec two_sample(PriorSpec prior) {
    prior.validate();
    return {Design::TwoSample, prior, DistParams::half_cauchy(1.0),
            DistParams::cauchy(0.0, 1.0), true, std::nullopt};
  }
  static ModelSpec conjugate_test(double tau_squared) {
    if (!(tau_squared > 0.0)) throw parameter_error("conjugate model: tau^2 must be > 0");
    ModelSpec m;
    m.design = Design::OneSample;
    m.delta_prior = PriorSpec::normal_variance(tau_squared);
    m.fixed_sigma = 1.0;
    return m;
  }
};

struct ModelParams {
  double delta = 0.0;
  double sigma = 1.0;
  double mu = 0.0;  // two-sample only
};

// log[prior(delta) * prior(sigma) * (prior(mu)) * likelihood]; -inf encodes
// sigma outside its support.
inline double log_joint_density(const ModelSpec& spec, const ObservedSample& sample,
                                const ModelParams& p) {
  if (sample.design != spec.design)
    throw parameter_error("log_joint_density: sample/spec design mismatch");
  const double sigma = spec.fixed_sigma ? *spec.fixed_sigma : p.sigma;
  if (!(sigma > 0.0)) return -std::numeric_limits<double>::infinity();

  double lp = log_pdf(spec.delta_prior.dist(), p.delta);
  if (!spec.fixed_sigma) lp += log_pdf(spec.sigma_prior, sigma);

  if (spec.design == Design::OneSample) {
    if (spec.likelihood_enabled)
      lp += detail::normal_loglik(sample.mz, p.delta * sigma, sigma);
  } else {
    lp += log_pdf(spec.mu_prior, p.mu);
    if (spec.likelihood_enabled) {
      const double alpha = p.delta * sigma;
      lp += detail::normal_loglik(sample.mzx, p.mu + 0.5 * alpha, sigma);
      lp += detail::normal_loglik(sample.mzy, p.mu - 0.5 * alpha, sigma);
    }
  }
  return lp;
}

}  // namespace bft
