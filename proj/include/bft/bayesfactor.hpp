#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bft/density.hpp"
#include "bft/distributions.hpp"
#include "bft/error.hpp"
#include "bft/models.hpp"
#include "bft/quadrature.hpp"
#include "bft/sampler.hpp"

namespace bft {

enum class Method { SavageDickey, Encompassing, JZS };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::SavageDickey: return "savage-dickey";
    case Method::Encompassing: return "encompassing";
    case Method::JZS: return "jzs";
  }
  return "?";
}

enum class HypothesisKind { PointNull, Directional, IntervalNull };

struct HypothesisSpec {
  HypothesisKind kind = HypothesisKind::PointNull;
  double delta0 = 0.0;   // point null: H0 delta = delta0
  double epsilon = 0.0;  // interval null: H0 |delta| < epsilon

  static HypothesisSpec point(double delta0 = 0.0) {
    if (!std::isfinite(delta0)) throw parameter_error("hypothesis: delta0 must be finite");
    return {HypothesisKind::PointNull, delta0, 0.0};
  }
  static HypothesisSpec directional() { return {HypothesisKind::Directional, 0.0, 0.0}; }
  static HypothesisSpec interval(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw parameter_error("hypothesis: epsilon must be finite and > 0");
    return {HypothesisKind::IntervalNull, 0.0, epsilon};
  }
};

// bf01 is evidence for H0 over H1; bf10 its reciprocal. components carries
// the method's intermediate quantities (ordinates, evidential proportions,
// or the quadrature numerator/denominator).
struct BayesFactorResult {
  double bf01 = 1.0;
  double bf10 = 1.0;
  Method method = Method::SavageDickey;
  std::map<std::string, double> components;
  double mc_se = 0.0;
  bool converged = true;
  bool finite_sample_warning = false;  // zero evidential draws on one side
};

// transitivity: B_ab = B_ae / B_be
inline double compose_bf(double b_ae, double b_be) {
  if (!(b_ae > 0.0) || !std::isfinite(b_ae) || !(b_be > 0.0) || !std::isfinite(b_be))
    throw parameter_error("compose_bf: inputs must be positive and finite");
  return b_ae / b_be;
}

// Batch-means standard error of an estimator applied to 20 contiguous
// batches of the pooled draws. Non-finite batch estimates (possible for
// tail proportions) yield +inf rather than an error.
inline double mc_standard_error(std::span<const double> draws,
                                const std::function<double(std::span<const double>)>& estimator) {
  constexpr std::size_t n_batches = 20;
  const std::size_t batch = draws.size() / n_batches;
  if (batch < 50) throw estimation_error("mc_standard_error: too few draws for 20 batches");
  std::vector<double> est(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    est[b] = estimator(draws.subspan(b * batch, batch));
    if (!std::isfinite(est[b])) return std::numeric_limits<double>::infinity();
  }
  return sample_sd(est) / std::sqrt(static_cast<double>(n_batches));
}

namespace detail {

inline void check_prior_identity(const PosteriorDraws& draws, const PriorSpec& prior) {
  if (!(draws.delta_prior == prior))
    throw config_error("bayesfactor: prior does not match the prior used for sampling");
}

inline BayesFactorResult from_bf01(double bf01, Method m) {
  BayesFactorResult r;
  r.bf01 = bf01;
  r.bf10 = 1.0 / bf01;
  r.method = m;
  return r;
}

}  // namespace detail

// Point-null Bayes factor: posterior-to-prior ordinate ratio at delta0.
// The KDE ordinate is also evaluated at half and double bandwidth so the
// estimate's bandwidth sensitivity is visible next to the headline number.
inline BayesFactorResult savage_dickey_bf(const PosteriorDraws& draws, const PriorSpec& prior,
                                          double delta0 = 0.0) {
  detail::check_prior_identity(draws, prior);
  if (!std::isfinite(delta0)) throw parameter_error("savage_dickey_bf: delta0 must be finite");
  const auto pooled = draws.pooled_delta();
  const DensityEstimate est = fit_density(pooled);
  const double prior_ord = pdf(prior.dist(), delta0);
  // the ordinate is taken in log space so that draws far from delta0 still
  // give a finite (if extreme) Bayes factor instead of an underflowed zero
  const double log_post = log_density_at(est, delta0);
  const double post_ord = std::exp(log_post);
  const double post_half = density_at({est.draws, 0.5 * est.bandwidth}, delta0);
  const double post_double = density_at({est.draws, 2.0 * est.bandwidth}, delta0);

  auto r = detail::from_bf01(std::exp(log_post - std::log(prior_ord)), Method::SavageDickey);
  r.bf10 = std::exp(std::log(prior_ord) - log_post);
  r.converged = draws.converged;
  r.components = {
      {"posterior_ordinate", post_ord},
      {"prior_ordinate", prior_ord},
      {"log_bf01", log_post - std::log(prior_ord)},
      {"bandwidth", est.bandwidth},
      {"posterior_ordinate_bw_half", post_half},
      {"posterior_ordinate_bw_double", post_double},
      {"bf01_bw_half", post_half / prior_ord},
      {"bf01_bw_double", post_double / prior_ord},
  };
  r.mc_se = mc_standard_error(pooled, [&](std::span<const double> batch) {
    return density_at(fit_density(batch), delta0) / prior_ord;
  });
  return r;
}

namespace detail {

inline BayesFactorResult encompassing_result(std::size_t count_h0, std::size_t count_h1,
                                             double prior_h0, double prior_h1) {
  const auto n = static_cast<double>(count_h0 + count_h1);
  const double post_h0 = static_cast<double>(count_h0) / n;
  const double post_h1 = static_cast<double>(count_h1) / n;
  const double b0e = post_h0 / prior_h0;
  const double b1e = post_h1 / prior_h1;

  BayesFactorResult r;
  r.method = Method::Encompassing;
  if (count_h0 == 0 || count_h1 == 0) {
    // legitimate finite-sample outcome: report the infinity and the raw counts
    r.finite_sample_warning = true;
    r.bf10 = count_h0 == 0 ? std::numeric_limits<double>::infinity() : 0.0;
    r.bf01 = count_h0 == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    r.bf10 = compose_bf(b1e, b0e);
    r.bf01 = 1.0 / r.bf10;
  }
  r.components = {
      {"prior_mass_h0", prior_h0}, {"prior_mass_h1", prior_h1},
      {"post_mass_h0", post_h0},   {"post_mass_h1", post_h1},
      {"b0e", b0e},                {"b1e", b1e},
      {"count_h0", static_cast<double>(count_h0)},
      {"count_h1", static_cast<double>(count_h1)},
  };
  return r;
}

}  // namespace detail

// Directional test H1: delta > 0 vs H0: delta <= 0, both nested in the
// encompassing model; bf10 = B1e / B0e with evidential proportions from
// the draws (posterior) and the prior CDF (exact).
inline BayesFactorResult encompassing_directional_bf(const PosteriorDraws& draws,
                                                     const PriorSpec& prior) {
  detail::check_prior_identity(draws, prior);
  const auto pooled = draws.pooled_delta();
  std::size_t count_h0 = 0;
  for (double d : pooled) count_h0 += d <= 0.0;
  const double prior_h0 = cdf(prior.dist(), 0.0);

  auto r = detail::encompassing_result(count_h0, pooled.size() - count_h0, prior_h0,
                                       1.0 - prior_h0);
  r.converged = draws.converged;
  if (!r.finite_sample_warning)
    r.mc_se = mc_standard_error(pooled, [&](std::span<const double> batch) {
      std::size_t le = 0;
      for (double d : batch) le += d <= 0.0;
      const double p0 = static_cast<double>(le) / static_cast<double>(batch.size());
      return ((1.0 - p0) / (1.0 - prior_h0)) / (p0 / prior_h0);
    });
  return r;
}

// Interval null H0: |delta| < epsilon vs H1: |delta| > epsilon.
inline BayesFactorResult encompassing_interval_bf(const PosteriorDraws& draws,
                                                  const PriorSpec& prior, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw parameter_error("encompassing_interval_bf: epsilon must be finite and > 0");
  detail::check_prior_identity(draws, prior);
  const auto pooled = draws.pooled_delta();
  std::size_t inside = 0, outside = 0;
  for (double d : pooled) {
    inside += std::fabs(d) < epsilon;
    outside += std::fabs(d) > epsilon;
  }
  const auto dist = prior.dist();
  const double prior_in = cdf(dist, epsilon) - cdf(dist, -epsilon);

  auto r = detail::encompassing_result(inside, outside, prior_in, 1.0 - prior_in);
  r.converged = draws.converged;
  r.components["epsilon"] = epsilon;
  if (!r.finite_sample_warning)
    r.mc_se = mc_standard_error(pooled, [&](std::span<const double> batch) {
      std::size_t in = 0;
      for (double d : batch) in += std::fabs(d) < epsilon;
      const double p0 = static_cast<double>(in) / static_cast<double>(batch.size());
      return ((1.0 - p0) / (1.0 - prior_in)) / (p0 / prior_in);
    });
  return r;
}

// Closed-form JZS Bayes factor (Cauchy(0,r) on effect size, Jeffreys on
// sigma^2). The g-integral over (0,inf) is mapped to (0,1) by
// u = g/(1+g); the integrable g^(-3/2)exp(-1/(2g)) endpoint singularity
// becomes an exponentially vanishing endpoint and the u->1 endpoint tends
// to the finite limit 1/sqrt(2*pi*N*r^2). The integrand is evaluated in
// log space around its maximum so extreme t stays representable.
inline BayesFactorResult jzs_bf(double t, std::size_t n_obs, double r_scale) {
  if (n_obs < 2) throw parameter_error("jzs_bf: N must be >= 2");
  if (!(r_scale > 0.0) || !std::isfinite(r_scale))
    throw parameter_error("jzs_bf: r must be finite and > 0");
  if (!std::isfinite(t)) throw parameter_error("jzs_bf: t must be finite");

  const double nu = static_cast<double>(n_obs) - 1.0;
  const double n = static_cast<double>(n_obs);
  const double t2 = t * t;
  const double log_num = -0.5 * (nu + 1.0) * std::log1p(t2 / nu);

  auto log_integrand = [&](double u) {
    const double g = u / (1.0 - u);
    const double a = 1.0 + n * g * r_scale * r_scale;
    return -0.5 * std::log(a) - 0.5 * (nu + 1.0) * std::log1p(t2 / (a * nu)) -
           0.5 * std::log(2.0 * std::numbers::pi) - 1.5 * std::log(g) - 0.5 / g -
           2.0 * std::log1p(-u);
  };

  double shift = -std::numeric_limits<double>::infinity();
  for (int i = 1; i < 64; ++i) shift = std::max(shift, log_integrand(i / 64.0));

  const QuadratureResult quad = integrate_adaptive(
      [&](double u) { return std::exp(log_integrand(u) - shift); }, 0.0, 1.0, 1e-8);
  const double log_den = shift + std::log(quad.value);

  auto r = detail::from_bf01(std::exp(log_num - log_den), Method::JZS);
  r.bf10 = std::exp(log_den - log_num);
  r.components = {
      {"numerator", std::exp(log_num)},
      {"denominator", std::exp(log_den)},
      {"log_numerator", log_num},
      {"log_denominator", log_den},
      {"quad_rel_error", quad.abs_error / quad.value},
      {"quad_segments", static_cast<double>(quad.segments)},
  };
  return r;
}

}  // namespace bft
