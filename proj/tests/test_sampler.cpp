#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "bft/density.hpp"
#include "bft/distributions.hpp"
#include "bft/models.hpp"
#include "bft/sampler.hpp"
#include "test_support.hpp"

using namespace bft;
using Catch::Matchers::WithinAbs;

namespace {

const std::vector<double> sleep_data = {0.7, -1.1, -0.2, 1.2, 0.1, 3.4, 3.7, 0.8, 1.8, 2.0};

SamplerSettings quick(std::uint64_t seed, std::size_t keep = 5000) {
  SamplerSettings st;
  st.seed = seed;
  st.n_keep = keep;
  return st;
}

}  // namespace

TEST_CASE("gelman-rubin diagnostic") {
  const std::vector<double> c0(100, 2.5);
  CHECK(gelman_rubin({c0, c0, c0}) == 1.0);

  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> iid(4, std::vector<double>(5000));
  for (auto& c : iid)
    for (auto& v : c) v = nd(gen);
  CHECK(gelman_rubin(iid) < 1.01);

  auto shifted = iid;
  for (auto& v : shifted[0]) v += 10.0;
  CHECK(gelman_rubin(shifted) > 2.0);

  CHECK_THROWS_AS(gelman_rubin({c0}), shape_error);
  CHECK_THROWS_AS(gelman_rubin({c0, std::vector<double>(99, 1.0)}), shape_error);
  CHECK_THROWS_AS(gelman_rubin({{1.0, 2.0}, {1.0, 2.0}}), shape_error);
}

TEST_CASE("effective sample size") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd;
  std::vector<double> iid(5000);
  for (auto& v : iid) v = nd(gen);
  const double ess_iid = effective_sample_size(iid);
  CHECK(ess_iid >= 0.8 * 5000.0);
  CHECK(ess_iid <= 1.05 * 5000.0);

  // AR(1) with coefficient 0.9: ESS ~ n (1-rho)/(1+rho)
  std::vector<double> ar(20000);
  ar[0] = nd(gen);
  for (std::size_t i = 1; i < ar.size(); ++i) ar[i] = 0.9 * ar[i - 1] + nd(gen);
  const double expected = static_cast<double>(ar.size()) * (1.0 - 0.9) / (1.0 + 0.9);
  const double got = effective_sample_size(ar);
  CHECK(got > expected / 1.5);
  CHECK(got < expected * 1.5);

  CHECK(effective_sample_size(std::vector<double>(500, 3.0)) == 1.0);
  CHECK_THROWS_AS(effective_sample_size(std::vector<double>(9, 0.0)), parameter_error);
}

TEST_CASE("settings validation") {
  SamplerSettings st;
  st.n_chains = 1;
  CHECK_THROWS_AS(st.validate(), parameter_error);
  st = SamplerSettings{};
  st.n_keep = 999;
  CHECK_THROWS_AS(st.validate(), parameter_error);
  st = SamplerSettings{};
  st.target_accept = 1.0;
  CHECK_THROWS_AS(st.validate(), parameter_error);
}

TEST_CASE("posterior sampling is deterministic and respects support") {
  const auto sample = standardize(sleep_data);
  const auto spec = ModelSpec::one_sample(PriorSpec::cauchy(1.0));
  const auto a = sample_posterior(spec, sample, quick(42));
  auto serial = quick(42);
  serial.parallel_chains = false;
  const auto b = sample_posterior(spec, sample, serial);

  REQUIRE(a.params.size() == 2);
  for (std::size_t p = 0; p < a.params.size(); ++p) {
    CHECK(a.params[p].chains == b.params[p].chains);  // bit-identical
    CHECK(a.params[p].rhat == b.params[p].rhat);
  }
  for (const auto& chain : a.param("sigma").chains)
    for (double s : chain) CHECK(s > 0.0);
  CHECK(a.converged);
  for (double ar : a.accept_rate) {
    CHECK(ar > 0.2);
    CHECK(ar < 0.65);
  }
}

TEST_CASE("sleep posterior reproduces the published ordinate at zero") {
  const auto draws = sample_posterior(ModelSpec::one_sample(PriorSpec::cauchy(1.0)),
                                      standardize(sleep_data), quick(1002, 20000));
  const auto est = fit_density(draws.pooled_delta());
  CHECK_THAT(density_at(est, 0.0), WithinAbs(0.127, 0.02));
}

TEST_CASE("symmetric data give a centered posterior") {
  ObservedSample s;
  s.design = Design::OneSample;
  s.z.assign(200, 0.0);
  s.mz = detail::Moments::of(s.z);
  const auto draws =
      sample_posterior(ModelSpec::one_sample(PriorSpec::cauchy(1.0)), s, quick(3));
  CHECK_THAT(bft_test::mean_of(draws.pooled_delta()), WithinAbs(0.0, 0.05));
}

TEST_CASE("conjugate model matches the closed-form posterior") {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> nd;
  std::vector<double> y(30);
  for (auto& v : y) v = 0.3 + nd(gen);
  const auto sample = standardize(y);

  const double tau2 = 1.0;
  const double n = static_cast<double>(sample.z.size());
  const double zbar = bft_test::mean_of(sample.z);
  const double post_mean = n * tau2 * zbar / (1.0 + n * tau2);
  const double post_sd = std::sqrt(tau2 / (1.0 + n * tau2));

  const auto draws =
      sample_posterior(ModelSpec::conjugate_test(tau2), sample, quick(5, 20000));
  REQUIRE(draws.params.size() == 1);  // only delta is sampled
  const auto pooled = draws.pooled_delta();

  const double ess = draws.param("delta").ess;
  const double mc_se = post_sd / std::sqrt(ess);
  CHECK_THAT(bft_test::mean_of(pooled), WithinAbs(post_mean, 3.0 * mc_se));

  const double ks = bft_test::ks_distance(
      pooled, [&](double x) { return 0.5 * std::erfc(-(x - post_mean) / post_sd / std::numbers::sqrt2); });
  CHECK(ks < 0.02);
}

TEST_CASE("prior recovery with the likelihood switched off") {
  auto spec = ModelSpec::one_sample(PriorSpec::cauchy(1.0));
  spec.likelihood_enabled = false;
  const auto sample = standardize(sleep_data);
  const auto draws = sample_posterior(spec, sample, quick(15));  // 4 x 5000 = 2e4 draws
  const auto prior = PriorSpec::cauchy(1.0).dist();
  const double ks = bft_test::ks_distance(draws.pooled_delta(),
                                          [&](double x) { return cdf(prior, x); });
  CHECK(ks < 0.02);

  auto spec_n = ModelSpec::one_sample(PriorSpec::normal_variance(0.3));
  spec_n.likelihood_enabled = false;
  const auto draws_n = sample_posterior(spec_n, sample, quick(12));
  const auto prior_n = PriorSpec::normal_variance(0.3).dist();
  const double ks_n = bft_test::ks_distance(draws_n.pooled_delta(),
                                            [&](double x) { return cdf(prior_n, x); });
  CHECK(ks_n < 0.02);
}

TEST_CASE("posteriors from y and 3y agree in distribution") {
  std::vector<double> tripled = sleep_data;
  for (auto& v : tripled) v *= 3.0;
  const auto spec = ModelSpec::one_sample(PriorSpec::cauchy(1.0));
  const auto d1 = sample_posterior(spec, standardize(sleep_data), quick(21));
  const auto d2 = sample_posterior(spec, standardize(tripled), quick(21));

  auto pooled1 = d1.pooled_delta();
  std::sort(pooled1.begin(), pooled1.end());
  const double n1 = static_cast<double>(pooled1.size());
  auto ecdf1 = [&](double x) {
    const auto it = std::upper_bound(pooled1.begin(), pooled1.end(), x);
    return static_cast<double>(it - pooled1.begin()) / n1;
  };
  CHECK(bft_test::ks_distance(d2.pooled_delta(), ecdf1) < 0.03);
}

TEST_CASE("two-sample model samples all three parameters") {
  const std::vector<double> x = {62, 60, 56, 63, 56, 63, 59, 56, 44, 61};
  const std::vector<double> y = {57, 56, 49, 61, 55, 61, 57, 54, 62, 58};
  const auto draws = sample_posterior(ModelSpec::two_sample(PriorSpec::cauchy(1.0)),
                                      standardize(x, y), quick(9));
  REQUIRE(draws.params.size() == 3);
  CHECK(draws.param("mu").rhat < 1.01);
  CHECK(draws.param("sigma").ess > 100.0);
}

TEST_CASE("initialization failure surfaces as init_error") {
  ObservedSample s;
  s.design = Design::OneSample;
  s.z = {1.0, 2.0};
  s.mz.n = 2;
  s.mz.sum = std::numeric_limits<double>::infinity();  // poisoned moments
  s.mz.sumsq = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(
      sample_posterior(ModelSpec::one_sample(PriorSpec::cauchy(1.0)), s, quick(1)),
      init_error);
}

TEST_CASE("unconverged flag mirrors the rhat gate") {
  const auto draws = sample_posterior(ModelSpec::one_sample(PriorSpec::cauchy(1.0)),
                                      standardize(sleep_data), quick(33));
  bool all_ok = true;
  for (const auto& p : draws.params) all_ok = all_ok && p.rhat <= 1.01;
  CHECK(draws.converged == all_ok);
}
