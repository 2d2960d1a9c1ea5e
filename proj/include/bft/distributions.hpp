#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "bft/error.hpp"
#include "bft/rng.hpp"

namespace bft {

enum class Family { Cauchy, HalfCauchy, Normal, StudentT };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Cauchy: return "cauchy";
    case Family::HalfCauchy: return "half-cauchy";
    case Family::Normal: return "normal";
    case Family::StudentT: return "student-t";
  }
  return "?";
}

// Location/scale parameterization; scale is the sd for Normal, the usual
// scale for Cauchy/StudentT. HalfCauchy is the zero-truncation of
// Cauchy(0, scale) with density doubled on [0, inf), so its location is
// pinned at 0. dof applies to StudentT only.
struct DistParams {
  Family family = Family::Normal;
  double location = 0.0;
  double scale = 1.0;
  double dof = 0.0;

  static DistParams cauchy(double location, double scale) {
    return {Family::Cauchy, location, scale, 0.0};
  }
  static DistParams half_cauchy(double scale) {
    return {Family::HalfCauchy, 0.0, scale, 0.0};
  }
  static DistParams normal(double location, double scale) {
    return {Family::Normal, location, scale, 0.0};
  }
  static DistParams student_t(double dof, double location = 0.0, double scale = 1.0) {
    return {Family::StudentT, location, scale, dof};
  }

  void validate() const {
    if (!std::isfinite(location) || !std::isfinite(scale) || scale <= 0.0)
      throw parameter_error(std::string(family_name(family)) +
                            ": scale must be finite and > 0, location finite");
    if (family == Family::HalfCauchy && location != 0.0)
      throw parameter_error("half-cauchy: location is pinned at 0");
    if (family == Family::StudentT && (!std::isfinite(dof) || dof <= 0.0))
      throw parameter_error("student-t: dof must be finite and > 0");
  }

  bool operator==(const DistParams&) const = default;
};

namespace detail {

inline constexpr double pi = std::numbers::pi;

// Regularized incomplete beta I_x(a,b) via the Lentz continued fraction.
// Standard expansion; converges fast for x < (a+1)/(a+b+2), and the
// symmetry I_x(a,b) = 1 - I_{1-x}(b,a) covers the rest.
inline double ibeta_cf(double a, double b, double x) {
  constexpr int max_iter = 400;
  constexpr double eps = 3e-16;
  constexpr double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  throw numeric_error("incomplete beta: continued fraction did not converge");
}

inline double reg_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                        a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(log_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * ibeta_cf(a, b, x) / a;
  return 1.0 - bt * ibeta_cf(b, a, 1.0 - x) / b;
}

// Marsaglia-Tsang; the shape<1 case boosts through shape+1.
inline double gamma_draw(Rng& rng, double shape) {
  if (shape < 1.0)
    return gamma_draw(rng, shape + 1.0) * std::pow(rng.uniform(), 1.0 / shape);
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

inline double cauchy_log_pdf(double z) {  // standardized
  return -std::log(pi) - std::log1p(z * z);
}

inline double student_t_log_pdf(double z, double dof) {
  // log-gamma form keeps the Gamma ratio finite for large dof
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
         0.5 * std::log(dof * pi) - 0.5 * (dof + 1.0) * std::log1p(z * z / dof);
}

inline double normal_log_pdf(double z) {
  return -0.5 * std::log(2.0 * pi) - 0.5 * z * z;
}

}  // namespace detail

inline double log_pdf(const DistParams& p, double x) {
  p.validate();
  if (!std::isfinite(x))
    throw parameter_error("pdf: x must be finite");
  const double z = (x - p.location) / p.scale;
  const double log_scale = std::log(p.scale);
  switch (p.family) {
    case Family::Cauchy:
      return detail::cauchy_log_pdf(z) - log_scale;
    case Family::HalfCauchy:
      if (x < 0.0) return -std::numeric_limits<double>::infinity();
      return std::log(2.0) + detail::cauchy_log_pdf(z) - log_scale;
    case Family::Normal:
      return detail::normal_log_pdf(z) - log_scale;
    case Family::StudentT:
      return detail::student_t_log_pdf(z, p.dof) - log_scale;
  }
  throw parameter_error("pdf: unknown family");
}

inline double pdf(const DistParams& p, double x) { return std::exp(log_pdf(p, x)); }

inline double cdf(const DistParams& p, double x) {
  p.validate();
  if (std::isnan(x)) throw parameter_error("cdf: x must not be NaN");
  const double z = (x - p.location) / p.scale;
  switch (p.family) {
    case Family::Cauchy:
      return 0.5 + std::atan(z) / detail::pi;
    case Family::HalfCauchy:
      if (x <= 0.0) return 0.0;
      return 2.0 / detail::pi * std::atan(z);
    case Family::Normal:
      return 0.5 * std::erfc(-z / std::numbers::sqrt2);
    case Family::StudentT: {
      if (std::isinf(z)) return z < 0.0 ? 0.0 : 1.0;
      const double w = p.dof / (p.dof + z * z);
      const double half_tail = 0.5 * detail::reg_incomplete_beta(0.5 * p.dof, 0.5, w);
      return z > 0.0 ? 1.0 - half_tail : half_tail;
    }
  }
  throw parameter_error("cdf: unknown family");
}

inline double sample_one(const DistParams& p, Rng& rng) {
  switch (p.family) {
    case Family::Cauchy:
      // inverse CDF: tan transform
      return p.location + p.scale * std::tan(detail::pi * (rng.uniform() - 0.5));
    case Family::HalfCauchy:
      return p.scale * std::fabs(std::tan(detail::pi * (rng.uniform() - 0.5)));
    case Family::Normal:
      return p.location + p.scale * rng.normal();
    case Family::StudentT: {
      const double chi2 = 2.0 * detail::gamma_draw(rng, 0.5 * p.dof);
      return p.location + p.scale * rng.normal() / std::sqrt(chi2 / p.dof);
    }
  }
  throw parameter_error("sample: unknown family");
}

inline std::vector<double> sample(const DistParams& p, Rng& rng, std::size_t n) {
  p.validate();
  if (n < 1) throw parameter_error("sample: n must be >= 1");
  std::vector<double> out(n);
  for (auto& v : out) v = sample_one(p, rng);
  return out;
}

// Upper tail 1 - F(t) of StudentT(dof), the one-sided quantity; callers
// wanting the conventional two-sided p-value use 2 * (1 - F(|t|)).
inline double t_tail_probability(double t, double dof) {
  if (!std::isfinite(dof) || dof <= 0.0)
    throw parameter_error("t_tail_probability: dof must be finite and > 0");
  if (std::isnan(t)) throw parameter_error("t_tail_probability: t must not be NaN");
  return 1.0 - cdf(DistParams::student_t(dof), t);
}

}  // namespace bft
