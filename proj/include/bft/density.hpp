#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "bft/error.hpp"
#include "bft/stats.hpp"

namespace bft {

// Gaussian KDE over posterior draws. Evaluation is the exact sum over
// kernels; there is no binning or boundary correction (ordinates are
// taken at interior points of an unbounded posterior).
struct DensityEstimate {
  std::vector<double> draws;
  double bandwidth = 0.0;
};

// Silverman's rule: h = 0.9 * min(sd, IQR/1.34) * n^(-1/5). A degenerate
// IQR (heavy ties) falls back to the sd.
inline DensityEstimate fit_density(std::span<const double> draws) {
  if (draws.size() < 100)
    throw estimation_error("fit_density: need >= 100 draws");
  for (double d : draws)
    if (!std::isfinite(d)) throw estimation_error("fit_density: non-finite draw");
  const double sd = sample_sd(draws);
  if (sd <= 0.0) throw estimation_error("fit_density: zero variance in draws");
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_type7_sorted(sorted, 0.75) - quantile_type7_sorted(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  const double h = 0.9 * spread * std::pow(static_cast<double>(draws.size()), -0.2);
  return {std::move(sorted), h};
}

inline double density_at(const DensityEstimate& est, double point) {
  const double h = est.bandwidth;
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * h);
  double acc = 0.0;
  for (double d : est.draws) {
    const double u = (point - d) / h;
    acc += std::exp(-0.5 * u * u);
  }
  return acc * norm / static_cast<double>(est.draws.size());
}

// log ordinate via log-sum-exp; stays finite far into the tails where the
// plain sum underflows to zero
inline double log_density_at(const DensityEstimate& est, double point) {
  const double h = est.bandwidth;
  double top = -std::numeric_limits<double>::infinity();
  for (double d : est.draws) {
    const double u = (point - d) / h;
    top = std::max(top, -0.5 * u * u);
  }
  double acc = 0.0;
  for (double d : est.draws) {
    const double u = (point - d) / h;
    acc += std::exp(-0.5 * u * u - top);
  }
  return top + std::log(acc) -
         std::log(std::sqrt(2.0 * std::numbers::pi) * h * static_cast<double>(est.draws.size()));
}

inline std::vector<std::pair<double, double>> density_curve(const DensityEstimate& est,
                                                            std::span<const double> grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double x : grid) {
    if (!std::isfinite(x)) throw parameter_error("density_curve: non-finite grid point");
    out.emplace_back(x, density_at(est, x));
  }
  return out;
}

}  // namespace bft
