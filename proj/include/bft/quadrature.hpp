#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bft/error.hpp"

namespace bft {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;     // sum of per-segment |K15 - G7| estimates
  std::size_t segments = 0;   // final segment count
};

namespace detail {

// 15-point Kronrod abscissae (positive half) with Kronrod weights; the
// embedded 7-point Gauss rule sits on nodes 1,3,5,7.
inline constexpr std::array<double, 8> gk_nodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr std::array<double, 8> gk_weights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Segment {
  double a, b;
  double kronrod;
  double err;
};

template <typename F>
Segment gk15(F&& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double gauss = 0.0, kronrod = 0.0;
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * gk_nodes[i];
    const double pair = f(mid + dx) + f(mid - dx);
    kronrod += gk_weights[i] * pair;
    if (i % 2 == 1) gauss += gauss_weights[i / 2] * pair;
  }
  const double center = f(mid);
  kronrod += gk_weights[7] * center;
  gauss += gauss_weights[3] * center;
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::fabs(kronrod - gauss)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod 7/15 on [a,b]: repeatedly bisects the
// segment with the largest error estimate until the summed estimate meets
// max(abs_tol, rel_tol*|integral|). Deterministic for a given integrand.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-8,
                                    double abs_tol = 0.0, std::size_t max_segments = 512) {
  if (!(a < b)) throw parameter_error("integrate_adaptive: need a < b");
  std::vector<detail::Segment> segs;
  segs.reserve(64);
  segs.push_back(detail::gk15(f, a, b));
  for (;;) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].kronrod;
      err += segs[i].err;
      if (segs[i].err > segs[worst].err) worst = i;
    }
    if (err <= std::max(abs_tol, rel_tol * std::fabs(total)))
      return {total, err, segs.size()};
    if (segs.size() >= max_segments)
      throw numeric_error("integrate_adaptive: no convergence after " +
                          std::to_string(segs.size()) + " segments (estimate " +
                          std::to_string(total) + ", error " + std::to_string(err) + ")");
    const detail::Segment s = segs[worst];
    const double m = 0.5 * (s.a + s.b);
    segs[worst] = detail::gk15(f, s.a, m);
    segs.push_back(detail::gk15(f, m, s.b));
  }
}

}  // namespace bft
