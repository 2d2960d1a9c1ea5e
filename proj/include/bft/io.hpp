#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bft/bayesfactor.hpp"
#include "bft/error.hpp"
#include "bft/sampler.hpp"
#include "bft/simulation.hpp"

namespace bft {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// locale-independent: std::from_chars never consults the locale
inline double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  const std::string_view t = trim(cell);
  double value = 0.0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw parse_error("row " + std::to_string(row) + ", column " + std::to_string(col) +
                      ": not a number: '" + std::string(t) + "'");
  return value;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// single column, one value per line, no header
inline std::vector<double> read_one_column(const std::string& path) {
  std::vector<double> out;
  std::size_t row = 0;
  for (const auto& line : detail::read_lines(path)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    out.push_back(detail::parse_cell(line, row, 1));
  }
  if (out.size() < 2)
    throw insufficient_data_error(path + ": need at least 2 values");
  return out;
}

// two columns with header "x,y"; unequal group sizes use blank cells
inline std::pair<std::vector<double>, std::vector<double>> read_two_column(
    const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw insufficient_data_error(path + ": empty file");
  {
    std::string header(detail::trim(lines.front()));
    std::transform(header.begin(), header.end(), header.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    header.erase(std::remove_if(header.begin(), header.end(),
                                [](unsigned char c) { return std::isspace(c); }),
                 header.end());
    if (header != "x,y")
      throw parse_error(path + ": expected header 'x,y', got '" +
                        std::string(detail::trim(lines.front())) + "'");
  }
  std::vector<double> x, y;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (detail::trim(line).empty()) continue;
    const auto comma = line.find(',');
    const std::string_view cx = line.substr(0, comma);
    const std::string_view cy =
        comma == std::string_view::npos ? std::string_view{} : line.substr(comma + 1);
    if (!detail::trim(cx).empty()) x.push_back(detail::parse_cell(cx, i + 1, 1));
    if (!detail::trim(cy).empty()) y.push_back(detail::parse_cell(cy, i + 1, 2));
  }
  if (x.size() < 2 || y.size() < 2)
    throw insufficient_data_error(path + ": need at least 2 values per column");
  return {std::move(x), std::move(y)};
}

// one row per draw: chain, iteration, delta, sigma, mu (blank when absent)
inline std::string chains_to_csv(const PosteriorDraws& draws) {
  std::ostringstream out;
  out << "chain,iteration,delta,sigma,mu\n";
  const bool has_sigma = draws.params.size() > 1 && draws.params[1].name == "sigma";
  const ParamChains* mu = nullptr;
  for (const auto& p : draws.params)
    if (p.name == "mu") mu = &p;
  for (std::size_t c = 0; c < draws.n_chains; ++c)
    for (std::size_t i = 0; i < draws.n_keep; ++i) {
      out << c << ',' << i << ',' << detail::format_double(draws.params[0].chains[c][i]) << ',';
      if (has_sigma) out << detail::format_double(draws.params[1].chains[c][i]);
      out << ',';
      if (mu) out << detail::format_double(mu->chains[c][i]);
      out << '\n';
    }
  return out.str();
}

inline nlohmann::json result_to_json(const BayesFactorResult& r) {
  nlohmann::json j;
  j["method"] = method_name(r.method);
  j["bf01"] = r.bf01;
  j["bf10"] = r.bf10;
  j["components"] = r.components;
  j["mc_se"] = r.mc_se;
  j["converged"] = r.converged;
  j["finite_sample_warning"] = r.finite_sample_warning;
  return j;
}

inline nlohmann::json report_to_json(const SimulationReport& rep) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : rep.cells) {
    nlohmann::json jc;
    jc["g"] = c.cell.g_effect;
    jc["n"] = c.cell.n_obs;
    jc["n_datasets"] = c.cell.n_datasets;
    jc["consistency"] = c.consistency;
    jc["n_failed"] = c.n_failed;
    jc["runtime_seconds"] = c.runtime_seconds;
    for (const auto& [label, s] :
         {std::pair<const char*, const FiveNumberSummary&>{"jzs", c.jzs},
          {"sampling", c.sampling}}) {
      jc[label] = {{"min", s.min}, {"q1", s.q1}, {"median", s.median},
                   {"q3", s.q3},   {"max", s.max}};
    }
    cells.push_back(std::move(jc));
  }
  nlohmann::json j;
  j["cells"] = std::move(cells);
  j["prior_scale"] = rep.prior_scale;
  j["total_runtime_seconds"] = rep.total_runtime_seconds;
  return j;
}

// columns follow the benchmark table: one row per cell x method
inline std::string report_to_csv(const SimulationReport& rep) {
  std::ostringstream out;
  out << "g,N,method,min,q1,median,q3,max,consistency\n";
  char buf[256];
  for (const auto& c : rep.cells) {
    for (const auto& [label, s] :
         {std::pair<const char*, const FiveNumberSummary&>{"jzs", c.jzs},
          {"sampling", c.sampling}}) {
      std::snprintf(buf, sizeof buf, "%g,%zu,%s,%.6g,%.6g,%.6g,%.6g,%.6g,%.4g\n",
                    c.cell.g_effect, c.cell.n_obs, label, s.min, s.q1, s.median, s.q3,
                    s.max, c.consistency);
      out << buf;
    }
  }
  return out.str();
}

inline std::string log_bf_pairs_to_csv(const SimulationReport& rep) {
  std::ostringstream out;
  out << "g,N,dataset,log_bf01_jzs,log_bf01_sampling\n";
  for (const auto& c : rep.cells)
    for (std::size_t i = 0; i < c.log_bf_pairs.size(); ++i)
      out << c.cell.g_effect << ',' << c.cell.n_obs << ',' << i << ','
          << detail::format_double(c.log_bf_pairs[i].first) << ','
          << detail::format_double(c.log_bf_pairs[i].second) << '\n';
  return out.str();
}

inline std::string curve_to_csv(const std::vector<std::pair<double, double>>& curve) {
  std::ostringstream out;
  out << "x,density\n";
  for (const auto& [x, f] : curve)
    out << detail::format_double(x) << ',' << detail::format_double(f) << '\n';
  return out.str();
}

// (x, prior density, posterior density) over a grid, then one annotation
// row carrying the two ordinates at delta0
inline std::string plot_data_csv(const PriorSpec& prior, const DensityEstimate& posterior,
                                 double grid_min, double grid_max, std::size_t grid_points,
                                 double delta0) {
  if (grid_points < 2) throw parameter_error("plot data: need >= 2 grid points");
  if (!(grid_min < grid_max)) throw parameter_error("plot data: need grid_min < grid_max");
  const auto dist = prior.dist();
  std::ostringstream out;
  out << "x,prior_density,posterior_density,note\n";
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = grid_min + (grid_max - grid_min) * static_cast<double>(i) /
                                    static_cast<double>(grid_points - 1);
    out << detail::format_double(x) << ',' << detail::format_double(pdf(dist, x)) << ','
        << detail::format_double(density_at(posterior, x)) << ",\n";
  }
  out << detail::format_double(delta0) << ',' << detail::format_double(pdf(dist, delta0))
      << ',' << detail::format_double(density_at(posterior, delta0))
      << ",ordinate_at_delta0\n";
  return out.str();
}

}  // namespace bft
