#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bft/bayesfactor.hpp"
#include "bft/distributions.hpp"
#include "bft/error.hpp"
#include "bft/io.hpp"
#include "bft/models.hpp"
#include "bft/sampler.hpp"
#include "bft/simulation.hpp"
#include "bft/version.hpp"

namespace bft {

enum class OutputFormat { Json, Csv, Text };

struct RunConfig {
  enum class Sub { OneSample, TwoSample, Jzs, Simulate, PlotData };
  Sub subcommand = Sub::OneSample;

  std::string data_path;
  PriorSpec prior = PriorSpec::cauchy(1.0);
  HypothesisSpec hypothesis = HypothesisSpec::point();
  SamplerSettings sampler;
  bool seed_provided = false;
  OutputFormat format = OutputFormat::Text;
  std::string out_path;     // empty = stdout
  std::string chains_out;   // optional trace CSV

  // jzs
  double t = 0.0;
  std::size_t n_obs = 0;
  double r_scale = 1.0;

  // simulate
  std::size_t n_datasets = 50;
  std::string dump_logbf;

  // plot-data
  Design plot_design = Design::OneSample;
  double grid_min = -2.0;
  double grid_max = 2.0;
  std::size_t grid_points = 1000;
};

// thrown on --help; carries the text to print
struct help_requested {
  std::string text;
};

// "cauchy:<scale>" or "normal:<variance>"
inline PriorSpec parse_prior(const std::string& text) {
  const auto colon = text.find(':');
  const std::string family = text.substr(0, colon);
  const std::string value = colon == std::string::npos ? "" : text.substr(colon + 1);
  double v = 0.0;
  try {
    v = std::stod(value);
  } catch (const std::exception&) {
    throw usage_error("--prior: expected cauchy:<scale> or normal:<variance>, got '" + text +
                      "'");
  }
  if (!(v > 0.0))
    throw usage_error("--prior: dispersion must be > 0, got '" + text + "'");
  if (family == "cauchy") return PriorSpec::cauchy(v);
  if (family == "normal") return PriorSpec::normal_variance(v);
  throw usage_error("--prior: unknown family '" + family + "'");
}

inline std::string prior_to_string(const PriorSpec& p) {
  std::ostringstream out;
  if (p.family == PriorSpec::Family::Cauchy)
    out << "cauchy:" << p.scale_or_variance;
  else
    out << "normal:" << p.scale_or_variance;
  return out.str();
}

namespace detail {

inline void add_sampler_flags(CLI::App* cmd, RunConfig& cfg, std::optional<std::uint64_t>& seed) {
  cmd->add_option("--chains", cfg.sampler.n_chains, "number of MCMC chains (>= 2)");
  cmd->add_option("--samples", cfg.sampler.n_keep, "kept draws per chain (>= 1000)");
  cmd->add_option("--warmup", cfg.sampler.n_warmup, "warmup iterations per chain");
  cmd->add_option("--seed", seed, "RNG seed (auto-generated and reported if omitted)");
}

inline void add_test_flags(CLI::App* cmd, std::string& test, double& delta0, double& epsilon) {
  cmd->add_option("--test", test, "hypothesis: point | directional | interval")
      ->check(CLI::IsMember({"point", "directional", "interval"}));
  cmd->add_option("--delta0", delta0, "point-null location (default 0)");
  cmd->add_option("--epsilon", epsilon, "interval half-width (required for --test interval)");
}

inline void add_output_flags(CLI::App* cmd, std::string& format, RunConfig& cfg) {
  cmd->add_option("--format", format, "output format: json | csv | text")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  cmd->add_option("--out", cfg.out_path, "write output to a file instead of stdout");
}

}  // namespace detail

// args in natural order, program name excluded
inline RunConfig parse_args(const std::vector<std::string>& args) {
  RunConfig cfg;
  std::string prior_text = "cauchy:1";
  std::string test_text = "point";
  std::string format_text = "text";
  double delta0 = 0.0;
  double epsilon = -1.0;
  std::optional<std::uint64_t> seed;

  CLI::App app{"Bayes factors for one- and two-sample effect-size tests", "bft"};
  app.require_subcommand(1);
  app.footer("Environment: BFT_THREADS caps worker threads for the simulate subcommand.");

  auto* one = app.add_subcommand("one-sample",
                                 "point/directional/interval test on a single sample");
  one->add_option("--data", cfg.data_path, "single-column CSV of observations")
      ->required()
      ->check(CLI::ExistingFile);
  one->add_option("--prior", prior_text, "effect-size prior: cauchy:<scale> | normal:<variance>");
  detail::add_test_flags(one, test_text, delta0, epsilon);
  detail::add_sampler_flags(one, cfg, seed);
  detail::add_output_flags(one, format_text, cfg);
  one->add_option("--chains-out", cfg.chains_out, "also write raw chains as CSV to this path");

  auto* two = app.add_subcommand("two-sample",
                                 "independent-samples test on a two-column CSV (header x,y)");
  two->add_option("--data", cfg.data_path, "two-column CSV with header x,y")
      ->required()
      ->check(CLI::ExistingFile);
  two->add_option("--prior", prior_text, "effect-size prior: cauchy:<scale> | normal:<variance>");
  detail::add_test_flags(two, test_text, delta0, epsilon);
  detail::add_sampler_flags(two, cfg, seed);
  detail::add_output_flags(two, format_text, cfg);
  two->add_option("--chains-out", cfg.chains_out, "also write raw chains as CSV to this path");

  auto* jzs = app.add_subcommand("jzs", "closed-form JZS Bayes factor from a t statistic");
  jzs->add_option("--t", cfg.t, "observed t statistic")->required();
  jzs->add_option("--n", cfg.n_obs, "number of observations (>= 2)")->required();
  jzs->add_option("--r", cfg.r_scale, "Cauchy prior scale (default 1)");
  jzs->add_option("--seed", seed, "recorded in the output; the quadrature itself uses no RNG");
  detail::add_output_flags(jzs, format_text, cfg);

  auto* sim = app.add_subcommand("simulate",
                                 "benchmark the sampling route against the JZS route on a "
                                 "3x3 (g, N) grid");
  sim->add_option("--datasets", cfg.n_datasets, "datasets per cell (default 50; the full benchmark uses 200)");
  sim->add_option("--r", cfg.r_scale, "Cauchy prior scale (default 1)");
  sim->add_option("--dump-logbf", cfg.dump_logbf,
                  "also write per-dataset log-BF pairs as CSV to this path");
  detail::add_sampler_flags(sim, cfg, seed);
  detail::add_output_flags(sim, format_text, cfg);

  auto* plot = app.add_subcommand("plot-data",
                                  "emit prior/posterior density curves for external plotting");
  std::string design_text = "one";
  plot->add_option("--data", cfg.data_path,
                   "single-column CSV, or two-column CSV with header x,y for --design two")
      ->required()
      ->check(CLI::ExistingFile);
  plot->add_option("--design", design_text, "one | two (default one)")
      ->check(CLI::IsMember({"one", "two"}));
  plot->add_option("--prior", prior_text, "effect-size prior: cauchy:<scale> | normal:<variance>");
  plot->add_option("--delta0", delta0, "ordinate annotation point (default 0)");
  plot->add_option("--grid-min", cfg.grid_min, "grid lower bound (default -2)");
  plot->add_option("--grid-max", cfg.grid_max, "grid upper bound (default 2)");
  plot->add_option("--grid-points", cfg.grid_points, "grid size (default 1000)");
  detail::add_sampler_flags(plot, cfg, seed);
  plot->add_option("--out", cfg.out_path, "write output to a file instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw help_requested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw help_requested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw usage_error(e.what());
  }

  if (one->parsed()) cfg.subcommand = RunConfig::Sub::OneSample;
  else if (two->parsed()) cfg.subcommand = RunConfig::Sub::TwoSample;
  else if (jzs->parsed()) cfg.subcommand = RunConfig::Sub::Jzs;
  else if (sim->parsed()) cfg.subcommand = RunConfig::Sub::Simulate;
  else cfg.subcommand = RunConfig::Sub::PlotData;
  cfg.plot_design = design_text == "two" ? Design::TwoSample : Design::OneSample;

  cfg.prior = parse_prior(prior_text);
  cfg.format = format_text == "json"  ? OutputFormat::Json
               : format_text == "csv" ? OutputFormat::Csv
                                      : OutputFormat::Text;

  if (test_text == "point") {
    cfg.hypothesis = HypothesisSpec::point(delta0);
  } else if (test_text == "directional") {
    cfg.hypothesis = HypothesisSpec::directional();
  } else {
    if (epsilon <= 0.0)
      throw usage_error("--test interval requires --epsilon > 0");
    cfg.hypothesis = HypothesisSpec::interval(epsilon);
  }

  if (cfg.subcommand == RunConfig::Sub::Jzs && cfg.n_obs < 2)
    throw usage_error("jzs: --n must be >= 2");
  if (!(cfg.r_scale > 0.0)) throw usage_error("--r must be > 0");

  if (seed) {
    cfg.sampler.seed = *seed;
    cfg.seed_provided = true;
  } else {
    // every published number must be reproducible: generate one and report it
    std::random_device rd;
    cfg.sampler.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    cfg.seed_provided = false;
  }
  try {
    cfg.sampler.validate();
  } catch (const parameter_error& e) {
    throw usage_error(e.what());
  }
  return cfg;
}

namespace detail {

inline nlohmann::json prior_json(const PriorSpec& p) {
  nlohmann::json j;
  if (p.family == PriorSpec::Family::Cauchy) {
    j["family"] = "cauchy";
    j["scale"] = p.scale_or_variance;
  } else {
    j["family"] = "normal";
    j["variance"] = p.scale_or_variance;
  }
  return j;
}

inline nlohmann::json hypothesis_json(const HypothesisSpec& h) {
  nlohmann::json j;
  switch (h.kind) {
    case HypothesisKind::PointNull:
      j["kind"] = "point";
      j["delta0"] = h.delta0;
      break;
    case HypothesisKind::Directional:
      j["kind"] = "directional";
      break;
    case HypothesisKind::IntervalNull:
      j["kind"] = "interval";
      j["epsilon"] = h.epsilon;
      break;
  }
  return j;
}

inline nlohmann::json diagnostics_json(const PosteriorDraws& draws) {
  nlohmann::json rhat, ess;
  for (const auto& p : draws.params) {
    rhat[p.name] = p.rhat;
    ess[p.name] = p.ess;
  }
  nlohmann::json j;
  j["rhat"] = std::move(rhat);
  j["ess"] = std::move(ess);
  j["accept_rate"] = draws.accept_rate;
  j["converged"] = draws.converged;
  return j;
}

inline std::string describe_hypothesis(const HypothesisSpec& h) {
  std::ostringstream out;
  switch (h.kind) {
    case HypothesisKind::PointNull:
      out << "H0: delta = " << h.delta0 << "  vs  H1: delta != " << h.delta0;
      break;
    case HypothesisKind::Directional:
      out << "H0: delta <= 0  vs  H1: delta > 0";
      break;
    case HypothesisKind::IntervalNull:
      out << "H0: |delta| < " << h.epsilon << "  vs  H1: |delta| > " << h.epsilon;
      break;
  }
  return out.str();
}

inline std::string favored_line(const BayesFactorResult& r) {
  std::ostringstream out;
  out.precision(4);
  if (!std::isfinite(r.bf01) || !std::isfinite(r.bf10)) {
    out << "no evidential draws on one side; see counts in components";
  } else if (r.bf01 >= 1.0) {
    out << "data favor H0 by factor " << r.bf01;
  } else {
    out << "data favor H1 by factor " << r.bf10;
  }
  return out.str();
}

inline std::string result_text(const BayesFactorResult& r, const HypothesisSpec& h) {
  std::ostringstream out;
  out.precision(4);
  out << "method: " << method_name(r.method) << "\n";
  out << "hypotheses: " << describe_hypothesis(h) << "\n";
  out << "B01 = " << r.bf01 << "\n";
  out << "B10 = " << r.bf10 << "   (" << favored_line(r) << ")\n";
  if (r.method == Method::SavageDickey) {
    out << "ordinates at delta0: posterior = " << r.components.at("posterior_ordinate")
        << ", prior = " << r.components.at("prior_ordinate") << "\n";
    out << "bandwidth sensitivity (B01 at h/2, h, 2h): "
        << r.components.at("bf01_bw_half") << ", " << r.bf01 << ", "
        << r.components.at("bf01_bw_double") << "\n";
  }
  if (r.method == Method::Encompassing) {
    out << "posterior evidential proportions: H0 = " << r.components.at("post_mass_h0")
        << ", H1 = " << r.components.at("post_mass_h1") << "\n";
    out << "prior evidential proportions:     H0 = " << r.components.at("prior_mass_h0")
        << ", H1 = " << r.components.at("prior_mass_h1") << "\n";
  }
  if (r.method != Method::JZS) out << "mc se = " << r.mc_se << "\n";
  return out.str();
}

inline std::string csv_cell(const std::string& raw) {
  if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char ch : raw) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

inline void result_csv_rows(std::ostringstream& out, const std::string& prefix,
                            const nlohmann::json& v) {
  if (v.is_object()) {
    for (const auto& [k, child] : v.items()) result_csv_rows(out, prefix + '.' + k, child);
  } else {
    out << prefix << ',' << csv_cell(v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
}

inline std::string result_csv(const nlohmann::json& doc) {
  std::ostringstream out;
  out << "key,value\n";
  for (const auto& [k, v] : doc.items()) result_csv_rows(out, k, v);
  return out.str();
}

inline void write_payload(const std::string& payload, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << payload;
    if (!payload.empty() && payload.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw error("cannot write " + out_path);
  f << payload;
}

inline BayesFactorResult dispatch_bf(const RunConfig& cfg, const PosteriorDraws& draws) {
  switch (cfg.hypothesis.kind) {
    case HypothesisKind::PointNull:
      return savage_dickey_bf(draws, cfg.prior, cfg.hypothesis.delta0);
    case HypothesisKind::Directional:
      return encompassing_directional_bf(draws, cfg.prior);
    case HypothesisKind::IntervalNull:
      return encompassing_interval_bf(draws, cfg.prior, cfg.hypothesis.epsilon);
  }
  throw parameter_error("unknown hypothesis kind");
}

}  // namespace detail

// Runs a parsed config to completion and returns the payload for --out /
// stdout. Convergence and finite-sample warnings go to diag; they do not
// change the exit status.
inline std::string run(const RunConfig& cfg, std::ostream& diag) {
  using Sub = RunConfig::Sub;
  nlohmann::json j;
  j["version"] = version;
  j["seed"] = cfg.sampler.seed;

  if (cfg.subcommand == Sub::Jzs) {
    j["subcommand"] = "jzs";
    const auto r = jzs_bf(cfg.t, cfg.n_obs, cfg.r_scale);
    const double dof = static_cast<double>(cfg.n_obs) - 1.0;
    j["classical"] = {{"t", cfg.t},
                      {"dof", dof},
                      {"p_upper_tail", t_tail_probability(cfg.t, dof)},
                      {"p_two_sided", 2.0 * t_tail_probability(std::fabs(cfg.t), dof)}};
    j["prior"] = {{"family", "cauchy"}, {"scale", cfg.r_scale}};
    j["result"] = result_to_json(r);
    switch (cfg.format) {
      case OutputFormat::Json: return j.dump(2);
      case OutputFormat::Csv: return detail::result_csv(j);
      case OutputFormat::Text: {
        std::ostringstream out;
        out.precision(6);
        out << "jzs t-test: t = " << cfg.t << ", N = " << cfg.n_obs << ", r = " << cfg.r_scale
            << "\n"
            << "upper-tail p = " << t_tail_probability(cfg.t, dof)
            << ", two-sided p = " << 2.0 * t_tail_probability(std::fabs(cfg.t), dof) << "\n"
            << detail::result_text(r, HypothesisSpec::point());
        return out.str();
      }
    }
  }

  if (cfg.subcommand == Sub::Simulate) {
    j["subcommand"] = "simulate";
    const auto report =
        run_simulation(default_grid(cfg.n_datasets, cfg.sampler.seed), cfg.sampler, cfg.r_scale);
    for (const auto& c : report.cells)
      if (c.n_failed > 0)
        diag << "warning: cell (g=" << c.cell.g_effect << ", N=" << c.cell.n_obs << "): "
             << c.n_failed << " dataset(s) failed\n";
    if (!cfg.dump_logbf.empty())
      detail::write_payload(log_bf_pairs_to_csv(report), cfg.dump_logbf);
    switch (cfg.format) {
      case OutputFormat::Csv: return report_to_csv(report);
      case OutputFormat::Json: {
        j["sampler"] = {{"chains", cfg.sampler.n_chains},
                        {"warmup", cfg.sampler.n_warmup},
                        {"samples", cfg.sampler.n_keep}};
        j["report"] = report_to_json(report);
        return j.dump(2);
      }
      case OutputFormat::Text: {
        std::ostringstream out;
        out.precision(3);
        out << "simulation benchmark: " << cfg.n_datasets << " datasets/cell, r = "
            << cfg.r_scale << ", seed = " << cfg.sampler.seed << "\n";
        out << report_to_csv(report);
        out << "total runtime: " << report.total_runtime_seconds << " s\n";
        return out.str();
      }
    }
  }

  // remaining subcommands sample a posterior
  const bool two_sample_design =
      cfg.subcommand == Sub::TwoSample ||
      (cfg.subcommand == Sub::PlotData && cfg.plot_design == Design::TwoSample);
  ObservedSample sample;
  if (two_sample_design) {
    auto [x, y] = read_two_column(cfg.data_path);
    sample = standardize(x, y);
    j["data"] = {{"path", cfg.data_path}, {"n_x", sample.x.size()}, {"n_y", sample.y.size()}};
  } else {
    sample = standardize(read_one_column(cfg.data_path));
    j["data"] = {{"path", cfg.data_path}, {"n", sample.y.size()}};
  }

  const ModelSpec spec = two_sample_design ? ModelSpec::two_sample(cfg.prior)
                                           : ModelSpec::one_sample(cfg.prior);
  const PosteriorDraws draws = sample_posterior(spec, sample, cfg.sampler);
  if (!draws.converged) {
    double worst = 1.0;
    for (const auto& p : draws.params) worst = std::max(worst, p.rhat);
    diag << "warning: chains may not have converged (max rhat = " << worst
         << "); consider more --samples or --warmup\n";
  }
  if (!cfg.chains_out.empty()) detail::write_payload(chains_to_csv(draws), cfg.chains_out);

  if (cfg.subcommand == Sub::PlotData) {
    const auto est = fit_density(draws.pooled_delta());
    return plot_data_csv(cfg.prior, est, cfg.grid_min, cfg.grid_max, cfg.grid_points,
                         cfg.hypothesis.delta0);
  }

  j["subcommand"] = cfg.subcommand == Sub::TwoSample ? "two-sample" : "one-sample";
  j["prior"] = detail::prior_json(cfg.prior);
  j["hypothesis"] = detail::hypothesis_json(cfg.hypothesis);
  j["sampler"] = {{"chains", cfg.sampler.n_chains},
                  {"warmup", cfg.sampler.n_warmup},
                  {"samples", cfg.sampler.n_keep},
                  {"target_accept", cfg.sampler.target_accept}};
  j["diagnostics"] = detail::diagnostics_json(draws);

  if (cfg.subcommand == Sub::OneSample) {
    const auto ts = t_statistic(sample);
    j["classical"] = {{"t", ts.t},
                      {"dof", ts.dof},
                      {"p_upper_tail", t_tail_probability(ts.t, ts.dof)},
                      {"p_two_sided", 2.0 * t_tail_probability(std::fabs(ts.t), ts.dof)}};
  }

  const BayesFactorResult result = detail::dispatch_bf(cfg, draws);
  if (result.finite_sample_warning)
    diag << "warning: zero evidential draws on one side; the reported BF is a finite-sample "
            "infinity (raw counts are in components)\n";
  j["result"] = result_to_json(result);

  switch (cfg.format) {
    case OutputFormat::Json: return j.dump(2);
    case OutputFormat::Csv: return detail::result_csv(j);
    case OutputFormat::Text: {
      std::ostringstream out;
      out.precision(6);
      out << (cfg.subcommand == Sub::TwoSample ? "two-sample" : "one-sample")
          << " test on " << cfg.data_path << "\n"
          << "prior: " << prior_to_string(cfg.prior) << ", seed = " << cfg.sampler.seed
          << ", chains = " << cfg.sampler.n_chains << " x " << cfg.sampler.n_keep << "\n";
      if (j.contains("classical"))
        out << "t = " << j["classical"]["t"].get<double>() << " (dof = "
            << j["classical"]["dof"].get<double>()
            << "), upper-tail p = " << j["classical"]["p_upper_tail"].get<double>()
            << ", two-sided p = " << j["classical"]["p_two_sided"].get<double>() << "\n";
      double worst = 1.0;
      for (const auto& p : draws.params) worst = std::max(worst, p.rhat);
      out << "max rhat = " << worst << (draws.converged ? " (converged)" : " (NOT converged)")
          << "\n"
          << detail::result_text(result, cfg.hypothesis);
      return out.str();
    }
  }
  throw error("unreachable");
}

// full CLI entry: parse, run, write, map errors to exit codes
inline int main_impl(const std::vector<std::string>& args, std::ostream& diag) {
  try {
    const RunConfig cfg = parse_args(args);
    detail::write_payload(run(cfg, diag), cfg.out_path);
    return 0;
  } catch (const help_requested& h) {
    std::cout << h.text;
    return 0;
  } catch (const usage_error& e) {
    diag << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    diag << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bft
