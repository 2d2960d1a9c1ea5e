#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bft/cli.hpp"
#include "bft/io.hpp"

using namespace bft;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const std::string sleep_csv = std::string(BFT_DATA_DIR) + "/sleep.csv";
const std::string rats_csv = std::string(BFT_DATA_DIR) + "/rats.csv";

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& content) {
    static int counter = 0;
    path = "bft_test_tmp_" + std::to_string(counter++) + ".csv";
    std::ofstream f(path);
    f << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::vector<std::string> fast_args(std::vector<std::string> base) {
  for (auto s : {"--chains", "2", "--samples", "1000", "--warmup", "300"})
    base.emplace_back(s);
  return base;
}

std::string run_to_string(const std::vector<std::string>& args, std::string* diag_out = nullptr) {
  std::ostringstream diag;
  const auto cfg = parse_args(args);
  const auto payload = run(cfg, diag);
  if (diag_out) *diag_out = diag.str();
  return payload;
}

}  // namespace

TEST_CASE("read_one_column") {
  const auto v = read_one_column(sleep_csv);
  REQUIRE(v.size() == 10);
  CHECK(v.front() == 0.7);
  CHECK(v.back() == 2.0);

  TempFile empty("");
  CHECK_THROWS_AS(read_one_column(empty.path), insufficient_data_error);

  TempFile junk("1.5\n2.5\nabc\n");
  CHECK_THROWS_WITH(read_one_column(junk.path), ContainsSubstring("row 3"));
}

TEST_CASE("read_two_column") {
  const auto [x, y] = read_two_column(rats_csv);
  REQUIRE(x.size() == 10);
  REQUIRE(y.size() == 10);
  CHECK(x.front() == 62.0);
  CHECK(y.back() == 58.0);

  // unequal lengths through blank cells
  TempFile uneven("x,y\n1,10\n2,\n3,30\n,40\n");
  const auto [ux, uy] = read_two_column(uneven.path);
  CHECK(ux == std::vector<double>{1, 2, 3});
  CHECK(uy == std::vector<double>{10, 30, 40});

  TempFile no_header("1,2\n3,4\n");
  CHECK_THROWS_AS(read_two_column(no_header.path), parse_error);

  TempFile bad_cell("x,y\n1,2\n3,oops\n");
  CHECK_THROWS_WITH(read_two_column(bad_cell.path),
                    ContainsSubstring("row 3, column 2"));
}

TEST_CASE("parse_args accepts the documented forms") {
  const auto cfg = parse_args({"one-sample", "--data", sleep_csv, "--prior", "cauchy:1",
                               "--test", "point", "--seed", "42"});
  CHECK(cfg.subcommand == RunConfig::Sub::OneSample);
  CHECK(cfg.prior == PriorSpec::cauchy(1.0));
  CHECK(cfg.hypothesis.kind == HypothesisKind::PointNull);
  CHECK(cfg.sampler.seed == 42);
  CHECK(cfg.seed_provided);

  const auto jzs = parse_args({"jzs", "--t", "2.5703", "--n", "10", "--r", "1"});
  CHECK(jzs.subcommand == RunConfig::Sub::Jzs);
  CHECK(jzs.t == 2.5703);
  CHECK(jzs.n_obs == 10);

  const auto norm = parse_args(fast_args(
      {"one-sample", "--data", sleep_csv, "--prior", "normal:0.3", "--test", "interval",
       "--epsilon", "0.2", "--format", "json"}));
  CHECK(norm.prior == PriorSpec::normal_variance(0.3));
  CHECK(norm.hypothesis.kind == HypothesisKind::IntervalNull);
  CHECK(norm.hypothesis.epsilon == 0.2);
  CHECK(norm.format == OutputFormat::Json);
  CHECK_FALSE(norm.seed_provided);  // auto-generated but present
}

TEST_CASE("parse_args rejects malformed invocations") {
  CHECK_THROWS_AS(parse_args({"one-sample", "--data", sleep_csv, "--test", "interval"}),
                  usage_error);  // missing --epsilon
  CHECK_THROWS_AS(parse_args({"one-sample", "--data", sleep_csv, "--test", "interval",
                              "--epsilon", "-0.5"}),
                  usage_error);
  CHECK_THROWS_AS(parse_args({"one-sample", "--data", "no_such_file.csv"}), usage_error);
  CHECK_THROWS_AS(parse_args({"one-sample", "--data", sleep_csv, "--bogus-flag"}), usage_error);
  CHECK_THROWS_AS(parse_args({"one-sample", "--data", sleep_csv, "--prior", "gamma:1"}),
                  usage_error);
  CHECK_THROWS_AS(parse_args({"jzs", "--t", "1.0", "--n", "1"}), usage_error);
  CHECK_THROWS_AS(parse_args({"one-sample", "--data", sleep_csv, "--chains", "1"}),
                  usage_error);
  CHECK_THROWS_AS(parse_args({}), usage_error);
}

TEST_CASE("jzs subcommand emits the full result") {
  const auto payload = run_to_string({"jzs", "--t", "2.5703", "--n", "10", "--r", "1",
                                      "--seed", "1", "--format", "json"});
  const auto j = nlohmann::json::parse(payload);
  CHECK(j["version"] == "0.1.0");
  CHECK_THAT(j["result"]["bf01"].get<double>(), WithinRel(0.416574941868, 1e-5));
  CHECK_THAT(j["result"]["bf10"].get<double>() * j["result"]["bf01"].get<double>(),
             WithinAbs(1.0, 1e-12));
  CHECK_THAT(j["classical"]["p_two_sided"].get<double>(), WithinAbs(0.0301, 0.0005));

  // byte-identical rerun and JSON round-trip
  CHECK(payload == run_to_string({"jzs", "--t", "2.5703", "--n", "10", "--r", "1",
                                  "--seed", "1", "--format", "json"}));
  CHECK(nlohmann::json::parse(j.dump()) == j);
}

TEST_CASE("one-sample run produces a reproducible, complete JSON document") {
  const auto args = fast_args({"one-sample", "--data", sleep_csv, "--prior", "cauchy:1",
                               "--test", "point", "--seed", "42", "--format", "json"});
  const auto payload = run_to_string(args);
  CHECK(payload == run_to_string(args));  // identical config + seed -> identical bytes

  const auto j = nlohmann::json::parse(payload);
  CHECK(j["seed"] == 42);
  CHECK(j["subcommand"] == "one-sample");
  CHECK(j["data"]["n"] == 10);
  CHECK(j["prior"]["family"] == "cauchy");
  CHECK(j["sampler"]["chains"] == 2);
  CHECK_THAT(j["classical"]["t"].get<double>(), WithinRel(2.570473466625937, 1e-12));
  CHECK(j["diagnostics"].contains("rhat"));
  const auto& r = j["result"];
  CHECK(r["method"] == "savage-dickey");
  CHECK(r["bf01"].get<double>() > 0.2);
  CHECK(r["bf01"].get<double>() < 0.7);
  for (const char* key : {"posterior_ordinate", "prior_ordinate", "bandwidth",
                          "bf01_bw_half", "bf01_bw_double"})
    CHECK(r["components"].contains(key));
}

TEST_CASE("text output mirrors the dual display") {
  const auto text = run_to_string(fast_args({"one-sample", "--data", sleep_csv, "--seed", "1"}));
  CHECK_THAT(text, ContainsSubstring("B01 = "));
  CHECK_THAT(text, ContainsSubstring("B10 = "));
  CHECK_THAT(text, ContainsSubstring("data favor H"));
  CHECK_THAT(text, ContainsSubstring("bandwidth sensitivity"));

  const auto csv = run_to_string(fast_args(
      {"one-sample", "--data", sleep_csv, "--seed", "1", "--format", "csv"}));
  CHECK_THAT(csv, ContainsSubstring("key,value"));
  CHECK_THAT(csv, ContainsSubstring("result.bf01,"));
}

TEST_CASE("two-sample run on the rats data") {
  const auto payload = run_to_string(fast_args(
      {"two-sample", "--data", rats_csv, "--prior", "cauchy:1", "--seed", "11", "--format",
       "json"}));
  const auto j = nlohmann::json::parse(payload);
  CHECK(j["data"]["n_x"] == 10);
  CHECK(j["result"]["bf01"].get<double>() > 1.5);  // null favored
  CHECK_FALSE(j.contains("classical"));            // t statistic is one-sample only
}

TEST_CASE("directional and interval runs carry evidential proportions") {
  const auto j = nlohmann::json::parse(run_to_string(fast_args(
      {"one-sample", "--data", sleep_csv, "--test", "directional", "--seed", "3", "--format",
       "json"})));
  CHECK(j["result"]["method"] == "encompassing");
  CHECK(j["result"]["components"]["prior_mass_h0"] == 0.5);
  CHECK(j["hypothesis"]["kind"] == "directional");

  const auto ji = nlohmann::json::parse(run_to_string(fast_args(
      {"one-sample", "--data", sleep_csv, "--test", "interval", "--epsilon", "0.2", "--seed",
       "3", "--format", "json"})));
  CHECK(ji["result"]["components"]["epsilon"] == 0.2);
  CHECK_THAT(ji["result"]["components"]["prior_mass_h0"].get<double>(),
             WithinAbs(0.1256659163780024, 1e-12));
}

TEST_CASE("density curves export as two-column csv") {
  std::vector<double> draws(500);
  for (std::size_t i = 0; i < draws.size(); ++i)
    draws[i] = static_cast<double>(i) / 500.0;
  const auto est = fit_density(draws);
  const auto csv = curve_to_csv(density_curve(est, std::vector<double>{0.25, 0.5}));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,density");
  std::getline(in, line);
  CHECK_THAT(line, ContainsSubstring("0.25,"));
  CHECK_THAT(std::stod(line.substr(line.find(',') + 1)),
             WithinAbs(density_at(est, 0.25), 1e-15));
}

TEST_CASE("chains export as csv") {
  TempFile out("");
  run_to_string(fast_args({"one-sample", "--data", sleep_csv, "--seed", "9", "--chains-out",
                           out.path}));
  std::ifstream f(out.path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "chain,iteration,delta,sigma,mu");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(f, line)) ++rows;
  CHECK(rows == 2 * 1000);  // chains x kept draws
}

TEST_CASE("plot-data emits curves plus the ordinate annotation row") {
  const auto csv = run_to_string(fast_args(
      {"plot-data", "--data", sleep_csv, "--prior", "cauchy:1", "--seed", "4"}));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,prior_density,posterior_density,note");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 1001);  // 1000 grid rows + annotation
  CHECK_THAT(rows.back(), ContainsSubstring("ordinate_at_delta0"));

  // at delta0 = 0 the cauchy prior ordinate is 1/pi and the sleep posterior
  // ordinate sits below it
  std::istringstream last(rows.back());
  std::string x, prior, post;
  std::getline(last, x, ',');
  std::getline(last, prior, ',');
  std::getline(last, post, ',');
  CHECK_THAT(std::stod(prior), WithinAbs(1.0 / std::numbers::pi, 1e-12));
  CHECK(std::stod(post) < std::stod(prior));
}

TEST_CASE("two-sample plot-data shows the posterior ordinate rising") {
  const auto csv = run_to_string(fast_args(
      {"plot-data", "--data", rats_csv, "--design", "two", "--prior", "cauchy:1", "--seed",
       "4"}));
  std::istringstream in(csv);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  std::istringstream row(last);
  std::string x, prior, post;
  std::getline(row, x, ',');
  std::getline(row, prior, ',');
  std::getline(row, post, ',');
  CHECK(std::stod(post) > std::stod(prior));  // null gains support on the rats data
}

TEST_CASE("simulate smoke run emits the benchmark table") {
  const auto csv = run_to_string({"simulate", "--datasets", "2", "--seed", "8", "--chains",
                                  "2", "--samples", "1000", "--warmup", "300", "--format",
                                  "csv"});
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "g,N,method,min,q1,median,q3,max,consistency");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) rows += !line.empty();
  CHECK(rows == 18);  // 9 cells x 2 methods
}

TEST_CASE("main_impl maps outcomes to exit codes") {
  std::ostringstream diag;
  CHECK(main_impl({"jzs", "--t", "1.0", "--n", "10"}, diag) == 0);
  CHECK(main_impl({"jzs", "--t", "1.0"}, diag) == 2);           // missing required --n
  CHECK(main_impl({"frobnicate"}, diag) == 2);                  // unknown subcommand
  CHECK_THAT(diag.str(), ContainsSubstring("usage error"));
}
