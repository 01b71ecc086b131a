// mntest: command-line front end for the two-sample multinomial tests.
//
//   mntest test --input counts.csv --method all
//   mntest simulate --config configs/table1.json --threads 4 --out table1.csv
//   mntest neighborhood --input counts.csv --out curve.csv
//   mntest corpus --group1 docs/a --group2 docs/b --out curves.csv
//
// Exit codes: 0 ok, 2 input or configuration error, 3 numeric failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mntest/mntest.hpp"

namespace {

using nlohmann::json;

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct TestArgs {
  std::string input;
  std::string method = "proposed";
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int permutations = mntest::kDefaultPermutations;
  std::string cell_rule = "expected";
  std::string zelterman_moments = "permutation";
};

struct SimulateArgs {
  std::string config;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
  std::string format;
  std::optional<std::string> zelterman_moments;
  std::optional<int> permutations;
};

struct NeighborhoodArgs {
  std::string input;
  double alpha = 0.05;
  std::optional<double> delta_max;
  double step = mntest::kDefaultCurveStep;
  std::string out;
};

struct CorpusArgs {
  std::string group1, group2;
  std::size_t sample = 50;
  std::size_t replications = 100;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int threads = 1;
  std::optional<double> delta_max;
  double step = mntest::kDefaultCurveStep;
  std::string out;
  std::string detail;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw mntest::ParseError("cannot write '" + path + "'");
  return f;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw mntest::DomainError("alpha must lie in (0,1)");
}

int run_test(const TestArgs& a) {
  check_alpha(a.alpha);
  const auto table = mntest::read_counts_file(a.input);
  std::vector<mntest::Method> methods;
  if (a.method == "all") {
    methods = {mntest::Method::proposed, mntest::Method::chi2, mntest::Method::zelterman,
               mntest::Method::bs};
  } else {
    methods = {mntest::parse_method(a.method)};
  }
  mntest::TestOptions opt;
  opt.alpha = a.alpha;
  opt.seed = a.seed;
  opt.permutations = a.permutations;
  opt.cell_rule = mntest::parse_cell_rule(a.cell_rule);
  opt.zelterman_moments = mntest::parse_zelterman_moments(a.zelterman_moments);

  const auto& ts = table.counts;
  json results = json::array();
  for (auto m : methods) {
    try {
      results.push_back(mntest::outcome_json(mntest::run_method(ts, m, opt)));
    } catch (const mntest::Error& e) {
      if (!mntest::is_numeric_degeneracy(e)) throw;
      results.push_back({{"method", mntest::method_name(m)},
                         {"statistic", nullptr},
                         {"p_value", nullptr},
                         {"reject", false},
                         {"alpha", mntest::json_number(a.alpha)},
                         {"degenerate", true},
                         {"error", std::string(e.kind()) + ": " + e.what()}});
    }
  }
  json doc = {{"k", ts.k()}, {"n1", ts.n1()}, {"n2", ts.n2()}, {"results", results}};
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int run_simulate(const SimulateArgs& a) {
  auto configs = mntest::read_experiments_file(a.config);
  for (auto& c : configs) {
    if (a.reps) c.reps = *a.reps;
    if (a.seed) c.seed = *a.seed;
    if (a.permutations) c.permutations = *a.permutations;
    if (a.zelterman_moments) c.zelterman_moments = mntest::parse_zelterman_moments(*a.zelterman_moments);
    c.threads = a.threads;
    mntest::validate(c);
  }
  std::string format = a.format;
  if (format.empty()) {
    format = a.out.size() >= 4 && a.out.compare(a.out.size() - 4, 4, ".csv") == 0 ? "csv" : "json";
  }
  if (format != "csv" && format != "json") throw mntest::ConfigError("unknown format '" + format + "'");

  std::vector<mntest::ExperimentReport> reports;
  double total = 0.0;
  for (const auto& c : configs) {
    reports.push_back(mntest::run_experiment(c));
    const auto& r = reports.back();
    total += r.wall_time_seconds;
    for (const auto& m : r.results) {
      std::fprintf(stderr, "%-28s %-10s rate %.4f  se %.4f", c.name.c_str(), mntest::method_name(m.method),
                   m.rate, m.mc_standard_error);
      if (m.reference) std::fprintf(stderr, "  paper %.3f", *m.reference);
      std::fprintf(stderr, "\n");
    }
    std::fprintf(stderr, "%-28s %.2fs\n", c.name.c_str(), r.wall_time_seconds);
  }
  std::fprintf(stderr, "total %.2fs on %d thread(s)\n", total, a.threads);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!a.out.empty()) {
    file = open_output(a.out);
    os = &file;
  }
  if (format == "csv") {
    mntest::write_reports_csv(*os, reports);
  } else {
    *os << mntest::reports_to_json(reports).dump(2) << '\n';
  }
  return 0;
}

void write_curve_csv(std::ostream& os, const mntest::NeighborhoodCurve& c) {
  os << "delta,p_delta\n";
  for (std::size_t i = 0; i < c.deltas.size(); ++i) {
    os << mntest::format_number(c.deltas[i]) << ',' << mntest::format_number(c.p_values[i]) << '\n';
  }
}

int run_neighborhood(const NeighborhoodArgs& a) {
  check_alpha(a.alpha);
  const auto table = mntest::read_counts_file(a.input);
  const double T = mntest::proposed_T(table.counts);
  const double dmax = a.delta_max ? *a.delta_max : mntest::default_delta_max(T, a.step);
  const auto curve = mntest::neighborhood_curve_from_T(T, mntest::delta_grid(dmax, a.step), a.alpha);
  json summary = {{"T", mntest::json_number(T)},
                  {"alpha", mntest::json_number(a.alpha)},
                  {"delta_star", mntest::json_number(curve.delta_star)},
                  {"p_value", mntest::json_number(mntest::p_delta_from_T(T, 0.0))}};
  if (a.out.empty()) {
    write_curve_csv(std::cout, curve);
    std::cerr << summary.dump(2) << '\n';
  } else {
    auto f = open_output(a.out);
    write_curve_csv(f, curve);
    std::cout << summary.dump(2) << '\n';
  }
  return 0;
}

int run_corpus(const CorpusArgs& a) {
  check_alpha(a.alpha);
  const auto g1 = mntest::load_group(a.group1);
  const auto g2 = mntest::load_group(a.group2);
  mntest::CorpusStudyConfig cfg;
  cfg.sample_size = a.sample;
  cfg.replications = a.replications;
  cfg.alpha = a.alpha;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.delta_max = a.delta_max;
  cfg.step = a.step;
  const auto s = mntest::corpus_neighborhood_study(g1, g2, cfg);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!a.out.empty()) {
    file = open_output(a.out);
    os = &file;
  }
  *os << "delta,p_power_mean,p_size_mean\n";
  for (std::size_t i = 0; i < s.deltas.size(); ++i) {
    *os << mntest::format_number(s.deltas[i]) << ',' << mntest::format_number(s.p_power_mean[i])
        << ',' << mntest::format_number(s.p_size_mean[i]) << '\n';
  }
  if (!a.detail.empty()) {
    auto f = open_output(a.detail);
    f << "replication,mode,k,T,p_value,delta_star\n";
    for (const auto& r : s.records) {
      for (int mode = 0; mode < 2; ++mode) {
        const double T = mode == 0 ? r.power_T : r.size_T;
        const bool ok = !std::isnan(T);
        f << r.replication << ',' << (mode == 0 ? "power" : "size") << ','
          << (mode == 0 ? r.power_k : r.size_k) << ',' << mntest::format_number(T) << ','
          << mntest::format_number(ok ? mntest::p_delta_from_T(T, 0.0) : T) << ','
          << mntest::format_number(ok ? mntest::delta_star_from_T(T, a.alpha) : T) << '\n';
      }
    }
  }
  json summary = {{"group1", g1.label},
                  {"group2", g2.label},
                  {"documents1", g1.size()},
                  {"documents2", g2.size()},
                  {"sample", a.sample},
                  {"replications", a.replications},
                  {"alpha", mntest::json_number(a.alpha)},
                  {"reject_rate_power", mntest::json_number(s.reject_rate_power)},
                  {"reject_rate_size", mntest::json_number(s.reject_rate_size)},
                  {"delta_star_power_mean", mntest::json_number(s.delta_star_power_mean)},
                  {"delta_star_size_mean", mntest::json_number(s.delta_star_size_mean)},
                  {"separation_area", mntest::json_number(s.separation_area)},
                  {"degenerate_power", s.degenerate_power},
                  {"degenerate_size", s.degenerate_size}};
  (a.out.empty() ? std::cerr : std::cout) << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sample tests for sparse multinomial count data"};
  app.require_subcommand(1);

  TestArgs ta;
  auto* test = app.add_subcommand("test", "Run tests on a counts CSV and print a JSON report");
  test->add_option("--input", ta.input, "CSV with header category,count1,count2")->required();
  test->add_option("--method", ta.method, "proposed|chi2|zelterman|bs|all")->capture_default_str();
  test->add_option("--alpha", ta.alpha, "Nominal level")->capture_default_str();
  test->add_option("--seed", ta.seed, "Seed for permutation draws")->capture_default_str();
  test->add_option("--permutations", ta.permutations, "Zelterman permutation count")->capture_default_str();
  test->add_option("--cell-rule", ta.cell_rule, "Chi-square cells: expected|observed")->capture_default_str();
  test->add_option("--zelterman-moments", ta.zelterman_moments, "permutation|exact")->capture_default_str();

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run Monte Carlo experiments from a JSON config");
  sim->add_option("--config", sa.config, "Experiment config JSON")->required();
  sim->add_option("--reps", sa.reps, "Override replicate count");
  sim->add_option("--seed", sa.seed, "Override seed");
  sim->add_option("--threads", sa.threads, "Worker threads")->capture_default_str();
  sim->add_option("--out", sa.out, "Report path (.csv or .json); stdout if absent");
  sim->add_option("--format", sa.format, "json|csv (default from --out extension)");
  sim->add_option("--zelterman-moments", sa.zelterman_moments, "Override: permutation|exact");
  sim->add_option("--permutations", sa.permutations, "Override permutation count");

  NeighborhoodArgs na;
  auto* nb = app.add_subcommand("neighborhood", "p-value curve over the indifference radius");
  nb->add_option("--input", na.input, "Counts CSV")->required();
  nb->add_option("--alpha", na.alpha, "Level used for delta_star")->capture_default_str();
  nb->add_option("--delta-max", na.delta_max, "Grid end (default T + 4)");
  nb->add_option("--step", na.step, "Grid step")->capture_default_str();
  nb->add_option("--out", na.out, "Curve CSV; stdout if absent");

  CorpusArgs ca;
  auto* corpus = app.add_subcommand("corpus", "Compare two directories of text documents");
  corpus->add_option("--group1", ca.group1, "Directory of documents")->required();
  corpus->add_option("--group2", ca.group2, "Directory of documents")->required();
  corpus->add_option("--sample", ca.sample, "Documents sampled per group")->capture_default_str();
  corpus->add_option("--replications", ca.replications, "Replications")->capture_default_str();
  corpus->add_option("--alpha", ca.alpha, "Nominal level")->capture_default_str();
  corpus->add_option("--seed", ca.seed, "Seed")->capture_default_str();
  corpus->add_option("--threads", ca.threads, "Worker threads")->capture_default_str();
  corpus->add_option("--delta-max", ca.delta_max, "Grid end (default max T + 4)");
  corpus->add_option("--step", ca.step, "Grid step")->capture_default_str();
  corpus->add_option("--out", ca.out, "Mean-curve CSV; stdout if absent");
  corpus->add_option("--detail", ca.detail, "Per-replication CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*test) return run_test(ta);
    if (*sim) return run_simulate(sa);
    if (*nb) return run_neighborhood(na);
    if (*corpus) return run_corpus(ca);
  } catch (const mntest::Error& e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << '\n';
    return mntest::is_numeric_degeneracy(e) ? kExitNumeric : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
