#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <iostream>
#include <limits>
#include <thread>

#include <CLI11.hpp>

#include "shield/simharness.hpp"
#include "shield_verify/acceptance.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kInvalid = 2;
constexpr int kSolverFailure = 3;

int exit_code_for(const shield::Error& e) {
  switch (e.code()) {
    case shield::ErrorCode::ParseError:
    case shield::ErrorCode::ValidationError:
    case shield::ErrorCode::IoError:
    case shield::ErrorCode::InvalidArgument:
    case shield::ErrorCode::DimMismatch:
    case shield::ErrorCode::Asymmetric:
      return kInvalid;
    default:
      return kSolverFailure;
  }
}

unsigned thread_cap() {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LOEWNER_SHIELD_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) cap = std::min<unsigned>(cap, static_cast<unsigned>(v));
  }
  return cap;
}

int cmd_run(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed,
            const std::string& filter, bool no_svg, bool no_timing) {
  shield::Scenario s = shield::load_scenario(path);
  if (seed) s.seed = *seed;
  if (!filter.empty()) s.filter = shield::parse_filter_kind(filter);
  s.validate();
  const shield::RunResult r = shield::run(s);
  shield::write_outputs(r, out, {!no_svg, !no_timing});
  const shield::RunMetrics& m = r.metrics;
  std::printf("%s: %d steps, filter %s\n", s.name.c_str(), m.steps, shield::to_string(s.filter));
  std::printf("  modes: passthrough %d, filtered %d, slack %d, fallback %d\n", m.passthrough_steps,
              m.filtered_steps, m.slack_steps, m.fallback_steps);
  for (std::size_t i = 0; i < m.min_signed_distance.size(); ++i) {
    const std::string& name = s.obstacles[i].name();
    std::printf("  min distance to %s: %.6f\n", name.empty() ? std::to_string(i).c_str() : name.c_str(),
                m.min_signed_distance[i]);
  }
  std::printf("  final goal error %.6f m, mean filter time %.3e s\n", m.final_goal_error, m.mean_filter_time);
  std::printf("  outputs in %s\n", out.c_str());
  if (!r.failure.empty()) {
    std::fprintf(stderr, "run ended early: %s\n", r.failure.c_str());
    return kSolverFailure;
  }
  return kOk;
}

int cmd_bench(const std::string& path, int repeat, const std::string& filter) {
  shield::Scenario s = shield::load_scenario(path);
  if (!filter.empty()) s.filter = shield::parse_filter_kind(filter);
  s.validate();
  const unsigned workers = std::min<unsigned>(thread_cap(), static_cast<unsigned>(repeat));
  std::vector<shield::RunMetrics> results;
  std::string failure;
  for (int done = 0; done < repeat;) {
    std::vector<std::future<shield::RunResult>> batch;
    for (unsigned w = 0; w < workers && done < repeat; ++w, ++done)
      batch.push_back(std::async(std::launch::async, [s] { return shield::run(s); }));
    for (auto& f : batch) {
      shield::RunResult r = f.get();
      if (!r.failure.empty()) failure = r.failure;
      results.push_back(r.metrics);
    }
  }
  double proj = 0.0, solve = 0.0, total = 0.0, best = std::numeric_limits<double>::infinity();
  for (const shield::RunMetrics& m : results) {
    proj += m.mean_projection_time;
    solve += m.mean_solve_time;
    total += m.mean_filter_time;
    best = std::min(best, m.mean_filter_time);
  }
  const double n = static_cast<double>(results.size());
  std::printf("%s, filter %s, %d repeats on %u threads\n", s.name.c_str(), shield::to_string(s.filter), repeat,
              workers);
  std::printf("  avg runtime per iteration\n");
  std::printf("    projection phase        %.4e s\n", proj / n);
  std::printf("    QP phase                %.4e s\n", solve / n);
  std::printf("    total                   %.4e s (best repeat %.4e s)\n", total / n, best);
  if (!failure.empty()) {
    std::fprintf(stderr, "a repeat ended early: %s\n", failure.c_str());
    return kSolverFailure;
  }
  return kOk;
}

int cmd_verify(const std::string& dir) {
  const auto results = shield::verify::run_acceptance(
      dir.empty() ? shield::verify::default_scenario_dir() : std::filesystem::path(dir),
      [](const shield::verify::CriterionResult& r) { std::cout << shield::verify::format(r) << std::endl; });
  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
  std::cout << (results.size() - static_cast<std::size_t>(failed)) << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection-based matrix barrier safety filters"};
  app.require_subcommand(1);

  std::string scenario, out = "out", filter, scenario_dir;
  std::optional<std::uint64_t> seed;
  bool no_svg = false, no_timing = false;
  int repeat = 5;

  auto* run = app.add_subcommand("run", "Simulate a scenario and write trajectory, metrics and plot");
  run->add_option("scenario", scenario, "Scenario JSON file")->required();
  run->add_option("--out", out, "Output directory");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--filter", filter, "pdte, nonconvex, indefinite or none")
      ->check(CLI::IsMember({"pdte", "nonconvex", "indefinite", "none"}));
  run->add_flag("--no-svg", no_svg, "Skip plot.svg");
  run->add_flag("--no-timing", no_timing, "Write zeros for wall-clock columns");

  auto* bench = app.add_subcommand("bench", "Average per-iteration filter runtime over repeated runs");
  bench->add_option("scenario", scenario, "Scenario JSON file")->required();
  bench->add_option("--repeat", repeat, "Number of runs")->check(CLI::PositiveNumber);
  bench->add_option("--filter", filter, "pdte, nonconvex, indefinite or none")
      ->check(CLI::IsMember({"pdte", "nonconvex", "indefinite", "none"}));

  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  verify->add_option("--scenarios", scenario_dir, "Directory with the shipped scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*run) return cmd_run(scenario, out, seed, filter, no_svg, no_timing);
    if (*bench) return cmd_bench(scenario, repeat, filter);
    return cmd_verify(scenario_dir);
  } catch (const shield::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", shield::to_string(e.code()), e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSolverFailure;
  }
}
