#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shield/filter.hpp"
#include "shield/plants.hpp"

namespace shield {

enum class PlantKind { DoubleIntegrator, Bicopter };
enum class FilterKind { None, Pdte, NonconvexCircle, Indefinite };

const char* to_string(PlantKind kind);
const char* to_string(FilterKind kind);
FilterKind parse_filter_kind(const std::string& name);

struct Scenario {
  std::string name;
  PlantKind plant = PlantKind::DoubleIntegrator;
  double sample_time = 0.01;
  int steps = 0;
  Vector initial_state;
  Vec2 goal = Vec2::Zero();
  std::vector<Obstacle> obstacles;

  FilterKind filter = FilterKind::Pdte;
  FilterConfig filter_config;
  std::optional<int> indefinite_j;

  // Double integrator
  double mass = 1.0;
  AxisWeights weights;

  // Bicopter
  BicopterLoopConfig bicopter;
  std::optional<double> horizontal_speed_limit;
  std::optional<double> vertical_speed_limit;
  std::optional<double> tilt_limit;  // radians

  std::uint64_t seed = 0;
  double initial_jitter = 0.0;
  double divergence_limit = 1e6;

  // Checks filter/obstacle compatibility; throws ValidationError.
  void validate() const;
};

// Parses and validates a scenario file. Unknown keys are rejected.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");

struct StepRecord {
  int k = 0;
  double t = 0.0;
  Vector state;
  std::optional<Vector> u_nominal;
  std::optional<Vector> u;
  std::optional<FilterMode> mode;
  std::optional<double> max_slack;
  std::vector<double> distances;  // signed distance to each obstacle
  double projection_time = 0.0;
  double solve_time = 0.0;
};

struct BufferEpisode {
  int obstacle = 0;
  int enter_step = 0;
  std::optional<int> exit_step;
};

struct RunMetrics {
  int steps = 0;
  double mean_projection_time = 0.0;
  double mean_solve_time = 0.0;
  double mean_filter_time = 0.0;
  double max_filter_time = 0.0;
  double total_runtime = 0.0;
  int passthrough_steps = 0;
  int filtered_steps = 0;
  int slack_steps = 0;
  int fallback_steps = 0;
  std::vector<int> infeasible_steps;
  std::vector<double> min_signed_distance;
  Vec2 final_position = Vec2::Zero();
  double final_goal_error = 0.0;
  bool collided = false;
  bool diverged = false;
  std::vector<BufferEpisode> buffer_episodes;
};

struct RunResult {
  Scenario scenario;
  std::vector<StepRecord> records;
  RunMetrics metrics;
  std::string failure;
};

// Closed-loop simulation. Stops early (metrics.diverged) when a state norm
// exceeds the scenario's divergence limit.
RunResult run(const Scenario& scenario);

struct OutputOptions {
  bool svg = true;
  bool timing = true;  // false writes zeros for every wall-clock value
};

// trajectory.csv, metrics.json, feasibility.csv and plot.svg in `dir`.
void write_outputs(const RunResult& result, const std::filesystem::path& dir,
                   const OutputOptions& options = {});

std::string metrics_json(const RunResult& result, const OutputOptions& options = {});
RunMetrics load_metrics(const std::filesystem::path& path);

// 800 x 800 SVG of obstacles, dashed buffers and the trajectory.
std::string render_svg(const RunResult& result);

}  // namespace shield
