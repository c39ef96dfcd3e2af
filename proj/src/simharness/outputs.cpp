#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "shield/simharness.hpp"

namespace shield {
namespace {

using json = nlohmann::json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << body;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<std::string> state_names(PlantKind plant) {
  std::vector<std::string> names{"p_h", "v_h", "p_v", "v_v"};
  if (plant == PlantKind::Bicopter) {
    names.emplace_back("theta");
    names.emplace_back("omega");
  }
  return names;
}

std::string trajectory_csv(const RunResult& r, bool timing) {
  std::ostringstream out;
  out << "k,t";
  for (const std::string& n : state_names(r.scenario.plant)) out << ',' << n;
  out << ",u_nom_h,u_nom_v,u_h,u_v,mode";
  for (std::size_t i = 0; i < r.scenario.obstacles.size(); ++i) out << ",dist_obs_" << i;
  out << ",runtime_proj,runtime_qp\r\n";
  for (const StepRecord& s : r.records) {
    out << s.k << ',' << num(s.t);
    for (Eigen::Index i = 0; i < s.state.size(); ++i) out << ',' << num(s.state(i));
    for (const auto* u : {&s.u_nominal, &s.u}) {
      for (int i = 0; i < 2; ++i) {
        out << ',';
        if (*u) out << num((**u)(i));
      }
    }
    out << ',' << (s.mode ? to_string(*s.mode) : "");
    for (double d : s.distances) out << ',' << num(d);
    out << ',' << num(timing ? s.projection_time : 0.0) << ',' << num(timing ? s.solve_time : 0.0) << "\r\n";
  }
  return out.str();
}

std::string feasibility_csv(const RunResult& r) {
  std::ostringstream out;
  out << "k,mode,feasible,max_slack\r\n";
  for (const StepRecord& s : r.records) {
    if (!s.mode) continue;
    const bool feasible = *s.mode == FilterMode::NominalPassthrough || *s.mode == FilterMode::Filtered;
    out << s.k << ',' << to_string(*s.mode) << ',' << (feasible ? 1 : 0) << ',';
    if (s.max_slack) out << num(*s.max_slack);
    out << "\r\n";
  }
  return out.str();
}

}  // namespace

std::string metrics_json(const RunResult& result, const OutputOptions& options) {
  const RunMetrics& m = result.metrics;
  const auto t = [&](double v) { return options.timing ? v : 0.0; };
  json episodes = json::array();
  for (const BufferEpisode& e : m.buffer_episodes) {
    episodes.push_back({{"obstacle", e.obstacle},
                        {"enter_step", e.enter_step},
                        {"exit_step", e.exit_step ? json(*e.exit_step) : json(nullptr)}});
  }
  json doc = {
      {"scenario", result.scenario.name},
      {"plant", to_string(result.scenario.plant)},
      {"filter", to_string(result.scenario.filter)},
      {"steps", m.steps},
      {"mean_projection_time", t(m.mean_projection_time)},
      {"mean_solve_time", t(m.mean_solve_time)},
      {"mean_filter_time", t(m.mean_filter_time)},
      {"max_filter_time", t(m.max_filter_time)},
      {"total_runtime", t(m.total_runtime)},
      {"mode_counts",
       {{"nominal_passthrough", m.passthrough_steps},
        {"filtered", m.filtered_steps},
        {"slack_relaxed", m.slack_steps},
        {"fallback_nominal", m.fallback_steps}}},
      {"infeasible_steps", m.infeasible_steps},
      {"min_signed_distance", m.min_signed_distance},
      {"final_position", {m.final_position.x(), m.final_position.y()}},
      {"final_goal_error", m.final_goal_error},
      {"collided", m.collided},
      {"diverged", m.diverged},
      {"buffer_episodes", episodes},
      {"failure", result.failure},
  };
  return doc.dump(2) + "\n";
}

RunMetrics load_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
    RunMetrics m;
    m.steps = doc.at("steps").get<int>();
    m.mean_projection_time = doc.at("mean_projection_time").get<double>();
    m.mean_solve_time = doc.at("mean_solve_time").get<double>();
    m.mean_filter_time = doc.at("mean_filter_time").get<double>();
    m.max_filter_time = doc.at("max_filter_time").get<double>();
    m.total_runtime = doc.at("total_runtime").get<double>();
    const json& modes = doc.at("mode_counts");
    m.passthrough_steps = modes.at("nominal_passthrough").get<int>();
    m.filtered_steps = modes.at("filtered").get<int>();
    m.slack_steps = modes.at("slack_relaxed").get<int>();
    m.fallback_steps = modes.at("fallback_nominal").get<int>();
    m.infeasible_steps = doc.at("infeasible_steps").get<std::vector<int>>();
    m.min_signed_distance = doc.at("min_signed_distance").get<std::vector<double>>();
    const auto fp = doc.at("final_position").get<std::vector<double>>();
    if (fp.size() != 2) throw Error(ErrorCode::ParseError, "final_position must have two entries");
    m.final_position = Vec2(fp[0], fp[1]);
    m.final_goal_error = doc.at("final_goal_error").get<double>();
    m.collided = doc.at("collided").get<bool>();
    m.diverged = doc.at("diverged").get<bool>();
    for (const json& e : doc.at("buffer_episodes")) {
      BufferEpisode ep{e.at("obstacle").get<int>(), e.at("enter_step").get<int>(), std::nullopt};
      if (!e.at("exit_step").is_null()) ep.exit_step = e.at("exit_step").get<int>();
      m.buffer_episodes.push_back(ep);
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_outputs(const RunResult& result, const std::filesystem::path& dir, const OutputOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "trajectory.csv", trajectory_csv(result, options.timing));
  write_file(dir / "feasibility.csv", feasibility_csv(result));
  write_file(dir / "metrics.json", metrics_json(result, options));
  if (options.svg) write_file(dir / "plot.svg", render_svg(result));
}

}  // namespace shield
