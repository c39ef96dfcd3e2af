#include <chrono>
#include <cmath>
#include <random>

#include "shield/simharness.hpp"

namespace shield {
namespace {

using Clock = std::chrono::steady_clock;

// Wraps the chosen filter behind one call so both plants share the loop.
class FilterStage {
 public:
  FilterStage(const Scenario& s, const AffineDynamics& dyn, LinearConstraintSet extra)
      : s_(s), dyn_(dyn), extra_(std::move(extra)), c_pos_(position_selector()) {
    if (s.filter == FilterKind::Indefinite) build_blocks();
  }

  FilterOutcome operator()(const Vector& x, const Vector& u_nom) const {
    const FilterConfig& cfg = s_.filter_config;
    switch (s_.filter) {
      case FilterKind::Pdte:
        return pdte_step(x, u_nom, s_.obstacles, dyn_, c_pos_, cfg, extra_);
      case FilterKind::NonconvexCircle:
        return nonconvex_circle_step(x, u_nom, s_.obstacles.front().as<Circle>(), dyn_, c_pos_, cfg.gamma,
                                     cfg.epsilon_for(0), extra_, cfg.slack_weight);
      case FilterKind::Indefinite:
        return indefinite_step(x, u_nom, blocks_, dyn_, cfg.gamma, extra_);
      case FilterKind::None:
        break;
    }
    FilterOutcome out;
    out.u = u_nom;
    return out;
  }

 private:
  void build_blocks() {
    const Matrix c = c_pos_;
    for (std::size_t i = 0; i < s_.obstacles.size(); ++i) {
      const Obstacle& o = s_.obstacles[i];
      if (o.kind() == ObstacleKind::Polytope) {
        const Polytope poly = o.as<Polytope>();
        const double eps = s_.filter_config.epsilon_for(i);
        // Outside the buffered polygon iff some face value is nonnegative,
        // i.e. the largest eigenvalue of the diagonal matrix is.
        blocks_.push_back({[poly, c, eps](const Vector& x) {
                             return SymmetricMatrix::diagonal(polytope_face_values(poly, x, c, eps));
                           },
                           s_.indefinite_j.value_or(poly.face_count())});
      } else {
        const Spectrahedron sp = o.as<Spectrahedron>();
        const double ratio = s_.filter_config.epsilon_ratio;
        blocks_.push_back({[sp, c, ratio](const Vector& x) { return spectrahedron_safe_matrix(sp, x, c, ratio); },
                           s_.indefinite_j.value_or(sp.a0.dim())});
      }
    }
  }

  const Scenario& s_;
  const AffineDynamics& dyn_;
  LinearConstraintSet extra_;
  Matrix c_pos_;
  std::vector<IndefiniteBlock> blocks_;
};

Vector jittered(const Scenario& s) {
  Vector x = s.initial_state;
  if (s.initial_jitter > 0.0) {
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> jitter(-s.initial_jitter, s.initial_jitter);
    x(0) += jitter(rng);
    x(2) += jitter(rng);
  }
  return x;
}

bool diverged(const Vector& x, double limit) { return !x.allFinite() || x.norm() > limit; }

class Recorder {
 public:
  Recorder(const Scenario& s, RunResult& out) : s_(s), out_(out) {}

  StepRecord& observe(int k, const Vector& state) {
    StepRecord r;
    r.k = k;
    r.t = k * s_.sample_time;
    r.state = state;
    const Vec2 p(state(0), state(2));
    for (const Obstacle& o : s_.obstacles) r.distances.push_back(signed_distance(o, p));
    out_.records.push_back(std::move(r));
    return out_.records.back();
  }

  static void attach(StepRecord& r, const Vector& u_nom, const FilterOutcome& f) {
    r.u_nominal = u_nom;
    r.u = f.u;
    r.mode = f.mode;
    if (f.slack && f.slack->size() > 0) r.max_slack = f.slack->maxCoeff();
    r.projection_time = f.projection_time;
    r.solve_time = f.solve_time;
  }

 private:
  const Scenario& s_;
  RunResult& out_;
};

void run_double_integrator(const Scenario& s, RunResult& out) {
  const AffineDynamics dyn = double_integrator(s.sample_time, s.mass);
  AxisServo horizontal(s.sample_time, s.mass, s.weights);
  AxisServo vertical(s.sample_time, s.mass, s.weights);
  const FilterStage filter(s, dyn, LinearConstraintSet(2));
  Recorder rec(s, out);
  Vector x = jittered(s);
  for (int k = 0;; ++k) {
    StepRecord& r = rec.observe(k, x);
    if (diverged(x, s.divergence_limit)) {
      out.metrics.diverged = true;
      out.failure = "plant diverged at step " + std::to_string(k);
      return;
    }
    if (k == s.steps) return;
    Vector u_nom(2);
    u_nom << horizontal.command(x(0), x(1), s.goal.x()), vertical.command(x(2), x(3), s.goal.y());
    const FilterOutcome f = filter(x, u_nom);
    Recorder::attach(r, u_nom, f);
    horizontal.advance(x(0), s.goal.x());
    vertical.advance(x(2), s.goal.y());
    x = dyn.step(x, f.u);
  }
}

void run_bicopter(const Scenario& s, RunResult& out) {
  BicopterLoopConfig cfg = s.bicopter;
  cfg.sample_time = s.sample_time;
  cfg.reference = s.goal;
  const AffineDynamics dyn = bicopter_translational_model(cfg.params, s.sample_time);
  BicopterLoop loop(cfg, BicopterState(jittered(s)));
  LinearConstraintSet static_rows(2);
  if (s.tilt_limit) static_rows = tilt_constraint_rows(cfg.params, *s.tilt_limit);
  Recorder rec(s, out);
  for (int k = 0;; ++k) {
    const Vector full = loop.state();
    StepRecord& r = rec.observe(k, full);
    if (diverged(full, s.divergence_limit)) {
      out.metrics.diverged = true;
      out.failure = "plant diverged at step " + std::to_string(k);
      return;
    }
    if (k == s.steps) return;
    const Vector xt = loop.translational_state();
    LinearConstraintSet extra = static_rows;
    if (s.horizontal_speed_limit)
      extra.append(velocity_cbf_rows(xt, dyn, *s.horizontal_speed_limit, *s.vertical_speed_limit,
                                     s.filter_config.gamma));
    const FilterStage filter(s, dyn, std::move(extra));
    const Vector u_nom = loop.nominal_input();
    const FilterOutcome f = filter(xt, u_nom);
    Recorder::attach(r, u_nom, f);
    loop.apply(Vec2(f.u(0), f.u(1)));
  }
}

void summarize(const Scenario& s, RunResult& out) {
  RunMetrics& m = out.metrics;
  const std::size_t n_obs = s.obstacles.size();
  m.min_signed_distance.assign(n_obs, std::numeric_limits<double>::infinity());
  std::vector<std::optional<std::size_t>> open(n_obs);
  int filtered = 0;
  double proj = 0.0, solve = 0.0, total = 0.0;
  for (const StepRecord& r : out.records) {
    for (std::size_t i = 0; i < n_obs; ++i) {
      const double d = r.distances[i];
      m.min_signed_distance[i] = std::min(m.min_signed_distance[i], d);
      const bool in_buffer = d < s.filter_config.epsilon_for(i);
      if (in_buffer && !open[i]) {
        open[i] = m.buffer_episodes.size();
        m.buffer_episodes.push_back({static_cast<int>(i), r.k, std::nullopt});
      } else if (!in_buffer && open[i]) {
        m.buffer_episodes[*open[i]].exit_step = r.k;
        open[i].reset();
      }
    }
    if (!r.mode) continue;
    ++filtered;
    proj += r.projection_time;
    solve += r.solve_time;
    total += r.projection_time + r.solve_time;
    m.max_filter_time = std::max(m.max_filter_time, r.projection_time + r.solve_time);
    switch (*r.mode) {
      case FilterMode::NominalPassthrough: ++m.passthrough_steps; break;
      case FilterMode::Filtered: ++m.filtered_steps; break;
      case FilterMode::SlackRelaxed: ++m.slack_steps; m.infeasible_steps.push_back(r.k); break;
      case FilterMode::FallbackNominal: ++m.fallback_steps; m.infeasible_steps.push_back(r.k); break;
    }
  }
  m.steps = filtered;
  if (filtered > 0) {
    m.mean_projection_time = proj / filtered;
    m.mean_solve_time = solve / filtered;
    m.mean_filter_time = total / filtered;
  }
  for (double d : m.min_signed_distance) m.collided = m.collided || d < 0.0;
  const Vector& last = out.records.back().state;
  m.final_position = Vec2(last(0), last(2));
  m.final_goal_error = (m.final_position - s.goal).norm();
}

}  // namespace

RunResult run(const Scenario& scenario) {
  scenario.validate();
  RunResult out;
  out.scenario = scenario;
  out.records.reserve(static_cast<std::size_t>(scenario.steps) + 1);
  const auto start = Clock::now();
  try {
    if (scenario.plant == PlantKind::DoubleIntegrator)
      run_double_integrator(scenario, out);
    else
      run_bicopter(scenario, out);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError || e.code() == ErrorCode::InvalidArgument) throw;
    out.failure = std::string(to_string(e.code())) + ": " + e.what();
    // The step whose filter threw has no input; keep the record as the last state.
  }
  out.metrics.total_runtime = std::chrono::duration<double>(Clock::now() - start).count();
  summarize(scenario, out);
  return out;
}

}  // namespace shield
