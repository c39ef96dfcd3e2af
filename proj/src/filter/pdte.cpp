#include <chrono>
#include <cmath>
#include <future>

#include "shield/filter.hpp"
#include "slack.hpp"

namespace shield {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

}  // namespace

namespace detail {

SlackSolution solve_with_slack(const Vector& u0, const LinearConstraintSet& rows, double weight) {
  require(weight > 0.0, ErrorCode::InvalidArgument, "slack weight must be positive");
  const int m = rows.dim();
  const int k = rows.inequality_count();
  const double scale = std::sqrt(weight);
  // Variables (u, sigma) with sigma = sqrt(w) s.
  LinearConstraintSet lifted(m + k);
  for (int i = 0; i < k; ++i) {
    Vector row = Vector::Zero(m + k);
    row.head(m) = rows.G().row(i).transpose();
    row(m + i) = -1.0 / scale;
    lifted.add_leq(row, rows.h()(i));
    Vector nonneg = Vector::Zero(m + k);
    nonneg(m + i) = -1.0;
    lifted.add_leq(nonneg, 0.0);
  }
  for (int i = 0; i < rows.equality_count(); ++i) {
    Vector row = Vector::Zero(m + k);
    row.head(m) = rows.E().row(i).transpose();
    lifted.add_eq(row, rows.e()(i));
  }
  Vector target = Vector::Zero(m + k);
  target.head(m) = u0;
  Vector warm = target;
  if (k > 0) warm.tail(k) = scale * (rows.G() * u0 - rows.h()).cwiseMax(0.0);
  SlackSolution out;
  out.report = solve_ls_lin(target, lifted, warm);
  if (out.report.solution) {
    out.u = out.report.solution->head(m);
    out.slack = out.report.solution->tail(k) / scale;
  }
  return out;
}

}  // namespace detail

void FilterConfig::validate() const {
  require(gamma > 0.0 && gamma <= 1.0, ErrorCode::ValidationError, "gamma must lie in (0, 1]");
  require(epsilon >= 0.0, ErrorCode::ValidationError, "epsilon must be nonnegative");
  for (const auto& e : epsilon_overrides)
    require(!e || *e >= 0.0, ErrorCode::ValidationError, "epsilon overrides must be nonnegative");
  require(switch_band > 0.0, ErrorCode::ValidationError, "switch band must be positive");
  require(slack_weight > 0.0, ErrorCode::ValidationError, "slack weight must be positive");
  require(epsilon_ratio >= 0.0 && epsilon_ratio < 1.0, ErrorCode::ValidationError,
          "epsilon ratio must lie in [0, 1)");
  require(c_perp >= 0.0 && c_perp <= 1.0, ErrorCode::ValidationError, "c_perp must lie in [0, 1]");
}

double FilterConfig::epsilon_for(std::size_t obstacle) const {
  if (obstacle < epsilon_overrides.size() && epsilon_overrides[obstacle]) return *epsilon_overrides[obstacle];
  return epsilon;
}

const char* to_string(FilterMode mode) {
  switch (mode) {
    case FilterMode::NominalPassthrough: return "NominalPassthrough";
    case FilterMode::Filtered: return "Filtered";
    case FilterMode::SlackRelaxed: return "SlackRelaxed";
    case FilterMode::FallbackNominal: return "FallbackNominal";
  }
  return "Unknown";
}

std::vector<ProjectionResult> joint_projection(const Vector& x, std::span<const Obstacle> obstacles,
                                               const Matrix& c_pos, bool parallel) {
  require(c_pos.rows() == 2 && c_pos.cols() == x.size(), ErrorCode::DimMismatch,
          "position selector does not match the state");
  const Vec2 p = c_pos * x;
  std::vector<ProjectionResult> out;
  out.reserve(obstacles.size());
  if (!parallel || obstacles.size() < 2) {
    for (const Obstacle& obs : obstacles) out.push_back(project(obs, p));
    return out;
  }
  std::vector<std::future<ProjectionResult>> jobs;
  for (const Obstacle& obs : obstacles)
    jobs.push_back(std::async(std::launch::async, [&obs, p] { return project(obs, p); }));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

FilterOutcome pdte_step(const Vector& x, const Vector& u_nom, std::span<const Obstacle> obstacles,
                        const AffineDynamics& dyn, const Matrix& c_pos, const FilterConfig& cfg,
                        const LinearConstraintSet& extra) {
  require(x.size() == dyn.state_dim() && u_nom.size() == dyn.input_dim() && extra.dim() == dyn.input_dim(),
          ErrorCode::DimMismatch, "filter inputs do not match the dynamics");
  require(x.allFinite() && u_nom.allFinite(), ErrorCode::NonFinite, "non-finite state or nominal input");
  FilterOutcome out;
  out.u = u_nom;

  const auto t_proj = Clock::now();
  std::vector<Halfspace> parts;
  const Vec2 p = c_pos * x;
  try {
    const std::vector<ProjectionResult> projections = joint_projection(x, obstacles, c_pos);
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      ObstacleRecord rec;
      rec.projection = projections[i];
      rec.location = classify(obstacles[i], p, rec.projection, cfg.switch_band);
      const double eps = cfg.epsilon_for(i);
      switch (rec.location) {
        case Location::Exterior:
          rec.halfspace = exterior_halfspace(x, rec.projection, c_pos, eps, cfg.switch_band);
          break;
        case Location::Boundary:
          rec.halfspace = boundary_halfspace(x, obstacles[i], c_pos, eps, cfg.switch_band);
          break;
        case Location::Interior:
          rec.halfspace = interior_halfspace(x, obstacles[i], c_pos);
          break;
      }
      parts.push_back(*rec.halfspace);
      out.obstacles.push_back(rec);
    }
  } catch (const Error& e) {
    out.projection_time = seconds_since(t_proj);
    out.mode = FilterMode::FallbackNominal;
    out.note = e.what();
    return out;
  }
  out.projection_time = seconds_since(t_proj);

  const auto t_solve = Clock::now();
  LinearConstraintSet rows(dyn.input_dim());
  try {
    if (!parts.empty()) rows = HalfspaceStack(parts).step_rows(x, dyn, cfg.gamma);
  } catch (const Error& e) {
    out.solve_time = seconds_since(t_solve);
    out.mode = FilterMode::FallbackNominal;
    out.note = e.what();
    return out;
  }
  rows.append(extra);

  if (rows.satisfied(u_nom, 1e-10)) {
    out.mode = FilterMode::NominalPassthrough;
    out.solve_time = seconds_since(t_solve);
    return out;
  }
  const SolveReport rep = solve_ls_lin(u_nom, rows);
  out.reports.push_back(rep);
  if (rep.ok()) {
    out.u = *rep.solution;
    out.mode = FilterMode::Filtered;
  } else {
    const detail::SlackSolution relaxed = detail::solve_with_slack(u_nom, rows, cfg.slack_weight);
    out.reports.push_back(relaxed.report);
    if (relaxed.report.ok()) {
      out.u = relaxed.u;
      out.slack = relaxed.slack;
      out.mode = FilterMode::SlackRelaxed;
    } else {
      out.mode = FilterMode::FallbackNominal;
      out.note = std::string("QP ") + to_string(rep.status) + ", slack QP " + to_string(relaxed.report.status);
    }
  }
  out.solve_time = seconds_since(t_solve);
  return out;
}

bool zeroing_certificate(std::span<const double> lambda1, double gamma, double base_tol) {
  require(gamma > 0.0 && gamma <= 1.0, ErrorCode::InvalidArgument, "gamma must lie in (0, 1]");
  if (lambda1.empty()) return true;
  const double tol = base_tol * (1.0 + std::abs(lambda1.front()));
  double bound = lambda1.front();
  for (double l : lambda1) {
    if (l < bound - tol) return false;
    bound *= 1.0 - gamma;
  }
  return true;
}

}  // namespace shield
