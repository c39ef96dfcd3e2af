#include "shield_verify/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>

#include "shield/simharness.hpp"
#include "shield_verify/oracles.hpp"

namespace shield::verify {
namespace {

// Pinned tolerances and sample counts.
constexpr double kGoalRadiusDi = 0.5;
constexpr double kRuntimeBudgetDi = 30.0;
constexpr double kIterationBudget = 0.05;
constexpr double kProjectionDominance = 2.0;
constexpr double kGoalRadiusBicopter = 1.0;
constexpr int kBicopterRepeats = 3;
constexpr int kZeroingRuns = 50;
constexpr int kZeroingSteps = 200;
constexpr double kZeroingTol = 1e-6;
constexpr int kSeparationPairs = 10000;
constexpr int kSeparationSamples = 500;
constexpr int kProjectionTrials = 1000;
constexpr double kProjectionTol = 1e-6;
constexpr double kProjectionTolSpectrahedron = 1e-3;
constexpr int kDepthStarts = 200;
constexpr int kEscapeSteps = 500;
constexpr int kIndefiniteSteps = 300;
constexpr double kIndefiniteTol = 1e-6;
constexpr int kLmiTrials = 200;
constexpr double kLmiMatchTol = 1e-7;
constexpr int kGtrsInstances = 500;
constexpr double kGtrsTol = 1e-5;
constexpr int kConvexityConstructions = 20;
constexpr int kWeylPairs = 1000;
constexpr int kOrderTrials = 1000;

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

Vector di_state(const Vec2& p, const Vec2& v = Vec2::Zero()) {
  Vector x(4);
  x << p.x(), v.x(), p.y(), v.y();
  return x;
}

bool feasible_mode(FilterMode m) { return m == FilterMode::NominalPassthrough || m == FilterMode::Filtered; }

SymmetricMatrix random_symmetric(Rng& rng, int p, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = n(rng);
  return SymmetricMatrix(Matrix(0.5 * (m + m.transpose())));
}

SymmetricMatrix random_psd(Rng& rng, int p, int rank) {
  std::normal_distribution<double> n;
  Matrix g(p, rank);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = n(rng);
  return SymmetricMatrix(Matrix(g * g.transpose()));
}

// ---- 1 and 2 ---------------------------------------------------------------

struct DiRun {
  RunResult result;
  double wall = 0.0;
};

DiRun run_di(const std::filesystem::path& dir) {
  const Scenario s = load_scenario(dir / "double_integrator.json");
  const auto t0 = Clock::now();
  DiRun out{run(s), 0.0};
  out.wall = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

CriterionResult double_integrator_run(const DiRun& r) {
  const RunMetrics& m = r.result.metrics;
  double min_d = std::numeric_limits<double>::infinity();
  for (double d : m.min_signed_distance) min_d = std::min(min_d, d);
  bool modes_ok = true;
  for (const StepRecord& rec : r.result.records)
    if (rec.mode && !feasible_mode(*rec.mode)) modes_ok = false;
  const bool ok = r.result.failure.empty() && modes_ok && min_d >= 0.0 &&
                  m.final_goal_error < kGoalRadiusDi && r.wall < kRuntimeBudgetDi &&
                  r.result.scenario.obstacles.size() == 4;
  return {1, "double integrator, four obstacles", ok,
          fmt("%d steps, passthrough %d, filtered %d, infeasible %zu, min distance %.4f m, goal error %.4f m, %.2f s",
              m.steps, m.passthrough_steps, m.filtered_steps, m.infeasible_steps.size(), min_d, m.final_goal_error,
              r.wall)};
}

CriterionResult runtime_split(const DiRun& r) {
  const RunMetrics& m = r.result.metrics;
  const bool ok = m.mean_solve_time < m.mean_filter_time && m.mean_filter_time < kIterationBudget &&
                  m.mean_projection_time >= kProjectionDominance * m.mean_solve_time;
  return {2, "runtime split", ok,
          fmt("QP phase %.3e s < with projections %.3e s < %.0e s; projection/QP ratio %.1f", m.mean_solve_time,
              m.mean_filter_time, kIterationBudget, m.mean_projection_time / std::max(m.mean_solve_time, 1e-300))};
}

// ---- 3 -----------------------------------------------------------------------

CriterionResult bicopter_comparison(const std::filesystem::path& dir) {
  Scenario s = load_scenario(dir / "bicopter.json");
  struct Summary {
    RunResult run;
    double best_time = std::numeric_limits<double>::infinity();
  };
  auto simulate = [&](FilterKind kind) {
    Scenario v = s;
    v.filter = kind;
    Summary out;
    for (int i = 0; i < kBicopterRepeats; ++i) {
      RunResult r = run(v);
      out.best_time = std::min(out.best_time, r.metrics.mean_filter_time);
      out.run = std::move(r);
    }
    return out;
  };
  const Summary pdte = simulate(FilterKind::Pdte);
  const Summary base = simulate(FilterKind::NonconvexCircle);
  const double eps = s.filter_config.epsilon_for(0);
  auto describe = [&](const char* tag, const Summary& x) {
    const RunMetrics& m = x.run.metrics;
    std::string episodes;
    bool recovered = true;
    for (const BufferEpisode& e : m.buffer_episodes) {
      episodes += fmt(" [%d,%s)", e.enter_step, e.exit_step ? std::to_string(*e.exit_step).c_str() : "end");
      recovered = recovered && e.exit_step.has_value();
    }
    return fmt("%s: %.2e s/iter, goal error %.3f m, min distance %.3f m (buffer %.2f), infeasible %zu, buffer episodes%s%s",
               tag, x.best_time, m.final_goal_error, m.min_signed_distance.at(0), eps, m.infeasible_steps.size(),
               episodes.empty() ? " none" : episodes.c_str(), recovered ? "" : " (no exit: soft)");
  };
  auto completes = [](const Summary& x) { return x.run.failure.empty() && !x.run.metrics.diverged; };
  const bool ok = completes(pdte) && completes(base) && pdte.best_time < base.best_time &&
                  pdte.run.metrics.final_goal_error < kGoalRadiusBicopter &&
                  base.run.metrics.final_goal_error < kGoalRadiusBicopter && !pdte.run.metrics.collided &&
                  !base.run.metrics.collided;
  return {3, "bicopter, projection filter vs quadratic baseline", ok,
          describe("pdte", pdte) + "; " + describe("baseline", base)};
}

// ---- 4 -----------------------------------------------------------------------

// lambda_1 of H(x, x): the diagonal of halfspace values built at x itself.
double lambda1_at(const Vector& x, const FilterOutcome& f) {
  Vector h(static_cast<Eigen::Index>(f.obstacles.size()));
  for (std::size_t i = 0; i < f.obstacles.size(); ++i) h(static_cast<Eigen::Index>(i)) = f.obstacles[i].halfspace->value(x);
  return min_eigenvalue(SymmetricMatrix::diagonal(h));
}

CriterionResult zeroing_suite(const std::filesystem::path& dir) {
  const Scenario s = load_scenario(dir / "double_integrator.json");
  const AffineDynamics dyn = double_integrator(s.sample_time, s.mass);
  const Matrix c = position_selector();
  AxisServo servo(s.sample_time, s.mass, s.weights);
  Rng rng(4);
  int failures = 0, infeasible = 0, runs = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (double gamma : {0.1, 0.2, 0.5}) {
    FilterConfig cfg = s.filter_config;
    cfg.gamma = gamma;
    for (int r = 0; r < kZeroingRuns; ++r, ++runs) {
      // Start inside the buffer of a random obstacle, outside the obstacle.
      const Obstacle& target = s.obstacles[static_cast<std::size_t>(r) % s.obstacles.size()];
      const double gap = uniform(rng, 0.02, 0.9 * cfg.epsilon);
      Vector x = di_state(point_at_distance(rng, target, gap), Vec2(uniform(rng, -1, 1), uniform(rng, -1, 1)));
      std::vector<double> lambda;
      bool feasible = true;
      for (int k = 0; k <= kZeroingSteps; ++k) {
        Vector u_nom(2);
        u_nom << servo.command(x(0), x(1), s.goal.x()), servo.command(x(2), x(3), s.goal.y());
        const FilterOutcome f = pdte_step(x, u_nom, s.obstacles, dyn, c, cfg, LinearConstraintSet(2));
        lambda.push_back(lambda1_at(x, f));
        if (k == kZeroingSteps) break;
        feasible = feasible && feasible_mode(f.mode);
        x = dyn.step(x, f.u);
      }
      if (!(lambda.front() < 0.0)) ++failures;
      if (!feasible) ++infeasible;
      if (!zeroing_certificate(lambda, gamma, kZeroingTol)) ++failures;
      double bound = lambda.front();
      for (std::size_t k = 1; k < lambda.size(); ++k) {
        bound *= 1.0 - gamma;
        worst = std::min(worst, lambda[k] - bound);
      }
    }
  }
  return {4, "zeroing from inside the buffer", failures == 0 && infeasible == 0,
          fmt("%d runs x %d steps, gamma in {0.1, 0.2, 0.5}: %d certificate failures, %d runs with infeasible steps, "
              "worst margin %.2e",
              runs, kZeroingSteps, failures, infeasible, worst)};
}

// ---- 5 -----------------------------------------------------------------------

CriterionResult separation_suite() {
  Rng rng(5);
  const Matrix c = position_selector();
  int failures = 0, exterior = 0, boundary = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < kSeparationPairs; ++n) {
    const auto kind = static_cast<ObstacleKind>(n % 4);
    const Obstacle obs = random_obstacle(rng, kind);
    const double gap = std::pow(10.0, uniform(rng, -3.0, std::log10(5.0)));
    const double eps = uniform(rng, 0.05, 0.5);
    const Vec2 p = point_at_distance(rng, obs, gap);
    const Vector x = di_state(p);
    const ProjectionResult proj = project(obs, p);
    const Location loc = classify(obs, p, proj, 1e-6);
    Halfspace hs;
    if (loc == Location::Exterior) {
      hs = exterior_halfspace(x, proj, c, eps);
      ++exterior;
    } else {
      hs = boundary_halfspace(x, obs, c, eps);
      ++boundary;
    }
    bool ok = loc != Location::Interior;
    for (const Vec2& z : sample_obstacle_points(rng, obs, kSeparationSamples)) {
      const double v = hs.value(di_state(z));
      worst = std::max(worst, v);
      ok = ok && v < 0.0;
    }
    if (!ok) ++failures;
  }
  return {5, "separating halfspaces", failures == 0,
          fmt("%d pairs (%d exterior, %d boundary) x %d obstacle points: %d failures, largest h on obstacle %.3e",
              kSeparationPairs, exterior, boundary, kSeparationSamples, failures, worst)};
}

// ---- 6 -----------------------------------------------------------------------

CriterionResult projection_suite() {
  Rng rng(6);
  std::string detail;
  bool all_ok = true;
  for (int k = 0; k < 4; ++k) {
    const auto kind = static_cast<ObstacleKind>(k);
    const double tol = kind == ObstacleKind::Spectrahedron ? kProjectionTolSpectrahedron : kProjectionTol;
    int bad_oracle = 0, bad_idem = 0, bad_nonexp = 0;
    double worst = 0.0;
    for (int t = 0; t < kProjectionTrials; ++t) {
      const Obstacle obs = random_obstacle(rng, kind);
      const auto [lo, hi] = oracle_bounds(obs);
      const Vec2 mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo) + Vec2(2.0, 2.0);
      auto draw = [&]() {
        return Vec2(uniform(rng, mid.x() - half.x(), mid.x() + half.x()),
                    uniform(rng, mid.y() - half.y(), mid.y() + half.y()));
      };
      const Vec2 p = draw(), q = draw();
      const Vec2 pp = project(obs, p).point, pq = project(obs, q).point;
      const double err = (pp - oracle_projection(obs, p)).norm();
      worst = std::max(worst, err);
      if (err > tol) ++bad_oracle;
      if ((project(obs, pp).point - pp).norm() > tol) ++bad_idem;
      if ((pp - pq).norm() > (p - q).norm() + tol) ++bad_nonexp;
    }
    const bool ok = bad_oracle + bad_idem + bad_nonexp == 0;
    all_ok = all_ok && ok;
    detail += fmt("%s%s: worst %.1e (tol %.0e), %d/%d/%d oracle/idempotence/nonexpansive failures",
                  k ? "; " : "", to_string(kind), worst, tol, bad_oracle, bad_idem, bad_nonexp);
  }
  return {6, "projection oracle", all_ok, fmt("%d trials per type; ", kProjectionTrials) + detail};
}

// ---- 7 -----------------------------------------------------------------------

CriterionResult depth_suite(const std::filesystem::path& dir) {
  const Scenario s = load_scenario(dir / "double_integrator.json");
  const AffineDynamics dyn = double_integrator(s.sample_time, s.mass);
  const Matrix c = position_selector();
  const FilterConfig cfg = s.filter_config;
  Rng rng(7);
  std::string detail;
  bool all_ok = true;
  for (const char* name : {"pentagon", "circle"}) {
    const Obstacle* obs = nullptr;
    for (const Obstacle& o : s.obstacles)
      if (o.name() == name) obs = &o;
    if (!obs) return {7, "depth decrease", false, std::string("scenario has no obstacle named ") + name};
    const std::vector<Obstacle> single{*obs};
    const auto [lo, hi] = oracle_bounds(*obs);
    int no_decrease = 0, no_escape = 0, fallback = 0, max_escape = 0;
    for (int t = 0; t < kDepthStarts; ++t) {
      Vec2 p;
      do p = Vec2(uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()));
      while (!oracle_contains(*obs, p, 0.0) || depth(*obs, p) <= 10.0 * cfg.switch_band);
      Vector x = di_state(p, Vec2(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5)));
      std::optional<int> escaped;
      // Continue 50 steps past the escape so the outer paths are exercised.
      for (int k = 0; k < kEscapeSteps && (!escaped || k < *escaped + 50); ++k) {
        const double before = depth(*obs, c * x);
        if (!escaped && before <= cfg.switch_band) escaped = k;
        const FilterOutcome f = pdte_step(x, Vector::Zero(2), single, dyn, c, cfg, LinearConstraintSet(2));
        if (f.mode == FilterMode::FallbackNominal) ++fallback;
        x = dyn.step(x, f.u);
        const bool interior = f.obstacles.front().location == Location::Interior;
        if (interior && f.mode == FilterMode::Filtered && !(depth(*obs, c * x) < before)) ++no_decrease;
      }
      if (!escaped && depth(*obs, c * x) <= cfg.switch_band) escaped = kEscapeSteps;
      if (!escaped) ++no_escape;
      else max_escape = std::max(max_escape, *escaped);
    }
    const bool ok = no_decrease == 0 && no_escape == 0 && fallback == 0;
    all_ok = all_ok && ok;
    detail += fmt("%s%s: %d starts, slowest escape %d steps, %d non-decreasing steps, %d stuck, %d fallbacks",
                  detail.empty() ? "" : "; ", name, kDepthStarts, max_escape, no_decrease, no_escape, fallback);
  }
  return {7, "depth decrease from inside", all_ok, detail};
}

// ---- 8 -----------------------------------------------------------------------

CriterionResult indefinite_suite() {
  const AffineDynamics dyn = double_integrator(0.01);
  const double gamma = 0.2;
  // h1 = 1 - p_h, h2 = p_v - 3: only one needs to stay nonnegative.
  const MatrixMap h = [](const Vector& x) {
    Vector d(2);
    d << 1.0 - x(0), x(2) - 3.0;
    return SymmetricMatrix::diagonal(d);
  };
  AxisServo servo(0.01, 1.0, AxisWeights{});
  Vector x = Vector::Zero(4);
  std::vector<double> lambda2;
  double lambda1_min = std::numeric_limits<double>::infinity();
  int infeasible = 0, negative_l1 = 0;
  for (int k = 0; k <= kIndefiniteSteps; ++k) {
    const SymmetricMatrix hx = h(x);
    lambda2.push_back(eigenvalue(hx, 2));
    lambda1_min = std::min(lambda1_min, eigenvalue(hx, 1));
    if (eigenvalue(hx, 1) < 0.0) ++negative_l1;
    if (k == kIndefiniteSteps) break;
    Vector u_nom(2);
    u_nom << servo.command(x(0), x(1), 18.0), servo.command(x(2), x(3), 20.0);
    const FilterOutcome f = indefinite_step(x, u_nom, h, 2, dyn, gamma, LinearConstraintSet(2));
    if (!feasible_mode(f.mode)) ++infeasible;
    x = dyn.step(x, f.u);
  }
  bool bound_ok = true;
  double bound = lambda2.front();
  for (double l : lambda2) {
    bound_ok = bound_ok && l >= bound - kIndefiniteTol;
    bound *= 1.0 - gamma;
  }

  // j = 1 against the cutting-plane solver on independently assembled
  // pencils, at a coarser sample time so inputs move H noticeably.
  const AffineDynamics coarse = double_integrator(0.1);
  Rng rng(8);
  double worst = 0.0;
  int mismatches = 0, compared = 0, active = 0;
  for (int t = 0; t < kLmiTrials; ++t) {
    const int p = 3;
    std::vector<SymmetricMatrix> g;
    // A definite offset and definite velocity slopes keep most instances feasible.
    for (int i = 0; i <= 4; ++i) g.push_back(random_symmetric(rng, p, 1.0));
    g[0] = g[0] + SymmetricMatrix::identity(p) * 2.5;
    g[2] = random_psd(rng, p, p) + SymmetricMatrix::identity(p) * 0.5;
    g[4] = random_psd(rng, p, p) + SymmetricMatrix::identity(p) * 0.5;
    const MatrixMap hmap = [g](const Vector& z) {
      Matrix m = g[0].matrix();
      for (int i = 0; i < 4; ++i) m += z(i) * g[static_cast<std::size_t>(i) + 1].matrix();
      return SymmetricMatrix(m);
    };
    const Vector xs = di_state(Vec2(uniform(rng, -2, 2), uniform(rng, -2, 2)), Vec2(uniform(rng, -1, 1), uniform(rng, -1, 1)));
    Vector u_nom(2);
    u_nom << uniform(rng, -5, 5), uniform(rng, -5, 5);
    const FilterOutcome f = indefinite_step(xs, u_nom, hmap, 1, coarse, gamma, LinearConstraintSet(2));
    const SymmetricMatrix hx = hmap(xs);
    const Matrix f0 =
        hmap(Vector(coarse.A * xs)).matrix() - hx.matrix() + gamma * oracle_min_eig(hx.matrix()) * Matrix::Identity(p, p);
    std::vector<SymmetricMatrix> slopes;
    for (int i = 0; i < 2; ++i) {
      Matrix s = Matrix::Zero(p, p);
      for (int j = 0; j < 4; ++j) s += coarse.B(j, i) * g[static_cast<std::size_t>(j) + 1].matrix();
      slopes.emplace_back(s);
    }
    const SolveReport ref = solve_lmi_ls(u_nom, SymmetricMatrix(f0), slopes);
    if (!ref.ok()) {
      // Both sides must agree that the hard condition has no solution.
      if (feasible_mode(f.mode)) ++mismatches;
      continue;
    }
    ++compared;
    if (f.mode == FilterMode::Filtered) ++active;
    const double err = feasible_mode(f.mode) ? (f.u - *ref.solution).norm() : std::numeric_limits<double>::infinity();
    worst = std::max(worst, err);
    if (!(err <= kLmiMatchTol)) ++mismatches;
  }
  const bool ok = bound_ok && infeasible == 0 && negative_l1 > 0 && mismatches == 0 &&
                  compared >= kLmiTrials / 2;
  return {8, "indefinite eigenvalue filter", ok,
          fmt("j=2: %d steps, lambda_2 bound %s, lambda_1 negative on %d steps (min %.3f), %d infeasible; "
              "j=1: %d trials, %d with a feasible reference (%d filtered), %d mismatches, worst %.1e",
              kIndefiniteSteps, bound_ok ? "holds" : "violated", negative_l1, lambda1_min, infeasible, kLmiTrials,
              compared, active, mismatches, worst)};
}

// ---- 9 -----------------------------------------------------------------------

CriterionResult gtrs_suite() {
  Rng rng(9);
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < kGtrsInstances; ++t) {
    Eigen::Matrix2d m = random_symmetric(rng, 2).matrix();
    const Vec2 v(uniform(rng, -1, 1), uniform(rng, -1, 1));
    const Vec2 u0(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const Vec2 uf(uniform(rng, -2, 2), uniform(rng, -2, 2));
    // Shift d so that uf is strictly feasible; the optimum lies within |uf - u0|.
    const double d = -(uf.dot(m * uf) + 2.0 * v.dot(uf)) - uniform(rng, 0.01, 2.0);
    const SolveReport rep = solve_gtrs(u0, SymmetricMatrix(Matrix(m)), v, d);
    const double r = (uf - u0).norm() * 1.01 + 1e-3;
    const double oracle = oracle_gtrs_objective(u0, m, v, d, r);
    bool ok = rep.ok();
    if (ok) {
      const Vec2 u = *rep.solution;
      const double q = u.dot(m * u) + 2.0 * v.dot(u) + d;
      const double err = std::abs(rep.objective - oracle);
      worst = std::max(worst, err);
      ok = q <= 1e-8 * (1.0 + std::abs(d)) && err <= kGtrsTol;
    }
    if (!ok) ++failures;
  }
  return {9, "global quadratic subproblem", failures == 0,
          fmt("%d instances against a 2001^2 grid with zoom: %d failures, worst objective gap %.1e", kGtrsInstances,
              failures, worst)};
}

// ---- 10 ----------------------------------------------------------------------

CriterionResult appendix_suite() {
  Rng rng(10);
  const int n = 2, p = 3;
  const Box box{Vector::Constant(n, -1.0), Vector::Constant(n, 1.0)};
  using Scalar = std::function<double(const Vector&)>;
  auto affine = [&]() -> Scalar {
    const Vector a = Vector::Random(n);
    const double b = uniform(rng, -1, 1);
    return [a, b](const Vector& x) { return a.dot(x) + b; };
  };
  auto convex = [&](int which) -> Scalar {
    const Vector c = Vector::Random(n);
    switch (which % 3) {
      case 0: return [c](const Vector& x) { return (x - c).squaredNorm(); };
      case 1: return [c](const Vector& x) { return std::exp(c.dot(x)); };
      default: return [c](const Vector& x) { return std::abs(c.dot(x)) + x.squaredNorm(); };
    }
  };
  struct Term {
    SymmetricMatrix a;
    Scalar f;
  };
  auto field = [](SymmetricMatrix b, std::vector<Term> terms) -> MatrixField {
    return [b, terms](const Vector& x) {
      Matrix m = b.matrix();
      for (const Term& t : terms) m += t.f(x) * t.a.matrix();
      return SymmetricMatrix(m);
    };
  };
  int pass_ok = 0, fail_ok = 0;
  for (int c = 0; c < kConvexityConstructions; ++c) {
    // Every term meets one of the three hypotheses.
    std::vector<Term> terms;
    terms.push_back({random_symmetric(rng, p), affine()});
    terms.push_back({random_psd(rng, p, 1 + c % p), convex(c)});
    terms.push_back({-random_psd(rng, p, 1 + (c + 1) % p), [g = convex(c + 1)](const Vector& x) { return -g(x); }});
    if (std::holds_alternative<PassedSampling>(
            sample_matrix_convexity(field(random_symmetric(rng, p), terms), box, 2000, 1e-9, 100 + c)))
      ++pass_ok;
  }
  for (int c = 0; c < kConvexityConstructions; ++c) {
    // One term pairs a strictly convex scalar with a matrix that has a
    // negative eigenvalue of at least 0.5.
    const Matrix q = Eigen::HouseholderQR<Matrix>(Matrix::Random(p, p)).householderQ();
    Vector ev(p);
    ev << -uniform(rng, 0.5, 2.0), uniform(rng, -1, 1), uniform(rng, -1, 1);
    std::vector<Term> terms;
    terms.push_back({random_symmetric(rng, p), affine()});
    terms.push_back({SymmetricMatrix(Matrix(q * ev.asDiagonal() * q.transpose())),
                     [](const Vector& x) { return x.squaredNorm(); }});
    if (std::holds_alternative<CounterexampleFound>(
            sample_matrix_convexity(field(random_symmetric(rng, p), terms), box, 2000, 1e-9, 200 + c)))
      ++fail_ok;
  }

  int weyl_bad = 0, weyl_checks = 0;
  for (int t = 0; t < kWeylPairs; ++t) {
    const int dim = 2 + t % 5;
    const SymmetricMatrix a = random_symmetric(rng, dim), b = random_symmetric(rng, dim);
    for (int i = 1; i <= dim; ++i)
      for (int j = 1; j <= i; ++j, ++weyl_checks)
        if (!check_weyl_bound(a, b, i, j)) ++weyl_bad;
  }

  int order_bad = 0;
  for (int t = 0; t < kOrderTrials; ++t) {
    const int dim = 2 + t % 4;
    SymmetricMatrix a = random_psd(rng, dim, 1 + t % dim);
    if (oracle_max_eig(a.matrix()) < 0.1) a = a * (0.1 / std::max(oracle_max_eig(a.matrix()), 1e-12));
    double lo = uniform(rng, -3, 3), hi = lo + uniform(rng, 1e-3, 3);
    if (t % 2 == 0) {
      if (!loewner_geq(hi * a, lo * a, 1e-12)) ++order_bad;
    } else {
      if (loewner_geq(lo * a, hi * a, 1e-12)) ++order_bad;
    }
  }
  const bool ok = pass_ok == kConvexityConstructions && fail_ok == kConvexityConstructions && weyl_bad == 0 &&
                  order_bad == 0;
  return {10, "matrix convexity, Weyl and scalar order", ok,
          fmt("convexity: %d/%d pass, %d/%d counterexamples; Weyl: %d/%d checks over %d pairs; order: %d/%d",
              pass_ok, kConvexityConstructions, fail_ok, kConvexityConstructions, weyl_checks - weyl_bad, weyl_checks,
              kWeylPairs, kOrderTrials - order_bad, kOrderTrials)};
}

CriterionResult guarded(int id, const char* name, const std::function<CriterionResult()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return {id, name, false, std::string("threw: ") + e.what()};
  }
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const std::filesystem::path& scenario_dir,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  auto emit = [&](CriterionResult r) {
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  };
  std::optional<DiRun> di;
  std::string di_error;
  try {
    di = run_di(scenario_dir);
  } catch (const std::exception& e) {
    di_error = e.what();
  }
  emit(di ? double_integrator_run(*di) : CriterionResult{1, "double integrator, four obstacles", false, di_error});
  emit(di ? runtime_split(*di) : CriterionResult{2, "runtime split", false, di_error});
  emit(guarded(3, "bicopter", [&] { return bicopter_comparison(scenario_dir); }));
  emit(guarded(4, "zeroing", [&] { return zeroing_suite(scenario_dir); }));
  emit(guarded(5, "separating halfspaces", separation_suite));
  emit(guarded(6, "projection oracle", projection_suite));
  emit(guarded(7, "depth decrease", [&] { return depth_suite(scenario_dir); }));
  emit(guarded(8, "indefinite", indefinite_suite));
  emit(guarded(9, "quadratic subproblem", gtrs_suite));
  emit(guarded(10, "appendix", appendix_suite));
  return out;
}

std::filesystem::path default_scenario_dir() { return SHIELD_SCENARIO_DIR; }

std::string format(const CriterionResult& r) {
  return std::string(r.passed ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name + ": " + r.detail;
}

}  // namespace shield::verify
