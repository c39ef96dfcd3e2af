#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "shield/simharness.hpp"

namespace shield {
namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ValidationError, where + ": " + what);
}

// Object view that records consumed keys so leftovers can be rejected.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) invalid(where_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    if (!j_.contains(key)) invalid(where_, "missing required field '" + key + "'");
    seen_.insert(key);
    return j_.at(key);
  }

  const json* find(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  double number(const std::string& key) { return to_number(at(key), path(key)); }
  std::optional<double> number_opt(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return to_number(*v, path(key));
  }
  double number_or(const std::string& key, double fallback) { return number_opt(key).value_or(fallback); }

  std::string text(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) invalid(path(key), "expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) invalid(where_, "unknown field '" + it.key() + "'");
  }

  static double to_number(const json& v, const std::string& where) {
    if (!v.is_number()) invalid(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) invalid(where, "expected a finite number");
    return d;
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Vector vector_of(const json& v, const std::string& where, int expected = -1) {
  if (!v.is_array()) invalid(where, "expected an array of numbers");
  if (expected >= 0 && static_cast<int>(v.size()) != expected)
    invalid(where, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = Fields::to_number(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

Vec2 vec2_of(const json& v, const std::string& where) {
  const Vector x = vector_of(v, where, 2);
  return {x(0), x(1)};
}

Matrix matrix_of(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) invalid(where, "expected a non-empty array of rows");
  const int n = static_cast<int>(v.size());
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.row(i) = vector_of(v[static_cast<std::size_t>(i)], where + "[" + std::to_string(i) + "]", n).transpose();
  return m;
}

SymmetricMatrix symmetric_of(const json& v, const std::string& where) {
  try {
    return SymmetricMatrix(matrix_of(v, where));
  } catch (const Error& e) {
    invalid(where, e.what());
  }
}

AxisWeights weights_of(const json& v, const std::string& where, const AxisWeights& defaults) {
  Fields f(v, where);
  AxisWeights w;
  w.position = f.number_or("position_weight", defaults.position);
  w.velocity = f.number_or("velocity_weight", defaults.velocity);
  w.integral = f.number_or("integral_weight", defaults.integral);
  w.input = f.number_or("input_weight", defaults.input);
  f.finish();
  if (w.position < 0.0 || w.velocity < 0.0 || w.integral < 0.0) invalid(where, "weights must be nonnegative");
  if (w.input <= 0.0) invalid(where, "input_weight must be positive");
  return w;
}

Obstacle obstacle_of(const json& v, const std::string& where, std::optional<double>& eps) {
  Fields f(v, where);
  const std::string type = f.text("type");
  std::string name = f.has("name") ? f.text("name") : std::string();
  eps = f.number_opt("epsilon");
  if (eps && *eps < 0.0) invalid(f.path("epsilon"), "must be nonnegative");
  std::optional<Obstacle::Shape> shape;
  if (type == "circle") {
    shape = Circle{vec2_of(f.at("center"), f.path("center")), f.number("radius")};
  } else if (type == "ellipse") {
    const Vector axes = vector_of(f.at("semi_axes"), f.path("semi_axes"), 2);
    // The axis is a direction; normalize it so hand-written files need not.
    const Vec2 axis = vec2_of(f.at("axis"), f.path("axis"));
    if (!(axis.norm() > 0.0)) invalid(f.path("axis"), "must be a nonzero direction");
    shape = Ellipse{vec2_of(f.at("center"), f.path("center")), axis.normalized(), axes(0), axes(1)};
  } else if (type == "polytope") {
    const json& verts = f.at("vertices");
    if (!verts.is_array()) invalid(f.path("vertices"), "expected an array of points");
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < verts.size(); ++i) pts.push_back(vec2_of(verts[i], f.path("vertices") + "[" + std::to_string(i) + "]"));
    try {
      shape = Polytope(pts);
    } catch (const Error& e) {
      invalid(where, e.what());
    }
  } else if (type == "regular_polygon") {
    const double sides = f.number("sides");
    if (sides != std::floor(sides) || sides < 3) invalid(f.path("sides"), "expected an integer >= 3");
    try {
      shape = Polytope::regular(vec2_of(f.at("center"), f.path("center")), f.number("circumradius"),
                                static_cast<int>(sides), f.number_or("first_vertex_deg", 90.0) * M_PI / 180.0);
    } catch (const Error& e) {
      invalid(where, e.what());
    }
  } else if (type == "spectrahedron") {
    shape = Spectrahedron{vec2_of(f.at("center"), f.path("center")), f.number_or("angle_deg", 0.0) * M_PI / 180.0,
                          symmetric_of(f.at("A0"), f.path("A0")), symmetric_of(f.at("A1"), f.path("A1")),
                          symmetric_of(f.at("A2"), f.path("A2"))};
  } else {
    invalid(f.path("type"), "unknown obstacle type '" + type + "'");
  }
  f.finish();
  try {
    return Obstacle(*shape, name);
  } catch (const Error& e) {
    invalid(where, e.what());
  }
}

void parse_filter(const json& v, Scenario& s) {
  Fields f(v, "filter");
  s.filter = parse_filter_kind(f.text("kind"));
  FilterConfig& c = s.filter_config;
  c.gamma = f.number_or("gamma", c.gamma);
  c.epsilon = f.number_or("epsilon", c.epsilon);
  c.switch_band = f.number_or("switch_band", c.switch_band);
  c.slack_weight = f.number_or("slack_weight", c.slack_weight);
  c.epsilon_ratio = f.number_or("epsilon_ratio", c.epsilon_ratio);
  c.c_perp = f.number_or("c_perp", c.c_perp);
  if (auto j = f.number_opt("j")) {
    if (*j != std::floor(*j) || *j < 1) invalid(f.path("j"), "expected a positive integer");
    s.indefinite_j = static_cast<int>(*j);
  }
  f.finish();
}

void parse_plant(const json& v, Scenario& s) {
  Fields f(v, "plant");
  const std::string type = f.text("type");
  s.sample_time = f.number("sample_time");
  if (s.sample_time <= 0.0) invalid(f.path("sample_time"), "must be positive");
  if (type == "double_integrator") {
    s.plant = PlantKind::DoubleIntegrator;
    s.mass = f.number_or("mass", 1.0);
    if (s.mass <= 0.0) invalid(f.path("mass"), "must be positive");
    s.weights = weights_of(f.at("controller"), f.path("controller"), AxisWeights{1.0, 1.0, 0.0, 1.0});
  } else if (type == "bicopter") {
    s.plant = PlantKind::Bicopter;
    BicopterLoopConfig& b = s.bicopter;
    b.sample_time = s.sample_time;
    b.params.mass = f.number_or("mass", b.params.mass);
    b.params.inertia = f.number_or("inertia", b.params.inertia);
    b.params.arm = f.number_or("arm", b.params.arm);
    b.params.gravity = f.number_or("gravity", b.params.gravity);
    if (b.params.mass <= 0.0 || b.params.inertia <= 0.0 || b.params.arm <= 0.0)
      invalid("plant", "mass, inertia and arm must be positive");
    const double substeps = f.number_or("substeps", 4);
    if (substeps != std::floor(substeps) || substeps < 1) invalid(f.path("substeps"), "expected a positive integer");
    b.substeps = static_cast<int>(substeps);
    b.integrator_limit = f.number_or("integrator_limit", b.integrator_limit);
    if (const json* w = f.find("outer_horizontal")) b.outer = weights_of(*w, f.path("outer_horizontal"), b.outer);
    if (const json* w = f.find("outer_vertical")) b.outer_vertical = weights_of(*w, f.path("outer_vertical"), b.outer_vertical);
    if (const json* w = f.find("inner")) b.inner = weights_of(*w, f.path("inner"), b.inner);
    if (const json* lim = f.find("limits")) {
      Fields l(*lim, f.path("limits"));
      s.horizontal_speed_limit = l.number_opt("horizontal_speed");
      s.vertical_speed_limit = l.number_opt("vertical_speed");
      if (auto tilt = l.number_opt("tilt_deg")) s.tilt_limit = *tilt * M_PI / 180.0;
      l.finish();
      if (s.horizontal_speed_limit.has_value() != s.vertical_speed_limit.has_value())
        invalid(f.path("limits"), "give both horizontal_speed and vertical_speed or neither");
      if ((s.horizontal_speed_limit && *s.horizontal_speed_limit <= 0.0) ||
          (s.vertical_speed_limit && *s.vertical_speed_limit <= 0.0))
        invalid(f.path("limits"), "speed limits must be positive");
      if (s.tilt_limit && (*s.tilt_limit <= 0.0 || *s.tilt_limit >= M_PI / 2.0))
        invalid(f.path("limits.tilt_deg"), "must lie in (0, 90)");
    }
  } else {
    invalid(f.path("type"), "unknown plant type '" + type + "'");
  }
  f.finish();
}

std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

const char* to_string(PlantKind kind) {
  return kind == PlantKind::DoubleIntegrator ? "double_integrator" : "bicopter";
}

const char* to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::None: return "none";
    case FilterKind::Pdte: return "pdte";
    case FilterKind::NonconvexCircle: return "nonconvex";
    case FilterKind::Indefinite: return "indefinite";
  }
  return "unknown";
}

FilterKind parse_filter_kind(const std::string& name) {
  if (name == "none") return FilterKind::None;
  if (name == "pdte") return FilterKind::Pdte;
  if (name == "nonconvex") return FilterKind::NonconvexCircle;
  if (name == "indefinite") return FilterKind::Indefinite;
  throw Error(ErrorCode::ValidationError, "unknown filter kind '" + name + "' (expected pdte, nonconvex, indefinite or none)");
}

void Scenario::validate() const {
  const int n = plant == PlantKind::DoubleIntegrator ? 4 : 6;
  if (initial_state.size() != n)
    invalid("initial_state", "expected " + std::to_string(n) + " entries for " + to_string(plant));
  if (steps <= 0) invalid("horizon", "must contain at least one step");
  if (initial_jitter < 0.0) invalid("initial_jitter", "must be nonnegative");
  try {
    filter_config.validate();
  } catch (const Error& e) {
    invalid("filter", e.what());
  }
  if (filter_config.epsilon_overrides.size() > obstacles.size())
    invalid("filter", "more epsilon overrides than obstacles");
  if (filter == FilterKind::NonconvexCircle) {
    if (obstacles.size() != 1 || obstacles.front().kind() != ObstacleKind::Circle)
      invalid("filter", "the nonconvex baseline handles exactly one circle obstacle");
  }
  if (filter == FilterKind::Indefinite) {
    for (const Obstacle& o : obstacles) {
      if (o.kind() == ObstacleKind::Circle || o.kind() == ObstacleKind::Ellipse)
        invalid("filter", std::string("the indefinite filter needs affine matrix barriers; ") + to_string(o.kind()) +
                              " obstacles have quadratic ones");
    }
    if (indefinite_j && obstacles.size() != 1) invalid("filter.j", "an explicit j needs exactly one obstacle");
    if (indefinite_j) {
      const Obstacle& o = obstacles.front();
      const int p = o.kind() == ObstacleKind::Polytope ? o.as<Polytope>().face_count() : o.as<Spectrahedron>().a0.dim();
      if (*indefinite_j > p) invalid("filter.j", "exceeds the barrier matrix size " + std::to_string(p));
    }
  }
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, origin + ": " + locate(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  Scenario s;
  Fields f(doc, "scenario");
  s.name = f.text("name");
  parse_plant(f.at("plant"), s);
  s.initial_state = vector_of(f.at("initial_state"), "initial_state");
  s.goal = vec2_of(f.at("goal"), "goal");
  s.bicopter.reference = s.goal;
  {
    Fields h(f.at("horizon"), "horizon");
    const auto steps = h.number_opt("steps");
    const auto duration = h.number_opt("duration");
    h.finish();
    if (steps.has_value() == duration.has_value()) invalid("horizon", "give exactly one of steps or duration");
    if (steps) {
      if (*steps != std::floor(*steps) || *steps < 1) invalid("horizon.steps", "expected a positive integer");
      s.steps = static_cast<int>(*steps);
    } else {
      if (*duration <= 0.0) invalid("horizon.duration", "must be positive");
      s.steps = static_cast<int>(std::llround(*duration / s.sample_time));
    }
  }
  const json& obs = f.at("obstacles");
  if (!obs.is_array()) invalid("obstacles", "expected an array");
  bool any_override = false;
  std::vector<std::optional<double>> overrides;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    std::optional<double> eps;
    s.obstacles.push_back(obstacle_of(obs[i], "obstacles[" + std::to_string(i) + "]", eps));
    overrides.push_back(eps);
    any_override = any_override || eps.has_value();
  }
  parse_filter(f.at("filter"), s);
  if (any_override) s.filter_config.epsilon_overrides = overrides;
  if (auto seed = f.number_opt("seed")) {
    if (*seed < 0 || *seed != std::floor(*seed)) invalid("seed", "expected a nonnegative integer");
    s.seed = static_cast<std::uint64_t>(*seed);
  }
  s.initial_jitter = f.number_or("initial_jitter", 0.0);
  s.divergence_limit = f.number_or("divergence_limit", 1e6);
  f.finish();
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

}  // namespace shield
