#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "shield/simharness.hpp"

namespace shield {
namespace {

constexpr double kCanvas = 800.0;
constexpr int kSamples = 256;

// Minkowski sum of the obstacle and an eps-disk, traced by support points.
std::vector<Vec2> buffer_outline(const Obstacle& obs, double eps) {
  std::vector<Vec2> pts;
  pts.reserve(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    const double a = 2.0 * M_PI * i / kSamples;
    const Vec2 n(std::cos(a), std::sin(a));
    pts.push_back(support_point(obs, n) + eps * n);
  }
  return pts;
}

class Viewport {
 public:
  void include(const Vec2& p) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }

  void freeze() {
    if (!(lo_.array() <= hi_.array()).all()) {
      lo_.setZero();
      hi_.setOnes();
    }
    const double span = std::max({hi_.x() - lo_.x(), hi_.y() - lo_.y(), 1e-9});
    const Vec2 mid = 0.5 * (lo_ + hi_);
    const double half = 0.5 * span * 1.2;
    lo_ = mid - Vec2(half, half);
    scale_ = kCanvas / (2.0 * half);
  }

  std::string point(const Vec2& p) const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f,%.3f", (p.x() - lo_.x()) * scale_, kCanvas - (p.y() - lo_.y()) * scale_);
    return buf;
  }

  std::string points(const std::vector<Vec2>& ps) const {
    std::string out;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (i) out += ' ';
      out += point(ps[i]);
    }
    return out;
  }

 private:
  Vec2 lo_ = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi_ = Vec2::Constant(-std::numeric_limits<double>::infinity());
  double scale_ = 1.0;
};

}  // namespace

std::string render_svg(const RunResult& result) {
  const Scenario& s = result.scenario;
  std::vector<std::vector<Vec2>> shapes, buffers;
  for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
    shapes.push_back(outline(s.obstacles[i], kSamples));
    buffers.push_back(buffer_outline(s.obstacles[i], s.filter_config.epsilon_for(i)));
  }
  std::vector<Vec2> path;
  for (const StepRecord& r : result.records) path.emplace_back(r.state(0), r.state(2));

  Viewport view;
  for (const auto& b : buffers)
    for (const Vec2& p : b) view.include(p);
  for (const Vec2& p : path) view.include(p);
  view.include(s.goal);
  view.freeze();

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
  svg << "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    svg << "<polygon class=\"buffer\" data-obstacle=\"" << i << "\" points=\"" << view.points(buffers[i])
        << "\" fill=\"none\" stroke=\"gray\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n";
    svg << "<polygon class=\"obstacle\" data-obstacle=\"" << i << "\" points=\"" << view.points(shapes[i])
        << "\" fill=\"#d9534f\" fill-opacity=\"0.5\" stroke=\"#a02622\" stroke-width=\"1\"/>\n";
  }
  if (!path.empty()) {
    svg << "<polyline class=\"trajectory\" points=\"" << view.points(path)
        << "\" fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\"/>\n";
    const std::string start = view.point(path.front());
    svg << "<circle class=\"start\" cx=\"" << start.substr(0, start.find(',')) << "\" cy=\""
        << start.substr(start.find(',') + 1) << "\" r=\"5\" fill=\"#2e8b57\"/>\n";
  }
  const std::string goal = view.point(s.goal);
  svg << "<circle class=\"goal\" cx=\"" << goal.substr(0, goal.find(',')) << "\" cy=\""
      << goal.substr(goal.find(',') + 1) << "\" r=\"6\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace shield
