#pragma once

#include "shield/conic_solvers.hpp"

namespace shield::detail {

struct SlackSolution {
  SolveReport report;
  Vector u;
  Vector slack;  // one entry per inequality row
};

// min ||u - u0||^2 + w ||s||^2 subject to G u - s <= h, s >= 0, E u == e.
SlackSolution solve_with_slack(const Vector& u0, const LinearConstraintSet& rows, double weight);

}  // namespace shield::detail
