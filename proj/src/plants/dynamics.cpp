#include "shield/plants.hpp"

namespace shield {

Vector AffineDynamics::step(const Vector& x, const Vector& u) const {
  require(x.size() == A.cols() && u.size() == B.cols(), ErrorCode::DimMismatch,
          "state or input dimension does not match the model");
  return A * x + B * u;
}

AffineDynamics double_integrator(double ts, double mass) {
  require(ts > 0.0 && mass > 0.0, ErrorCode::InvalidArgument, "sample time and mass must be positive");
  AffineDynamics d{Matrix::Zero(4, 4), Matrix::Zero(4, 2), ts};
  for (int axis = 0; axis < 2; ++axis) {
    const int i = 2 * axis;
    d.A(i, i) = 1.0;
    d.A(i, i + 1) = ts;
    d.A(i + 1, i + 1) = 1.0;
    d.B(i, axis) = ts * ts / (2.0 * mass);
    d.B(i + 1, axis) = ts / mass;
  }
  return d;
}

Matrix position_selector() {
  Matrix c = Matrix::Zero(2, 4);
  c(0, 0) = 1.0;
  c(1, 2) = 1.0;
  return c;
}

}  // namespace shield
