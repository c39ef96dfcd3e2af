#include <chrono>
#include <cmath>

#include "shield/filter.hpp"

namespace shield {
namespace {

using Clock = std::chrono::steady_clock;

Matrix block_diagonal(const std::vector<Matrix>& blocks) {
  Eigen::Index n = 0;
  for (const Matrix& b : blocks) n += b.rows();
  Matrix out = Matrix::Zero(n, n);
  Eigen::Index at = 0;
  for (const Matrix& b : blocks) {
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

}  // namespace

AffineMatrixPencil extract_affine_pencil(const MatrixMap& h, const Vector& x, const AffineDynamics& dyn) {
  const Vector drift = dyn.A * x;
  const SymmetricMatrix base = h(drift);
  AffineMatrixPencil out{base, {}};
  // Probe with inputs that move the state by O(1), so curvature is visible.
  std::vector<double> reach(static_cast<std::size_t>(dyn.input_dim()));
  double size = base.frobenius_norm();
  for (int i = 0; i < dyn.input_dim(); ++i) {
    const double bn = dyn.B.col(i).norm();
    require(bn > 0.0, ErrorCode::InvalidArgument, "input column without effect");
    reach[static_cast<std::size_t>(i)] = 1.0 / bn;
    const SymmetricMatrix moved = h(Vector(drift + reach[static_cast<std::size_t>(i)] * dyn.B.col(i)));
    require(moved.dim() == base.dim(), ErrorCode::DimMismatch, "matrix map changed size");
    const SymmetricMatrix slope = (moved - base) * (1.0 / reach[static_cast<std::size_t>(i)]);
    size += (moved - base).frobenius_norm();
    out.slopes.push_back(slope);
  }
  const double tol = 1e-8 * (1.0 + size);
  auto predicted = [&](const Vector& u) { return affine_pencil(out.constant, out.slopes, u); };
  for (double scale : {-1.0, 2.0}) {
    Vector u(dyn.input_dim());
    for (int i = 0; i < dyn.input_dim(); ++i) u(i) = scale * reach[static_cast<std::size_t>(i)] * (1.0 + 0.25 * i);
    const SymmetricMatrix actual = h(Vector(drift + dyn.B * u));
    require((actual - predicted(u)).frobenius_norm() <= tol, ErrorCode::NonAffineH,
            "matrix map is not affine along the input directions");
  }
  return out;
}

FilterOutcome indefinite_step(const Vector& x, const Vector& u_nom, std::span<const IndefiniteBlock> blocks,
                              const AffineDynamics& dyn, double gamma, const LinearConstraintSet& extra) {
  require(x.size() == dyn.state_dim() && u_nom.size() == dyn.input_dim() && extra.dim() == dyn.input_dim(),
          ErrorCode::DimMismatch, "filter inputs do not match the dynamics");
  require(gamma > 0.0 && gamma <= 1.0, ErrorCode::InvalidArgument, "gamma must lie in (0, 1]");
  FilterOutcome out;
  out.u = u_nom;

  const auto t_build = Clock::now();
  std::vector<Matrix> f0_blocks;
  std::vector<std::vector<Matrix>> slope_blocks(static_cast<std::size_t>(dyn.input_dim()));
  for (const IndefiniteBlock& blk : blocks) {
    const SymmetricMatrix hx = blk.h(x);
    const double lj = eigenvalue(hx, blk.j);
    const AffineMatrixPencil pencil = extract_affine_pencil(blk.h, x, dyn);
    f0_blocks.push_back((pencil.constant - hx).matrix() + gamma * lj * Matrix::Identity(hx.dim(), hx.dim()));
    for (int i = 0; i < dyn.input_dim(); ++i)
      slope_blocks[static_cast<std::size_t>(i)].push_back(pencil.slopes[static_cast<std::size_t>(i)].matrix());
  }
  const SymmetricMatrix f0(block_diagonal(f0_blocks));
  std::vector<SymmetricMatrix> f;
  for (const auto& s : slope_blocks) f.emplace_back(block_diagonal(s));
  out.projection_time = std::chrono::duration<double>(Clock::now() - t_build).count();

  const auto t_solve = Clock::now();
  const SymmetricMatrix at_nominal = affine_pencil(f0, f, u_nom);
  if (min_eigenvalue(at_nominal) >= -1e-7 * (1.0 + at_nominal.frobenius_norm()) && extra.satisfied(u_nom, 1e-10)) {
    out.mode = FilterMode::NominalPassthrough;
  } else {
    const SolveReport rep = solve_lmi_ls(u_nom, f0, f, &extra);
    out.reports.push_back(rep);
    if (rep.ok()) {
      out.u = *rep.solution;
      out.mode = FilterMode::Filtered;
    } else {
      out.mode = FilterMode::FallbackNominal;
      out.note = std::string("LMI cutting planes: ") + to_string(rep.status);
    }
  }
  out.solve_time = std::chrono::duration<double>(Clock::now() - t_solve).count();
  return out;
}

FilterOutcome indefinite_step(const Vector& x, const Vector& u_nom, const MatrixMap& h, int j,
                              const AffineDynamics& dyn, double gamma, const LinearConstraintSet& extra) {
  const IndefiniteBlock blk{h, j};
  return indefinite_step(x, u_nom, std::span<const IndefiniteBlock>(&blk, 1), dyn, gamma, extra);
}

}  // namespace shield
