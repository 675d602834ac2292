#include "lotdecomp/features.hpp"

#include <cmath>
#include <numbers>

namespace lotdecomp {

namespace {

void require_symmetric(const Eigen::Matrix3d& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (!m.allFinite()) throw Error(ErrorKind::NonFiniteEntry, "matrix contains NaN or Inf");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorKind::NotSymmetric, "matrix is not symmetric within 1e-12");
}

}  // namespace

Eigen::MatrixXd kernel_reconstruct(const EmpiricalMeasured& measure, Index grid_side, double bandwidth) {
  if (measure.dim() != 2)
    throw Error(ErrorKind::DimensionMismatch,
                "kernel reconstruction needs planar points, got d = " + std::to_string(measure.dim()));
  if (grid_side < 1) throw Error(ErrorKind::InvalidArgument, "grid_side must be >= 1");
  if (!(bandwidth > 0.0)) throw Error(ErrorKind::InvalidArgument, "bandwidth must be > 0");
  const auto& X = measure.points();
  const double hi = static_cast<double>(grid_side - 1);
  for (Index k = 0; k < X.rows(); ++k)
    if (X(k, 0) < 0.0 || X(k, 0) > hi || X(k, 1) < 0.0 || X(k, 1) > hi)
      throw Error(ErrorKind::OutOfGrid, "atom " + std::to_string(k) + " lies outside the grid");

  // The isotropic kernel factorizes over the two axes.
  const Index n = X.rows();
  const double inv2s2 = 1.0 / (2.0 * bandwidth * bandwidth);
  const double norm = 1.0 / (2.0 * std::numbers::pi * bandwidth * bandwidth);
  Eigen::MatrixXd R(grid_side, n), C(grid_side, n);
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < grid_side; ++i) {
      const double dr = static_cast<double>(i) - X(k, 0);
      const double dc = static_cast<double>(i) - X(k, 1);
      R(i, k) = std::exp(-dr * dr * inv2s2);
      C(i, k) = std::exp(-dc * dc * inv2s2);
    }
  Eigen::MatrixXd A = norm * (R * measure.weights().asDiagonal() * C.transpose());
  return A / A.sum();
}

Vector9d embed_spd(const SpdFeature& feature, double lambda, bool isometric) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "lambda must lie in [0, 1]");
  if (!feature.location.allFinite())
    throw Error(ErrorKind::NonFiniteEntry, "location contains NaN or Inf");
  const Eigen::Matrix3d& S = feature.matrix;
  require_symmetric(S);
  if (Eigen::LLT<Eigen::Matrix3d>(S).info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite, "matrix is not positive definite");

  const double c = isometric ? std::numbers::sqrt2 : 2.0;
  const double mu = 1.0 - lambda;
  Vector9d v;
  v << lambda * feature.location(0), lambda * feature.location(1), lambda * feature.location(2),
      mu * S(0, 0), c * (mu * S(0, 1)), c * (mu * S(0, 2)), mu * S(1, 1), c * (mu * S(1, 2)),
      mu * S(2, 2);
  return v;
}

Eigen::Matrix3d project_spd(const Eigen::Matrix3d& matrix, double eps) {
  require_symmetric(matrix);
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be > 0");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(matrix);
  if (es.eigenvalues().minCoeff() >= eps) return matrix;
  const Eigen::Vector3d clamped = es.eigenvalues().cwiseMax(eps);
  Eigen::Matrix3d out = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

double compute_lambda_star(const Eigen::MatrixXd& Z0, const Eigen::MatrixXd& Z1) {
  if (Z0.size() == 0 || Z1.size() == 0)
    throw Error(ErrorKind::InvalidArgument, "embedded datasets must be non-empty");
  if (Z0.rows() != Z1.rows() || Z0.cols() != Z1.cols())
    throw Error(ErrorKind::DimensionMismatch,
                "Z0 is " + detail::shape(Z0.rows(), Z0.cols()) + ", Z1 is " +
                    detail::shape(Z1.rows(), Z1.cols()));
  const double t0 = Z0.squaredNorm();
  const double t1 = Z1.squaredNorm();
  if (!(t0 + t1 > 0.0)) throw Error(ErrorKind::DegenerateTraces, "both traces are zero");
  return t0 / (t1 + t0);
}

}  // namespace lotdecomp
