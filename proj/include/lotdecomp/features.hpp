#ifndef LOTDECOMP_FEATURES_HPP
#define LOTDECOMP_FEATURES_HPP

#include <Eigen/Dense>

#include "lotdecomp/measures.hpp"

namespace lotdecomp {

/// Gaussian-kernel image of a planar measure on a grid_side x grid_side
/// pixel grid: A(i, j) = sum_k a_k N(x_k | (i, j), bandwidth^2 I), then
/// normalized to sum to one. Coordinate 0 of a point is the row.
Eigen::MatrixXd kernel_reconstruct(const EmpiricalMeasured& measure, Index grid_side,
                                   double bandwidth = 1.0);

// A location in R^3 paired with a 3x3 SPD matrix (diffusion tensor).
struct SpdFeature {
  Eigen::Vector3d location = Eigen::Vector3d::Zero();
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Identity();
};

using Vector9d = Eigen::Matrix<double, 9, 1>;

/// [lambda x ; (1 - lambda) (S11, c S12, c S13, S22, c S23, S33)] with
/// c = sqrt(2) when isometric (Frobenius-preserving) and c = 2 otherwise.
Vector9d embed_spd(const SpdFeature& feature, double lambda, bool isometric = true);

/// Nearest-in-spectrum SPD matrix: eigenvalues below eps are raised to eps.
/// Matrices that need no clamping are returned unchanged.
Eigen::Matrix3d project_spd(const Eigen::Matrix3d& matrix, double eps = 1e-8);

/// tr(Z0' Z0) / (tr(Z1' Z1) + tr(Z0' Z0)) for a dataset embedded at lambda = 0
/// (rows of Z0) and at lambda = 1 (rows of Z1).
double compute_lambda_star(const Eigen::MatrixXd& Z0, const Eigen::MatrixXd& Z1);

}  // namespace lotdecomp

#endif  // LOTDECOMP_FEATURES_HPP
