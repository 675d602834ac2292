#ifndef LOTDECOMP_MEASURES_HPP
#define LOTDECOMP_MEASURES_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "lotdecomp/error.hpp"

namespace lotdecomp {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

// Default tolerances. The double values are the contract; narrower scalar
// types get a floor proportional to their epsilon.
template <typename Scalar>
constexpr Scalar weight_sum_tolerance() {
  return std::max<Scalar>(Scalar(1e-12), Scalar(64) * std::numeric_limits<Scalar>::epsilon());
}
template <typename Scalar>
constexpr Scalar marginal_tolerance() {
  return std::max<Scalar>(Scalar(1e-9), Scalar(4096) * std::numeric_limits<Scalar>::epsilon());
}

namespace detail {

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

inline std::string shape(Index r, Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

}  // namespace detail

struct MeasureOptions {
  bool renormalize = false;
  // Drop zero-mass atoms instead of rejecting them.
  bool prune_zeros = false;
};

/// Finitely supported probability measure sum_i a_i delta_{x_i} on R^d.
///
/// Weights are strictly positive and sum to one; points are stored one per
/// row of an n x d matrix. Instances are immutable once constructed.
template <typename Scalar_>
class EmpiricalMeasure {
 public:
  using Scalar = Scalar_;
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  EmpiricalMeasure(Vector weights, Matrix points, MeasureOptions opts = {})
      : weights_(std::move(weights)), points_(std::move(points)) {
    if (weights_.size() != points_.rows())
      throw Error(ErrorKind::DimensionMismatch,
                  "weights has " + std::to_string(weights_.size()) + " entries but points is " +
                      detail::shape(points_.rows(), points_.cols()));
    if (!detail::all_finite(weights_) || !detail::all_finite(points_))
      throw Error(ErrorKind::NonFiniteEntry, "measure contains NaN or Inf");
    if (opts.prune_zeros) prune();
    if (weights_.size() < 1 || points_.cols() < 1)
      throw Error(ErrorKind::DimensionMismatch,
                  "measure needs n >= 1 and d >= 1, got " +
                      detail::shape(points_.rows(), points_.cols()));
    for (Index i = 0; i < weights_.size(); ++i) {
      if (!(weights_(i) > Scalar(0))) {
        std::ostringstream os;
        os << "weight " << i << " is " << weights_(i);
        throw Error(ErrorKind::NonPositiveWeight, os.str());
      }
    }
    const Scalar total = weights_.sum();
    if (opts.renormalize) {
      weights_ /= total;
    } else if (std::abs(total - Scalar(1)) > weight_sum_tolerance<Scalar>()) {
      std::ostringstream os;
      os.precision(17);
      os << "weights sum to " << total;
      throw Error(ErrorKind::WeightSumMismatch, os.str());
    }
  }

  /// Uniform weights 1/n on the rows of `points`.
  static EmpiricalMeasure uniform(Matrix points) {
    const Index n = points.rows();
    if (n < 1) throw Error(ErrorKind::DimensionMismatch, "uniform measure needs n >= 1");
    return EmpiricalMeasure(Vector::Constant(n, Scalar(1) / Scalar(n)), std::move(points));
  }

  static EmpiricalMeasure dirac(const Vector& point) {
    return EmpiricalMeasure(Vector::Ones(1), Matrix(point.transpose()));
  }

  const Vector& weights() const { return weights_; }
  const Matrix& points() const { return points_; }
  Index size() const { return weights_.size(); }
  Index dim() const { return points_.cols(); }

  bool is_uniform(Scalar tol = weight_sum_tolerance<Scalar>()) const {
    const Scalar u = Scalar(1) / Scalar(size());
    return ((weights_.array() - u).abs() <= tol).all();
  }

 private:
  void prune() {
    Index kept = 0;
    for (Index i = 0; i < weights_.size(); ++i)
      if (weights_(i) != Scalar(0)) ++kept;
    if (kept == weights_.size()) return;
    Vector w(kept);
    Matrix p(kept, points_.cols());
    for (Index i = 0, k = 0; i < weights_.size(); ++i) {
      if (weights_(i) == Scalar(0)) continue;
      w(k) = weights_(i);
      p.row(k) = points_.row(i);
      ++k;
    }
    weights_ = std::move(w);
    points_ = std::move(p);
  }

  Vector weights_;
  Matrix points_;
};

template <typename Scalar>
EmpiricalMeasure<Scalar> validate_measure(VectorX<Scalar> weights, MatrixX<Scalar> points,
                                          MeasureOptions opts = {}) {
  return EmpiricalMeasure<Scalar>(std::move(weights), std::move(points), opts);
}

/// An empirical measure together with a dense square edge-weight matrix
/// evaluated on its support. Symmetry is recorded, not required.
template <typename Scalar_>
class MeasureNetwork {
 public:
  using Scalar = Scalar_;
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  MeasureNetwork(EmpiricalMeasure<Scalar> base, Matrix edges)
      : base_(std::move(base)), edges_(std::move(edges)) {
    if (edges_.rows() != base_.size() || edges_.cols() != base_.size())
      throw Error(ErrorKind::DimensionMismatch,
                  "edge matrix is " + detail::shape(edges_.rows(), edges_.cols()) +
                      " but the measure has " + std::to_string(base_.size()) + " atoms");
    if (!detail::all_finite(edges_))
      throw Error(ErrorKind::NonFiniteEntry, "edge matrix contains NaN or Inf");
    symmetric_ = edges_ == edges_.transpose();
  }

  const EmpiricalMeasure<Scalar>& base() const { return base_; }
  const Matrix& edges() const { return edges_; }
  const Vector& weights() const { return base_.weights(); }
  const Matrix& points() const { return base_.points(); }
  Index size() const { return base_.size(); }
  Index dim() const { return base_.dim(); }
  bool is_symmetric() const { return symmetric_; }

 private:
  EmpiricalMeasure<Scalar> base_;
  Matrix edges_;
  bool symmetric_ = false;
};

/// Nonnegative n x m matrix whose row and column sums match the stored
/// marginals within `marginal_tolerance`.
template <typename Scalar_>
class Coupling {
 public:
  using Scalar = Scalar_;
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  Coupling(Matrix matrix, Vector row_marginal, Vector col_marginal,
           Scalar tol = marginal_tolerance<Scalar>())
      : matrix_(std::move(matrix)), rows_(std::move(row_marginal)), cols_(std::move(col_marginal)) {
    if (matrix_.rows() != rows_.size() || matrix_.cols() != cols_.size())
      throw Error(ErrorKind::DimensionMismatch,
                  "coupling is " + detail::shape(matrix_.rows(), matrix_.cols()) +
                      " but marginals have lengths " + std::to_string(rows_.size()) + " and " +
                      std::to_string(cols_.size()));
    if (!detail::all_finite(matrix_))
      throw Error(ErrorKind::NonFiniteEntry, "coupling contains NaN or Inf");
    for (Index j = 0; j < matrix_.cols(); ++j)
      for (Index i = 0; i < matrix_.rows(); ++i)
        if (matrix_(i, j) < Scalar(0)) {
          std::ostringstream os;
          os << "entry (" << i << "," << j << ") is " << matrix_(i, j);
          throw Error(ErrorKind::NegativeEntry, os.str());
        }
    Index worst_row = 0, worst_col = 0;
    const Scalar row_err = (matrix_.rowwise().sum() - rows_).cwiseAbs().maxCoeff(&worst_row);
    const Scalar col_err =
        (matrix_.colwise().sum().transpose() - cols_).cwiseAbs().maxCoeff(&worst_col);
    if (row_err > tol || col_err > tol) {
      std::ostringstream os;
      os.precision(6);
      if (row_err >= col_err)
        os << "row " << worst_row << " sums off by " << row_err;
      else
        os << "column " << worst_col << " sums off by " << col_err;
      throw Error(ErrorKind::MarginalMismatch, os.str());
    }
  }

  const Matrix& matrix() const { return matrix_; }
  const Vector& row_marginal() const { return rows_; }
  const Vector& col_marginal() const { return cols_; }
  Index rows() const { return matrix_.rows(); }
  Index cols() const { return matrix_.cols(); }

 private:
  Matrix matrix_;
  Vector rows_;
  Vector cols_;
};

template <typename Scalar>
Coupling<Scalar> validate_coupling(MatrixX<Scalar> matrix, VectorX<Scalar> a, VectorX<Scalar> b) {
  return Coupling<Scalar>(std::move(matrix), std::move(a), std::move(b));
}

template <typename Scalar>
Coupling<Scalar> identity_coupling(const VectorX<Scalar>& a) {
  return Coupling<Scalar>(a.asDiagonal().toDenseMatrix(), a, a);
}

template <typename Scalar>
Coupling<Scalar> product_coupling(const VectorX<Scalar>& a, const VectorX<Scalar>& b) {
  return Coupling<Scalar>(a * b.transpose(), a, b);
}

enum class CouplingKind { Deterministic, PurelyProbabilistic, Mixed };

constexpr std::string_view to_string(CouplingKind k) {
  switch (k) {
    case CouplingKind::Deterministic: return "Deterministic";
    case CouplingKind::PurelyProbabilistic: return "PurelyProbabilistic";
    case CouplingKind::Mixed: return "Mixed";
  }
  return "Unknown";
}

template <typename Scalar>
struct CouplingClass {
  CouplingKind kind = CouplingKind::Mixed;
  // Largest second-largest entry over all rows; <= tol means one target per row.
  Scalar max_split = 0;
  // Largest norm of the mass-weighted drift sum_j gamma_ij (y_j - x_i).
  Scalar max_residual = 0;
  bool single_valued = false;
  bool zero_drift = false;
};

/// Classify `gamma` as deterministic (one target per source atom), purely
/// probabilistic (zero drift at every source atom) or mixed.
///
/// A coupling that is single-valued with zero drift moves no mass at all;
/// it satisfies both definitions and is reported as PurelyProbabilistic.
template <typename Scalar>
CouplingClass<Scalar> classify_coupling(const Coupling<Scalar>& gamma,
                                        const EmpiricalMeasure<Scalar>& source,
                                        const EmpiricalMeasure<Scalar>& target,
                                        Scalar tol = Scalar(1e-9)) {
  if (source.dim() != target.dim() || gamma.rows() != source.size() ||
      gamma.cols() != target.size())
    throw Error(ErrorKind::DimensionMismatch, "coupling, source and target are inconsistent");

  const auto& g = gamma.matrix();
  CouplingClass<Scalar> out;
  for (Index i = 0; i < g.rows(); ++i) {
    Scalar first = 0, second = 0;
    for (Index j = 0; j < g.cols(); ++j) {
      const Scalar v = g(i, j);
      if (v > first) {
        second = first;
        first = v;
      } else if (v > second) {
        second = v;
      }
    }
    out.max_split = std::max(out.max_split, second);
  }
  const MatrixX<Scalar> drift =
      g * target.points() - g.rowwise().sum().asDiagonal() * source.points();
  out.max_residual = drift.rowwise().norm().maxCoeff();

  out.single_valued = out.max_split <= tol;
  out.zero_drift = out.max_residual <= tol;
  if (out.zero_drift)
    out.kind = CouplingKind::PurelyProbabilistic;
  else if (out.single_valued)
    out.kind = CouplingKind::Deterministic;
  else
    out.kind = CouplingKind::Mixed;
  return out;
}

using EmpiricalMeasured = EmpiricalMeasure<double>;
using MeasureNetworkd = MeasureNetwork<double>;
using Couplingd = Coupling<double>;

}  // namespace lotdecomp

#endif  // LOTDECOMP_MEASURES_HPP
