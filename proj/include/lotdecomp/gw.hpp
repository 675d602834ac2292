#ifndef LOTDECOMP_GW_HPP
#define LOTDECOMP_GW_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "lotdecomp/exact_ot.hpp"
#include "lotdecomp/measures.hpp"

namespace lotdecomp {

struct FgwParams {
  double alpha = 0.5;
  Index max_iters = 200;
  // Relative objective decrease below which the iteration stops.
  double fw_tol = 1e-9;
  Index restarts = 5;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw Error(ErrorKind::InvalidArgument, "alpha must lie in [0, 1]");
    if (max_iters < 1) throw Error(ErrorKind::InvalidArgument, "max_iters must be >= 1");
    if (!(fw_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "fw_tol must be > 0");
  }
};

template <typename Scalar>
struct GwResult {
  Scalar cost;
  Coupling<Scalar> coupling;
  bool converged;
  Index best_restart;
  Index iterations = 0;
};

// Transport costs of a given coupling.

template <typename Scalar, typename DX, typename DY>
Scalar transport_cost_w(const MatrixX<Scalar>& gamma, const Eigen::MatrixBase<DX>& X,
                        const Eigen::MatrixBase<DY>& Y) {
  if (gamma.rows() != X.rows() || gamma.cols() != Y.rows())
    throw Error(ErrorKind::DimensionMismatch, "coupling does not match the point sets");
  return (gamma.array() * squared_distances(X, Y).array()).sum();
}

template <typename Scalar>
Scalar transport_cost_w(const Coupling<Scalar>& gamma, const MatrixX<Scalar>& X,
                        const MatrixX<Scalar>& Y) {
  return transport_cost_w(gamma.matrix(), X, Y);
}

namespace detail {

// Sum_ijkl X_ij Y_kl (A_ik - B_jl)^2, evaluated in O(n^2 m + n m^2) through
// the quadratic expansion. X and Y need not be couplings.
template <typename Scalar>
Scalar gw_bilinear(const MatrixX<Scalar>& X, const MatrixX<Scalar>& Y, const MatrixX<Scalar>& A,
                   const MatrixX<Scalar>& B, const MatrixX<Scalar>& A2,
                   const MatrixX<Scalar>& B2) {
  const VectorX<Scalar> px = X.rowwise().sum(), py = Y.rowwise().sum();
  const VectorX<Scalar> qx = X.colwise().sum().transpose(), qy = Y.colwise().sum().transpose();
  const Scalar term_a = px.dot(A2 * py);
  const Scalar term_b = qx.dot(B2 * qy);
  const MatrixX<Scalar> cross = A * Y * B.transpose();
  return term_a + term_b - Scalar(2) * (X.array() * cross.array()).sum();
}

template <typename Scalar>
void check_gw_shapes(const MatrixX<Scalar>& gamma, const MatrixX<Scalar>& A,
                     const MatrixX<Scalar>& B) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || gamma.rows() != A.rows() ||
      gamma.cols() != B.rows())
    throw Error(ErrorKind::DimensionMismatch,
                "coupling " + shape(gamma.rows(), gamma.cols()) + " against edges " +
                    shape(A.rows(), A.cols()) + " and " + shape(B.rows(), B.cols()));
}

}  // namespace detail

template <typename Scalar>
Scalar transport_cost_gw(const MatrixX<Scalar>& gamma, const MatrixX<Scalar>& A,
                         const MatrixX<Scalar>& B) {
  detail::check_gw_shapes(gamma, A, B);
  const MatrixX<Scalar> A2 = A.cwiseAbs2(), B2 = B.cwiseAbs2();
  return detail::gw_bilinear(gamma, gamma, A, B, A2, B2);
}

template <typename Scalar>
Scalar transport_cost_gw(const Coupling<Scalar>& gamma, const MatrixX<Scalar>& A,
                         const MatrixX<Scalar>& B) {
  return transport_cost_gw(gamma.matrix(), A, B);
}

template <typename Scalar>
Scalar transport_cost_fgw(const MatrixX<Scalar>& gamma, const MatrixX<Scalar>& X,
                          const MatrixX<Scalar>& Y, const MatrixX<Scalar>& A,
                          const MatrixX<Scalar>& B, Scalar alpha) {
  Scalar out = 0;
  if (alpha != Scalar(0)) out += alpha * transport_cost_w(gamma, X, Y);
  if (alpha != Scalar(1)) out += (Scalar(1) - alpha) * transport_cost_gw(gamma, A, B);
  return out;
}

template <typename Scalar>
Scalar transport_cost_fgw(const Coupling<Scalar>& gamma, const MatrixX<Scalar>& X,
                          const MatrixX<Scalar>& Y, const MatrixX<Scalar>& A,
                          const MatrixX<Scalar>& B, Scalar alpha) {
  return transport_cost_fgw(gamma.matrix(), X, Y, A, B, alpha);
}

/// Root mean square edge weight under the product of the node measure.
template <typename Scalar>
Scalar diam2(const MeasureNetwork<Scalar>& net) {
  const auto& b = net.weights();
  return std::sqrt(std::max<Scalar>(Scalar(0), b.dot(net.edges().cwiseAbs2() * b)));
}

namespace detail {

template <typename Scalar>
MatrixX<Scalar> northwest_corner(const VectorX<Scalar>& a, const VectorX<Scalar>& b) {
  const Index n = a.size(), m = b.size();
  MatrixX<Scalar> g = MatrixX<Scalar>::Zero(n, m);
  std::vector<Scalar> s(a.data(), a.data() + n), d(b.data(), b.data() + m);
  Index i = 0, j = 0;
  while (i < n && j < m) {
    const Scalar x = std::min(s[i], d[j]);
    g(i, j) = std::max<Scalar>(Scalar(0), x);
    s[i] -= x;
    d[j] -= x;
    if (i == n - 1)
      ++j;
    else if (j == m - 1)
      ++i;
    else if (s[i] <= d[j])
      ++i;
    else
      ++j;
  }
  return g;
}

// Iterative proportional fitting of a positive matrix onto U(a, b).
template <typename Scalar>
MatrixX<Scalar> proportional_fit(MatrixX<Scalar> g, const VectorX<Scalar>& a,
                                 const VectorX<Scalar>& b) {
  for (int round = 0; round < 2000; ++round) {
    const VectorX<Scalar> rows = g.rowwise().sum();
    g = (a.array() / rows.array()).matrix().asDiagonal() * g;
    const VectorX<Scalar> cols = g.colwise().sum().transpose();
    g = g * (b.array() / cols.array()).matrix().asDiagonal();
    const Scalar err = (g.rowwise().sum() - a).cwiseAbs().maxCoeff();
    if (err < Scalar(1e-15)) break;
  }
  return g;
}

template <typename Scalar>
std::vector<MatrixX<Scalar>> default_starts(const VectorX<Scalar>& a, const VectorX<Scalar>& b,
                                            const FgwParams& params) {
  std::vector<MatrixX<Scalar>> starts;
  const Index count = std::max<Index>(1, params.restarts);
  starts.push_back(northwest_corner(a, b));
  if (count > 1) starts.push_back(a * b.transpose());
  for (Index r = 2; r < count; ++r) {
    std::mt19937_64 rng(params.seed + static_cast<std::uint64_t>(r));
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    MatrixX<Scalar> g(a.size(), b.size());
    for (Index j = 0; j < g.cols(); ++j)
      for (Index i = 0; i < g.rows(); ++i) g(i, j) = static_cast<Scalar>(unif(rng));
    starts.push_back(proportional_fit(std::move(g), a, b));
  }
  return starts;
}

// Conditional gradient descent on alpha <D, g> + (1 - alpha) C_GW(g) from a
// single start. The linear subproblem is the exact transportation LP and the
// step is the exact minimizer of the quadratic along the search segment.
template <typename Scalar>
struct FwOutcome {
  MatrixX<Scalar> gamma;
  Scalar cost;
  bool converged;
  Index iterations;
};

template <typename Scalar>
class FusedObjective {
 public:
  FusedObjective(const VectorX<Scalar>& a, const VectorX<Scalar>& b, const MatrixX<Scalar>* D,
                 const MatrixX<Scalar>& A, const MatrixX<Scalar>& B, Scalar alpha)
      : a_(a), b_(b), D_(D), A_(A), B_(B), A2_(A.cwiseAbs2()), B2_(B.cwiseAbs2()), alpha_(alpha) {}

  Scalar value(const MatrixX<Scalar>& g) const {
    Scalar out = 0;
    if (D_ && alpha_ != Scalar(0)) out += alpha_ * (g.array() * D_->array()).sum();
    if (alpha_ != Scalar(1)) out += (Scalar(1) - alpha_) * gw_bilinear(g, g, A_, B_, A2_, B2_);
    return out;
  }

  MatrixX<Scalar> gradient(const MatrixX<Scalar>& g) const {
    const Index n = g.rows(), m = g.cols();
    MatrixX<Scalar> grad = MatrixX<Scalar>::Zero(n, m);
    if (alpha_ != Scalar(1)) {
      const VectorX<Scalar> p = g.rowwise().sum(), q = g.colwise().sum().transpose();
      const VectorX<Scalar> row_term = A2_ * p + A2_.transpose() * p;
      const VectorX<Scalar> col_term = B2_ * q + B2_.transpose() * q;
      grad = row_term.replicate(1, m) + col_term.transpose().replicate(n, 1);
      grad -= Scalar(2) * (A_ * g * B_.transpose() + A_.transpose() * g * B_);
      grad *= (Scalar(1) - alpha_);
    }
    if (D_ && alpha_ != Scalar(0)) grad += alpha_ * (*D_);
    return grad;
  }

  // Coefficient of t^2 in value(g + t * delta).
  Scalar curvature(const MatrixX<Scalar>& delta) const {
    if (alpha_ == Scalar(1)) return 0;
    return (Scalar(1) - alpha_) * gw_bilinear(delta, delta, A_, B_, A2_, B2_);
  }

  FwOutcome<Scalar> descend(MatrixX<Scalar> g, const FgwParams& params) const {
    Scalar f = value(g);
    if (!std::isfinite(f)) throw Error(ErrorKind::SolverFailure, "objective is not finite");
    bool converged = false;
    Index it = 0;
    for (; it < params.max_iters; ++it) {
      const MatrixX<Scalar> grad = gradient(g);
      const MatrixX<Scalar> vertex = solve_transport(a_, b_, grad).coupling.matrix();
      const MatrixX<Scalar> delta = vertex - g;
      const Scalar slope = (grad.array() * delta.array()).sum();
      if (slope >= -Scalar(1e-15) * std::max<Scalar>(Scalar(1), std::abs(f))) {
        converged = true;
        break;
      }
      const Scalar curv = curvature(delta);
      Scalar t = 1;
      if (curv > Scalar(0)) t = std::min<Scalar>(Scalar(1), -slope / (Scalar(2) * curv));
      MatrixX<Scalar> next = (Scalar(1) - t) * g + t * vertex;
      const Scalar f_next = value(next);
      if (!std::isfinite(f_next)) throw Error(ErrorKind::SolverFailure, "objective is not finite");
      if (!(f_next < f)) {
        converged = true;
        break;
      }
      const Scalar decrease = (f - f_next) / std::max<Scalar>(std::abs(f), Scalar(1e-300));
      g = std::move(next);
      f = f_next;
      if (decrease < Scalar(params.fw_tol)) {
        converged = true;
        ++it;
        break;
      }
    }
    return {std::move(g), f, converged, it};
  }

 private:
  const VectorX<Scalar>& a_;
  const VectorX<Scalar>& b_;
  const MatrixX<Scalar>* D_;
  const MatrixX<Scalar>& A_;
  const MatrixX<Scalar>& B_;
  MatrixX<Scalar> A2_, B2_;
  Scalar alpha_;
};

template <typename Scalar>
GwResult<Scalar> best_of_starts(const FusedObjective<Scalar>& objective, const VectorX<Scalar>& a,
                                const VectorX<Scalar>& b,
                                std::span<const MatrixX<Scalar>> starts,
                                const FgwParams& params) {
  std::optional<FwOutcome<Scalar>> best;
  Index best_index = 0;
  for (std::size_t r = 0; r < starts.size(); ++r) {
    // Re-validates the start; an infeasible user start is an error.
    Coupling<Scalar> start(starts[r], a, b);
    FwOutcome<Scalar> out = objective.descend(start.matrix(), params);
    if (!best || out.cost < best->cost) {
      best = std::move(out);
      best_index = static_cast<Index>(r);
    }
  }
  Coupling<Scalar> coupling(std::move(best->gamma), a, b);
  return {best->cost, std::move(coupling), best->converged, best_index, best->iterations};
}

}  // namespace detail

/// Local optimum of the Gromov-Wasserstein problem between two networks.
///
/// Runs conditional gradient from each start (the defaults from `params`
/// when `starts` is empty) and keeps the lowest cost, ties going to the
/// earliest start. The problem is non-convex: the result is a certified
/// local optimum only.
template <typename Scalar>
GwResult<Scalar> solve_gw(const MeasureNetwork<Scalar>& X, const MeasureNetwork<Scalar>& Y,
                          const FgwParams& params = {},
                          std::span<const MatrixX<Scalar>> starts = {}) {
  params.validate();
  detail::FusedObjective<Scalar> objective(X.weights(), Y.weights(), nullptr, X.edges(),
                                           Y.edges(), Scalar(0));
  if (starts.empty()) {
    const auto defaults = detail::default_starts(X.weights(), Y.weights(), params);
    return detail::best_of_starts<Scalar>(objective, X.weights(), Y.weights(), defaults, params);
  }
  return detail::best_of_starts(objective, X.weights(), Y.weights(), starts, params);
}

/// Local optimum of the alpha-fused GW problem. alpha = 1 is the exact
/// transportation LP; alpha = 0 is solve_gw.
template <typename Scalar>
GwResult<Scalar> solve_fgw(const MeasureNetwork<Scalar>& X, const MeasureNetwork<Scalar>& Y,
                           const FgwParams& params = {},
                           std::span<const MatrixX<Scalar>> starts = {}) {
  params.validate();
  // Pure GW never looks at node positions.
  if (params.alpha == 0.0) return solve_gw(X, Y, params, starts);
  if (X.dim() != Y.dim())
    throw Error(ErrorKind::DimensionMismatch, "node points live in different dimensions");
  if (params.alpha == 1.0) {
    auto lp = solve_w2(X.base(), Y.base());
    return {lp.cost, std::move(lp.coupling), true, 0, lp.iterations};
  }

  const MatrixX<Scalar> D = cost_matrix(X.base(), Y.base());
  detail::FusedObjective<Scalar> objective(X.weights(), Y.weights(), &D, X.edges(), Y.edges(),
                                           Scalar(params.alpha));
  if (starts.empty()) {
    const auto defaults = detail::default_starts(X.weights(), Y.weights(), params);
    return detail::best_of_starts<Scalar>(objective, X.weights(), Y.weights(), defaults, params);
  }
  return detail::best_of_starts(objective, X.weights(), Y.weights(), starts, params);
}

template <typename Scalar>
struct GwOracleResult {
  GwResult<Scalar> result;
  // True when the enumerated candidates provably contain a global minimum:
  // n = 2 (the coupling set is a segment, searched densely), or the
  // centered edge matrices make the objective concave on the polytope.
  bool exhaustive;
};

namespace detail {

// Sign of the nonzero spectrum of P M P (P = centering), restricted to the
// complement of the constant vector. Returns +1, -1, 0 (all zero) or 2 (mixed).
template <typename Scalar>
int centered_definiteness(const MatrixX<Scalar>& M) {
  const Index n = M.rows();
  const MatrixX<Scalar> P =
      MatrixX<Scalar>::Identity(n, n) - MatrixX<Scalar>::Constant(n, n, Scalar(1) / Scalar(n));
  const MatrixX<Scalar> C = P * M * P;
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(Scalar(0.5) * (C + C.transpose()),
                                                     Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const Scalar tol = Scalar(1e-10) * std::max<Scalar>(Scalar(1), ev.cwiseAbs().maxCoeff());
  bool pos = false, neg = false;
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > tol) pos = true;
    if (ev(i) < -tol) neg = true;
  }
  if (pos && neg) return 2;
  return pos ? 1 : (neg ? -1 : 0);
}

}  // namespace detail

/// Global minimum of the fused objective over the permutation vertices of
/// U(1/n, 1/n), for uniform n = m <= 7. For n = 2 the full segment of
/// couplings is also searched (grid plus the closed-form minimizer).
template <typename Scalar>
GwOracleResult<Scalar> solve_fgw_oracle(const MeasureNetwork<Scalar>& X,
                                        const MeasureNetwork<Scalar>& Y, Scalar alpha) {
  const Index n = X.size();
  if (n != Y.size() || n > 7)
    throw Error(ErrorKind::InstanceTooLarge, "oracle needs n = m <= 7");
  if (!X.base().is_uniform() || !Y.base().is_uniform())
    throw Error(ErrorKind::NonUniformWeights, "oracle needs uniform weights");
  if (alpha != Scalar(0) && X.dim() != Y.dim())
    throw Error(ErrorKind::DimensionMismatch, "node points live in different dimensions");

  const MatrixX<Scalar> D =
      alpha != Scalar(0) ? cost_matrix(X.base(), Y.base()) : MatrixX<Scalar>::Zero(n, n);
  detail::FusedObjective<Scalar> objective(X.weights(), Y.weights(), &D, X.edges(), Y.edges(),
                                           alpha);
  const Scalar mass = Scalar(1) / Scalar(n);

  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index(0));
  MatrixX<Scalar> best;
  Scalar best_cost = std::numeric_limits<Scalar>::infinity();
  Index visited = 0;
  do {
    MatrixX<Scalar> g = MatrixX<Scalar>::Zero(n, n);
    for (Index i = 0; i < n; ++i) g(i, perm[i]) = mass;
    const Scalar c = objective.value(g);
    ++visited;
    if (c < best_cost) {
      best_cost = c;
      best = std::move(g);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  bool exhaustive = n <= 1 || alpha == Scalar(1);
  if (n == 2) {
    exhaustive = true;
    auto family = [&](Scalar p) {
      MatrixX<Scalar> g(2, 2);
      g << p, mass - p, mass - p, p;
      return g;
    };
    auto consider = [&](Scalar p) {
      p = std::clamp(p, Scalar(0), mass);
      MatrixX<Scalar> g = family(p);
      const Scalar c = objective.value(g);
      if (c < best_cost) {
        best_cost = c;
        best = std::move(g);
      }
    };
    const int grid = 2000;
    for (int k = 0; k <= grid; ++k) consider(mass * Scalar(k) / Scalar(grid));
    // value(p) is quadratic in p; fit it exactly from three points.
    const Scalar f0 = objective.value(family(0)), fh = objective.value(family(mass / 2)),
                 f1 = objective.value(family(mass));
    const Scalar quad = Scalar(2) * (f0 - Scalar(2) * fh + f1) / (mass * mass);
    if (quad > Scalar(0)) {
      const Scalar slope0 = (Scalar(4) * fh - Scalar(3) * f0 - f1) / mass;
      consider(-slope0 / (Scalar(2) * quad));
    }
  } else if (n > 2 && X.is_symmetric() && Y.is_symmetric()) {
    const int sa = detail::centered_definiteness(X.edges());
    const int sb = detail::centered_definiteness(Y.edges());
    exhaustive = sa == 0 || sb == 0 || (sa != 2 && sa == sb);
  }

  Coupling<Scalar> coupling(std::move(best), X.weights(), Y.weights());
  return {{best_cost, std::move(coupling), true, 0, visited}, exhaustive};
}

template <typename Scalar>
GwOracleResult<Scalar> solve_gw_oracle(const MeasureNetwork<Scalar>& X,
                                       const MeasureNetwork<Scalar>& Y) {
  return solve_fgw_oracle(X, Y, Scalar(0));
}

/// All n! permutation vertices of U(1/n, 1/n), in lexicographic order.
template <typename Scalar>
std::vector<MatrixX<Scalar>> permutation_vertices(Index n) {
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index(0));
  std::vector<MatrixX<Scalar>> out;
  do {
    MatrixX<Scalar> g = MatrixX<Scalar>::Zero(n, n);
    for (Index i = 0; i < n; ++i) g(i, perm[i]) = Scalar(1) / Scalar(n);
    out.push_back(std::move(g));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace lotdecomp

#endif  // LOTDECOMP_GW_HPP
