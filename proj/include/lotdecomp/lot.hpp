#ifndef LOTDECOMP_LOT_HPP
#define LOTDECOMP_LOT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <optional>

#include "lotdecomp/exact_ot.hpp"
#include "lotdecomp/gw.hpp"
#include "lotdecomp/measures.hpp"

namespace lotdecomp {

/// Image of a barycentric projection: T(X), the pushforward T#nu (weights of
/// the source), the projected edge matrix when structure was supplied, and
/// the LOT vector field V = T(X) - X.
template <typename Scalar>
struct ProjectionResult {
  MatrixX<Scalar> mapped_points;
  EmpiricalMeasure<Scalar> projected_measure;
  std::optional<MatrixX<Scalar>> projected_edges;
  MatrixX<Scalar> vector_field;
};

template <typename Scalar>
struct DecompositionReport {
  Scalar total = 0;
  Scalar deterministic = 0;
  Scalar probabilistic = 0;
  Scalar percent_explained = 1;
  std::optional<Scalar> diam2_target;
  std::optional<Scalar> diam2_projection;
  bool coupling_certified_optimal = false;
};

namespace detail {

template <typename Scalar>
void check_coupling_marginals(const Coupling<Scalar>& gamma, const VectorX<Scalar>& a,
                              const VectorX<Scalar>& b) {
  if (gamma.rows() != a.size() || gamma.cols() != b.size())
    throw Error(ErrorKind::DimensionMismatch,
                "coupling is " + shape(gamma.rows(), gamma.cols()) + " for measures of sizes " +
                    std::to_string(a.size()) + " and " + std::to_string(b.size()));
  const Scalar tol = marginal_tolerance<Scalar>();
  const Scalar row_err = (gamma.matrix().rowwise().sum() - a).cwiseAbs().maxCoeff();
  const Scalar col_err = (gamma.matrix().colwise().sum().transpose() - b).cwiseAbs().maxCoeff();
  if (row_err > tol || col_err > tol)
    throw Error(ErrorKind::MarginalMismatch, "coupling marginals differ from the measure weights");
}

// Rows of gamma divided by the source weights: the conditional laws of the
// target given each source atom.
template <typename Scalar>
MatrixX<Scalar> conditional_plan(const MatrixX<Scalar>& gamma, const VectorX<Scalar>& a) {
  return (gamma.array().colwise() / a.array()).matrix();
}

template <typename Scalar>
Scalar percent_of(Scalar deterministic, Scalar total) {
  if (!(total > Scalar(0))) return Scalar(1);
  return std::clamp(deterministic / total, Scalar(0), Scalar(1));
}

}  // namespace detail

/// T(x_i) = sum_j (gamma_ij / a_i) y_j, one row per source atom.
template <typename Scalar>
MatrixX<Scalar> barycentric_map(const Coupling<Scalar>& gamma,
                                const EmpiricalMeasure<Scalar>& source,
                                const EmpiricalMeasure<Scalar>& target) {
  detail::check_coupling_marginals(gamma, source.weights(), target.weights());
  return detail::conditional_plan(gamma.matrix(), source.weights()) * target.points();
}

template <typename Scalar>
ProjectionResult<Scalar> project_w(const Coupling<Scalar>& gamma,
                                   const EmpiricalMeasure<Scalar>& source,
                                   const EmpiricalMeasure<Scalar>& target) {
  if (source.dim() != target.dim())
    throw Error(ErrorKind::DimensionMismatch, "source and target live in different dimensions");
  MatrixX<Scalar> mapped = barycentric_map(gamma, source, target);
  MatrixX<Scalar> field = mapped - source.points();
  EmpiricalMeasure<Scalar> pushed(source.weights(), mapped);
  return {std::move(mapped), std::move(pushed), std::nullopt, std::move(field)};
}

/// omega_C(x_i, x_k) = sum_jl (gamma_ij / a_i)(gamma_kl / a_k) B_jl.
template <typename Scalar>
MatrixX<Scalar> projected_edges(const Coupling<Scalar>& gamma, const VectorX<Scalar>& a,
                                const MatrixX<Scalar>& B) {
  const MatrixX<Scalar> plan = detail::conditional_plan(gamma.matrix(), a);
  return plan * B * plan.transpose();
}

/// GW projection: structure is pulled back onto the source nodes, which do
/// not move.
template <typename Scalar>
ProjectionResult<Scalar> project_gw(const Coupling<Scalar>& gamma, const MeasureNetwork<Scalar>& X,
                                    const MeasureNetwork<Scalar>& Y) {
  detail::check_coupling_marginals(gamma, X.weights(), Y.weights());
  MatrixX<Scalar> C = projected_edges(gamma, X.weights(), Y.edges());
  return {X.points(), X.base(), std::move(C),
          MatrixX<Scalar>::Zero(X.points().rows(), X.points().cols())};
}

template <typename Scalar>
ProjectionResult<Scalar> project_fgw(const Coupling<Scalar>& gamma,
                                     const MeasureNetwork<Scalar>& X,
                                     const MeasureNetwork<Scalar>& Y) {
  ProjectionResult<Scalar> out = project_w(gamma, X.base(), Y.base());
  out.projected_edges = projected_edges(gamma, X.weights(), Y.edges());
  return out;
}

/// Split C_W(gamma) into the cost of the map T (deterministic) and the cost
/// of the residual plan from T(X) to Y (probabilistic). Without a coupling an
/// optimal one is computed and the report is marked certified; in that case
/// the deterministic part is W_2^2(nu, T#nu).
template <typename Scalar>
DecompositionReport<Scalar> decompose_w2(const EmpiricalMeasure<Scalar>& nu,
                                         const EmpiricalMeasure<Scalar>& mu,
                                         const std::optional<Coupling<Scalar>>& gamma = std::nullopt,
                                         bool certified = false) {
  if (!gamma) return decompose_w2(nu, mu, std::optional(solve_w2(nu, mu).coupling), true);

  const MatrixX<Scalar> mapped = project_w(*gamma, nu, mu).mapped_points;
  DecompositionReport<Scalar> r;
  r.deterministic = nu.weights().dot((nu.points() - mapped).rowwise().squaredNorm());
  r.probabilistic = transport_cost_w(gamma->matrix(), mapped, mu.points());
  r.total = transport_cost_w(gamma->matrix(), nu.points(), mu.points());
  r.percent_explained = detail::percent_of(r.deterministic, r.total);
  r.coupling_certified_optimal = certified;
  return r;
}

namespace detail {

// Best available GW/FGW coupling: the permutation oracle when it applies,
// otherwise conditional gradient. `certified` reports a proven global optimum.
template <typename Scalar>
Coupling<Scalar> fused_coupling(const MeasureNetwork<Scalar>& X, const MeasureNetwork<Scalar>& Y,
                                Scalar alpha, const FgwParams& base_params, bool& certified) {
  FgwParams params = base_params;
  params.alpha = static_cast<double>(alpha);
  if (alpha == Scalar(1)) {
    certified = true;
    return solve_w2(X.base(), Y.base()).coupling;
  }
  if (X.size() == Y.size() && X.size() <= 7 && X.base().is_uniform() && Y.base().is_uniform()) {
    auto oracle = solve_fgw_oracle(X, Y, alpha);
    certified = oracle.exhaustive;
    if (certified) return std::move(oracle.result.coupling);
    std::vector<MatrixX<Scalar>> starts = detail::default_starts(X.weights(), Y.weights(), params);
    starts.push_back(oracle.result.coupling.matrix());
    return solve_fgw<Scalar>(X, Y, params, starts).coupling;
  }
  certified = false;
  return solve_fgw(X, Y, params).coupling;
}

}  // namespace detail

/// GW analogue of decompose_w2: deterministic = sum a_i a_k (A_ik - C_ik)^2,
/// probabilistic = sum gamma gamma (C_ik - B_jl)^2, and the probabilistic
/// part equals diam2(Y)^2 - diam2(T)^2.
template <typename Scalar>
DecompositionReport<Scalar> decompose_gw(const MeasureNetwork<Scalar>& X,
                                         const MeasureNetwork<Scalar>& Y,
                                         const std::optional<Coupling<Scalar>>& gamma = std::nullopt,
                                         bool certified = false, const FgwParams& params = {}) {
  if (!gamma) {
    bool proven = false;
    auto g = detail::fused_coupling(X, Y, Scalar(0), params, proven);
    return decompose_gw(X, Y, std::optional(std::move(g)), proven, params);
  }
  detail::check_coupling_marginals(*gamma, X.weights(), Y.weights());
  const auto& a = X.weights();
  const MatrixX<Scalar> C = projected_edges(*gamma, a, Y.edges());
  DecompositionReport<Scalar> r;
  r.deterministic = a.dot((X.edges() - C).cwiseAbs2() * a);
  r.probabilistic = transport_cost_gw(gamma->matrix(), C, Y.edges());
  r.total = transport_cost_gw(gamma->matrix(), X.edges(), Y.edges());
  r.percent_explained = detail::percent_of(r.deterministic, r.total);
  r.diam2_target = diam2(Y);
  r.diam2_projection = std::sqrt(std::max<Scalar>(Scalar(0), a.dot(C.cwiseAbs2() * a)));
  r.coupling_certified_optimal = certified;
  return r;
}

/// Fused decomposition: C^a_FGW(gamma) = C^a_FGW(T) + C^a_FGW(pi) with
/// pi = (T, id)#gamma. The split holds for any coupling.
template <typename Scalar>
DecompositionReport<Scalar> decompose_fgw(const MeasureNetwork<Scalar>& X,
                                          const MeasureNetwork<Scalar>& Y, Scalar alpha,
                                          const std::optional<Coupling<Scalar>>& gamma = std::nullopt,
                                          bool certified = false, const FgwParams& params = {}) {
  if (!(alpha >= Scalar(0) && alpha <= Scalar(1)))
    throw Error(ErrorKind::InvalidArgument, "alpha must lie in [0, 1]");
  if (alpha == Scalar(1)) return decompose_w2(X.base(), Y.base(), gamma, certified || !gamma);
  if (alpha == Scalar(0)) return decompose_gw(X, Y, gamma, certified, params);
  if (!gamma) {
    bool proven = false;
    auto g = detail::fused_coupling(X, Y, alpha, params, proven);
    return decompose_fgw(X, Y, alpha, std::optional(std::move(g)), proven, params);
  }
  const ProjectionResult<Scalar> proj = project_fgw(*gamma, X, Y);
  const auto& a = X.weights();
  const MatrixX<Scalar>& C = *proj.projected_edges;
  const MatrixX<Scalar>& T = proj.mapped_points;
  const Scalar beta = Scalar(1) - alpha;

  DecompositionReport<Scalar> r;
  r.deterministic = alpha * a.dot((X.points() - T).rowwise().squaredNorm()) +
                    beta * a.dot((X.edges() - C).cwiseAbs2() * a);
  r.probabilistic = alpha * transport_cost_w(gamma->matrix(), T, Y.points()) +
                    beta * transport_cost_gw(gamma->matrix(), C, Y.edges());
  r.total = transport_cost_fgw(gamma->matrix(), X.points(), Y.points(), X.edges(), Y.edges(),
                               alpha);
  r.percent_explained = detail::percent_of(r.deterministic, r.total);
  r.coupling_certified_optimal = certified;
  return r;
}

enum class EdgeVectorization {
  // upper triangle of 2C - diag(C): off-diagonal entries doubled
  Doubled,
  // upper triangle of C as is
  Plain,
};

/// Flatten a projection into a fixed-length vector: the node block T(X)
/// (row-major) when structure_weight < 1, then the upper triangle (with
/// diagonal, row-major) of 2C - diag(C) when structure_weight > 0.
///
/// `structure_weight` is the weight on the edge term, so 0 yields a pure
/// node embedding and 1 a pure edge embedding. Length:
/// [w < 1] n d + [w > 0] n (n + 1) / 2.
template <typename Scalar>
VectorX<Scalar> vectorize_embedding(const ProjectionResult<Scalar>& proj, Scalar structure_weight,
                                    EdgeVectorization mode = EdgeVectorization::Doubled) {
  const Index n = proj.mapped_points.rows(), d = proj.mapped_points.cols();
  const bool nodes = structure_weight < Scalar(1);
  const bool edges = structure_weight > Scalar(0);
  if (edges && !proj.projected_edges)
    throw Error(ErrorKind::MissingEdges, "edge block requested but the projection has no edges");
  const Index len = (nodes ? n * d : 0) + (edges ? n * (n + 1) / 2 : 0);
  VectorX<Scalar> out(len);
  Index k = 0;
  if (nodes)
    for (Index i = 0; i < n; ++i)
      for (Index c = 0; c < d; ++c) out(k++) = proj.mapped_points(i, c);
  if (edges) {
    const MatrixX<Scalar>& C = *proj.projected_edges;
    const Scalar factor = mode == EdgeVectorization::Doubled ? Scalar(2) : Scalar(1);
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j) out(k++) = i == j ? C(i, i) : factor * C(i, j);
  }
  return out;
}

}  // namespace lotdecomp

#endif  // LOTDECOMP_LOT_HPP
