// Independent reference computations used by the tests. Everything here is
// written the slow, obvious way on purpose.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "lotdecomp/measures.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using lotdecomp::Index;

inline VectorXd random_simplex(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  VectorXd w(n);
  for (Index i = 0; i < n; ++i) w(i) = u(rng);
  return w / w.sum();
}

inline MatrixXd random_points(Index n, Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  MatrixXd X(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < d; ++c) X(i, c) = g(rng);
  return X;
}

inline lotdecomp::EmpiricalMeasured random_measure(Index n, Index d, std::mt19937_64& rng,
                                                   bool uniform = false) {
  VectorXd w = uniform ? VectorXd::Constant(n, 1.0 / n) : random_simplex(n, rng);
  return lotdecomp::EmpiricalMeasured(w, random_points(n, d, rng), {.renormalize = true});
}

inline MatrixXd euclidean_distances(const MatrixXd& X) {
  MatrixXd D(X.rows(), X.rows());
  for (Index i = 0; i < X.rows(); ++i)
    for (Index k = 0; k < X.rows(); ++k) D(i, k) = (X.row(i) - X.row(k)).norm();
  return D;
}

inline MatrixXd random_symmetric(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  MatrixXd A(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index k = i; k < n; ++k) A(i, k) = A(k, i) = (i == k ? 0.0 : u(rng));
  return A;
}

// A feasible coupling that is neither a vertex nor the product coupling:
// a convex mix of the product and the north-west-corner plan.
inline MatrixXd mixed_coupling(const VectorXd& a, const VectorXd& b, double t) {
  MatrixXd nw = MatrixXd::Zero(a.size(), b.size());
  VectorXd s = a, d = b;
  Index i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double f = std::min(s(i), d(j));
    nw(i, j) += f;
    s(i) -= f;
    d(j) -= f;
    if (i == a.size() - 1) ++j;
    else if (j == b.size() - 1) ++i;
    else if (s(i) <= d(j)) ++i;
    else ++j;
  }
  return t * (a * b.transpose()) + (1 - t) * nw;
}

inline double naive_w_cost(const MatrixXd& g, const MatrixXd& X, const MatrixXd& Y) {
  double s = 0;
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < g.cols(); ++j) s += g(i, j) * (X.row(i) - Y.row(j)).squaredNorm();
  return s;
}

inline double naive_gw_cost(const MatrixXd& g, const MatrixXd& A, const MatrixXd& B) {
  double s = 0;
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < g.cols(); ++j)
      for (Index k = 0; k < g.rows(); ++k)
        for (Index l = 0; l < g.cols(); ++l) {
          const double diff = A(i, k) - B(j, l);
          s += g(i, j) * g(k, l) * diff * diff;
        }
  return s;
}

// All permutation matrices scaled by 1/n.
inline std::vector<MatrixXd> permutation_couplings(Index n) {
  std::vector<Index> p(n);
  std::iota(p.begin(), p.end(), Index(0));
  std::vector<MatrixXd> out;
  do {
    MatrixXd g = MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i) g(i, p[i]) = 1.0 / n;
    out.push_back(g);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// sum_ij g_ij <x_i - T_i, T_i - y_j>
inline double w_cross_term(const MatrixXd& g, const MatrixXd& X, const MatrixXd& T, const MatrixXd& Y) {
  double s = 0;
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < g.cols(); ++j) s += g(i, j) * (X.row(i) - T.row(i)).dot(T.row(i) - Y.row(j));
  return s;
}

// sum_ijkl g_ij g_kl (A_ik - C_ik)(C_ik - B_jl)
inline double gw_cross_term(const MatrixXd& g, const MatrixXd& A, const MatrixXd& C, const MatrixXd& B) {
  double s = 0;
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < g.cols(); ++j)
      for (Index k = 0; k < g.rows(); ++k)
        for (Index l = 0; l < g.cols(); ++l)
          s += g(i, j) * g(k, l) * (A(i, k) - C(i, k)) * (C(i, k) - B(j, l));
  return s;
}

// Classical one-way ANOVA F on scalar observations.
inline double anova_f(const std::vector<std::vector<double>>& groups) {
  double grand = 0;
  std::size_t total = 0;
  for (const auto& g : groups) {
    grand += std::accumulate(g.begin(), g.end(), 0.0);
    total += g.size();
  }
  grand /= static_cast<double>(total);
  double ssb = 0, ssw = 0;
  for (const auto& g : groups) {
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    ssb += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
    for (double v : g) ssw += (v - mean) * (v - mean);
  }
  const double k = static_cast<double>(groups.size());
  return (ssb / (k - 1)) / (ssw / (static_cast<double>(total) - k));
}

inline double rel_err(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace oracle
