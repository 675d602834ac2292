#include "lotdecomp/barycenter.hpp"

#include <numeric>
#include <random>

#include "lotdecomp/exact_ot.hpp"
#include "lotdecomp/lot.hpp"
#include "lotdecomp/parallel.hpp"

namespace lotdecomp {

void BarycenterConfig::validate() const {
  if (n_support < 1) throw Error(ErrorKind::InvalidArgument, "n_support must be >= 1");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be > 0");
  if (max_outer_iters < 0) throw Error(ErrorKind::InvalidArgument, "max_outer_iters must be >= 0");
  if (alpha && !(*alpha >= 0.0 && *alpha <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "alpha must lie in [0, 1]");
  if (init == BarycenterInit::Provided) {
    if (!initial_points)
      throw Error(ErrorKind::InvalidArgument, "Provided init needs initial_points");
    if (initial_points->rows() != n_support)
      throw Error(ErrorKind::DimensionMismatch,
                  "initial_points has " + std::to_string(initial_points->rows()) +
                      " rows, n_support is " + std::to_string(n_support));
    if (initial_edges &&
        (initial_edges->rows() != n_support || initial_edges->cols() != n_support))
      throw Error(ErrorKind::DimensionMismatch, "initial_edges must be n_support x n_support");
  }
  fgw.validate();
}

MeasureNetworkd BarycenterResult::network() const {
  if (!edges) throw Error(ErrorKind::MissingEdges, "barycenter has no edge matrix");
  return MeasureNetworkd(barycenter, *edges);
}

namespace {

VectorXd uniform_weights(Index n) { return VectorXd::Constant(n, 1.0 / static_cast<double>(n)); }

// Distinct indices while the pool lasts, then a fresh pass.
std::vector<Index> draw_indices(Index pool, Index count, std::mt19937_64& rng) {
  std::vector<Index> out;
  out.reserve(count);
  std::vector<Index> perm(pool);
  while (static_cast<Index>(out.size()) < count) {
    std::iota(perm.begin(), perm.end(), Index(0));
    for (Index i = 0; i < pool && static_cast<Index>(out.size()) < count; ++i) {
      std::uniform_int_distribution<Index> pick(i, pool - 1);
      std::swap(perm[i], perm[pick(rng)]);
      out.push_back(perm[i]);
    }
  }
  return out;
}

MatrixXd gaussian_points(Index n, Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd X(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < d; ++c) X(i, c) = normal(rng);
  return X;
}

template <typename Elem>
Index common_dim(const std::vector<Elem>& dataset) {
  if (dataset.empty()) throw Error(ErrorKind::InvalidArgument, "dataset is empty");
  const Index d = dataset.front().dim();
  for (const auto& e : dataset)
    if (e.dim() != d)
      throw Error(ErrorKind::DimensionMismatch, "dataset elements live in different dimensions");
  return d;
}

struct Iterate {
  MatrixXd points;
  std::optional<MatrixXd> edges;
};

struct Evaluation {
  double variance = 0;
  std::vector<Couplingd> couplings;
};

// Shared alternating scheme. `solve(l, iterate, previous)` returns the
// coupling and squared distance to element l; `targets(l)` gives its points
// and (for the fused case) edges.
template <typename Solve, typename Points, typename Edges>
BarycenterResult run_alternating(std::size_t N, Iterate init, const BarycenterConfig& cfg,
                                 Solve&& solve, Points&& target_points, Edges&& target_edges) {
  const Index n = cfg.n_support;
  const VectorXd a = uniform_weights(n);

  auto evaluate = [&](const Iterate& it, const std::vector<Couplingd>* previous) {
    std::vector<std::optional<std::pair<Couplingd, double>>> slots(N);
    parallel_for(N, cfg.threads, [&](std::size_t l) {
      slots[l].emplace(solve(l, it, a, previous ? &(*previous)[l] : nullptr));
    });
    Evaluation ev;
    ev.couplings.reserve(N);
    double sum = 0;
    for (auto& s : slots) {
      sum += s->second;
      ev.couplings.push_back(std::move(s->first));
    }
    ev.variance = sum / static_cast<double>(N);
    return ev;
  };

  auto update = [&](const Iterate& cur, const std::vector<Couplingd>& couplings) {
    Iterate next;
    next.points = MatrixXd::Zero(n, cur.points.cols());
    if (cur.edges) next.edges = MatrixXd::Zero(n, n);
    for (std::size_t l = 0; l < N; ++l) {
      const MatrixXd plan = detail::conditional_plan(couplings[l].matrix(), a);
      next.points += plan * target_points(l);
      if (cur.edges) *next.edges += plan * target_edges(l) * plan.transpose();
    }
    next.points /= static_cast<double>(N);
    if (next.edges) *next.edges /= static_cast<double>(N);
    return next;
  };

  Iterate cur = std::move(init);
  Evaluation ev = evaluate(cur, nullptr);
  BarycenterResult out{EmpiricalMeasured(a, cur.points), std::nullopt, {ev.variance}, {}, 0};
  for (int it = 0; it < cfg.max_outer_iters && ev.variance > 0.0; ++it) {
    Iterate next = update(cur, ev.couplings);
    Evaluation next_ev = evaluate(next, &ev.couplings);
    // Descent safeguard: an increase (round-off for W, possible for the
    // fused update) is rejected and ends the run.
    if (next_ev.variance > ev.variance) break;
    const double decrease = (ev.variance - next_ev.variance) / ev.variance;
    cur = std::move(next);
    ev = std::move(next_ev);
    out.variance_trace.push_back(ev.variance);
    ++out.iterations;
    if (decrease < cfg.tol) break;
  }
  out.barycenter = EmpiricalMeasured(a, std::move(cur.points));
  out.edges = std::move(cur.edges);
  out.couplings = std::move(ev.couplings);
  return out;
}

}  // namespace

double frechet_variance(const EmpiricalMeasured& reference, const std::vector<EmpiricalMeasured>& dataset,
                        unsigned threads) {
  if (dataset.empty()) throw Error(ErrorKind::InvalidArgument, "dataset is empty");
  std::vector<double> costs(dataset.size());
  parallel_for(dataset.size(), threads,
               [&](std::size_t l) { costs[l] = solve_w2(reference, dataset[l]).cost; });
  return std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(dataset.size());
}

double frechet_variance(const MeasureNetworkd& reference, const std::vector<MeasureNetworkd>& dataset,
                        DistanceMode mode, const FgwParams& params, unsigned threads) {
  if (dataset.empty()) throw Error(ErrorKind::InvalidArgument, "dataset is empty");
  const double alpha = mode.fused_alpha();
  std::vector<double> costs(dataset.size());
  parallel_for(dataset.size(), threads, [&](std::size_t l) {
    const auto& Y = dataset[l];
    if (alpha == 1.0) {
      costs[l] = solve_w2(reference.base(), Y.base()).cost;
      return;
    }
    bool certified = false;
    const Couplingd g = detail::fused_coupling(reference, Y, alpha, params, certified);
    costs[l] = transport_cost_fgw(g.matrix(), reference.points(), Y.points(), reference.edges(),
                                  Y.edges(), alpha);
  });
  return std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(dataset.size());
}

BarycenterResult free_support_barycenter(const std::vector<EmpiricalMeasured>& dataset,
                                         const BarycenterConfig& cfg) {
  cfg.validate();
  const Index d = common_dim(dataset);
  const Index n = cfg.n_support;
  std::mt19937_64 rng(cfg.seed);

  Iterate init;
  switch (cfg.init) {
    case BarycenterInit::Provided:
      init.points = *cfg.initial_points;
      if (init.points.cols() != d)
        throw Error(ErrorKind::DimensionMismatch, "initial_points has the wrong dimension");
      break;
    case BarycenterInit::SeededGaussian:
      init.points = gaussian_points(n, d, rng);
      break;
    case BarycenterInit::RandomSubsample: {
      Index pool = 0;
      for (const auto& mu : dataset) pool += mu.size();
      MatrixXd pooled(pool, d);
      Index r = 0;
      for (const auto& mu : dataset) {
        pooled.middleRows(r, mu.size()) = mu.points();
        r += mu.size();
      }
      init.points.resize(n, d);
      const auto idx = draw_indices(pool, n, rng);
      for (Index i = 0; i < n; ++i) init.points.row(i) = pooled.row(idx[i]);
      break;
    }
  }

  auto solve = [&](std::size_t l, const Iterate& it, const VectorXd& a, const Couplingd* previous) {
    // The marginals never change, so the last optimum is a feasible basis.
    auto res = solve_w2(EmpiricalMeasured(a, it.points), dataset[l], {},
                        previous ? &previous->matrix() : nullptr);
    return std::pair<Couplingd, double>(std::move(res.coupling), res.cost);
  };
  return run_alternating(
      dataset.size(), std::move(init), cfg, solve,
      [&](std::size_t l) -> const MatrixXd& { return dataset[l].points(); },
      [&](std::size_t) -> MatrixXd { return {}; });
}

BarycenterResult free_support_fgw_barycenter(const std::vector<MeasureNetworkd>& dataset,
                                             const BarycenterConfig& cfg) {
  cfg.validate();
  if (!cfg.alpha) throw Error(ErrorKind::InvalidArgument, "fused barycenter needs alpha");
  const double alpha = *cfg.alpha;
  const Index d = common_dim(dataset);
  const Index n = cfg.n_support;
  std::mt19937_64 rng(cfg.seed);

  Iterate init;
  switch (cfg.init) {
    case BarycenterInit::Provided:
      init.points = *cfg.initial_points;
      if (init.points.cols() != d)
        throw Error(ErrorKind::DimensionMismatch, "initial_points has the wrong dimension");
      if (cfg.initial_edges)
        init.edges = *cfg.initial_edges;
      else if (alpha == 1.0)
        init.edges = MatrixXd::Zero(n, n);
      else
        throw Error(ErrorKind::MissingEdges, "Provided init needs initial_edges when alpha < 1");
      break;
    case BarycenterInit::SeededGaussian: {
      init.points = gaussian_points(n, d, rng);
      MatrixXd D(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < n; ++k) D(i, k) = (init.points.row(i) - init.points.row(k)).norm();
      init.edges = std::move(D);
      break;
    }
    case BarycenterInit::RandomSubsample: {
      std::uniform_int_distribution<std::size_t> which(0, dataset.size() - 1);
      const MeasureNetworkd& src = dataset[which(rng)];
      const auto idx = draw_indices(src.size(), n, rng);
      init.points.resize(n, d);
      MatrixXd C(n, n);
      for (Index i = 0; i < n; ++i) {
        init.points.row(i) = src.points().row(idx[i]);
        for (Index k = 0; k < n; ++k) C(i, k) = src.edges()(idx[i], idx[k]);
      }
      init.edges = std::move(C);
      break;
    }
  }

  FgwParams params = cfg.fgw;
  params.alpha = alpha;
  auto solve = [&](std::size_t l, const Iterate& it, const VectorXd& a, const Couplingd* previous) {
    const MeasureNetworkd bary(EmpiricalMeasured(a, it.points), *it.edges);
    const auto& Y = dataset[l];
    std::vector<MatrixXd> starts = detail::default_starts(a, Y.weights(), params);
    // Warm start from the previous coupling keeps the fused variance from
    // creeping up between iterations.
    if (previous) starts.push_back(previous->matrix());
    auto res = solve_fgw<double>(bary, Y, params, starts);
    return std::pair<Couplingd, double>(std::move(res.coupling), res.cost);
  };
  return run_alternating(
      dataset.size(), std::move(init), cfg, solve,
      [&](std::size_t l) -> const MatrixXd& { return dataset[l].points(); },
      [&](std::size_t l) -> const MatrixXd& { return dataset[l].edges(); });
}

}  // namespace lotdecomp
