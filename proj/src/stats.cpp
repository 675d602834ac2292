#include "lotdecomp/stats.hpp"

#include <algorithm>
#include <random>

#include "lotdecomp/exact_ot.hpp"
#include "lotdecomp/parallel.hpp"

namespace lotdecomp {

namespace {

VarianceDecomposition summarize(Index n, std::vector<DecompositionReport<double>> reports) {
  VarianceDecomposition out;
  out.n_support = n;
  const double N = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    out.total += r.total;
    out.deterministic += r.deterministic;
    out.probabilistic += r.probabilistic;
  }
  out.total /= N;
  out.deterministic /= N;
  out.probabilistic /= N;
  out.percent = detail::percent_of(out.deterministic, out.total);
  out.per_element = std::move(reports);
  return out;
}

void check_couplings(std::size_t N, const BarycenterResult& fit) {
  if (fit.couplings.size() != N)
    throw Error(ErrorKind::DimensionMismatch,
                "fit has " + std::to_string(fit.couplings.size()) + " couplings for " +
                    std::to_string(N) + " elements");
}

std::uint64_t replicate_seed(std::uint64_t seed, int replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate), 0x5eedu};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

VarianceDecomposition variance_decomposition(const std::vector<EmpiricalMeasured>& dataset,
                                             const EmpiricalMeasured& barycenter, unsigned threads) {
  if (dataset.empty()) throw Error(ErrorKind::InvalidArgument, "dataset is empty");
  std::vector<DecompositionReport<double>> reports(dataset.size());
  parallel_for(dataset.size(), threads,
               [&](std::size_t l) { reports[l] = decompose_w2(barycenter, dataset[l]); });
  return summarize(barycenter.size(), std::move(reports));
}

VarianceDecomposition variance_decomposition(const std::vector<EmpiricalMeasured>& dataset,
                                             const BarycenterResult& fit) {
  if (dataset.empty()) throw Error(ErrorKind::InvalidArgument, "dataset is empty");
  check_couplings(dataset.size(), fit);
  std::vector<DecompositionReport<double>> reports;
  reports.reserve(dataset.size());
  // The fit's final couplings are exact OT solutions at the final support.
  for (std::size_t l = 0; l < dataset.size(); ++l)
    reports.push_back(decompose_w2(fit.barycenter, dataset[l], std::optional(fit.couplings[l]), true));
  return summarize(fit.barycenter.size(), std::move(reports));
}

VarianceDecomposition variance_decomposition(const std::vector<MeasureNetworkd>& dataset,
                                             const MeasureNetworkd& barycenter, DistanceMode mode,
                                             const FgwParams& params, unsigned threads) {
  if (dataset.empty()) throw Error(ErrorKind::InvalidArgument, "dataset is empty");
  std::vector<DecompositionReport<double>> reports(dataset.size());
  parallel_for(dataset.size(), threads, [&](std::size_t l) {
    reports[l] = decompose_fgw(barycenter, dataset[l], mode.fused_alpha(),
                               std::optional<Couplingd>{}, false, params);
  });
  return summarize(barycenter.size(), std::move(reports));
}

VarianceDecomposition variance_decomposition(const std::vector<MeasureNetworkd>& dataset,
                                             const BarycenterResult& fit, DistanceMode mode) {
  if (dataset.empty()) throw Error(ErrorKind::InvalidArgument, "dataset is empty");
  check_couplings(dataset.size(), fit);
  const MeasureNetworkd bary = fit.network();
  const double alpha = mode.fused_alpha();
  std::vector<DecompositionReport<double>> reports;
  reports.reserve(dataset.size());
  for (std::size_t l = 0; l < dataset.size(); ++l)
    reports.push_back(decompose_fgw(bary, dataset[l], alpha, std::optional(fit.couplings[l]),
                                    alpha == 1.0));
  return summarize(bary.size(), std::move(reports));
}

std::vector<VarianceDecomposition> variance_curve(const std::vector<EmpiricalMeasured>& dataset,
                                                  const std::vector<Index>& n_values,
                                                  BarycenterConfig cfg) {
  if (n_values.empty()) throw Error(ErrorKind::InvalidArgument, "n_values is empty");
  std::vector<VarianceDecomposition> out;
  for (Index n : n_values) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "support sizes must be >= 1");
    cfg.n_support = n;
    out.push_back(variance_decomposition(dataset, free_support_barycenter(dataset, cfg)));
  }
  return out;
}

std::vector<VarianceDecomposition> variance_curve(const std::vector<MeasureNetworkd>& dataset,
                                                  const std::vector<Index>& n_values,
                                                  DistanceMode mode, BarycenterConfig cfg) {
  if (n_values.empty()) throw Error(ErrorKind::InvalidArgument, "n_values is empty");
  cfg.alpha = mode.fused_alpha();
  std::vector<VarianceDecomposition> out;
  for (Index n : n_values) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "support sizes must be >= 1");
    cfg.n_support = n;
    out.push_back(variance_decomposition(dataset, free_support_fgw_barycenter(dataset, cfg), mode));
  }
  return out;
}

FStatistic f_statistic(const std::vector<EmpiricalMeasured>& groups, const BarycenterResult& fit,
                       bool weighted_numerator) {
  const std::size_t N = groups.size();
  if (N < 2) throw Error(ErrorKind::InvalidArgument, "F needs at least two groups");
  check_couplings(N, fit);
  Index total_size = 0;
  for (const auto& g : groups) total_size += g.size();

  FStatistic f;
  f.prefactor = static_cast<double>(total_size - static_cast<Index>(N)) / static_cast<double>(N - 1);
  for (std::size_t l = 0; l < N; ++l) {
    // With an optimal coupling the deterministic part is W2^2(nu, T#nu).
    const auto r = decompose_w2(fit.barycenter, groups[l], std::optional(fit.couplings[l]), true);
    f.numerator += weighted_numerator ? static_cast<double>(groups[l].size()) * r.deterministic
                                      : r.deterministic;
    f.denominator += r.probabilistic;
  }
  if (f.denominator < 1e-15)
    throw Error(ErrorKind::DegenerateDenominator,
                "all couplings are deterministic; the F statistic is undefined");
  f.statistic = f.prefactor * f.numerator / f.denominator;
  return f;
}

double f_statistic(const std::vector<EmpiricalMeasured>& groups, Index n_support, BarycenterConfig cfg,
                   bool weighted_numerator) {
  cfg.n_support = n_support;
  return f_statistic(groups, free_support_barycenter(groups, cfg), weighted_numerator).statistic;
}

FTestResult permutation_test(const std::vector<EmpiricalMeasured>& groups, Index n_support,
                             int permutations, std::uint64_t seed, BarycenterConfig cfg,
                             const PermutationOptions& opts) {
  if (permutations < 1) throw Error(ErrorKind::InvalidArgument, "permutations must be >= 1");
  if (groups.size() < 2) throw Error(ErrorKind::InvalidArgument, "F needs at least two groups");
  cfg.n_support = n_support;

  const BarycenterResult observed_fit = free_support_barycenter(groups, cfg);
  const FStatistic observed = f_statistic(groups, observed_fit, opts.weighted_numerator);

  std::vector<Index> sizes;
  Index pool = 0;
  for (const auto& g : groups) {
    sizes.push_back(g.size());
    pool += g.size();
  }
  const Index d = groups.front().dim();
  MatrixXd pooled(pool, d);
  {
    Index r = 0;
    for (const auto& g : groups) {
      if (g.dim() != d) throw Error(ErrorKind::DimensionMismatch, "groups live in different dimensions");
      pooled.middleRows(r, g.size()) = g.points();
      r += g.size();
    }
  }

  FTestResult out;
  out.statistic = observed.statistic;
  out.prefactor = observed.prefactor;
  out.n_support = n_support;
  out.permutations = permutations;
  out.approximate = opts.fast;
  out.permuted_stats.assign(static_cast<std::size_t>(permutations), 0.0);

  BarycenterConfig inner = cfg;
  inner.threads = 1;
  parallel_for(static_cast<std::size_t>(permutations), opts.threads, [&](std::size_t r) {
    std::mt19937_64 rng(replicate_seed(seed, static_cast<int>(r)));
    std::vector<Index> order(pool);
    for (Index i = 0; i < pool; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<EmpiricalMeasured> shuffled;
    shuffled.reserve(groups.size());
    Index next = 0;
    for (Index m : sizes) {
      MatrixXd pts(m, d);
      for (Index j = 0; j < m; ++j) pts.row(j) = pooled.row(order[next++]);
      shuffled.push_back(EmpiricalMeasured::uniform(std::move(pts)));
    }

    if (opts.fast) {
      BarycenterResult fit{observed_fit.barycenter, std::nullopt, {}, {}, 0};
      for (const auto& g : shuffled) fit.couplings.push_back(solve_w2(fit.barycenter, g).coupling);
      out.permuted_stats[r] = f_statistic(shuffled, fit, opts.weighted_numerator).statistic;
    } else {
      out.permuted_stats[r] =
          f_statistic(shuffled, free_support_barycenter(shuffled, inner), opts.weighted_numerator)
              .statistic;
    }
  });

  const auto exceed = std::count_if(out.permuted_stats.begin(), out.permuted_stats.end(),
                                    [&](double s) { return s >= out.statistic; });
  out.p_value = static_cast<double>(1 + exceed) / static_cast<double>(1 + permutations);
  return out;
}

}  // namespace lotdecomp
