#ifndef LOTDECOMP_STATS_HPP
#define LOTDECOMP_STATS_HPP

#include <cstdint>
#include <vector>

#include "lotdecomp/barycenter.hpp"
#include "lotdecomp/lot.hpp"

namespace lotdecomp {

// Dataset-level split of the Fréchet variance around a barycenter; each
// field is the mean of the per-element values.
struct VarianceDecomposition {
  Index n_support = 0;
  double total = 0;
  double deterministic = 0;
  double probabilistic = 0;
  double percent = 1;
  std::vector<DecompositionReport<double>> per_element;
};

// Re-solves an exact coupling from the barycenter to every element.
VarianceDecomposition variance_decomposition(const std::vector<EmpiricalMeasured>& dataset,
                                             const EmpiricalMeasured& barycenter, unsigned threads = 1);
// Reuses the couplings the fit converged with.
VarianceDecomposition variance_decomposition(const std::vector<EmpiricalMeasured>& dataset,
                                             const BarycenterResult& fit);

VarianceDecomposition variance_decomposition(const std::vector<MeasureNetworkd>& dataset,
                                             const MeasureNetworkd& barycenter, DistanceMode mode,
                                             const FgwParams& params = {}, unsigned threads = 1);
VarianceDecomposition variance_decomposition(const std::vector<MeasureNetworkd>& dataset,
                                             const BarycenterResult& fit, DistanceMode mode);

// One barycenter fit and decomposition per entry of n_values; every fit uses
// cfg.seed.
std::vector<VarianceDecomposition> variance_curve(const std::vector<EmpiricalMeasured>& dataset,
                                                  const std::vector<Index>& n_values,
                                                  BarycenterConfig cfg);
std::vector<VarianceDecomposition> variance_curve(const std::vector<MeasureNetworkd>& dataset,
                                                  const std::vector<Index>& n_values,
                                                  DistanceMode mode, BarycenterConfig cfg);

struct FStatistic {
  double statistic = 0;
  double prefactor = 0;
  // sum over groups of W2^2(nu, T#nu), optionally weighted by group size
  double numerator = 0;
  // sum over groups of the probabilistic component
  double denominator = 0;
};

// F from a fitted barycenter and its couplings to the groups.
FStatistic f_statistic(const std::vector<EmpiricalMeasured>& groups, const BarycenterResult& fit,
                       bool weighted_numerator = false);
// Fits the n-support barycenter per cfg, then evaluates F.
double f_statistic(const std::vector<EmpiricalMeasured>& groups, Index n_support,
                   BarycenterConfig cfg, bool weighted_numerator = false);

struct PermutationOptions {
  bool weighted_numerator = false;
  // Reuse the observed barycenter for every replicate instead of refitting.
  // Approximate; off by default.
  bool fast = false;
  unsigned threads = 1;
};

struct FTestResult {
  double statistic = 0;
  double prefactor = 0;
  double p_value = 1;
  Index n_support = 0;
  int permutations = 0;
  std::vector<double> permuted_stats;
  bool approximate = false;
};

FTestResult permutation_test(const std::vector<EmpiricalMeasured>& groups, Index n_support,
                             int permutations, std::uint64_t seed, BarycenterConfig cfg,
                             const PermutationOptions& opts = {});

}  // namespace lotdecomp

#endif  // LOTDECOMP_STATS_HPP
