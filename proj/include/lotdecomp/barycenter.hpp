#ifndef LOTDECOMP_BARYCENTER_HPP
#define LOTDECOMP_BARYCENTER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "lotdecomp/gw.hpp"
#include "lotdecomp/measures.hpp"

namespace lotdecomp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Which squared distance a dataset-level computation uses. For FGW the
// weight alpha multiplies the node (Wasserstein) term.
struct DistanceMode {
  enum class Kind { W, GW, FGW };
  Kind kind = Kind::W;
  double alpha = 1.0;

  static DistanceMode w() { return {Kind::W, 1.0}; }
  static DistanceMode gw() { return {Kind::GW, 0.0}; }
  static DistanceMode fgw(double alpha) { return {Kind::FGW, alpha}; }

  // alpha as seen by the fused solvers
  double fused_alpha() const { return kind == Kind::W ? 1.0 : kind == Kind::GW ? 0.0 : alpha; }
};

enum class BarycenterInit { RandomSubsample, SeededGaussian, Provided };

struct BarycenterConfig {
  Index n_support = 1;
  int max_outer_iters = 100;
  double tol = 1e-7;
  BarycenterInit init = BarycenterInit::RandomSubsample;
  std::uint64_t seed = 0;
  // Set for the fused barycenter; weight of the node term.
  std::optional<double> alpha;
  // Used when init == Provided. Must have n_support rows.
  std::optional<MatrixXd> initial_points;
  std::optional<MatrixXd> initial_edges;
  unsigned threads = 1;
  // Conditional-gradient settings for the GW/FGW coupling solves (alpha is
  // overridden by the barycenter's alpha).
  FgwParams fgw;

  void validate() const;
};

struct BarycenterResult {
  EmpiricalMeasured barycenter;
  // Edge matrix of the barycenter network (fused barycenter only).
  std::optional<MatrixXd> edges;
  // Fréchet variance of each accepted iterate, in order.
  std::vector<double> variance_trace;
  // Coupling from the final barycenter to each dataset element.
  std::vector<Couplingd> couplings;
  int iterations = 0;

  MeasureNetworkd network() const;
};

double frechet_variance(const EmpiricalMeasured& reference, const std::vector<EmpiricalMeasured>& dataset,
                        unsigned threads = 1);
double frechet_variance(const MeasureNetworkd& reference, const std::vector<MeasureNetworkd>& dataset,
                        DistanceMode mode, const FgwParams& params = {}, unsigned threads = 1);

BarycenterResult free_support_barycenter(const std::vector<EmpiricalMeasured>& dataset,
                                         const BarycenterConfig& cfg);
BarycenterResult free_support_fgw_barycenter(const std::vector<MeasureNetworkd>& dataset,
                                             const BarycenterConfig& cfg);

}  // namespace lotdecomp

#endif  // LOTDECOMP_BARYCENTER_HPP
