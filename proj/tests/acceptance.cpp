// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit code
// is nonzero when any criterion fails. Pass criterion numbers as arguments to
// run a subset.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "lotdecomp/features.hpp"
#include "lotdecomp/io.hpp"
#include "lotdecomp/stats.hpp"
#include "oracles.hpp"

using namespace lotdecomp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) note << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

// Conditional mean map and projected edges computed from scratch, so the
// checks below do not lean on the library's projection code.
MatrixXd mapped_points(const MatrixXd& g, const VectorXd& a, const MatrixXd& Y) {
  return a.cwiseInverse().asDiagonal() * (g * Y);
}

MatrixXd mapped_edges(const MatrixXd& g, const VectorXd& a, const MatrixXd& B) {
  const MatrixXd P = a.cwiseInverse().asDiagonal() * g;
  return P * B * P.transpose();
}

double diam2_of(const VectorXd& a, const MatrixXd& E) { return std::sqrt(a.dot(E.cwiseAbs2() * a)); }

MeasureNetworkd metric_net(Index n, Index d, std::mt19937_64& rng, bool uniform) {
  auto mu = oracle::random_measure(n, d, rng, uniform);
  return MeasureNetworkd(mu, oracle::euclidean_distances(mu.points()));
}

// ---------------------------------------------------------------------------

struct WInstance {
  EmpiricalMeasured nu, mu;
};

std::vector<WInstance> w_instances() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<Index> size(1, 30), dim(1, 5);
  std::vector<WInstance> out;
  for (int t = 0; t < 200; ++t) {
    const Index n = size(rng), m = size(rng), d = dim(rng);
    out.push_back({oracle::random_measure(n, d, rng, t % 3 == 0),
                   oracle::random_measure(m, d, rng, t % 3 == 0)});
  }
  return out;
}

Outcome criterion1() {
  Outcome o;
  double worst_split = 0, worst_det = 0;
  for (const auto& [nu, mu] : w_instances()) {
    const auto r = decompose_w2(nu, mu);
    const double w2 = solve_w2(nu, mu).cost;
    const double split = std::abs(w2 - (r.deterministic + r.probabilistic)) / (1 + w2);
    const auto gamma = solve_w2(nu, mu).coupling;
    const EmpiricalMeasured pushed(nu.weights(), mapped_points(gamma.matrix(), nu.weights(), mu.points()));
    const double direct = solve_w2(nu, pushed).cost;
    const double det = std::abs(direct - r.deterministic) / (1 + w2);
    worst_split = std::max(worst_split, split);
    worst_det = std::max(worst_det, det);
    o.require(std::abs(r.total - w2) <= 1e-9 * (1 + w2), "total differs from W2^2");
  }
  o.require(worst_split <= 1e-9, "W2^2 != det + prob");
  o.require(worst_det <= 1e-9, "det != W2^2(nu, T#nu)");
  o.note << "200 instances, max split err " << worst_split << ", max det err " << worst_det;
  return o;
}

Outcome criterion2() {
  Outcome o;
  std::mt19937_64 rng(77);
  int certified = 0, attempts = 0;
  double worst = 0;
  while (certified < 100 && attempts < 2000) {
    ++attempts;
    const Index n = 2 + attempts % 4;
    const auto X = metric_net(n, 2, rng, true);
    const auto Y = metric_net(n, 1 + attempts % 3, rng, true);
    const auto orc = solve_gw_oracle(X, Y);
    if (!orc.exhaustive) continue;
    ++certified;

    const auto r = decompose_gw(X, Y);
    o.require(r.coupling_certified_optimal, "decomposition not certified");
    const MatrixXd& g = orc.result.coupling.matrix();
    const VectorXd& a = X.weights();
    const MatrixXd C = mapped_edges(g, a, Y.edges());

    const double e_total = rel(r.total, orc.result.cost);
    const double e_split = rel(r.total, r.deterministic + r.probabilistic);
    const double e_diam = rel(r.probabilistic, std::pow(diam2_of(Y.weights(), Y.edges()), 2) -
                                                   std::pow(diam2_of(a, C), 2));

    // GW^2(X, T): the identity coupling attains the deterministic part and
    // nothing found by a re-solve beats it
    const MeasureNetworkd T(X.base(), C);
    const MatrixXd identity = MatrixXd(a.asDiagonal());
    const double at_identity = transport_cost_gw(identity, X.edges(), C);
    const auto starts = permutation_vertices<double>(n);
    double resolved = solve_gw<double>(X, T, {}, starts).cost;
    resolved = std::min(resolved, solve_gw_oracle(X, T).result.cost);
    const double e_ident = rel(at_identity, r.deterministic);
    const double e_resolve = rel(resolved, r.deterministic);

    worst = std::max({worst, e_total, e_split, e_diam, e_ident, e_resolve});
    o.require(e_total <= 1e-9, "total != GW^2");
    o.require(e_split <= 1e-9, "total != det + prob");
    o.require(e_diam <= 1e-9, "prob != diam2(Y)^2 - diam2(T)^2");
    o.require(e_ident <= 1e-9, "identity coupling cost != det");
    o.require(e_resolve <= 1e-9, "re-solved GW^2(X, T) != det");
  }
  o.require(certified >= 50, "too few certified instances");
  o.note << certified << " certified of " << attempts << " drawn, max rel err " << worst;
  return o;
}

struct FusedInstance {
  MeasureNetworkd X, Y;
  MatrixXd product;
};

std::vector<FusedInstance> fused_instances() {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<Index> size(1, 12), dim(1, 4);
  std::vector<FusedInstance> out;
  for (int t = 0; t < 100; ++t) {
    const Index d = dim(rng);
    auto mx = oracle::random_measure(size(rng), d, rng, false);
    auto my = oracle::random_measure(size(rng), d, rng, false);
    // arbitrary symmetric edges on one side, metric on the other
    MeasureNetworkd A(mx, t % 2 ? oracle::random_symmetric(mx.size(), rng)
                                : oracle::euclidean_distances(mx.points()));
    MeasureNetworkd B(my, oracle::euclidean_distances(my.points()));
    out.push_back({A, B, mx.weights() * my.weights().transpose()});
  }
  return out;
}

Outcome criterion3() {
  Outcome o;
  double worst = 0;
  int checks = 0;
  for (const auto& inst : fused_instances()) {
    const auto& X = inst.X;
    const auto& Y = inst.Y;
    const MatrixXd& g = inst.product;
    const VectorXd& a = X.weights();
    const MatrixXd T = mapped_points(g, a, Y.points());
    const MatrixXd C = mapped_edges(g, a, Y.edges());
    const double w_gamma = oracle::naive_w_cost(g, X.points(), Y.points());
    const double gw_gamma = oracle::naive_gw_cost(g, X.edges(), Y.edges());
    const double w_map = a.dot((X.points() - T).rowwise().squaredNorm());
    const double gw_map = a.dot((X.edges() - C).cwiseAbs2() * a);
    const double w_pi = oracle::naive_w_cost(g, T, Y.points());
    const double gw_pi = oracle::naive_gw_cost(g, C, Y.edges());
    const Couplingd gamma(g, a, Y.weights());
    for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double cg = alpha * w_gamma + (1 - alpha) * gw_gamma;
      const double ct = alpha * w_map + (1 - alpha) * gw_map;
      const double cp = alpha * w_pi + (1 - alpha) * gw_pi;
      const double e_identity = std::abs(cg - (ct + cp)) / (1 + std::abs(cg));
      const auto r = decompose_fgw(X, Y, alpha, std::optional(gamma));
      const double e_lib = std::max({rel(r.total, cg), rel(r.deterministic, ct), rel(r.probabilistic, cp)});
      worst = std::max({worst, e_identity, e_lib});
      o.require(e_identity <= 1e-9, "C(gamma) != C(T) + C(pi)");
      o.require(e_lib <= 1e-9, "decompose_fgw disagrees with direct terms");
      ++checks;
    }
  }
  o.note << checks << " (instance, alpha) pairs, max rel err " << worst;
  return o;
}

Outcome criterion4() {
  Outcome o;
  double worst = 0;
  int checks = 0;
  for (const auto& [nu, mu] : w_instances()) {
    const auto gamma = solve_w2(nu, mu).coupling;
    const MatrixXd& g = gamma.matrix();
    const MatrixXd T = mapped_points(g, nu.weights(), mu.points());
    const double scale = 1 + nu.points().squaredNorm() + mu.points().squaredNorm();
    const double w = std::abs(oracle::w_cross_term(g, nu.points(), T, mu.points())) / scale;
    worst = std::max(worst, w);
    o.require(w <= 1e-9, "W cross term");
    const EmpiricalMeasured pushed(nu.weights(), T);
    o.require(classify_coupling(gamma, pushed, mu).kind == CouplingKind::PurelyProbabilistic,
              "pi not purely probabilistic");
    ++checks;
  }
  for (const auto& inst : fused_instances()) {
    const MatrixXd& g = inst.product;
    const VectorXd& a = inst.X.weights();
    const MatrixXd T = mapped_points(g, a, inst.Y.points());
    const MatrixXd C = mapped_edges(g, a, inst.Y.edges());
    const double ws = 1 + inst.X.points().squaredNorm() + inst.Y.points().squaredNorm();
    const double gs = 1 + inst.X.edges().squaredNorm() + inst.Y.edges().squaredNorm();
    const double w = std::abs(oracle::w_cross_term(g, inst.X.points(), T, inst.Y.points())) / ws;
    const double gwv = std::abs(oracle::gw_cross_term(g, inst.X.edges(), C, inst.Y.edges())) / gs;
    worst = std::max({worst, w, gwv});
    o.require(w <= 1e-9, "W cross term (fused)");
    o.require(gwv <= 1e-9, "GW cross term");
    const Couplingd gamma(g, a, inst.Y.weights());
    o.require(classify_coupling(gamma, EmpiricalMeasured(a, T), inst.Y.base()).kind ==
                  CouplingKind::PurelyProbabilistic,
              "pi not purely probabilistic (fused)");
    ++checks;
  }
  o.note << checks << " instances, max scaled cross term " << worst;
  return o;
}

Outcome criterion5() {
  Outcome o;
  int w_checked = 0;
  double w_worst = 0;
  auto check_w = [&](const EmpiricalMeasured& nu, const EmpiricalMeasured& mu) {
    const double fast = solve_w2(nu, mu).cost;
    const double brute = solve_w2_oracle(nu, mu).cost;
    w_worst = std::max(w_worst, std::abs(fast - brute));
    o.require(std::abs(fast - brute) <= 1e-9, "solve_w2 != vertex enumeration");
    ++w_checked;
  };
  for (const auto& [nu, mu] : w_instances())
    if (nu.size() * mu.size() <= 64) check_w(nu, mu);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<Index> size(1, 8);
  for (int t = 0; t < 300; ++t) {
    const Index n = size(rng);
    const Index m = std::min<Index>(size(rng), 64 / n);
    check_w(oracle::random_measure(n, 1 + t % 3, rng, t % 4 == 0),
            oracle::random_measure(m, 1 + t % 3, rng, t % 4 == 0));
  }

  int gw_checked = 0, gw_certified = 0;
  double gw_worst = 0;
  for (int t = 0; t < 200; ++t) {
    const Index n = 1 + t % 5;
    const auto X = metric_net(n, 2, rng, true);
    const auto Y = metric_net(n, 1 + t % 3, rng, true);
    const auto fw = solve_gw<double>(X, Y, {}, permutation_vertices<double>(n));
    const auto orc = solve_gw_oracle(X, Y);
    ++gw_checked;
    // vertex-started descent can only improve on the best vertex
    o.require(fw.cost <= orc.result.cost + 1e-9 * (1 + orc.result.cost), "restarts worse than oracle");
    if (orc.exhaustive) {
      ++gw_certified;
      gw_worst = std::max(gw_worst, rel(fw.cost, orc.result.cost));
      o.require(rel(fw.cost, orc.result.cost) <= 1e-9, "solve_gw != oracle");
    }
  }
  o.note << w_checked << " W instances (max diff " << w_worst << "), " << gw_checked
         << " GW instances, " << gw_certified << " certified (max rel err " << gw_worst << ")";
  return o;
}

Outcome criterion6() {
  Outcome o;
  const int seeds = 20, permutations = 250;
  const Index max_n = 10;
  std::vector<std::vector<double>> p(max_n + 1, std::vector<double>(seeds));
  for (int s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(1000 + s);
    std::normal_distribution<double> z;
    std::vector<EmpiricalMeasured> groups;
    for (int l = 0; l < 5; ++l) {
      MatrixXd Y(100, 2);
      for (Index i = 0; i < 100; ++i) {
        const double x = z(rng), y = z(rng);
        Y.row(i) << (l == 0 ? x * x * x : x), y;
      }
      groups.push_back(EmpiricalMeasured::uniform(Y));
    }
    for (Index n = 1; n <= max_n; ++n) {
      BarycenterConfig cfg;
      cfg.seed = s;
      p[n][s] = permutation_test(groups, n, permutations, s, cfg).p_value;
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  };
  o.note << "median p by n:";
  for (Index n = 1; n <= max_n; ++n) {
    const double med = median(p[n]);
    const int agree = static_cast<int>(std::count_if(p[n].begin(), p[n].end(), [&](double v) {
      return n == 1 ? v > 0.05 : v < 0.05;
    }));
    o.note << " n=" << n << ":" << med << "(" << agree << "/20)";
    if (n == 1) {
      o.require(med > 0.05, "median p at n=1 not above 0.05");
    } else {
      o.require(med < 0.05, "median p at n=" + std::to_string(n) + " not below 0.05");
    }
    o.require(agree >= 18, "fewer than 18/20 seeds agree at n=" + std::to_string(n));
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(4.0, 24.0);
  std::normal_distribution<double> z;
  std::uniform_int_distribution<int> count(40, 60);
  // each class is a fixed arrangement of three blobs on a 28x28 canvas
  std::vector<MatrixXd> centers(10, MatrixXd(3, 2));
  for (auto& c : centers)
    for (Index k = 0; k < 3; ++k) c.row(k) << u(rng), u(rng);
  std::vector<EmpiricalMeasured> data;
  for (int l = 0; l < 500; ++l) {
    const MatrixXd& c = centers[l % 10];
    const Index m = count(rng);
    const Eigen::RowVector2d jitter(0.5 * z(rng), 0.5 * z(rng));
    MatrixXd Y(m, 2);
    for (Index i = 0; i < m; ++i) {
      const Index k = i % 3;
      Y.row(i) = c.row(k) + jitter + Eigen::RowVector2d(1.5 * z(rng), 1.5 * z(rng));
    }
    data.push_back(EmpiricalMeasured::uniform(Y));
  }
  BarycenterConfig cfg;
  cfg.seed = 7;
  const std::vector<Index> ns = {1, 5, 10, 25, 50};
  const auto curve = variance_curve(data, ns, cfg);
  o.note << "percent:";
  for (const auto& c : curve) {
    o.note << " n=" << c.n_support << ":" << c.percent;
    o.require(c.percent >= 0.0 && c.percent <= 1.0, "percent outside [0,1]");
  }
  o.require(curve.back().percent - curve.front().percent >= 0.2, "gain from n=1 to n=50 below 0.2");
  return o;
}

Outcome criterion8() {
  Outcome o;
  const Eigen::RowVector3d a(0.3, -1.7, 2.0), b(-4.1, 0.25, 9.5);
  const auto two = free_support_barycenter({EmpiricalMeasured::dirac(a), EmpiricalMeasured::dirac(b)},
                                           BarycenterConfig{});
  o.require(two.barycenter.size() == 1 && two.barycenter.points().row(0) == (a + b) / 2,
            "two Diracs do not meet at the midpoint");

  std::mt19937_64 rng(8);
  double worst_fixed = 0, worst_rise = 0;
  for (int t = 0; t < 20; ++t) {
    auto mu = oracle::random_measure(3 + t % 8, 1 + t % 3, rng, true);
    BarycenterConfig cfg;
    cfg.n_support = mu.size();
    cfg.init = BarycenterInit::Provided;
    cfg.initial_points = mu.points();
    const auto r = free_support_barycenter({mu}, cfg);
    worst_fixed = std::max(worst_fixed, r.variance_trace.back());
    o.require(r.variance_trace.back() <= 1e-12, "a measure is not its own fixed point");

    std::vector<EmpiricalMeasured> data;
    for (int l = 0; l < 6; ++l) data.push_back(oracle::random_measure(5 + l, 2, rng, l % 2 == 0));
    BarycenterConfig fit;
    fit.n_support = 1 + t % 7;
    fit.seed = t;
    const auto f = free_support_barycenter(data, fit);
    for (std::size_t k = 1; k < f.variance_trace.size(); ++k)
      worst_rise = std::max(worst_rise, f.variance_trace[k] - f.variance_trace[k - 1]);
  }
  o.require(worst_rise <= 1e-9, "variance trace increased");
  o.note << "fixed-point variance max " << worst_fixed << ", largest trace increase " << worst_rise;
  return o;
}

Outcome criterion9() {
  Outcome o;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> z;
  auto spd = [&] {
    Eigen::Matrix3d G;
    for (int i = 0; i < 9; ++i) G.data()[i] = z(rng);
    return Eigen::Matrix3d(G * G.transpose() + 0.05 * Eigen::Matrix3d::Identity());
  };
  double worst = 0;
  bool literal_exact = true;
  for (int t = 0; t < 100; ++t) {
    SpdFeature p{Eigen::Vector3d(z(rng), z(rng), z(rng)), spd()};
    SpdFeature q{Eigen::Vector3d(z(rng), z(rng), z(rng)), spd()};
    const double lambda = t == 0 ? 0.0 : t == 1 ? 1.0 : u(rng);
    const double emb = (embed_spd(p, lambda) - embed_spd(q, lambda)).norm();
    const double product = std::sqrt(lambda * lambda * (p.location - q.location).squaredNorm() +
                                     (1 - lambda) * (1 - lambda) * (p.matrix - q.matrix).squaredNorm());
    worst = std::max(worst, std::abs(emb - product));

    const Vector9d lit = embed_spd(p, lambda, false);
    const Eigen::Matrix3d& S = p.matrix;
    const double m = 1 - lambda;
    Vector9d expect;
    expect << lambda * p.location(0), lambda * p.location(1), lambda * p.location(2), m * S(0, 0),
        2 * (m * S(0, 1)), 2 * (m * S(0, 2)), m * S(1, 1), 2 * (m * S(1, 2)), m * S(2, 2);
    literal_exact = literal_exact && lit == expect;
  }
  o.require(worst <= 1e-12, "embedded distance differs from the product metric");
  o.require(literal_exact, "literal coefficients not bit-exact");
  o.note << "100 pairs, max distance err " << worst;
  return o;
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

Outcome criterion10() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "lotdecomp_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::mt19937_64 rng(10);
  io::Dataset ds;
  ds.kind = io::ElementKind::Network;
  for (int l = 0; l < 6; ++l) {
    auto mu = oracle::random_measure(6 + l % 3, 2, rng, true);
    ds.ids.push_back("e" + std::to_string(l));
    ds.groups.push_back(std::string(l < 3 ? "a" : "b"));
    ds.measures.push_back(mu);
    ds.networks.emplace_back(mu, oracle::euclidean_distances(mu.points()));
  }
  io::write_dataset(dir / "nets", ds);
  ds.kind = io::ElementKind::Measure;
  ds.networks.clear();
  io::write_dataset(dir / "meas", ds);
  const std::string nets = (dir / "nets" / "manifest.json").string();
  const std::string meas = (dir / "meas" / "manifest.json").string();

  const auto src = oracle::random_measure(5, 2, rng, true);
  std::ostringstream pts;
  pts << "w,x1,x2\n";
  for (Index i = 0; i < src.size(); ++i)
    pts << io::format_double(src.weights()(i)) << ',' << io::format_double(10 + 3 * src.points()(i, 0))
        << ',' << io::format_double(10 + 3 * src.points()(i, 1)) << '\n';
  write_text(dir / "planar.csv", pts.str());

  std::ostringstream spd;
  spd << "x1,x2,x3,s11,s12,s13,s22,s23,s33\n";
  for (int i = 0; i < 5; ++i) spd << i << ",1,2," << 2 + i << ",0.1,0.2,3,0.3," << 4 + i << '\n';
  write_text(dir / "spd.csv", spd.str());

  const std::string e0 = (dir / "nets" / "element_0.csv").string();
  const std::string e1 = (dir / "nets" / "element_1.csv").string();
  const std::string e0e = (dir / "nets" / "element_0_edges.csv").string();
  const std::string e1e = (dir / "nets" / "element_1_edges.csv").string();

  const std::vector<std::string> commands = {
      "--seed 3 barycenter --manifest " + meas + " --n 3",
      "--seed 3 --mode gw barycenter --manifest " + nets + " --n 3",
      "--seed 3 --mode fgw --alpha 0.5 barycenter --manifest " + nets + " --n 3",
      "--seed 4 embed --manifest " + meas + " --n 4",
      "--seed 4 --mode fgw --alpha 0.3 embed --manifest " + nets + " --n 3",
      "--seed 5 decompose --manifest " + meas + " --n 2",
      "--seed 5 --mode gw decompose --manifest " + nets + " --n 2",
      "--seed 5 decompose --source " + e0 + " --target " + e1,
      "--seed 5 --mode fgw --alpha 0.5 decompose --source " + e0 + " --target " + e1 +
          " --source-edges " + e0e + " --target-edges " + e1e,
      "--seed 6 curve --manifest " + meas + " --n-values 1,2,4",
      "--seed 6 --mode gw curve --manifest " + nets + " --n-values 1,3",
      "--seed 7 ftest --manifest " + meas + " --n 2 --permutations 20",
      "--seed 7 --threads 2 ftest --manifest " + meas + " --n 1 --permutations 20 --fast",
      "--seed 8 reconstruct --measure " + (dir / "planar.csv").string() + " --grid 28",
      "--seed 8 spd-embed --input " + (dir / "spd.csv").string() + " --lambda auto",
      "--seed 8 spd-embed --input " + (dir / "spd.csv").string() + " --lambda 0.25 --literal",
  };
  int identical = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::string outputs[2];
    bool ran = true;
    for (int run = 0; run < 2; ++run) {
      const fs::path report = dir / ("report_" + std::to_string(c) + "_" + std::to_string(run) + ".json");
      const std::string cmd = std::string(LOTDECOMP_CLI) + " --out " + report.string() + " " +
                              commands[c] + " > /dev/null 2> " + (dir / "stderr.txt").string();
      if (std::system(cmd.c_str()) != 0) {
        ran = false;
        o.require(false, "command failed: " + commands[c] + " (" + slurp(dir / "stderr.txt") + ")");
        break;
      }
      outputs[run] = slurp(report);
    }
    if (!ran) continue;
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
    o.require(same, "reports differ: " + commands[c]);
    identical += same;
  }
  o.note << identical << "/" << commands.size() << " commands byte-identical";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::function<Outcome()>, double>> criteria = {
      {criterion1, 10},  {criterion2, 60}, {criterion3, 60}, {criterion4, 60}, {criterion5, 120},
      {criterion6, 600}, {criterion7, 300}, {criterion8, 60}, {criterion9, 10}, {criterion10, 120},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[k].first();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    o.require(secs < criteria[k].second, "over the time budget");
    failed += !o.pass;
    std::printf("criterion %2d: %s  [%.1fs] %s\n", id, o.pass ? "PASS" : "FAIL", secs, o.note.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
