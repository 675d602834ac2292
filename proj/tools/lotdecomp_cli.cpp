// Command-line front end: dataset ingestion, barycenters, LOT embeddings,
// variance decompositions, F tests and the feature transforms.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "lotdecomp/barycenter.hpp"
#include "lotdecomp/features.hpp"
#include "lotdecomp/io.hpp"
#include "lotdecomp/lot.hpp"
#include "lotdecomp/parallel.hpp"
#include "lotdecomp/stats.hpp"

using namespace lotdecomp;
using nlohmann::json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string mode = "w";
  double alpha = 0.5;
  std::string out;
};

DistanceMode distance_mode(const Globals& g) {
  if (g.mode == "gw") return DistanceMode::gw();
  if (g.mode == "fgw") return DistanceMode::fgw(g.alpha);
  return DistanceMode::w();
}

bool uses_edges(const Globals& g) { return g.mode != "w"; }

json matrix_json(const MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

json vector_json(const VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json report_header(const std::string& command, const Globals& g) {
  return json{{"command", command},
              {"mode", g.mode},
              {"alpha", distance_mode(g).fused_alpha()},
              {"seed", g.seed}};
}

void emit(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::ParseError, path + ": cannot open for writing");
  out << text;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::SolverFailure:
    case ErrorKind::InstanceTooLarge:
      return 3;
    case ErrorKind::DegenerateDenominator:
    case ErrorKind::DegenerateTraces:
      return 4;
    default:
      return 2;
  }
}

io::Dataset load_dataset(const std::string& manifest, const Globals& g) {
  io::Dataset ds = io::parse_dataset(manifest);
  if (uses_edges(g) && ds.kind != io::ElementKind::Network)
    throw Error(ErrorKind::MissingEdges, "mode " + g.mode + " needs a network manifest");
  return ds;
}

struct FitOptions {
  Index n = 1;
  std::string init = "random";
  std::string init_points;
  std::string init_edges;
  int max_iters = 100;
  double tol = 1e-7;
  int fw_restarts = 5;
  int fw_iters = 200;

  void add(CLI::App* cmd) {
    cmd->add_option("--n", n, "number of barycenter support points")->check(CLI::PositiveNumber);
    cmd->add_option("--init", init, "barycenter initialization")
        ->check(CLI::IsMember({"random", "gaussian", "provided"}));
    cmd->add_option("--init-points", init_points, "measure CSV for --init provided");
    cmd->add_option("--init-edges", init_edges, "edge CSV for --init provided");
    cmd->add_option("--max-iters", max_iters, "outer iteration cap")->check(CLI::NonNegativeNumber);
    cmd->add_option("--tol", tol, "relative variance-decrease stop")->check(CLI::PositiveNumber);
    cmd->add_option("--fw-restarts", fw_restarts, "conditional-gradient starts (gw/fgw)");
    cmd->add_option("--fw-iters", fw_iters, "conditional-gradient iteration cap (gw/fgw)");
  }

  FgwParams fgw(const Globals& g) const {
    FgwParams p;
    p.alpha = distance_mode(g).fused_alpha();
    p.restarts = fw_restarts;
    p.max_iters = fw_iters;
    p.seed = g.seed;
    return p;
  }

  BarycenterConfig config(const Globals& g) const {
    BarycenterConfig cfg;
    cfg.n_support = n;
    cfg.max_outer_iters = max_iters;
    cfg.tol = tol;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.fgw = fgw(g);
    if (uses_edges(g)) cfg.alpha = distance_mode(g).fused_alpha();
    if (init == "gaussian") cfg.init = BarycenterInit::SeededGaussian;
    if (init == "provided") {
      if (init_points.empty())
        throw Error(ErrorKind::InvalidArgument, "--init provided needs --init-points");
      cfg.init = BarycenterInit::Provided;
      cfg.initial_points = io::read_measure_csv(init_points).points();
      cfg.n_support = cfg.initial_points->rows();
      if (!init_edges.empty()) cfg.initial_edges = io::read_matrix_csv(init_edges);
    }
    return cfg;
  }

  BarycenterResult fit(const io::Dataset& ds, const Globals& g) const {
    if (uses_edges(g)) return free_support_fgw_barycenter(ds.networks, config(g));
    return free_support_barycenter(ds.measures, config(g));
  }
};

json barycenter_json(const BarycenterResult& fit) {
  json j{{"weights", vector_json(fit.barycenter.weights())},
         {"points", matrix_json(fit.barycenter.points())}};
  if (fit.edges) j["edges"] = matrix_json(*fit.edges);
  return j;
}

json decomposition_json(const DecompositionReport<double>& r) {
  json j{{"total", r.total},
         {"deterministic", r.deterministic},
         {"probabilistic", r.probabilistic},
         {"percent", r.percent_explained},
         {"certified", r.coupling_certified_optimal}};
  if (r.diam2_target) j["diam2_target"] = *r.diam2_target;
  if (r.diam2_projection) j["diam2_projection"] = *r.diam2_projection;
  return j;
}

VarianceDecomposition decompose_dataset(const io::Dataset& ds, const BarycenterResult& fit,
                                        const Globals& g) {
  if (uses_edges(g)) return variance_decomposition(ds.networks, fit, distance_mode(g));
  return variance_decomposition(ds.measures, fit);
}

// Single-pair inputs for `decompose`.
struct PairInputs {
  std::string source, target, source_edges, target_edges;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear optimal transport embeddings and variance decompositions"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
  app.add_option("--mode", g.mode, "distance")->check(CLI::IsMember({"w", "gw", "fgw"}));
  app.add_option("--alpha", g.alpha, "fgw weight on the node term")->check(CLI::Range(0.0, 1.0));
  app.add_option("--out", g.out, "report JSON path (default stdout)");

  // barycenter
  auto* bary = app.add_subcommand("barycenter", "fit a free-support barycenter");
  std::string manifest;
  std::string points_out, edges_out;
  FitOptions fit_opts;
  bary->add_option("--manifest", manifest, "dataset manifest JSON")->required();
  fit_opts.add(bary);
  bary->add_option("--points-out", points_out, "write the barycenter as a measure CSV");
  bary->add_option("--edges-out", edges_out, "write the barycenter edge matrix CSV");

  // embed
  auto* embed = app.add_subcommand("embed", "LOT embedding of every dataset element");
  std::string bary_points, bary_edges, embedding_out;
  bool plain_edges = false;
  embed->add_option("--manifest", manifest, "dataset manifest JSON")->required();
  fit_opts.add(embed);
  embed->add_option("--barycenter", bary_points, "template measure CSV (fit one when absent)");
  embed->add_option("--barycenter-edges", bary_edges, "template edge CSV");
  embed->add_option("--embedding-out", embedding_out, "write embeddings as CSV");
  embed->add_flag("--plain-edges", plain_edges, "vectorize triu(C) instead of triu(2C - diag C)");

  // decompose
  auto* decomp = app.add_subcommand("decompose", "deterministic/probabilistic split");
  PairInputs pair;
  decomp->add_option("--manifest", manifest, "dataset manifest JSON (dataset mode)");
  fit_opts.add(decomp);
  decomp->add_option("--source", pair.source, "source measure CSV (pair mode)");
  decomp->add_option("--target", pair.target, "target measure CSV (pair mode)");
  decomp->add_option("--source-edges", pair.source_edges, "source edge CSV");
  decomp->add_option("--target-edges", pair.target_edges, "target edge CSV");

  // curve
  auto* curve = app.add_subcommand("curve", "decomposition as a function of support size");
  std::vector<Index> n_values;
  std::string csv_out;
  curve->add_option("--manifest", manifest, "dataset manifest JSON")->required();
  fit_opts.add(curve);
  curve->add_option("--n-values", n_values, "support sizes")->required()->delimiter(',');
  curve->add_option("--csv", csv_out, "write the curve CSV");

  // ftest
  auto* ftest = app.add_subcommand("ftest", "permutation F test of n-support projections");
  int permutations = 250;
  bool fast = false, weighted = false;
  ftest->add_option("--manifest", manifest, "dataset manifest JSON; one group per element or per group label")
      ->required();
  fit_opts.add(ftest);
  ftest->add_option("--permutations", permutations, "permutation replicates")->check(CLI::PositiveNumber);
  ftest->add_flag("--fast", fast, "reuse the observed barycenter for every replicate (approximate)");
  ftest->add_flag("--weighted", weighted, "weight numerator terms by group size");

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "Gaussian-kernel image of a planar measure");
  std::string measure_path, image_path, image_out;
  Index grid_side = 28;
  double bandwidth = 1.0;
  recon->add_option("--measure", measure_path, "measure CSV");
  recon->add_option("--image", image_path, "intensity grid CSV");
  recon->add_option("--grid", grid_side, "grid side length")->check(CLI::PositiveNumber);
  recon->add_option("--bandwidth", bandwidth, "kernel standard deviation (1 = identity covariance)")
      ->check(CLI::PositiveNumber);
  recon->add_option("--image-out", image_out, "write the reconstruction CSV");

  // spd-embed
  auto* spd = app.add_subcommand("spd-embed", "embed (location, SPD matrix) features in R^9");
  std::string spd_input, spd_out;
  std::string lambda_arg = "0.5";
  bool literal_coeffs = false, project = false;
  double eps = 1e-8;
  spd->add_option("--input", spd_input, "CSV with header x1,x2,x3,s11,s12,s13,s22,s23,s33")->required();
  spd->add_option("--lambda", lambda_arg, "location weight in [0,1], or 'auto' for the balancing value");
  spd->add_flag("--literal", literal_coeffs, "off-diagonal coefficient 2 instead of sqrt(2)");
  spd->add_flag("--project", project, "clamp eigenvalues below --eps before embedding");
  spd->add_option("--eps", eps, "eigenvalue floor for --project")->check(CLI::PositiveNumber);
  spd->add_option("--embedding-out", spd_out, "write embeddings as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*bary) {
      const io::Dataset ds = load_dataset(manifest, g);
      const BarycenterResult fit = fit_opts.fit(ds, g);
      json j = report_header("barycenter", g);
      j["n_support"] = fit.barycenter.size();
      j["iterations"] = fit.iterations;
      j["variance"] = fit.variance_trace.back();
      j["variance_trace"] = fit.variance_trace;
      j["barycenter"] = barycenter_json(fit);
      if (!points_out.empty()) io::write_measure_csv(points_out, fit.barycenter);
      if (!edges_out.empty()) {
        if (!fit.edges) throw Error(ErrorKind::MissingEdges, "mode w has no barycenter edges");
        io::write_matrix_csv(edges_out, *fit.edges);
      }
      emit(j, g.out);
    } else if (*embed) {
      const io::Dataset ds = load_dataset(manifest, g);
      std::optional<MeasureNetworkd> tmpl_net;
      std::optional<EmpiricalMeasured> tmpl;
      if (!bary_points.empty()) {
        tmpl = io::read_measure_csv(bary_points);
        if (uses_edges(g)) {
          if (bary_edges.empty()) throw Error(ErrorKind::MissingEdges, "--barycenter-edges is required");
          tmpl_net.emplace(*tmpl, io::read_matrix_csv(bary_edges));
        }
      } else {
        const BarycenterResult fit = fit_opts.fit(ds, g);
        tmpl = fit.barycenter;
        if (fit.edges) tmpl_net = fit.network();
      }
      const DistanceMode mode = distance_mode(g);
      const double alpha = mode.fused_alpha();
      const FgwParams params = fit_opts.fgw(g);
      const auto vec_mode = plain_edges ? EdgeVectorization::Plain : EdgeVectorization::Doubled;
      std::vector<VectorXd> rows(ds.size());
      parallel_for(ds.size(), g.threads, [&](std::size_t l) {
        if (!uses_edges(g)) {
          const auto gamma = solve_w2(*tmpl, ds.measures[l]).coupling;
          rows[l] = vectorize_embedding(project_w(gamma, *tmpl, ds.measures[l]), 0.0, vec_mode);
          return;
        }
        bool certified = false;
        const auto gamma = detail::fused_coupling(*tmpl_net, ds.networks[l], alpha, params, certified);
        // The structure block is weighted by 1 - alpha.
        const auto proj = alpha == 0.0 ? project_gw(gamma, *tmpl_net, ds.networks[l])
                                       : project_fgw(gamma, *tmpl_net, ds.networks[l]);
        rows[l] = vectorize_embedding(proj, 1.0 - alpha, vec_mode);
      });
      json j = report_header("embed", g);
      j["n_support"] = tmpl->size();
      j["dimension"] = rows.empty() ? 0 : rows.front().size();
      j["ids"] = ds.ids;
      json emb = json::array();
      for (const auto& r : rows) emb.push_back(vector_json(r));
      j["embeddings"] = std::move(emb);
      if (!embedding_out.empty()) {
        MatrixXd M(static_cast<Index>(rows.size()), rows.empty() ? 0 : rows.front().size());
        for (std::size_t l = 0; l < rows.size(); ++l) M.row(static_cast<Index>(l)) = rows[l].transpose();
        io::write_matrix_csv(embedding_out, M);
      }
      emit(j, g.out);
    } else if (*decomp) {
      json j = report_header("decompose", g);
      if (!manifest.empty()) {
        const io::Dataset ds = load_dataset(manifest, g);
        const BarycenterResult fit = fit_opts.fit(ds, g);
        const VarianceDecomposition v = decompose_dataset(ds, fit, g);
        bool certified = true;
        json per = json::array();
        for (const auto& r : v.per_element) {
          certified = certified && r.coupling_certified_optimal;
          per.push_back(decomposition_json(r));
        }
        j["n_support"] = v.n_support;
        j["total"] = v.total;
        j["deterministic"] = v.deterministic;
        j["probabilistic"] = v.probabilistic;
        j["percent"] = v.percent;
        j["certified"] = certified;
        j["ids"] = ds.ids;
        j["per_element"] = std::move(per);
      } else {
        if (pair.source.empty() || pair.target.empty())
          throw Error(ErrorKind::InvalidArgument, "decompose needs --manifest or --source and --target");
        const EmpiricalMeasured nu = io::read_measure_csv(pair.source);
        const EmpiricalMeasured mu = io::read_measure_csv(pair.target);
        DecompositionReport<double> r;
        if (!uses_edges(g)) {
          r = decompose_w2(nu, mu);
        } else {
          if (pair.source_edges.empty() || pair.target_edges.empty())
            throw Error(ErrorKind::MissingEdges, "mode " + g.mode + " needs --source-edges and --target-edges");
          const MeasureNetworkd X(nu, io::read_matrix_csv(pair.source_edges));
          const MeasureNetworkd Y(mu, io::read_matrix_csv(pair.target_edges));
          r = decompose_fgw(X, Y, distance_mode(g).fused_alpha(), std::optional<Couplingd>{}, false,
                            fit_opts.fgw(g));
        }
        json d = decomposition_json(r);
        j["n_support"] = nu.size();
        j.update(d);
      }
      emit(j, g.out);
    } else if (*curve) {
      const io::Dataset ds = load_dataset(manifest, g);
      BarycenterConfig cfg = fit_opts.config(g);
      const auto points = uses_edges(g) ? variance_curve(ds.networks, n_values, distance_mode(g), cfg)
                                        : variance_curve(ds.measures, n_values, cfg);
      json j = report_header("curve", g);
      json rows = json::array();
      for (const auto& v : points)
        rows.push_back({{"n", v.n_support},
                        {"total", v.total},
                        {"deterministic", v.deterministic},
                        {"probabilistic", v.probabilistic},
                        {"percent", v.percent}});
      j["curve"] = std::move(rows);
      if (!csv_out.empty()) io::write_curve_csv(csv_out, points);
      emit(j, g.out);
    } else if (*ftest) {
      if (g.mode != "w") throw Error(ErrorKind::InvalidArgument, "ftest supports --mode w only");
      const io::Dataset ds = load_dataset(manifest, g);
      std::vector<std::string> labels;
      const auto groups = io::pool_groups(ds, &labels);
      BarycenterConfig cfg = fit_opts.config(g);
      cfg.threads = 1;
      PermutationOptions opts;
      opts.fast = fast;
      opts.weighted_numerator = weighted;
      opts.threads = g.threads;
      const FTestResult r = permutation_test(groups, cfg.n_support, permutations, g.seed, cfg, opts);
      json j = report_header("ftest", g);
      j["groups"] = labels;
      j["n_support"] = r.n_support;
      j["statistic"] = r.statistic;
      j["prefactor"] = r.prefactor;
      j["p_value"] = r.p_value;
      j["permutations"] = r.permutations;
      j["approximate"] = r.approximate;
      j["weighted_numerator"] = weighted;
      j["permuted_stats"] = r.permuted_stats;
      emit(j, g.out);
    } else if (*recon) {
      if (measure_path.empty() == image_path.empty())
        throw Error(ErrorKind::InvalidArgument, "give exactly one of --measure and --image");
      const EmpiricalMeasured mu =
          measure_path.empty() ? io::read_image_csv(image_path) : io::read_measure_csv(measure_path);
      const MatrixXd A = kernel_reconstruct(mu, grid_side, bandwidth);
      Index r = 0, c = 0;
      A.maxCoeff(&r, &c);
      json j = report_header("reconstruct", g);
      j["grid_side"] = grid_side;
      j["bandwidth"] = bandwidth;
      j["argmax"] = {r, c};
      j["image"] = matrix_json(A);
      if (!image_out.empty()) io::write_matrix_csv(image_out, A);
      emit(j, g.out);
    } else if (*spd) {
      // First line is the column header.
      const MatrixXd raw = io::read_matrix_csv(spd_input, true);
      if (raw.cols() != 9)
        throw Error(ErrorKind::ParseError, spd_input + ": expected 9 columns, found " + std::to_string(raw.cols()));
      std::vector<SpdFeature> features(static_cast<std::size_t>(raw.rows()));
      for (Index i = 0; i < raw.rows(); ++i) {
        SpdFeature& f = features[static_cast<std::size_t>(i)];
        f.location = raw.row(i).head<3>().transpose();
        const auto s = raw.row(i).tail<6>();
        f.matrix << s(0), s(1), s(2), s(1), s(3), s(4), s(2), s(4), s(5);
        if (project) f.matrix = project_spd(f.matrix, eps);
      }
      const bool isometric = !literal_coeffs;
      std::optional<double> lambda_star;
      double lambda = 0;
      if (lambda_arg == "auto") {
        MatrixXd Z0(raw.rows(), 9), Z1(raw.rows(), 9);
        for (Index i = 0; i < raw.rows(); ++i) {
          Z0.row(i) = embed_spd(features[static_cast<std::size_t>(i)], 0.0, isometric).transpose();
          Z1.row(i) = embed_spd(features[static_cast<std::size_t>(i)], 1.0, isometric).transpose();
        }
        lambda_star = compute_lambda_star(Z0, Z1);
        lambda = *lambda_star;
      } else {
        try {
          std::size_t used = 0;
          lambda = std::stod(lambda_arg, &used);
          if (used != lambda_arg.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
          throw Error(ErrorKind::InvalidArgument, "--lambda must be a number or 'auto'");
        }
      }
      MatrixXd E(raw.rows(), 9);
      for (Index i = 0; i < raw.rows(); ++i)
        E.row(i) = embed_spd(features[static_cast<std::size_t>(i)], lambda, isometric).transpose();
      json j = report_header("spd-embed", g);
      j["lambda"] = lambda;
      if (lambda_star) j["lambda_star"] = *lambda_star;
      j["isometric"] = isometric;
      j["embeddings"] = matrix_json(E);
      if (!spd_out.empty()) io::write_matrix_csv(spd_out, E);
      emit(j, g.out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
