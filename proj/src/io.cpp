#include "lotdecomp/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace lotdecomp::io {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const fs::path& file, std::size_t line, const std::string& msg) {
  std::string where = file.string();
  if (line > 0) where += ":" + std::to_string(line);
  throw Error(ErrorKind::ParseError, where + ": " + msg);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view field, const fs::path& file, std::size_t line) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    parse_fail(file, line, "not a number: '" + std::string(field) + "'");
  return v;
}

struct Table {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;
};

// Reads comma-separated numeric rows, skipping blank lines. With a header,
// the first non-blank line is returned separately.
Table read_table(const fs::path& path, std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) parse_fail(path, 0, "cannot open file");
  Table t;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  bool need_header = header != nullptr;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split_commas(view);
    if (need_header) {
      for (auto f : fields) header->emplace_back(f);
      width = fields.size();
      need_header = false;
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      parse_fail(path, lineno,
                 "expected " + std::to_string(width) + " columns, found " + std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_double(f, path, lineno));
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(lineno);
  }
  if (need_header) parse_fail(path, 0, "missing header line");
  return t;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::ParseError, path.string() + ": cannot open for writing");
  return out;
}

ElementKind parse_kind(const std::string& s, const fs::path& file) {
  if (s == "measure") return ElementKind::Measure;
  if (s == "network") return ElementKind::Network;
  parse_fail(file, 0, "unknown element kind '" + s + "'");
}

std::string kind_name(ElementKind k) { return k == ElementKind::Measure ? "measure" : "network"; }

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path q(p);
  return q.is_absolute() ? q : base / q;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(ErrorKind::InvalidArgument, "cannot format number");
  return std::string(buf, ptr);
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail(path, 0, "cannot open manifest");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    parse_fail(path, 0, e.what());
  }

  DatasetManifest m;
  try {
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != 1)
      parse_fail(path, 0, "unsupported format_version " + std::to_string(m.format_version));
    m.ambient_dim = j.at("ambient_dim").get<Index>();
    m.normalize = j.value("normalize", false);
    std::set<std::string> seen;
    for (const auto& e : j.at("elements")) {
      ManifestElement el;
      el.id = e.at("id").get<std::string>();
      el.kind = parse_kind(e.at("kind").get<std::string>(), path);
      el.path = e.at("path").get<std::string>();
      if (e.contains("group") && !e["group"].is_null()) el.group = e["group"].get<std::string>();
      if (e.contains("edges_path")) el.edges_path = e["edges_path"].get<std::string>();
      el.format = e.value("format", std::string("points"));
      if (el.format != "points" && el.format != "image")
        parse_fail(path, 0, "element '" + el.id + "': unknown format '" + el.format + "'");
      if (!seen.insert(el.id).second) parse_fail(path, 0, "duplicate element id '" + el.id + "'");
      if (el.kind == ElementKind::Network && !el.edges_path)
        parse_fail(path, 0, "network element '" + el.id + "' has no edges_path");
      m.elements.push_back(std::move(el));
    }
  } catch (const json::exception& e) {
    parse_fail(path, 0, e.what());
  }
  if (m.elements.empty()) parse_fail(path, 0, "manifest lists no elements");
  for (const auto& el : m.elements)
    if (el.kind != m.elements.front().kind)
      parse_fail(path, 0, "manifest mixes measure and network elements");
  return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  json j;
  j["format_version"] = manifest.format_version;
  j["ambient_dim"] = manifest.ambient_dim;
  j["normalize"] = manifest.normalize;
  j["elements"] = json::array();
  for (const auto& el : manifest.elements) {
    json e{{"id", el.id}, {"kind", kind_name(el.kind)}, {"path", el.path}};
    if (el.group) e["group"] = *el.group;
    if (el.edges_path) e["edges_path"] = *el.edges_path;
    if (el.format != "points") e["format"] = el.format;
    j["elements"].push_back(std::move(e));
  }
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

EmpiricalMeasured read_measure_csv(const fs::path& path, MeasureOptions opts) {
  std::vector<std::string> header;
  const Table t = read_table(path, &header);
  if (header.size() < 2 || header.front() != "w")
    parse_fail(path, 1, "header must be w,x1,...,xd");
  if (t.rows.empty()) parse_fail(path, 0, "measure has no atoms");
  if (t.rows.front().size() != header.size())
    parse_fail(path, t.line_numbers.front(), "row width does not match the header");
  const Index n = static_cast<Index>(t.rows.size());
  const Index d = static_cast<Index>(header.size()) - 1;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd X(n, d);
  for (Index i = 0; i < n; ++i) {
    w(i) = t.rows[i][0];
    for (Index c = 0; c < d; ++c) X(i, c) = t.rows[i][c + 1];
  }
  try {
    return EmpiricalMeasured(std::move(w), std::move(X), opts);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_measure_csv(const fs::path& path, const EmpiricalMeasured& measure) {
  auto out = open_out(path);
  out << "w";
  for (Index c = 0; c < measure.dim(); ++c) out << ",x" << (c + 1);
  out << '\n';
  for (Index i = 0; i < measure.size(); ++i) {
    out << format_double(measure.weights()(i));
    for (Index c = 0; c < measure.dim(); ++c) out << ',' << format_double(measure.points()(i, c));
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path, bool has_header) {
  std::vector<std::string> header;
  const Table t = read_table(path, has_header ? &header : nullptr);
  if (t.rows.empty()) parse_fail(path, 0, "matrix is empty");
  Eigen::MatrixXd M(static_cast<Index>(t.rows.size()), static_cast<Index>(t.rows.front().size()));
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) M(i, j) = t.rows[i][j];
  return M;
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

EmpiricalMeasured read_image_csv(const fs::path& path) {
  const Table t = read_table(path, nullptr);
  if (t.rows.empty()) parse_fail(path, 0, "image is empty");
  std::vector<double> w;
  std::vector<std::pair<double, double>> px;
  double total = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
      const double v = t.rows[r][c];
      if (!(v >= 0.0) || !std::isfinite(v))
        parse_fail(path, t.line_numbers[r], "intensity must be finite and nonnegative");
      if (v > 0.0) {
        w.push_back(v);
        px.emplace_back(static_cast<double>(r), static_cast<double>(c));
        total += v;
      }
    }
  if (w.empty()) parse_fail(path, 0, "image has no nonzero pixels");
  const Index n = static_cast<Index>(w.size());
  Eigen::VectorXd weights(n);
  Eigen::MatrixXd X(n, 2);
  for (Index i = 0; i < n; ++i) {
    weights(i) = w[i] / total;
    X(i, 0) = px[i].first;
    X(i, 1) = px[i].second;
  }
  return EmpiricalMeasured(std::move(weights), std::move(X), {.renormalize = true});
}

Dataset parse_dataset(const fs::path& manifest_path) {
  const DatasetManifest m = read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  const MeasureOptions opts{.renormalize = m.normalize};
  Dataset ds;
  ds.kind = m.elements.front().kind;
  for (const auto& el : m.elements) {
    const fs::path p = resolve(base, el.path);
    EmpiricalMeasured mu = el.format == "image" ? read_image_csv(p) : read_measure_csv(p, opts);
    if (mu.dim() != m.ambient_dim)
      throw Error(ErrorKind::DimensionMismatch,
                  p.string() + ": points have dimension " + std::to_string(mu.dim()) +
                      ", manifest says " + std::to_string(m.ambient_dim));
    if (el.kind == ElementKind::Network) {
      const fs::path ep = resolve(base, *el.edges_path);
      Eigen::MatrixXd E = read_matrix_csv(ep);
      try {
        ds.networks.emplace_back(mu, std::move(E));
      } catch (const Error& e) {
        throw Error(e.kind(), ep.string() + ": " + e.what());
      }
    }
    ds.measures.push_back(std::move(mu));
    ds.ids.push_back(el.id);
    ds.groups.push_back(el.group);
  }
  return ds;
}

void write_dataset(const fs::path& dir, const Dataset& dataset, const std::string& manifest_name) {
  fs::create_directories(dir);
  DatasetManifest m;
  m.ambient_dim = dataset.measures.empty() ? 0 : dataset.measures.front().dim();
  for (std::size_t l = 0; l < dataset.size(); ++l) {
    ManifestElement el;
    el.id = dataset.ids[l];
    el.kind = dataset.kind;
    el.group = dataset.groups[l];
    el.path = "element_" + std::to_string(l) + ".csv";
    write_measure_csv(dir / el.path, dataset.measures[l]);
    if (dataset.kind == ElementKind::Network) {
      el.edges_path = "element_" + std::to_string(l) + "_edges.csv";
      write_matrix_csv(dir / *el.edges_path, dataset.networks[l].edges());
    }
    m.elements.push_back(std::move(el));
  }
  write_manifest(dir / manifest_name, m);
}

void write_curve_csv(const fs::path& path, const std::vector<VarianceDecomposition>& curve) {
  auto out = open_out(path);
  out << "n,total,deterministic,probabilistic,percent\n";
  for (const auto& v : curve)
    out << v.n_support << ',' << format_double(v.total) << ',' << format_double(v.deterministic) << ','
        << format_double(v.probabilistic) << ',' << format_double(v.percent) << '\n';
}

std::vector<EmpiricalMeasured> pool_groups(const Dataset& dataset, std::vector<std::string>* labels) {
  bool any_label = false;
  for (const auto& g : dataset.groups) any_label = any_label || g.has_value();
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t l = 0; l < dataset.size(); ++l) {
    const std::string key = any_label ? dataset.groups[l].value_or("") : dataset.ids[l];
    if (!members.count(key)) order.push_back(key);
    members[key].push_back(l);
  }
  std::vector<EmpiricalMeasured> out;
  for (const auto& key : order) {
    const auto& idx = members[key];
    Index n = 0;
    for (auto l : idx) n += dataset.measures[l].size();
    const Index d = dataset.measures[idx.front()].dim();
    Eigen::VectorXd w(n);
    Eigen::MatrixXd X(n, d);
    Index r = 0;
    for (auto l : idx) {
      const auto& mu = dataset.measures[l];
      if (mu.dim() != d) throw Error(ErrorKind::DimensionMismatch, "group members differ in dimension");
      w.segment(r, mu.size()) = mu.weights() / static_cast<double>(idx.size());
      X.middleRows(r, mu.size()) = mu.points();
      r += mu.size();
    }
    out.emplace_back(std::move(w), std::move(X), MeasureOptions{.renormalize = true});
  }
  if (labels) *labels = order;
  return out;
}

}  // namespace lotdecomp::io
