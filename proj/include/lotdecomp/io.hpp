#ifndef LOTDECOMP_IO_HPP
#define LOTDECOMP_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lotdecomp/measures.hpp"
#include "lotdecomp/stats.hpp"

namespace lotdecomp::io {

namespace fs = std::filesystem;

enum class ElementKind { Measure, Network };

struct ManifestElement {
  std::string id;
  ElementKind kind = ElementKind::Measure;
  // Relative paths are resolved against the manifest's directory.
  std::string path;
  std::optional<std::string> group;
  // Network elements: n x n edge matrix CSV.
  std::optional<std::string> edges_path;
  // "points" (w,x1..xd CSV) or "image" (grid of intensities).
  std::string format = "points";
};

struct DatasetManifest {
  int format_version = 1;
  Index ambient_dim = 0;
  bool normalize = false;
  std::vector<ManifestElement> elements;
};

struct Dataset {
  ElementKind kind = ElementKind::Measure;
  std::vector<std::string> ids;
  std::vector<std::optional<std::string>> groups;
  std::vector<EmpiricalMeasured> measures;
  // Filled for network datasets; measures then holds the node measures.
  std::vector<MeasureNetworkd> networks;

  std::size_t size() const { return ids.size(); }
};

DatasetManifest read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, const DatasetManifest& manifest);

Dataset parse_dataset(const fs::path& manifest_path);
// Writes one CSV (plus edges CSV for networks) per element into `dir` and a
// manifest next to them. Doubles are written in shortest round-trip form.
void write_dataset(const fs::path& dir, const Dataset& dataset, const std::string& manifest_name = "manifest.json");

EmpiricalMeasured read_measure_csv(const fs::path& path, MeasureOptions opts = {});
void write_measure_csv(const fs::path& path, const EmpiricalMeasured& measure);

Eigen::MatrixXd read_matrix_csv(const fs::path& path, bool has_header = false);
void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m);

// Grid of nonnegative intensities, one image row per line. Atoms are the
// nonzero pixels at (row, col) with weights proportional to intensity.
EmpiricalMeasured read_image_csv(const fs::path& path);

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

void write_curve_csv(const fs::path& path, const std::vector<VarianceDecomposition>& curve);

// Groups dataset elements by their manifest `group` label, in order of first
// appearance, pooling the atoms of each group into one uniform measure.
std::vector<EmpiricalMeasured> pool_groups(const Dataset& dataset, std::vector<std::string>* labels = nullptr);

}  // namespace lotdecomp::io

#endif  // LOTDECOMP_IO_HPP
