#pragma once

// Synthetic datasets, clustering metrics and CSV I/O.

#include "simclust/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace simclust::bench {

enum class GeneratorKind { blobs, two_scale_overlap, rings };

const char* to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(const std::string& name);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::blobs;
  std::vector<int> n{50, 50};  // points per cluster

  // blobs: one center and standard deviation per cluster.
  std::vector<std::vector<double>> centers{{0.0, 0.0}, {10.0, 0.0}};
  std::vector<double> scales{1.0, 1.0};

  // two_scale_overlap: sparse grid spacing and column count (0 = square),
  // density ratio, jitter as a fraction of the local spacing. The dense
  // square patch sits at the centroid of the sparse grid.
  double spacing = 1.0;
  double ratio = 8.0;
  int columns = 0;

  // rings: one radius per ring.
  std::vector<double> radii{1.0, 3.0};

  double noise = 0.0;
  std::uint64_t seed = 0;
};

/// Truth labels are 1-based in cluster order. Throws Error(parameter) on an
/// invalid spec.
PointSet generate(const GeneratorSpec& spec);

struct MetricReport {
  double accuracy = 0.0;
  double ari = 0.0;
  std::vector<int> pred_classes;   // distinct predicted labels, ascending
  std::vector<int> truth_classes;  // distinct truth labels, ascending
  std::vector<std::vector<std::size_t>> confusion;  // [pred][truth]
};

/// Best fraction of agreeing labels over one-to-one matchings of predicted
/// to true label names (exhaustive up to 4 names, Hungarian above).
double best_perm_accuracy(const Labeling& pred, const Labeling& truth);

double adjusted_rand(const Labeling& pred, const Labeling& truth);

MetricReport evaluate(const Labeling& pred, const Labeling& truth);

/// Header x0,...,x{d-1}[,label]; 17 significant digits.
void write_csv(const PointSet& points, const std::filesystem::path& path);
std::string to_csv(const PointSet& points);

/// Throws Error(parse) with a line number on malformed content and
/// Error(input) on an empty point set.
PointSet read_csv(const std::filesystem::path& path);
PointSet parse_csv(const std::string& text);

/// A named dataset of the frozen manifest: the spec for run r uses seed
/// base_seed + r.
struct ManifestEntry {
  std::string name;
  std::string description;
  GeneratorSpec spec;
  int runs = 20;

  GeneratorSpec spec_for_run(int r) const;
};

struct Manifest {
  int version = 0;
  std::map<std::string, ManifestEntry> datasets;

  const ManifestEntry& at(const std::string& name) const;
};

Manifest load_manifest(const std::filesystem::path& path);

/// data/manifest.json inside the source tree.
std::filesystem::path default_manifest_path();

}  // namespace simclust::bench
