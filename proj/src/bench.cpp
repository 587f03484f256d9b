#include "simclust/bench.hpp"

#include "simclust/error.hpp"
#include "simclust/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>

namespace simclust::bench {
namespace {

PointSet to_points(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
  PointSet out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size());
  out.coords.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      out.coords(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
  }
  out.labels = labels;
  return out;
}

void check_counts(const GeneratorSpec& spec, std::size_t clusters) {
  if (spec.n.empty()) fail(ErrorKind::parameter, "generator needs at least one cluster");
  if (spec.n.size() != clusters) {
    fail(ErrorKind::parameter, "generator needs one point count per cluster");
  }
  for (int n : spec.n) {
    if (n < 1) fail(ErrorKind::parameter, "every cluster needs at least one point");
  }
  if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) {
    fail(ErrorKind::parameter, "noise must be finite and non-negative");
  }
}

int square_side(int n) { return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))); }

// n points on a jittered grid with `side` columns, centered at c.
void jittered_grid(int n, int side, double spacing, double jitter, std::array<double, 2> c,
                   int label, Rng& rng, std::vector<std::vector<double>>& rows,
                   std::vector<int>& labels) {
  const int height = (n + side - 1) / side;
  const double x0 = c[0] - 0.5 * (side - 1) * spacing;
  const double y0 = c[1] - 0.5 * (height - 1) * spacing;
  for (int p = 0; p < n; ++p) {
    const double jx = jitter * (rng.uniform() - 0.5);
    const double jy = jitter * (rng.uniform() - 0.5);
    rows.push_back({x0 + (p % side + jx) * spacing, y0 + (p / side + jy) * spacing});
    labels.push_back(label);
  }
}

PointSet generate_blobs(const GeneratorSpec& spec, Rng& rng) {
  check_counts(spec, spec.centers.size());
  if (spec.scales.size() != spec.centers.size()) {
    fail(ErrorKind::parameter, "blobs need one scale per center");
  }
  const std::size_t d = spec.centers.front().size();
  if (d == 0) fail(ErrorKind::parameter, "blob centers need at least one coordinate");
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t c = 0; c < spec.centers.size(); ++c) {
    if (spec.centers[c].size() != d) fail(ErrorKind::parameter, "blob centers differ in dimension");
    if (!(spec.scales[c] >= 0.0)) fail(ErrorKind::parameter, "blob scales must be non-negative");
    for (int p = 0; p < spec.n[c]; ++p) {
      std::vector<double> x(d);
      for (std::size_t k = 0; k < d; ++k) x[k] = spec.centers[c][k] + spec.scales[c] * rng.normal();
      rows.push_back(std::move(x));
      labels.push_back(static_cast<int>(c + 1));
    }
  }
  return to_points(rows, labels);
}

PointSet generate_two_scale(const GeneratorSpec& spec, Rng& rng) {
  check_counts(spec, 2);
  if (!(spec.ratio > 1.0) || !std::isfinite(spec.ratio)) {
    fail(ErrorKind::parameter, "two_scale_overlap needs a density ratio > 1");
  }
  if (!(spec.spacing > 0.0)) fail(ErrorKind::parameter, "spacing must be positive");
  if (spec.noise >= 1.0) fail(ErrorKind::parameter, "grid jitter must be below 1");
  if (spec.columns < 0) fail(ErrorKind::parameter, "columns must be non-negative");
  const double dense = spec.spacing / spec.ratio;
  const int sparse_cols = spec.columns > 0 ? spec.columns : square_side(spec.n[0]);
  const int sparse_rows = (spec.n[0] + sparse_cols - 1) / sparse_cols;
  const int dense_side = square_side(spec.n[1]);
  const double extent = (dense_side - 1) * dense;
  if (extent >= (std::min(sparse_cols, sparse_rows) - 1) * spec.spacing) {
    fail(ErrorKind::parameter, "dense patch does not fit inside the sparse cluster");
  }
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  jittered_grid(spec.n[0], sparse_cols, spec.spacing, spec.noise, {0.0, 0.0}, 1, rng, rows,
                labels);
  jittered_grid(spec.n[1], dense_side, dense, spec.noise, {0.0, 0.0}, 2, rng, rows, labels);
  return to_points(rows, labels);
}

PointSet generate_rings(const GeneratorSpec& spec, Rng& rng) {
  check_counts(spec, spec.radii.size());
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t c = 0; c < spec.radii.size(); ++c) {
    if (!(spec.radii[c] > 0.0)) fail(ErrorKind::parameter, "ring radii must be positive");
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    for (int p = 0; p < spec.n[c]; ++p) {
      const double theta = phase + 2.0 * std::numbers::pi * p / spec.n[c];
      const double r = spec.radii[c] + spec.noise * rng.normal();
      rows.push_back({r * std::cos(theta), r * std::sin(theta)});
      labels.push_back(static_cast<int>(c + 1));
    }
  }
  return to_points(rows, labels);
}

std::vector<int> distinct(const Labeling& x) {
  std::vector<int> out(x.begin(), x.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t index_of(const std::vector<int>& sorted, int v) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
}

std::vector<std::vector<std::size_t>> contingency(const Labeling& pred, const Labeling& truth,
                                                  const std::vector<int>& pc,
                                                  const std::vector<int>& tc) {
  std::vector<std::vector<std::size_t>> table(pc.size(), std::vector<std::size_t>(tc.size(), 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++table[index_of(pc, pred[i])][index_of(tc, truth[i])];
  }
  return table;
}

void check_lengths(const Labeling& pred, const Labeling& truth) {
  if (pred.size() != truth.size()) {
    fail(ErrorKind::input, "label vectors differ in length (" + std::to_string(pred.size()) +
                               " vs " + std::to_string(truth.size()) + ")");
  }
  if (pred.empty()) fail(ErrorKind::input, "label vectors are empty");
}

// Maximum-weight perfect matching on a square matrix (Hungarian method on
// the negated costs).
double hungarian_max(const std::vector<std::vector<double>>& gain) {
  const std::size_t n = gain.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -gain[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += gain[p[j] - 1][j - 1];
  return total;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

const char* to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::blobs: return "blobs";
    case GeneratorKind::two_scale_overlap: return "two_scale_overlap";
    case GeneratorKind::rings: return "rings";
  }
  return "blobs";
}

GeneratorKind parse_generator_kind(const std::string& name) {
  if (name == "blobs") return GeneratorKind::blobs;
  if (name == "two_scale_overlap") return GeneratorKind::two_scale_overlap;
  if (name == "rings") return GeneratorKind::rings;
  fail(ErrorKind::parameter, "unknown generator kind '" + name + "'");
}

PointSet generate(const GeneratorSpec& spec) {
  Rng rng(spec.seed);
  switch (spec.kind) {
    case GeneratorKind::blobs: return generate_blobs(spec, rng);
    case GeneratorKind::two_scale_overlap: return generate_two_scale(spec, rng);
    case GeneratorKind::rings: return generate_rings(spec, rng);
  }
  fail(ErrorKind::parameter, "unknown generator kind");
}

double best_perm_accuracy(const Labeling& pred, const Labeling& truth) {
  check_lengths(pred, truth);
  const auto pc = distinct(pred);
  const auto tc = distinct(truth);
  const auto table = contingency(pred, truth, pc, tc);
  const std::size_t k = std::max(pc.size(), tc.size());
  std::vector<std::vector<double>> gain(k, std::vector<double>(k, 0.0));
  for (std::size_t a = 0; a < pc.size(); ++a) {
    for (std::size_t b = 0; b < tc.size(); ++b) gain[a][b] = static_cast<double>(table[a][b]);
  }
  double best = 0.0;
  if (k <= 4) {
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double agree = 0.0;
      for (std::size_t a = 0; a < k; ++a) agree += gain[a][perm[a]];
      best = std::max(best, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    best = hungarian_max(gain);
  }
  return best / static_cast<double>(pred.size());
}

double adjusted_rand(const Labeling& pred, const Labeling& truth) {
  check_lengths(pred, truth);
  const auto pc = distinct(pred);
  const auto tc = distinct(truth);
  const auto table = contingency(pred, truth, pc, tc);
  double index = 0.0;
  std::vector<double> rows(pc.size(), 0.0), cols(tc.size(), 0.0);
  for (std::size_t a = 0; a < pc.size(); ++a) {
    for (std::size_t b = 0; b < tc.size(); ++b) {
      const double n = static_cast<double>(table[a][b]);
      index += choose2(n);
      rows[a] += n;
      cols[b] += n;
    }
  }
  double sum_rows = 0.0, sum_cols = 0.0;
  for (double r : rows) sum_rows += choose2(r);
  for (double c : cols) sum_cols += choose2(c);
  const double total = choose2(static_cast<double>(pred.size()));
  const double expected = total > 0.0 ? sum_rows * sum_cols / total : 0.0;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected) {
    // Both partitions trivial (one block, or all singletons).
    return pc.size() == tc.size() ? 1.0 : 0.0;
  }
  return (index - expected) / (maximum - expected);
}

MetricReport evaluate(const Labeling& pred, const Labeling& truth) {
  MetricReport out;
  out.accuracy = best_perm_accuracy(pred, truth);
  out.ari = adjusted_rand(pred, truth);
  out.pred_classes = distinct(pred);
  out.truth_classes = distinct(truth);
  out.confusion = contingency(pred, truth, out.pred_classes, out.truth_classes);
  return out;
}

GeneratorSpec ManifestEntry::spec_for_run(int r) const {
  GeneratorSpec s = spec;
  s.seed = spec.seed + static_cast<std::uint64_t>(r);
  return s;
}

const ManifestEntry& Manifest::at(const std::string& name) const {
  const auto it = datasets.find(name);
  if (it == datasets.end()) fail(ErrorKind::input, "manifest has no dataset '" + name + "'");
  return it->second;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::input, "cannot open manifest " + path.string());
  Manifest out;
  try {
    const auto doc = nlohmann::json::parse(in);
    out.version = doc.at("version").get<int>();
    for (const auto& [name, entry] : doc.at("datasets").items()) {
      ManifestEntry e;
      e.name = name;
      e.description = entry.value("description", "");
      e.runs = entry.value("runs", 20);
      GeneratorSpec& s = e.spec;
      s.kind = parse_generator_kind(entry.at("kind").get<std::string>());
      s.n = entry.at("n").get<std::vector<int>>();
      if (entry.contains("centers")) s.centers = entry["centers"].get<std::vector<std::vector<double>>>();
      if (entry.contains("scales")) s.scales = entry["scales"].get<std::vector<double>>();
      if (entry.contains("radii")) s.radii = entry["radii"].get<std::vector<double>>();
      s.spacing = entry.value("spacing", s.spacing);
      s.ratio = entry.value("ratio", s.ratio);
      s.columns = entry.value("columns", s.columns);
      s.noise = entry.value("noise", s.noise);
      s.seed = entry.at("seed").get<std::uint64_t>();
      out.datasets.emplace(name, std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::parse, "manifest " + path.string() + ": " + ex.what());
  }
  return out;
}

std::filesystem::path default_manifest_path() {
  return std::filesystem::path(SIMCLUST_DATA_DIR) / "manifest.json";
}

}  // namespace simclust::bench
