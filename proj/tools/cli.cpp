#include "cli.hpp"

#include "simclust/affinity.hpp"
#include "simclust/bench.hpp"
#include "simclust/error.hpp"
#include "simclust/latent_graph.hpp"
#include "simclust/oracle.hpp"
#include "simclust/serialize.hpp"
#include "simclust/spectral.hpp"

#include "CLI11.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

namespace simclust::cli {
namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter:
      return usage;
    case ErrorKind::input:
    case ErrorKind::parse:
    case ErrorKind::size:
    case ErrorKind::degenerate:
      return data;
    default:
      return numerical;
  }
}

// Writes the whole artifact to a sibling temp file and renames it into place,
// so a failed run never leaves a truncated file behind.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << text;
    f.close();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      fail(ErrorKind::input, "cannot write " + path);
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorKind::input, "cannot write " + path);
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::input, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SEED"); env && *env) {
    const auto v = parse_number<std::uint64_t>(env);
    if (!v) throw UsageError(std::string("SEED must be a non-negative integer, got '") + env + "'");
    return *v;
  }
  return 0;
}

PriorKind parse_prior(const std::string& s) {
  if (s == "connected") return PriorKind::connected();
  constexpr std::string_view prefix = "kneighbor:";
  if (s.starts_with(prefix)) {
    if (const auto K = parse_number<int>(std::string_view(s).substr(prefix.size()))) {
      return PriorKind::k_neighbor(*K);
    }
  }
  throw UsageError("--prior must be 'connected' or 'kneighbor:K', got '" + s + "'");
}

LikelihoodKind parse_likelihood(const std::string& s) {
  if (s == "gaussian") return LikelihoodKind::gaussian;
  if (s == "exponential") return LikelihoodKind::exponential;
  throw UsageError("--likelihood must be gaussian or exponential");
}

SpectralMode parse_mode(const std::string& s) {
  if (s == "njw") return SpectralMode::njw;
  if (s == "latent-feature") return SpectralMode::latent_feature;
  throw UsageError("--mode must be njw or latent-feature");
}

std::optional<double> parse_gamma(const std::string& s) {
  if (s == "auto") return std::nullopt;
  const auto g = parse_number<double>(s);
  if (!g || !(*g > 0.0)) throw UsageError("--gamma must be 'auto' or a positive number");
  return g;
}

std::vector<std::vector<double>> parse_centers(const std::string& s) {
  std::vector<std::vector<double>> out;
  std::stringstream rows(s);
  std::string row;
  while (std::getline(rows, row, ';')) {
    std::vector<double> c;
    std::stringstream cols(row);
    std::string field;
    while (std::getline(cols, field, ',')) {
      const auto v = parse_number<double>(field);
      if (!v) throw UsageError("--centers expects 'x,y;x,y', got '" + s + "'");
      c.push_back(*v);
    }
    out.push_back(std::move(c));
  }
  return out;
}

// index,label rows with 0-based point indices.
std::map<int, int> read_clamp(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::map<int, int> out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line == "index,label")) continue;
    const auto comma = line.find(',');
    const auto i = comma == std::string::npos ? std::nullopt
                                              : parse_number<int>(std::string_view(line).substr(0, comma));
    const auto c = comma == std::string::npos ? std::nullopt
                                              : parse_number<int>(std::string_view(line).substr(comma + 1));
    if (!i || !c) {
      fail(ErrorKind::parse, path + ": line " + std::to_string(line_no) + ": expected 'index,label'");
    }
    out[*i] = *c;
  }
  return out;
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }
}

// Labels from a result JSON or from the label column of a CSV.
Labeling read_labels(const std::string& path) {
  if (fs::path(path).extension() == ".json") return labels_from_json(read_json(path));
  PointSet p = bench::read_csv(path);
  if (!p.labels) fail(ErrorKind::input, path + " has no label column");
  return *p.labels;
}

struct FitFlags {
  int clusters = 2;
  std::string likelihood = "gaussian";
  std::string prior = "connected";
  std::string background = "envelope";
  std::string schedule = "alternate";
  int sweeps = 200;
  int restarts = 10;
  double tolerance = 1e-8;

  void add(CLI::App* app) {
    app->add_option("--clusters", clusters, "Number of classes M")->capture_default_str();
    app->add_option("--likelihood", likelihood, "gaussian | exponential")->capture_default_str();
    app->add_option("--prior", prior, "connected | kneighbor:K")->capture_default_str();
    app->add_option("--background", background, "envelope | pairwise_bound")->capture_default_str();
    app->add_option("--schedule", schedule, "settled | every_sweep | alternate")->capture_default_str();
    app->add_option("--sweeps", sweeps, "Maximum sweeps per restart")->capture_default_str();
    app->add_option("--restarts", restarts, "Random restarts")->capture_default_str();
    app->add_option("--tolerance", tolerance, "Convergence tolerance on the score")
        ->capture_default_str();
  }

  FitConfig config(std::uint64_t seed) const {
    FitConfig c;
    c.clusters = clusters;
    c.likelihood = parse_likelihood(likelihood);
    c.prior = parse_prior(prior);
    if (background == "envelope") {
      c.background = BackgroundPolicy::envelope;
    } else if (background == "pairwise_bound") {
      c.background = BackgroundPolicy::pairwise_bound;
    } else {
      throw UsageError("--background must be envelope or pairwise_bound");
    }
    if (schedule == "settled") {
      c.schedule = MStepSchedule::settled;
    } else if (schedule == "every_sweep") {
      c.schedule = MStepSchedule::every_sweep;
    } else if (schedule == "alternate") {
      c.schedule = MStepSchedule::alternate;
    } else {
      throw UsageError("--schedule must be settled, every_sweep or alternate");
    }
    c.max_sweeps = sweeps;
    c.restarts = restarts;
    c.tolerance = tolerance;
    c.seed = seed;
    return c;
  }
};

struct SpectralFlags {
  int clusters = 2;
  std::string gamma = "auto";
  std::string mode = "njw";

  void add(CLI::App* app) {
    app->add_option("--clusters", clusters, "Number of clusters")->capture_default_str();
    app->add_option("--gamma", gamma, "auto | kernel scale")->capture_default_str();
    app->add_option("--mode", mode, "njw | latent-feature")->capture_default_str();
  }

  SpectralOptions options(std::uint64_t seed) const {
    SpectralOptions o;
    o.clusters = clusters;
    o.gamma = parse_gamma(gamma);
    o.mode = parse_mode(mode);
    o.seed = seed;
    return o;
  }
};

// ---- generate --------------------------------------------------------------

struct GenerateCmd {
  std::string kind;
  std::string dataset;
  std::string manifest;
  int run_index = 0;
  std::vector<int> n;
  std::string centers;
  std::vector<double> scales;
  std::vector<double> radii;
  std::optional<double> spacing;
  std::optional<double> ratio;
  std::optional<int> columns;
  std::optional<double> noise;
  std::optional<std::uint64_t> seed;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--kind", kind, "blobs | two_scale_overlap | rings");
    app->add_option("--dataset", dataset, "Manifest entry to generate instead of --kind");
    app->add_option("--manifest", manifest, "Manifest file (default: the bundled one)");
    app->add_option("--run", run_index, "Run index within the manifest entry");
    app->add_option("--n", n, "Points per cluster (one value repeats)")->delimiter(',');
    app->add_option("--centers", centers, "Blob centers as 'x,y;x,y'");
    app->add_option("--scales", scales, "Blob standard deviations")->delimiter(',');
    app->add_option("--radii", radii, "Ring radii")->delimiter(',');
    app->add_option("--spacing", spacing, "Sparse grid spacing");
    app->add_option("--ratio", ratio, "Sparse to dense spacing ratio");
    app->add_option("--columns", columns, "Sparse grid columns (0: square)");
    app->add_option("--noise", noise, "Jitter or radial noise");
    app->add_option("--seed", seed, "RNG seed (default: $SEED or 0)");
    app->add_option("--out", out, "Output CSV");
  }

  int run(std::ostream& sink) const {
    bench::GeneratorSpec spec;
    if (!dataset.empty()) {
      if (!kind.empty()) throw UsageError("--kind and --dataset are exclusive");
      const auto m = bench::load_manifest(manifest.empty() ? bench::default_manifest_path()
                                                           : fs::path(manifest));
      const auto& entry = m.at(dataset);
      if (run_index < 0) throw UsageError("--run must be non-negative");
      spec = entry.spec_for_run(run_index);
    } else {
      if (kind.empty()) throw UsageError("generate needs --kind or --dataset");
      try {
        spec.kind = bench::parse_generator_kind(kind);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }
    if (!centers.empty()) spec.centers = parse_centers(centers);
    if (!scales.empty()) spec.scales = scales;
    if (!radii.empty()) spec.radii = radii;
    if (spacing) spec.spacing = *spacing;
    if (ratio) spec.ratio = *ratio;
    if (columns) spec.columns = *columns;
    if (noise) spec.noise = *noise;
    if (!n.empty()) {
      spec.n = n;
      if (n.size() == 1) {
        std::size_t clusters = 2;
        if (spec.kind == bench::GeneratorKind::blobs) clusters = spec.centers.size();
        if (spec.kind == bench::GeneratorKind::rings) clusters = spec.radii.size();
        spec.n.assign(clusters, n.front());
      }
    }
    if (seed || dataset.empty()) spec.seed = resolve_seed(seed);
    emit(out, bench::to_csv(bench::generate(spec)), sink);
    return ok;
  }
};

// ---- fit ------------------------------------------------------------------

struct FitCmd {
  std::string input;
  std::string clamp;
  std::optional<std::uint64_t> seed;
  std::string out;
  FitFlags flags;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Input CSV")->required();
    app->add_option("--clamp", clamp, "CSV of 'index,label' rows (0-based) to hold fixed");
    app->add_option("--seed", seed, "RNG seed (default: $SEED or 0)");
    app->add_option("--out", out, "Output JSON");
    flags.add(app);
  }

  int run(std::ostream& sink) const {
    const PointSet points = bench::read_csv(input);
    FitConfig config = flags.config(resolve_seed(seed));
    if (!clamp.empty()) config = clamp_labels(config, read_clamp(clamp), points.size());
    const FitResult result = fit(distance_matrix(points), config);
    emit(out, dump(to_json(result, config)), sink);
    return ok;
  }
};

// ---- spectral -------------------------------------------------------------

struct SpectralCmd {
  std::string input;
  std::optional<std::uint64_t> seed;
  std::string out;
  SpectralFlags flags;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Input CSV")->required();
    app->add_option("--seed", seed, "RNG seed (default: $SEED or 0)");
    app->add_option("--out", out, "Output JSON");
    flags.add(app);
  }

  int run(std::ostream& sink) const {
    const PointSet points = bench::read_csv(input);
    const SpectralResult result = spectral_cluster(points, flags.options(resolve_seed(seed)));
    emit(out, dump(to_json(result)), sink);
    return ok;
  }
};

// ---- eval -----------------------------------------------------------------

struct EvalCmd {
  std::string pred;
  std::string truth;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--pred", pred, "Predicted labels (result JSON or labeled CSV)")->required();
    app->add_option("--truth", truth, "True labels (labeled CSV or JSON)")->required();
    app->add_option("--out", out, "Output JSON");
  }

  int run(std::ostream& sink) const {
    const auto report = bench::evaluate(read_labels(pred), read_labels(truth));
    emit(out, dump(to_json(report)), sink);
    return ok;
  }
};

// ---- sweep ----------------------------------------------------------------

struct SweepRow {
  std::string method;
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 0;
  double objective = 0.0;
  std::optional<double> accuracy;
  std::optional<double> ari;
};

struct SweepCmd {
  std::string input;
  std::string dataset;
  std::string manifest;
  std::string method = "both";
  std::string seeds = "0:9";
  unsigned threads = 1;
  std::string out;
  FitFlags fit_flags;
  std::string gamma = "auto";
  std::string mode = "njw";

  void add(CLI::App* app) {
    app->add_option("--input", input, "Fixed input CSV");
    app->add_option("--dataset", dataset, "Manifest entry; seed s uses the entry's run s");
    app->add_option("--manifest", manifest, "Manifest file (default: the bundled one)");
    app->add_option("--method", method, "fit | spectral | both")->capture_default_str();
    app->add_option("--seeds", seeds, "Inclusive seed range first:last")->capture_default_str();
    app->add_option("--threads", threads, "Parallel runs")->capture_default_str();
    app->add_option("--gamma", gamma, "Spectral kernel scale: auto | value")->capture_default_str();
    app->add_option("--mode", mode, "Spectral mode: njw | latent-feature")->capture_default_str();
    app->add_option("--out", out, "Output CSV");
    fit_flags.add(app);
  }

  int run(std::ostream& sink) const {
    if (input.empty() == dataset.empty()) throw UsageError("sweep needs exactly one of --input, --dataset");
    const auto colon = seeds.find(':');
    const auto first = parse_number<std::uint64_t>(std::string_view(seeds).substr(0, colon));
    const auto last = colon == std::string::npos
                          ? first
                          : parse_number<std::uint64_t>(std::string_view(seeds).substr(colon + 1));
    if (!first || !last || *last < *first) throw UsageError("--seeds must be first:last");
    std::vector<std::string> methods;
    if (method == "fit" || method == "both") methods.push_back("fit");
    if (method == "spectral" || method == "both") methods.push_back("spectral");
    if (methods.empty()) throw UsageError("--method must be fit, spectral or both");
    if (threads < 1) throw UsageError("--threads must be at least 1");

    // Parse every flag up front so bad values fail before any work starts.
    (void)fit_flags.config(0);
    SpectralFlags sflags{fit_flags.clusters, gamma, mode};
    (void)sflags.options(0);

    std::optional<bench::ManifestEntry> entry;
    std::optional<PointSet> fixed;
    if (!dataset.empty()) {
      const auto m = bench::load_manifest(manifest.empty() ? bench::default_manifest_path()
                                                           : fs::path(manifest));
      entry = m.at(dataset);
    } else {
      fixed = bench::read_csv(input);
    }

    struct Job {
      std::string method;
      std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::uint64_t s = *first;; ++s) {
      for (const auto& m : methods) jobs.push_back({m, s});
      if (s == *last) break;
    }
    std::vector<SweepRow> rows(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t k = next++; k < jobs.size(); k = next++) {
        try {
          const Job& job = jobs[k];
          SweepRow& row = rows[k];
          row.method = job.method;
          row.seed = job.seed;
          PointSet points;
          if (entry) {
            const auto spec = entry->spec_for_run(static_cast<int>(job.seed));
            row.data_seed = spec.seed;
            points = bench::generate(spec);
          } else {
            points = *fixed;
          }
          Labeling labels;
          if (job.method == "fit") {
            const FitResult r = fit(distance_matrix(points), fit_flags.config(job.seed));
            row.objective = r.score;
            labels = r.labels;
          } else {
            const SpectralResult r = spectral_cluster(points, sflags.options(job.seed));
            row.objective = r.distortion;
            labels = r.labels;
          }
          if (points.labels) {
            row.accuracy = bench::best_perm_accuracy(labels, *points.labels);
            row.ari = bench::adjusted_rand(labels, *points.labels);
          }
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    const unsigned n_threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    std::string csv = "method,seed,data_seed,objective,accuracy,ari\n";
    char buf[64];
    const auto number = [&](std::optional<double> v) {
      if (!v) return std::string();
      std::snprintf(buf, sizeof buf, "%.17g", *v);
      return std::string(buf);
    };
    for (const auto& r : rows) {
      csv += r.method + ',' + std::to_string(r.seed) + ',' +
             (entry ? std::to_string(r.data_seed) : std::string()) + ',' + number(r.objective) +
             ',' + number(r.accuracy) + ',' + number(r.ari) + '\n';
    }
    emit(out, csv, sink);
    return ok;
  }
};

// ---- plot -----------------------------------------------------------------

std::string svg_plot(const PointSet& points, const Labeling& labels,
                     const std::vector<std::pair<int, int>>& edges, int size) {
  const std::size_t n = points.size();
  const auto x = [&](std::size_t i) { return points.coords(static_cast<Eigen::Index>(i), 0); };
  const auto y = [&](std::size_t i) {
    return points.dims() > 1 ? points.coords(static_cast<Eigen::Index>(i), 1) : 0.0;
  };
  double x_lo = x(0), x_hi = x(0), y_lo = y(0), y_hi = y(0);
  for (std::size_t i = 1; i < n; ++i) {
    x_lo = std::min(x_lo, x(i));
    x_hi = std::max(x_hi, x(i));
    y_lo = std::min(y_lo, y(i));
    y_hi = std::max(y_hi, y(i));
  }
  const double margin = 20.0;
  const double span = std::max(x_hi - x_lo, y_hi - y_lo);
  const double scale = span > 0.0 ? (size - 2.0 * margin) / span : 1.0;
  const double x_off = margin + 0.5 * ((size - 2.0 * margin) - scale * (x_hi - x_lo));
  const double y_off = margin + 0.5 * ((size - 2.0 * margin) - scale * (y_hi - y_lo));
  const auto px = [&](std::size_t i) { return x_off + scale * (x(i) - x_lo); };
  const auto py = [&](std::size_t i) { return size - (y_off + scale * (y(i) - y_lo)); };

  static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                           "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};
  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n",
                size, size, size, size);
  svg += buf;
  svg += "<g stroke=\"#444\" stroke-width=\"0.8\" stroke-dasharray=\"1.5,2.5\" fill=\"none\">\n";
  for (const auto& [i, j] : edges) {
    const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n",
                  px(a), py(a), px(b), py(b));
    svg += buf;
  }
  svg += "</g>\n";
  const double r = 3.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = labels[i] - 1;
    const char* color = colors[c % 10];
    const double cx = px(i), cy = py(i);
    switch (c % 4) {
      case 0:
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.1f\" fill=\"%s\"/>\n",
                      cx, cy, r, color);
        break;
      case 1:
        std::snprintf(buf, sizeof buf,
                      "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.1f\" height=\"%.1f\" fill=\"%s\"/>\n",
                      cx - r, cy - r, 2 * r, 2 * r, color);
        break;
      case 2:
        std::snprintf(buf, sizeof buf,
                      "<polygon points=\"%.2f,%.2f %.2f,%.2f %.2f,%.2f\" fill=\"%s\"/>\n", cx,
                      cy - r * 1.2, cx - r * 1.1, cy + r * 0.8, cx + r * 1.1, cy + r * 0.8, color);
        break;
      default:
        std::snprintf(buf, sizeof buf,
                      "<polygon points=\"%.2f,%.2f %.2f,%.2f %.2f,%.2f %.2f,%.2f\" fill=\"%s\"/>\n",
                      cx, cy - r * 1.3, cx + r * 1.3, cy, cx, cy + r * 1.3, cx - r * 1.3, cy, color);
        break;
    }
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

struct PlotCmd {
  std::string input;
  std::string labels;
  std::string edges;
  int size = 600;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Input CSV (2-D)")->required();
    app->add_option("--labels", labels, "Labels to color by (default: the CSV's label column)");
    app->add_option("--edges", edges, "Fit result JSON whose graph edges are drawn dotted");
    app->add_option("--size", size, "Canvas size in pixels")->capture_default_str();
    app->add_option("--out", out, "Output SVG");
  }

  int run(std::ostream& sink) const {
    const PointSet points = bench::read_csv(input);
    if (points.dims() > 2) {
      fail(ErrorKind::input, "plot needs 1-D or 2-D points, " + input + " has " +
                                 std::to_string(points.dims()) + " dimensions");
    }
    if (size < 50) throw UsageError("--size must be at least 50");
    Labeling lab = !labels.empty() ? read_labels(labels)
                                   : points.labels.value_or(Labeling(points.size(), 1));
    if (lab.size() != points.size()) fail(ErrorKind::input, "label count does not match the points");
    std::vector<std::pair<int, int>> segs;
    if (!edges.empty()) {
      const Json doc = read_json(edges);
      if (!doc.contains("edges") || !doc["edges"].is_array()) {
        fail(ErrorKind::parse, edges + " has no edges array");
      }
      const int n = static_cast<int>(points.size());
      for (const auto& e : doc["edges"]) {
        if (!e.is_array() || e.size() < 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
          fail(ErrorKind::parse, edges + ": malformed edge");
        }
        const int i = e[0].get<int>(), j = e[1].get<int>();
        if (i < 0 || j < 0 || i >= n || j >= n) fail(ErrorKind::input, "edge index out of range");
        segs.emplace_back(i, j);
      }
    }
    emit(out, svg_plot(points, lab, segs, size), sink);
    return ok;
  }
};

// ---- oracle (hidden) ------------------------------------------------------

struct OracleCmd {
  std::string input;
  std::optional<std::uint64_t> seed;
  std::string out;
  FitFlags flags;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Input CSV (at most 8 points)")->required();
    app->add_option("--seed", seed, "RNG seed (default: $SEED or 0)");
    app->add_option("--out", out, "Output JSON");
    flags.add(app);
  }

  int run(std::ostream& sink) const {
    const PointSet points = bench::read_csv(input);
    const DistanceMatrix L = distance_matrix(points);
    const FitConfig config = flags.config(resolve_seed(seed));
    const FitResult f = fit(L, config);
    const auto o = oracle::enumerate_map(L, config.clusters, f.model, config.prior);
    Json doc;
    doc["kind"] = "oracle";
    doc["fit_score"] = f.score;
    doc["oracle_score"] = o.score;
    doc["fit_labels"] = f.labels;
    doc["labels"] = o.labels;
    doc["states"] = o.states;
    doc["accuracy"] = bench::best_perm_accuracy(f.labels, o.labels);
    emit(out, dump(doc), sink);
    return ok;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent-graph and spectral clustering of point sets.", "simclust"};
  app.require_subcommand(1);
  app.fallthrough(false);

  GenerateCmd generate;
  FitCmd fit_cmd;
  SpectralCmd spectral;
  EvalCmd eval;
  SweepCmd sweep;
  PlotCmd plot;
  OracleCmd oracle_cmd;
  auto* generate_app = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
  auto* fit_app = app.add_subcommand("fit", "Fit the latent-graph model");
  auto* spectral_app = app.add_subcommand("spectral", "Spectral clustering");
  auto* eval_app = app.add_subcommand("eval", "Compare two labelings");
  auto* sweep_app = app.add_subcommand("sweep", "Repeat fit/spectral over a seed range");
  auto* plot_app = app.add_subcommand("plot", "2-D SVG scatter with optional graph edges");
  auto* oracle_app = app.add_subcommand("oracle", "");
  generate.add(generate_app);
  fit_cmd.add(fit_app);
  spectral.add(spectral_app);
  eval.add(eval_app);
  sweep.add(sweep_app);
  plot.add(plot_app);
  oracle_cmd.add(oracle_app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (*generate_app) return generate.run(out);
    if (*fit_app) return fit_cmd.run(out);
    if (*spectral_app) return spectral.run(out);
    if (*eval_app) return eval.run(out);
    if (*sweep_app) return sweep.run(out);
    if (*plot_app) return plot.run(out);
    if (*oracle_app) return oracle_cmd.run(out);
  } catch (const UsageError& e) {
    err << "simclust: usage error: " << e.what() << '\n';
    return usage;
  } catch (const Error& e) {
    err << "simclust: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    err << "simclust: parse error: " << e.what() << '\n';
    return data;
  } catch (const fs::filesystem_error& e) {
    err << "simclust: input error: " << e.what() << '\n';
    return data;
  } catch (const std::exception& e) {
    err << "simclust: error: " << e.what() << '\n';
    return numerical;
  }
  return usage;
}

}  // namespace simclust::cli
