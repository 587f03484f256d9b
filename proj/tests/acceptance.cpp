// Acceptance run: one PASS/FAIL line per criterion, detail lines start with '#'.
// Exit status is non-zero if any criterion outside kKnownInfeasible fails.

#include "simclust/affinity.hpp"
#include "simclust/bench.hpp"
#include "simclust/graph.hpp"
#include "simclust/kernels.hpp"
#include "simclust/latent_graph.hpp"
#include "simclust/oracle.hpp"
#include "simclust/rng.hpp"
#include "simclust/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace simclust;

namespace {

// Criteria recorded as unattainable for this algorithm (see README).
const std::set<int> kKnownInfeasible = {9};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string list(const std::vector<double>& v) {
  std::string s;
  char buf[32];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, "%s%.3f", s.empty() ? "" : " ", x);
    s += buf;
  }
  return s;
}

FitDiagnostics g_diag;

FitResult tracked_fit(const DistanceMatrix& L, const FitConfig& config) {
  FitResult r = fit(L, config);
  g_diag.checked_steps += r.diagnostics.checked_steps;
  g_diag.monotonicity_violations += r.diagnostics.monotonicity_violations;
  g_diag.min_step_delta = std::min(g_diag.min_step_delta, r.diagnostics.min_step_delta);
  return r;
}

std::map<int, std::pair<bool, std::string>> g_results;

void report(int id, bool pass, const std::string& detail) {
  g_results[id] = {pass, detail};
  std::printf("# AC%d done\n", id);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PointSet random_points(Rng& rng, int n) {
  PointSet p;
  p.coords.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    p.coords(i, 0) = rng.uniform();
    p.coords(i, 1) = rng.uniform();
  }
  return p;
}

// The 100 small instances shared by criteria 2 and 3.
std::vector<PointSet> small_instances() {
  std::vector<PointSet> out;
  for (int t = 0; t < 100; ++t) {
    Rng rng(derive_seed(20260, static_cast<std::uint64_t>(t)));
    out.push_back(random_points(rng, 4 + t % 5));
  }
  return out;
}

void ac1() {
  const auto t0 = Clock::now();
  int ok = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Rng rng(derive_seed(10101, static_cast<std::uint64_t>(t)));
    const PointSet p = random_points(rng, 5);
    const DistanceMatrix L = distance_matrix(p);
    const std::vector<int> members{0, 1, 2, 3, 4};
    const WeightFn w = [&](int a, int b) {
      return L(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    };
    const double best = oracle::best_connected_subgraph(members, w).total();
    const double mst = minimum_spanning_tree(members, w).total();
    worst = std::max(worst, std::abs(best - mst));
    if (std::abs(best - mst) <= 1e-9) ++ok;
  }
  const double secs = seconds_since(t0);
  report(1, ok == 100 && secs < 30.0,
         fmt("best connected subgraph == MST on %d/100 instances, max |delta| %.2e, %.2fs", ok,
             worst, secs));
}

LikelihoodModel random_model(Rng& rng, const DistanceMatrix& L, int t) {
  LikelihoodModel m;
  m.kind = t % 2 == 0 ? LikelihoodKind::gaussian : LikelihoodKind::exponential;
  m.background.floor = default_variance_floor(L);
  for (int k = 0; k < 2; ++k) {
    ClassParams c;
    if (m.kind == LikelihoodKind::gaussian) {
      c.beta = rng.uniform(0.1, 0.8);
      c.sigma2 = rng.uniform(0.01, 0.3);
    } else {
      c.beta = rng.uniform(0.5, 5.0);
    }
    m.classes.push_back(c);
  }
  return calibrate_background(L, m);
}

void ac2(const std::vector<PointSet>& instances) {
  int ok = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const DistanceMatrix L = distance_matrix(instances[static_cast<std::size_t>(t)]);
    const int n = static_cast<int>(L.size());
    Rng rng(derive_seed(20261, static_cast<std::uint64_t>(t)));
    const LikelihoodModel model = random_model(rng, L, t);
    // Random labels with both class sizes in 1..5.
    Labeling C;
    std::vector<int> sizes;
    do {
      C.assign(static_cast<std::size_t>(n), 1);
      for (auto& c : C) c = 1 + static_cast<int>(rng.below(2));
      sizes = {static_cast<int>(std::count(C.begin(), C.end(), 1)),
               static_cast<int>(std::count(C.begin(), C.end(), 2))};
    } while (sizes[0] < 1 || sizes[1] < 1 || sizes[0] > 5 || sizes[1] > 5);

    const auto nu = map_graph_given_labels(L, C, model, PriorKind::connected());
    const double map_score = log_joint(L, C, nu, model);
    double enumerated = 0.0;
    for (int k = 1; k <= 2; ++k) {
      std::vector<int> members;
      for (int i = 0; i < n; ++i) {
        if (C[static_cast<std::size_t>(i)] == k) members.push_back(i);
      }
      enumerated -= oracle::best_connected_subgraph(members, [&](int a, int b) {
        return edge_weight(L(static_cast<std::size_t>(a), static_cast<std::size_t>(b)), k, model);
      }).total();
    }
    worst = std::max(worst, enumerated - map_score);
    if (map_score >= enumerated - 1e-9 && is_admissible(C, nu, PriorKind::connected())) ++ok;
  }
  report(2, ok == 100,
         fmt("MAP graph >= every enumerated admissible graph on %d/100 instances, max shortfall %.2e",
             ok, worst));
}

void ac3(const std::vector<PointSet>& instances) {
  int recovered = 0, bounded = 0;
  double worst = -1e300;
  for (int t = 0; t < 100; ++t) {
    const DistanceMatrix L = distance_matrix(instances[static_cast<std::size_t>(t)]);
    FitConfig config;
    config.seed = static_cast<std::uint64_t>(t);
    const FitResult f = tracked_fit(L, config);
    const auto o = oracle::enumerate_map(L, 2, f.model, config.prior);
    const double gap = f.score - o.score;
    worst = std::max(worst, gap);
    if (gap <= 1e-9) ++bounded;
    if (bench::best_perm_accuracy(f.labels, o.labels) == 1.0 || std::abs(gap) <= 1e-9) ++recovered;
  }
  report(3, recovered >= 90 && bounded == 100,
         fmt("fit recovers the oracle MAP in %d/100, score <= oracle + 1e-9 in %d/100 "
             "(max fit - oracle %.2e)",
             recovered, bounded, worst));
}

Eigen::MatrixXd random_psd(Rng& rng, int n) {
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) B(i, j) = rng.normal() / std::sqrt(static_cast<double>(n));
  }
  return B * B.transpose();
}

void ac5() {
  const auto t0 = Clock::now();
  int exact = 0, dominant = 0, cases = 0;
  double worst = 0.0;
  for (int m = 0; m < 20; ++m) {
    Rng rng(derive_seed(50505, static_cast<std::uint64_t>(m)));
    const Eigen::MatrixXd A = random_psd(rng, 20);
    for (int t = 1; t <= 5; ++t) {
      ++cases;
      const FeatureMap fm = latent_feature_map(A, t);
      const double measured = reconstruction_error2(A, fm.rows);
      const double ref = std::pow(oracle::rank_error_reference(A, t), 2);
      worst = std::max(worst, std::abs(measured - ref));
      if (std::abs(measured - ref) <= 1e-8) ++exact;
      bool beats = true;
      const double norm = fm.rows.norm();
      for (int trial = 0; trial < 1000; ++trial) {
        Eigen::MatrixXd X(20, t);
        for (int i = 0; i < 20; ++i) {
          for (int k = 0; k < t; ++k) X(i, k) = rng.normal();
        }
        if (trial % 2 == 0) {
          // Random factor at its best overall scale.
          const Eigen::MatrixXd P = X * X.transpose();
          const double c = std::max(0.0, (A.array() * P.array()).sum() / P.squaredNorm());
          X *= std::sqrt(c);
        } else {
          // Small perturbation of the optimum.
          X = fm.rows + 1e-3 * norm / std::sqrt(20.0 * t) * X;
        }
        if (!(measured < reconstruction_error2(A, X))) beats = false;
      }
      if (beats) ++dominant;
    }
  }
  const double secs = seconds_since(t0);
  report(5, exact == cases && dominant == cases && secs < 60.0,
         fmt("error^2 matches discarded spectrum in %d/%d (max |delta| %.2e), beats 1000 random "
             "factorizations in %d/%d, %.2fs",
             exact, cases, worst, dominant, cases, secs));
}

struct Comparison {
  std::vector<double> fit;
  std::vector<double> spectral;
};

Comparison compare(const bench::ManifestEntry& entry) {
  Comparison out;
  for (int r = 0; r < entry.runs; ++r) {
    const PointSet p = bench::generate(entry.spec_for_run(r));
    FitConfig config;
    config.seed = static_cast<std::uint64_t>(r);
    const FitResult f = tracked_fit(distance_matrix(p), config);
    SpectralOptions so;
    so.seed = static_cast<std::uint64_t>(r);
    const SpectralResult s = spectral_cluster(p, so);
    out.fit.push_back(bench::best_perm_accuracy(f.labels, *p.labels));
    out.spectral.push_back(bench::best_perm_accuracy(s.labels, *p.labels));
  }
  return out;
}

void ac6(const bench::Manifest& m) {
  const auto t0 = Clock::now();
  const auto c = compare(m.at("fig4_two_scale"));
  const double secs = seconds_since(t0);
  const double fm = median(c.fit), sm = median(c.spectral);
  std::printf("# fig4_two_scale fit: %s\n# fig4_two_scale spectral: %s\n", list(c.fit).c_str(),
              list(c.spectral).c_str());
  report(6, fm >= 0.90 && fm - sm >= 0.10 && secs < 120.0,
         fmt("fig4_two_scale median accuracy fit %.3f, spectral %.3f (margin %.3f), %.1fs", fm, sm,
             fm - sm, secs));
}

void ac7(const bench::Manifest& m) {
  bool pass = true;
  std::string detail;
  for (const char* name : {"fig2a_rings", "separated_blobs"}) {
    const auto c = compare(m.at(name));
    const double fm = median(c.fit), sm = median(c.spectral);
    std::printf("# %s fit: %s\n# %s spectral: %s\n", name, list(c.fit).c_str(), name,
                list(c.spectral).c_str());
    pass = pass && fm >= 0.95 && sm >= 0.95;
    detail += fmt("%s%s median fit %.3f spectral %.3f", detail.empty() ? "" : "; ", name, fm, sm);
  }
  report(7, pass, detail);
}

double scale_ratio(const LikelihoodModel& model) {
  const double a = model.cls(1).beta, b = model.cls(2).beta;
  return std::max(a, b) / std::min(a, b);
}

void ac8(const bench::Manifest& m) {
  const auto& entry = m.at("scale_recovery");
  std::vector<double> exponential, gaussian;
  for (int r = 0; r < entry.runs; ++r) {
    const DistanceMatrix L = distance_matrix(bench::generate(entry.spec_for_run(r)));
    FitConfig config;
    config.seed = static_cast<std::uint64_t>(r);
    config.likelihood = LikelihoodKind::exponential;
    exponential.push_back(scale_ratio(tracked_fit(L, config).model));
    config.likelihood = LikelihoodKind::gaussian;
    gaussian.push_back(scale_ratio(tracked_fit(L, config).model));
  }
  const double planted = 10.0;
  const double e = median(exponential), g = median(gaussian);
  std::printf("# exponential rate ratios: %s\n# gaussian mean ratios: %s\n",
              list(exponential).c_str(), list(gaussian).c_str());
  report(8, e >= planted / 2.0 && e <= planted * 2.0,
         fmt("median fitted rate ratio %.3f vs planted %.0f (gaussian mean ratio %.3f)", e,
             planted, g));
}

void ac4() {
  report(4, g_diag.monotonicity_violations == 0 && g_diag.checked_steps > 0,
         fmt("%zu violations over %zu checked steps, smallest step %.3e",
             g_diag.monotonicity_violations, g_diag.checked_steps, g_diag.min_step_delta));
}

void ac9(const bench::Manifest& m) {
  const auto t0 = Clock::now();
  std::vector<double> lx, ly;
  std::string detail;
  for (int n : {100, 200, 400, 800}) {
    bench::GeneratorSpec spec = m.at("separated_blobs").spec;
    spec.n = {n / 2, n / 2};
    const DistanceMatrix L = distance_matrix(bench::generate(spec));
    FitConfig config;
    config.restarts = 1;
    config.max_sweeps = 3;
    config.schedule = MStepSchedule::every_sweep;
    const FitResult f = tracked_fit(L, config);
    const double sweep = median(f.sweep_seconds);
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(sweep));
    detail += fmt("%sN=%d %.4fs", detail.empty() ? "" : ", ", n, sweep);
  }
  const auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  const double s = slope(lx, ly);
  const double secs = seconds_since(t0);
  std::printf("# per-sweep times: %s; per-move slope %.3f\n", detail.c_str(), s - 1.0);
  report(9, s <= 1.5 && secs < 180.0, fmt("per-sweep log-log slope %.3f, %.1fs", s, secs));
}

void ac10(const bench::Manifest& m) {
  const PointSet p = bench::generate(m.at("fig5_kprior").spec_for_run(0));
  const DistanceMatrix L = distance_matrix(p);
  FitConfig config;
  const double connected = bench::best_perm_accuracy(tracked_fit(L, config).labels, *p.labels);
  std::vector<double> kacc;
  for (int K = 1; K <= 10; ++K) {
    config.prior = PriorKind::k_neighbor(K);
    kacc.push_back(bench::best_perm_accuracy(tracked_fit(L, config).labels, *p.labels));
  }
  const double best = *std::max_element(kacc.begin(), kacc.end());
  std::printf("# K-neighbor accuracies K=1..10: %s\n", list(kacc).c_str());
  report(10, connected >= best,
         fmt("connected prior accuracy %.3f vs best K-neighbor %.3f (K=%d)", connected, best,
             static_cast<int>(std::max_element(kacc.begin(), kacc.end()) - kacc.begin()) + 1));
}

}  // namespace

int main() {
  std::printf("# kernels: %s\n", kernels::name(kernels::active().isa));
  const bench::Manifest manifest = bench::load_manifest(bench::default_manifest_path());
  const auto instances = small_instances();
  ac1();
  ac2(instances);
  ac3(instances);
  ac5();
  ac6(manifest);
  ac7(manifest);
  ac8(manifest);
  ac9(manifest);
  ac10(manifest);
  ac4();
  int unexpected = 0;
  for (const auto& [id, result] : g_results) {
    const auto& [pass, detail] = result;
    const bool known = !pass && kKnownInfeasible.contains(id);
    std::printf("AC%d %s  %s%s\n", id, pass ? "PASS" : "FAIL", detail.c_str(),
                known ? "  [known infeasible]" : "");
    if (!pass && !known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
