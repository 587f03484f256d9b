#include "move_engine.hpp"
#include "simclust/error.hpp"
#include "simclust/latent_graph.hpp"
#include "simclust/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace simclust {
namespace {

constexpr double kMonotoneSlack = 1e-9;

std::vector<double> nearest_neighbor_distances(const DistanceMatrix& L) {
  const std::size_t n = L.size();
  if (n < 2) return {0.0};
  std::vector<double> out(n, std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = L.column(j);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j) out[j] = std::min(out[j], col[i]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

double population_variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size());
}

LikelihoodModel initial_model(const FitConfig& config, const std::vector<double>& nn,
                              double floor, Rng& rng) {
  LikelihoodModel model;
  model.kind = config.likelihood;
  model.background.policy = config.background;
  model.background.floor = floor;
  const double nn_var = std::max(floor, population_variance(nn));
  const double rate_ceiling = 1.0 / std::sqrt(floor);
  for (int k = 0; k < config.clusters; ++k) {
    const double scale = quantile(nn, rng.uniform(0.1, 0.5));
    ClassParams p;
    if (config.likelihood == LikelihoodKind::gaussian) {
      p.beta = scale;
      p.sigma2 = nn_var;
    } else {
      p.beta = scale > 0.0 ? std::min(1.0 / scale, rate_ceiling) : rate_ceiling;
    }
    model.classes.push_back(p);
  }
  return model;
}

bool admissible_sizes(const Labeling& labels, int M, const PriorKind& prior) {
  if (prior.is_connected()) return true;
  std::vector<std::size_t> sizes(static_cast<std::size_t>(M), 0);
  for (int c : labels) ++sizes[static_cast<std::size_t>(c - 1)];
  return std::all_of(sizes.begin(), sizes.end(), [&](std::size_t s) {
    return s == 0 || s > static_cast<std::size_t>(prior.K);
  });
}

Labeling initial_labels(const FitConfig& config, std::size_t N, Rng& rng) {
  Labeling labels(N, 1);
  const auto draw = [&] {
    for (std::size_t i = 0; i < N; ++i) {
      const auto it = config.clamped.find(static_cast<int>(i));
      labels[i] = it != config.clamped.end()
                      ? it->second
                      : 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(config.clusters)));
    }
  };
  draw();
  for (int attempt = 0; attempt < 1000 && !admissible_sizes(labels, config.clusters, config.prior);
       ++attempt) {
    draw();
  }
  if (!admissible_sizes(labels, config.clusters, config.prior)) {
    // Small instances: pool every free point in one class.
    for (std::size_t i = 0; i < N; ++i) {
      if (!config.clamped.contains(static_cast<int>(i))) labels[i] = 1;
    }
  }
  return labels;
}

struct RestartOutcome {
  Labeling labels;
  NeighborGraph graph;
  LikelihoodModel model;
  double score = 0.0;
  std::vector<double> trace;
  int sweeps = 0;
  bool converged = false;
};

class StepChecker {
 public:
  explicit StepChecker(FitDiagnostics& diag) : diag_(diag) {}
  void record(double delta) {
    ++diag_.checked_steps;
    if (delta < -kMonotoneSlack) ++diag_.monotonicity_violations;
    if (diag_.checked_steps == 1 || delta < diag_.min_step_delta) diag_.min_step_delta = delta;
  }

 private:
  FitDiagnostics& diag_;
};

RestartOutcome run_restart(const DistanceMatrix& L, const FitConfig& config,
                           MStepSchedule schedule, const std::vector<double>& nn,
                           double floor, Rng& rng,
                           FitDiagnostics& diag, std::vector<double>& sweep_seconds) {
  const std::size_t N = L.size();
  Labeling labels = initial_labels(config, N, rng);
  LikelihoodModel model = calibrate_background(L, initial_model(config, nn, floor, rng));
  detail::MoveEngine engine(L, model, config.prior, labels);
  StepChecker checker(diag);

  std::vector<int> free_points;
  for (std::size_t i = 0; i < N; ++i) {
    if (!config.clamped.contains(static_cast<int>(i))) free_points.push_back(static_cast<int>(i));
  }

  RestartOutcome out;
  out.trace.push_back(engine.score());
  for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(std::span<int>(free_points));
    std::size_t moves = 0;
    double prev = engine.score();
    // Clamped weights make the objective non-smooth in the M-step, so only
    // unclamped segments are held to the monotonicity bound.
    const bool exact = !engine.model().background.clamped;
    for (int i : free_points) {
      if (!engine.try_move(i)) continue;
      ++moves;
      const double now = engine.score();
      if (exact) checker.record(now - prev);
      out.trace.push_back(now);
      prev = now;
    }
    diag.accepted_moves += moves;
    out.sweeps = sweep;
    if (schedule == MStepSchedule::settled && moves > 0) {
      sweep_seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      continue;
    }

    const double before_m = engine.score();
    LikelihoodModel updated =
        update_class_params(L, engine.graph(), engine.model(), floor);
    engine.set_model(updated);
    const double after_m = engine.score();
    if (exact) checker.record(after_m - before_m);
    if (config.background == BackgroundPolicy::pairwise_bound) {
      engine.set_model(calibrate_background(L, std::move(updated)));
    }
    out.trace.push_back(engine.score());
    sweep_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());

    if (moves == 0 && std::abs(engine.score() - before_m) < config.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.labels = engine.labels();
  out.graph = engine.graph();
  out.model = engine.model();
  out.score = engine.score();
  return out;
}

}  // namespace

void validate_config(const FitConfig& config, std::size_t N) {
  if (N == 0) fail(ErrorKind::parameter, "fit needs at least one point");
  if (config.clusters < 1) fail(ErrorKind::parameter, "cluster count must be at least 1");
  if (config.max_sweeps < 1) fail(ErrorKind::parameter, "max_sweeps must be at least 1");
  if (config.restarts < 1) fail(ErrorKind::parameter, "restarts must be at least 1");
  if (!(config.tolerance > 0.0)) fail(ErrorKind::parameter, "tolerance must be positive");
  if (config.variance_floor && !(*config.variance_floor > 0.0)) {
    fail(ErrorKind::parameter, "variance floor must be positive");
  }
  if (!config.prior.is_connected() && config.prior.K < 1) {
    fail(ErrorKind::parameter, "K-neighbor prior needs K >= 1");
  }
  for (const auto& [i, c] : config.clamped) {
    if (i < 0 || static_cast<std::size_t>(i) >= N) {
      fail(ErrorKind::parameter, "clamped index " + std::to_string(i) + " out of range");
    }
    if (c < 1 || c > config.clusters) {
      fail(ErrorKind::parameter, "clamped class " + std::to_string(c) + " out of range");
    }
  }
}

FitConfig clamp_labels(FitConfig config, const std::map<int, int>& known, std::size_t N) {
  for (const auto& [i, c] : known) config.clamped[i] = c;
  validate_config(config, N);
  return config;
}

FitResult fit(const DistanceMatrix& L, const FitConfig& config) {
  validate_config(config, L.size());
  const double floor = config.variance_floor.value_or(default_variance_floor(L));
  const std::vector<double> nn = nearest_neighbor_distances(L);

  FitResult result;
  result.seed = config.seed;
  RestartOutcome best;
  for (int r = 0; r < config.restarts; ++r) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
    MStepSchedule schedule = config.schedule;
    if (schedule == MStepSchedule::alternate) {
      schedule = r % 2 == 0 ? MStepSchedule::settled : MStepSchedule::every_sweep;
    }
    RestartOutcome outcome = run_restart(L, config, schedule, nn, floor, rng, result.diagnostics,
                                         result.sweep_seconds);
    result.restart_scores.push_back(outcome.score);
    result.total_sweeps += static_cast<std::size_t>(outcome.sweeps);
    if (r == 0 || outcome.score > best.score) {
      best = std::move(outcome);
      result.best_restart = r;
    }
  }
  result.labels = std::move(best.labels);
  result.graph = std::move(best.graph);
  result.model = std::move(best.model);
  result.score = best.score;
  result.score_trace = std::move(best.trace);
  result.sweeps = best.sweeps;
  result.converged = best.converged;
  result.diagnostics.clamped_pairs = result.model.background.clamped_pairs;
  return result;
}

}  // namespace simclust
