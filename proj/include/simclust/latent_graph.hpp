#pragma once

// Latent-graph model of a distance matrix. Each class k owns a scale
// (beta_k, sigma2_k); the hidden neighbor graph nu marks which entries of L
// were generated by a class (nu_ij = k) and which by the background
// (nu_ij = 0). MAP inference over nu for fixed labels reduces to one minimum
// spanning tree per class once every edge weight
//     w_k(L) = log p_background(L) - log p_k(L)
// is non-negative.

#include "simclust/graph.hpp"
#include "simclust/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace simclust {

enum class LikelihoodKind { gaussian, exponential };

/// How the background density is chosen.
///
/// envelope: a flat background whose height is the peak density of the
///   tightest admissible class (gaussian: variance = floor; exponential:
///   rate = 1/sqrt(floor)). It dominates every class density at every L,
///   so weights are non-negative without clamping, and it depends on the
///   data only, so scores stay comparable across parameter updates.
/// pairwise_bound: gaussian shares the class mean and picks sigma2_0 by
///   bisection from the smallest squared residual over all pairs;
///   exponential searches beta_0 minimizing the number of dominated pairs.
///   Infeasible cases fall back to clamped weights.
enum class BackgroundPolicy { envelope, pairwise_bound };

struct ClassParams {
  double beta = 1.0;    // gaussian mean, or exponential rate
  double sigma2 = 1.0;  // gaussian variance, unused for exponential
};

struct Background {
  BackgroundPolicy policy = BackgroundPolicy::envelope;
  double floor = 1e-6;    // variance floor; envelope height is derived from it
  double sigma2_0 = 1.0;  // gaussian background variance
  double beta_0 = 1.0;    // exponential background rate
  bool calibrated = false;
  bool clamped = false;
  std::size_t clamped_pairs = 0;
};

struct LikelihoodModel {
  LikelihoodKind kind = LikelihoodKind::gaussian;
  std::vector<ClassParams> classes;  // index k-1 holds class k
  Background background;

  int num_classes() const { return static_cast<int>(classes.size()); }
  const ClassParams& cls(int k) const { return classes.at(static_cast<std::size_t>(k - 1)); }
  ClassParams& cls(int k) { return classes.at(static_cast<std::size_t>(k - 1)); }
};

/// Edge weight w_k(L) = max(0, (L - center)^2 * scale + offset) (gaussian) or
/// max(0, L * scale + offset) (exponential). Both the scalar and batched
/// paths go through these coefficients so they round identically.
struct WeightCoefficients {
  LikelihoodKind kind = LikelihoodKind::gaussian;
  double center = 0.0;
  double scale = 0.0;
  double offset = 0.0;

  double operator()(double L) const {
    double w;
    if (kind == LikelihoodKind::gaussian) {
      const double d = L - center;
      w = d * d * scale + offset;
    } else {
      w = L * scale + offset;
    }
    return w > 0.0 ? w : 0.0;
  }
  /// out[j] = weight(L[j]) through the active SIMD table.
  void apply(std::span<const double> L, std::span<double> out) const;
};

/// In-class log density of one entry.
double log_lik_entry(double L, int k, const LikelihoodModel& model);

/// Background log density of one entry, as compared against class k (the
/// gaussian pairwise_bound background shares class k's mean).
double log_lik_background(double L, int k, const LikelihoodModel& model);

/// Coefficients of w_k. Throws Error(state) on an uncalibrated model and
/// Error(model) on non-positive variances or rates.
WeightCoefficients weight_coefficients(int k, const LikelihoodModel& model);

double edge_weight(double L, int k, const LikelihoodModel& model);

/// g(a, b) = (ln a - ln b) * a * b / (a - b), with g(b, b) = b.
double background_bound(double a, double b);

/// Chooses the background parameters for the model's policy.
LikelihoodModel calibrate_background(const DistanceMatrix& L, LikelihoodModel model);

/// 1e-6 times the variance of all off-diagonal distances (or 1e-12 if the
/// distances are constant).
double default_variance_floor(const DistanceMatrix& L);

struct PriorKind {
  enum class Tag { connected, k_neighbor };
  Tag tag = Tag::connected;
  int K = 0;

  static PriorKind connected() { return {}; }
  static PriorKind k_neighbor(int K);
  bool is_connected() const { return tag == Tag::connected; }
};

/// Non-background entries of nu. Connected prior: undirected tree edges
/// (i < j). K-neighbor prior: directed i -> j out-neighbor edges.
struct NeighborEdge {
  int i = 0;
  int j = 0;
  int cls = 0;
  double w = 0.0;

  friend bool operator==(const NeighborEdge&, const NeighborEdge&) = default;
};

struct NeighborGraph {
  bool directed = false;
  std::vector<NeighborEdge> edges;  // sorted by (i, j)

  friend bool operator==(const NeighborGraph&, const NeighborGraph&) = default;
};

/// Throws Error(parameter) unless every label lies in 1..M and size == N.
void validate_labels(const Labeling& C, std::size_t N, int M);

/// MAP graph for fixed labels: a minimum spanning tree per class (connected
/// prior) or the K cheapest same-class out-neighbors per point (K-neighbor).
NeighborGraph map_graph_given_labels(const DistanceMatrix& L, const Labeling& C,
                                     const LikelihoodModel& model,
                                     const PriorKind& prior);

/// Log joint relative to the all-background state: minus the summed weight
/// of every non-background entry. Throws Error(invariant) if an edge's class
/// disagrees with the labels of its endpoints.
double log_joint(const DistanceMatrix& L, const Labeling& C,
                 const NeighborGraph& nu, const LikelihoodModel& model);

/// Admissibility of nu under the prior: per-class connectivity, or exactly K
/// same-class out-neighbors per point.
bool is_admissible(const Labeling& C, const NeighborGraph& nu, const PriorKind& prior);

struct MoveState {
  Labeling labels;
  NeighborGraph graph;
  double score = 0.0;
};

/// Exact best reassignment of point i (0-based) with the graph re-inferred
/// for the affected classes. Keeps the incumbent class on ties.
MoveState best_move(const DistanceMatrix& L, const MoveState& state, int i,
                    const LikelihoodModel& model, const PriorKind& prior);

/// Hard-EM update of the class scales from the entries nu assigns to them,
/// followed by background recalibration. Classes without edges keep their
/// parameters.
LikelihoodModel update_params(const DistanceMatrix& L, const Labeling& C,
                              const NeighborGraph& nu, const LikelihoodModel& model,
                              double floor);

/// When the hard-EM parameter update runs.
/// settled: only after a sweep that accepted no move, so the labels are a
///   local optimum for the current parameters first.
/// every_sweep: after every sweep.
/// alternate: even restarts settled, odd restarts every_sweep. Envelope
///   scores are comparable across restarts, so the best restart picks the
///   schedule that suits the data.
enum class MStepSchedule { settled, every_sweep, alternate };

struct FitConfig {
  int clusters = 2;
  LikelihoodKind likelihood = LikelihoodKind::gaussian;
  PriorKind prior = PriorKind::connected();
  BackgroundPolicy background = BackgroundPolicy::envelope;
  MStepSchedule schedule = MStepSchedule::alternate;
  int max_sweeps = 200;
  int restarts = 10;
  std::uint64_t seed = 0;
  double tolerance = 1e-8;
  std::optional<double> variance_floor;  // default: default_variance_floor(L)
  std::map<int, int> clamped;            // 0-based point index -> class
};

/// Throws Error(parameter) on an invalid configuration.
void validate_config(const FitConfig& config, std::size_t N);

/// Pins known labels; clamped points start in and never leave their class.
FitConfig clamp_labels(FitConfig config, const std::map<int, int>& known, std::size_t N);

struct FitDiagnostics {
  std::size_t checked_steps = 0;          // scored steps within fixed-background segments
  std::size_t monotonicity_violations = 0;  // steps that lowered the score by > 1e-9
  double min_step_delta = 0.0;
  std::size_t accepted_moves = 0;
  std::size_t clamped_pairs = 0;
};

struct FitResult {
  Labeling labels;
  NeighborGraph graph;
  LikelihoodModel model;
  double score = 0.0;
  std::vector<double> score_trace;     // best restart
  std::vector<double> restart_scores;
  int best_restart = 0;
  int sweeps = 0;                      // best restart
  std::size_t total_sweeps = 0;        // all restarts
  bool converged = false;
  std::uint64_t seed = 0;
  FitDiagnostics diagnostics;          // aggregated over every restart
  std::vector<double> sweep_seconds;   // wall time of each sweep, all restarts
};

FitResult fit(const DistanceMatrix& L, const FitConfig& config);

}  // namespace simclust
