#include "doctest.h"
#include "helpers.hpp"

#include "simclust/affinity.hpp"
#include "simclust/bench.hpp"
#include "simclust/error.hpp"
#include "simclust/latent_graph.hpp"
#include "simclust/oracle.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

using namespace simclust;

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

LikelihoodModel gaussian(std::vector<ClassParams> classes) {
  LikelihoodModel m;
  m.kind = LikelihoodKind::gaussian;
  m.classes = std::move(classes);
  return m;
}

LikelihoodModel exponential(std::vector<double> rates) {
  LikelihoodModel m;
  m.kind = LikelihoodKind::exponential;
  for (double r : rates) m.classes.push_back({r, 1.0});
  return m;
}

// Gaussian background sharing the class mean with a fixed variance.
LikelihoodModel with_background_variance(LikelihoodModel m, double sigma2_0) {
  m.background.policy = BackgroundPolicy::pairwise_bound;
  m.background.sigma2_0 = sigma2_0;
  m.background.calibrated = true;
  return m;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::invariant;
}

double state_score(const DistanceMatrix& L, const Labeling& C, const LikelihoodModel& m,
                   const PriorKind& prior = PriorKind::connected()) {
  return log_joint(L, C, map_graph_given_labels(L, C, m, prior), m);
}

}  // namespace

TEST_CASE("entry log-likelihoods") {
  const auto g = gaussian({{1.0, 1.0}});
  CHECK(log_lik_entry(1.0, 1, g) == doctest::Approx(-kHalfLog2Pi).epsilon(1e-12));
  CHECK(log_lik_entry(1.0, 1, g) == doctest::Approx(-0.918939).epsilon(1e-6));
  CHECK(log_lik_entry(3.0, 1, g) == doctest::Approx(-2.0 - kHalfLog2Pi).epsilon(1e-12));
  CHECK(log_lik_entry(0.0, 1, exponential({1.0})) == 0.0);
  CHECK(kind_of([] { (void)log_lik_entry(1.0, 1, gaussian({{1.0, 0.0}})); }) == ErrorKind::model);
  CHECK(kind_of([] { (void)log_lik_entry(1.0, 1, exponential({-1.0})); }) == ErrorKind::model);
}

TEST_CASE("edge weight is the background minus class log-density") {
  const auto m = with_background_variance(gaussian({{1.0, 1.0}}), 4.0);
  const double direct = log_lik_background(3.0, 1, m) - log_lik_entry(3.0, 1, m);
  CHECK(edge_weight(3.0, 1, m) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(edge_weight(3.0, 1, m) == doctest::Approx(0.5 * (4.0 - 1.0 - std::log(4.0))).epsilon(1e-12));
  CHECK(edge_weight(3.0, 1, m) == doctest::Approx(0.806854).epsilon(1e-6));

  const auto same = with_background_variance(gaussian({{1.0, 2.0}}), 2.0);
  for (double L : {0.0, 0.5, 1.0, 7.0}) CHECK(edge_weight(L, 1, same) == 0.0);

  auto e = exponential({2.0});
  e.background.policy = BackgroundPolicy::pairwise_bound;
  e.background.beta_0 = 2.0;
  e.background.calibrated = true;
  for (double L : {0.0, 0.5, 1.0, 7.0}) CHECK(edge_weight(L, 1, e) == 0.0);

  CHECK(kind_of([] { (void)edge_weight(1.0, 1, gaussian({{1.0, 1.0}})); }) == ErrorKind::state);
}

TEST_CASE("envelope weights are non-negative everywhere") {
  for (auto kind : {LikelihoodKind::gaussian, LikelihoodKind::exponential}) {
    LikelihoodModel m = kind == LikelihoodKind::gaussian ? gaussian({{0.3, 1e-4}, {2.0, 0.5}})
                                                         : exponential({0.2, 40.0});
    m.background.floor = 1e-6;
    const auto L = distance_matrix(testing::points_1d({0, 0.3, 1.0, 4.0}));
    const auto cal = calibrate_background(L, m);
    for (int k = 1; k <= 2; ++k) {
      for (double x = 0.0; x < 10.0; x += 0.01) {
        const double direct = log_lik_background(x, k, cal) - log_lik_entry(x, k, cal);
        CHECK(direct >= -1e-12);
        CHECK(edge_weight(x, k, cal) == doctest::Approx(std::max(0.0, direct)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("pairwise calibration") {
  CHECK(background_bound(1.5, 1.5) == 1.5);
  CHECK(background_bound(1.5 * (1 + 1e-9), 1.5) == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(background_bound(4.0, 1.0) == doctest::Approx(std::log(4.0) * 4.0 / 3.0).epsilon(1e-14));

  // Two points whose squared residual from the class mean is g(4, 1).
  const double gamma = background_bound(4.0, 1.0);
  auto m = gaussian({{1.0, 1.0}});
  m.background.policy = BackgroundPolicy::pairwise_bound;
  const auto L = distance_matrix(testing::points_1d({0.0, 1.0 + std::sqrt(gamma)}));
  const auto cal = calibrate_background(L, m);
  CHECK_FALSE(cal.background.clamped);
  CHECK(cal.background.sigma2_0 == doctest::Approx(4.0).epsilon(1e-9));

  // A pair within one class standard deviation forces the fallback.
  const auto near = distance_matrix(testing::points_1d({0.0, 1.1}));
  const auto fallback = calibrate_background(near, m);
  CHECK(fallback.background.clamped);
  CHECK(fallback.background.sigma2_0 == doctest::Approx(1.0 + 1e-6).epsilon(1e-12));
  CHECK(fallback.background.clamped_pairs == 1);
}

TEST_CASE("exponential pairwise calibration dominates when feasible") {
  auto m = exponential({2.0});
  m.background.policy = BackgroundPolicy::pairwise_bound;
  const auto L = distance_matrix(testing::points_1d({0.0, 1.0, 3.0}));
  const auto cal = calibrate_background(L, m);
  CHECK_FALSE(cal.background.clamped);
  for (double x : {1.0, 2.0, 3.0}) {
    CHECK(log_lik_background(x, 1, cal) >= log_lik_entry(x, 1, cal));
  }
}

TEST_CASE("MAP graph given labels") {
  const auto L = distance_matrix(testing::points_1d({0, 1, 3}));
  auto m = gaussian({{1.0, 1.0}});
  m.background.floor = default_variance_floor(L);
  const auto cal = calibrate_background(L, m);
  const auto nu = map_graph_given_labels(L, {1, 1, 1}, cal, PriorKind::connected());
  REQUIRE(nu.edges.size() == 2);
  CHECK(nu.edges[0].i == 0);
  CHECK(nu.edges[0].j == 1);
  CHECK(nu.edges[1].i == 1);
  CHECK(nu.edges[1].j == 2);
  for (const auto& e : nu.edges) CHECK(e.w < edge_weight(L(0, 2), 1, cal));

  auto three = calibrate_background(L, gaussian({{1, 1}, {1, 1}, {1, 1}}));
  CHECK(map_graph_given_labels(L, {1, 2, 3}, three, PriorKind::connected()).edges.empty());

  const auto L4 = distance_matrix(testing::points_1d({0, 1, 5, 7}));
  const auto m2 = calibrate_background(L4, gaussian({{1, 1}, {1, 1}}));
  const auto knn = map_graph_given_labels(L4, {1, 2, 1, 2}, m2, PriorKind::k_neighbor(1));
  CHECK(knn.directed);
  REQUIRE(knn.edges.size() == 4);
  for (const auto& e : knn.edges) CHECK((e.i + 2 == e.j || e.j + 2 == e.i));
  CHECK(kind_of([&] {
          (void)map_graph_given_labels(L4, {1, 1, 1, 2}, m2, PriorKind::k_neighbor(1));
        }) == ErrorKind::infeasible_prior);
}

TEST_CASE("log joint") {
  const auto L = distance_matrix(testing::points_1d({0, 3}));
  const auto m = with_background_variance(gaussian({{1.0, 1.0}, {1.0, 1.0}}), 4.0);
  CHECK(log_joint(L, {1, 2}, {}, m) == 0.0);
  NeighborGraph one{false, {{0, 1, 1, 0.0}}};
  CHECK(log_joint(L, {1, 1}, one, m) == doctest::Approx(-0.806854).epsilon(1e-6));
  CHECK(kind_of([&] { (void)log_joint(L, {1, 2}, one, m); }) == ErrorKind::invariant);

  Rng rng(3);
  const auto Lr = distance_matrix(testing::random_points(rng, 12));
  const auto mr = calibrate_background(Lr, gaussian({{0.2, 0.01}, {0.5, 0.1}}));
  for (int trial = 0; trial < 10; ++trial) {
    Labeling C(12);
    for (auto& c : C) c = 1 + static_cast<int>(rng.below(2));
    const auto nu = map_graph_given_labels(Lr, C, mr, PriorKind::connected());
    CHECK(is_admissible(C, nu, PriorKind::connected()));
    CHECK(log_joint(Lr, C, nu, mr) <= 0.0);
  }
}

TEST_CASE("best move reassigns a mislabeled point") {
  const auto L = distance_matrix(testing::points_1d({0, 1, 10, 11}));
  const auto m = calibrate_background(L, gaussian({{1.0, 0.25}, {1.0, 0.25}}));
  MoveState s;
  s.labels = {1, 2, 2, 2};
  s.graph = map_graph_given_labels(L, s.labels, m, PriorKind::connected());
  s.score = log_joint(L, s.labels, s.graph, m);
  const auto next = best_move(L, s, 1, m, PriorKind::connected());
  CHECK(next.labels == Labeling{1, 1, 2, 2});
  CHECK(next.score == doctest::Approx(state_score(L, next.labels, m)).epsilon(1e-12));
  CHECK(next.score > s.score);
}

TEST_CASE("best move keeps the incumbent on a tie") {
  const auto L = distance_matrix(testing::points_1d({-1, 0, 1}));
  const auto m = calibrate_background(L, gaussian({{0.5, 0.2}, {0.5, 0.2}}));
  MoveState s;
  s.labels = {1, 1, 2};
  s.graph = map_graph_given_labels(L, s.labels, m, PriorKind::connected());
  s.score = log_joint(L, s.labels, s.graph, m);
  CHECK(best_move(L, s, 1, m, PriorKind::connected()).labels == s.labels);
}

TEST_CASE("best move with one class changes nothing") {
  Rng rng(1);
  const auto L = distance_matrix(testing::random_points(rng, 6));
  const auto m = calibrate_background(L, gaussian({{0.3, 0.05}}));
  MoveState s;
  s.labels.assign(6, 1);
  s.graph = map_graph_given_labels(L, s.labels, m, PriorKind::connected());
  s.score = log_joint(L, s.labels, s.graph, m);
  for (int i = 0; i < 6; ++i) CHECK(best_move(L, s, i, m, PriorKind::connected()).labels == s.labels);
}

TEST_CASE("best move is the exact argmax over a point's classes") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 7;
    const auto L = distance_matrix(testing::random_points(rng, n));
    const bool knn = trial % 3 == 2;
    const PriorKind prior = knn ? PriorKind::k_neighbor(1) : PriorKind::connected();
    const auto m = calibrate_background(
        L, trial % 2 ? exponential({2.0, 6.0, 3.0}) : gaussian({{0.2, 0.02}, {0.5, 0.1}, {0.3, 0.2}}));
    Labeling C = {1, 1, 2, 2, 3, 3, 1};
    for (int i = n - 1; i > 0; --i) std::swap(C[i], C[rng.below(static_cast<std::size_t>(i + 1))]);
    MoveState s{C, map_graph_given_labels(L, C, m, prior), 0.0};
    s.score = log_joint(L, C, s.graph, m);
    const int i = static_cast<int>(rng.below(n));
    const auto next = best_move(L, s, i, m, prior);
    double best = s.score;
    for (int c = 1; c <= 3; ++c) {
      Labeling alt = C;
      alt[i] = c;
      try {
        best = std::max(best, state_score(L, alt, m, prior));
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::infeasible_prior);
      }
    }
    CHECK(next.score == doctest::Approx(best).epsilon(1e-12));
    CHECK(next.score == doctest::Approx(state_score(L, next.labels, m, prior)).epsilon(1e-12));
  }
}

TEST_CASE("parameter update") {
  const auto L = distance_matrix(testing::points_1d({0, 2, 6}));
  const auto m = calibrate_background(L, gaussian({{1.0, 1.0}, {5.0, 7.0}}));
  NeighborGraph nu{false, {{0, 1, 1, 0.0}, {1, 2, 1, 0.0}}};
  const auto g = update_params(L, {1, 1, 1}, nu, m, 1e-9);
  CHECK(g.cls(1).beta == 3.0);
  CHECK(g.cls(1).sigma2 == 1.0);
  CHECK(g.cls(2).beta == 5.0);
  CHECK(g.cls(2).sigma2 == 7.0);
  CHECK(g.background.calibrated);

  const auto e = calibrate_background(L, exponential({1.0, 9.0}));
  const auto u = update_params(L, {1, 1, 1}, nu, e, 1e-9);
  CHECK(u.cls(1).beta == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(u.cls(2).beta == std::min(9.0, u.cls(2).beta));

  NeighborGraph tight{false, {{0, 1, 1, 0.0}}};
  const auto f = update_params(L, {1, 1, 2}, tight, m, 0.125);
  CHECK(f.cls(1).sigma2 == 0.125);
}

TEST_CASE("fit on two points with one class") {
  const auto L = distance_matrix(testing::points_1d({0, 2.5}));
  FitConfig c;
  c.clusters = 1;
  const auto r = fit(L, c);
  CHECK(r.labels == Labeling{1, 1});
  REQUIRE(r.graph.edges.size() == 1);
  CHECK(r.model.cls(1).beta == 2.5);
  CHECK(r.model.cls(1).sigma2 == default_variance_floor(L));
}

TEST_CASE("fit argument checks") {
  const auto L = distance_matrix(testing::points_1d({0, 1, 2}));
  FitConfig c;
  c.clusters = 0;
  CHECK(kind_of([&] { (void)fit(L, c); }) == ErrorKind::parameter);
  c.clusters = 2;
  c.restarts = 0;
  CHECK(kind_of([&] { (void)fit(L, c); }) == ErrorKind::parameter);
  c.restarts = 1;
  c.tolerance = 0.0;
  CHECK(kind_of([&] { (void)fit(L, c); }) == ErrorKind::parameter);
  CHECK(kind_of([&] { (void)clamp_labels(FitConfig{}, {{5, 1}}, 3); }) == ErrorKind::parameter);
  CHECK(kind_of([&] { (void)clamp_labels(FitConfig{}, {{0, 3}}, 3); }) == ErrorKind::parameter);
}

TEST_CASE("two chains are the MAP and every restart finds them") {
  const auto p = testing::two_chains();
  const auto L = distance_matrix(p);
  FitConfig c;
  c.restarts = 1;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    c.seed = seed;
    const auto r = fit(L, c);
    CHECK(bench::best_perm_accuracy(r.labels, *p.labels) == 1.0);
    // Every other two-class labeling scores lower under the fitted model.
    for (unsigned mask = 0; mask < 512; ++mask) {
      Labeling alt(10, 1);
      for (int i = 1; i < 10; ++i) alt[i] = (mask >> (i - 1)) & 1u ? 2 : 1;
      if (bench::best_perm_accuracy(alt, *p.labels) == 1.0) continue;
      CHECK(state_score(L, alt, r.model) < r.score);
    }
  }
}

TEST_CASE("clamping") {
  const auto p = testing::two_chains();
  const auto L = distance_matrix(p);
  FitConfig plain;
  plain.seed = 4;
  const auto free_fit = fit(L, plain);
  const auto none = fit(L, clamp_labels(plain, {}, 10));
  CHECK(none.labels == free_fit.labels);
  CHECK(none.score_trace == free_fit.score_trace);

  const auto one_each = clamp_labels(plain, {{0, 2}, {9, 1}}, 10);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto c = one_each;
    c.seed = seed;
    const auto r = fit(L, c);
    CHECK(r.labels == Labeling{2, 2, 2, 2, 2, 1, 1, 1, 1, 1});
  }

  std::map<int, int> all;
  for (int i = 0; i < 10; ++i) all[i] = 1 + i % 2;
  const auto pinned = fit(L, clamp_labels(plain, all, 10));
  for (int i = 0; i < 10; ++i) CHECK(pinned.labels[i] == 1 + i % 2);
  CHECK(pinned.diagnostics.accepted_moves == 0);
}

TEST_CASE("fit is deterministic") {
  Rng rng(6);
  const auto L = distance_matrix(testing::random_points(rng, 30));
  FitConfig c;
  c.seed = 17;
  c.restarts = 3;
  const auto a = fit(L, c);
  const auto b = fit(L, c);
  CHECK(a.labels == b.labels);
  CHECK(a.score_trace == b.score_trace);
  CHECK(a.restart_scores == b.restart_scores);
}

TEST_CASE("scores never drop within a fixed background") {
  Rng rng(21);
  for (auto kind : {LikelihoodKind::gaussian, LikelihoodKind::exponential}) {
    for (auto schedule : {MStepSchedule::settled, MStepSchedule::every_sweep}) {
      const auto L = distance_matrix(testing::random_points(rng, 40));
      FitConfig c;
      c.likelihood = kind;
      c.schedule = schedule;
      c.restarts = 3;
      const auto r = fit(L, c);
      CHECK(r.diagnostics.checked_steps > 0);
      CHECK(r.diagnostics.monotonicity_violations == 0);
      for (std::size_t t = 1; t < r.score_trace.size(); ++t) {
        CHECK(r.score_trace[t] >= r.score_trace[t - 1] - 1e-9);
      }
    }
  }
}

TEST_CASE("map graph is invariant to a common rescaling") {
  Rng rng(44);
  const auto p = testing::random_points(rng, 10);
  auto q = p;
  q.coords *= 3.5;
  const auto L = distance_matrix(p), Ls = distance_matrix(q);
  const Labeling C = {1, 2, 1, 2, 1, 2, 1, 1, 2, 2};
  auto m = gaussian({{0.2, 0.01}, {0.4, 0.05}});
  m.background.floor = 1e-6;
  auto ms = gaussian({{0.7, 0.01 * 3.5 * 3.5}, {1.4, 0.05 * 3.5 * 3.5}});
  ms.background.floor = 1e-6 * 3.5 * 3.5;
  for (const auto& prior : {PriorKind::connected(), PriorKind::k_neighbor(2)}) {
    const auto a = map_graph_given_labels(L, C, calibrate_background(L, m), prior);
    const auto b = map_graph_given_labels(Ls, C, calibrate_background(Ls, ms), prior);
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t e = 0; e < a.edges.size(); ++e) {
      CHECK(a.edges[e].i == b.edges[e].i);
      CHECK(a.edges[e].j == b.edges[e].j);
    }
  }
}

TEST_CASE("map graph is equivariant under point relabeling") {
  Rng rng(45);
  const auto p = testing::random_points(rng, 9);
  const Labeling C = {1, 2, 1, 2, 1, 2, 1, 1, 2};
  std::vector<int> perm = {3, 7, 0, 8, 2, 5, 1, 6, 4};
  PointSet q = p;
  Labeling Cq(9);
  for (int i = 0; i < 9; ++i) {
    q.coords.row(perm[i]) = p.coords.row(i);
    Cq[perm[i]] = C[i];
  }
  const auto L = distance_matrix(p), Lq = distance_matrix(q);
  const auto m = calibrate_background(L, gaussian({{0.2, 0.02}, {0.3, 0.05}}));
  const auto mq = calibrate_background(Lq, gaussian({{0.2, 0.02}, {0.3, 0.05}}));
  const auto a = map_graph_given_labels(L, C, m, PriorKind::connected());
  const auto b = map_graph_given_labels(Lq, Cq, mq, PriorKind::connected());
  CHECK(log_joint(L, C, a, m) == doctest::Approx(log_joint(Lq, Cq, b, mq)).epsilon(1e-12));
  std::set<std::pair<int, int>> mapped, direct;
  for (const auto& e : a.edges) mapped.insert(std::minmax(perm[e.i], perm[e.j]));
  for (const auto& e : b.edges) direct.insert({e.i, e.j});
  CHECK(mapped == direct);
}

TEST_CASE("one shared class reduces to a plain spanning tree") {
  Rng rng(46);
  const auto L = distance_matrix(testing::random_points(rng, 12));
  const auto m = calibrate_background(L, gaussian({{0.2, 0.05}}));
  const auto nu = map_graph_given_labels(L, Labeling(12, 1), m, PriorKind::connected());
  std::vector<int> all(12);
  std::iota(all.begin(), all.end(), 0);
  const auto mst = minimum_spanning_tree(all, [&](int a, int b) {
    return edge_weight(L(static_cast<std::size_t>(a), static_cast<std::size_t>(b)), 1, m);
  });
  REQUIRE(nu.edges.size() == mst.edges.size());
  std::set<std::pair<int, int>> a, b;
  for (const auto& e : nu.edges) a.insert({e.i, e.j});
  for (const auto& e : mst.edges) b.insert({e.i, e.j});
  CHECK(a == b);

  // Cutting the heaviest edges of that tree separates two chains.
  const auto p = testing::two_chains();
  const auto Lc = distance_matrix(p);
  const auto mc = calibrate_background(Lc, gaussian({{1.0, 0.1}}));
  std::vector<int> ten(10);
  std::iota(ten.begin(), ten.end(), 0);
  const auto tree = minimum_spanning_tree(ten, [&](int x, int y) {
    return edge_weight(Lc(static_cast<std::size_t>(x), static_cast<std::size_t>(y)), 1, mc);
  });
  CHECK(split_heaviest(tree, 2) == *p.labels);
}

TEST_CASE("per-class trees beat every connected edge subset") {
  Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const auto L = distance_matrix(testing::random_points(rng, 8));
    const auto m = calibrate_background(L, gaussian({{0.3, 0.05}, {0.2, 0.1}}));
    const Labeling C = {1, 2, 1, 2, 1, 2, 1, 2};
    const auto nu = map_graph_given_labels(L, C, m, PriorKind::connected());
    double exhaustive = 0.0;
    for (int k = 1; k <= 2; ++k) {
      std::vector<int> members;
      for (int i = 0; i < 8; ++i) {
        if (C[i] == k) members.push_back(i);
      }
      exhaustive += oracle::best_connected_subgraph(members, [&](int a, int b) {
                      return edge_weight(L(static_cast<std::size_t>(a), static_cast<std::size_t>(b)), k, m);
                    }).total();
    }
    CHECK(log_joint(L, C, nu, m) == doctest::Approx(-exhaustive).epsilon(1e-12));
  }
}
