#include "simclust/oracle.hpp"

#include "simclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace simclust::oracle {
namespace {

bool connects(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  if (n <= 1) return true;
  std::vector<std::size_t> comp(n);
  for (std::size_t i = 0; i < n; ++i) comp[i] = i;
  // n <= 8: relabel until stable.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [a, b] : edges) {
      const std::size_t lo = std::min(comp[a], comp[b]);
      if (comp[a] != lo || comp[b] != lo) {
        comp[a] = comp[b] = lo;
        changed = true;
      }
    }
  }
  return std::all_of(comp.begin(), comp.end(), [](std::size_t c) { return c == 0; });
}

// Prim's algorithm on a dense weight table; class sizes here are tiny.
std::vector<std::pair<int, int>> prim(const std::vector<int>& group,
                                      const std::vector<std::vector<double>>& w) {
  const std::size_t n = group.size();
  std::vector<std::pair<int, int>> out;
  if (n <= 1) return out;
  std::vector<bool> in(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> via(n, 0);
  in[0] = true;
  for (std::size_t v = 1; v < n; ++v) {
    best[v] = w[0][v];
    via[v] = 0;
  }
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!in[v] && (pick == n || best[v] < best[pick])) pick = v;
    }
    in[pick] = true;
    out.emplace_back(group[via[pick]], group[pick]);
    for (std::size_t v = 0; v < n; ++v) {
      if (!in[v] && w[pick][v] < best[v]) {
        best[v] = w[pick][v];
        via[v] = pick;
      }
    }
  }
  return out;
}

NeighborGraph optimal_graph(const DistanceMatrix& L, const Labeling& C, int M,
                            const LikelihoodModel& model, const PriorKind& prior) {
  NeighborGraph nu;
  nu.directed = !prior.is_connected();
  for (int c = 1; c <= M; ++c) {
    std::vector<int> group;
    for (std::size_t i = 0; i < C.size(); ++i) {
      if (C[i] == c) group.push_back(static_cast<int>(i));
    }
    const std::size_t n = group.size();
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b) {
          w[a][b] = edge_weight(L(static_cast<std::size_t>(group[a]), static_cast<std::size_t>(group[b])),
                                c, model);
        }
      }
    }
    if (prior.is_connected()) {
      for (auto [a, b] : prim(group, w)) {
        if (a > b) std::swap(a, b);
        nu.edges.push_back({a, b, c, edge_weight(L(static_cast<std::size_t>(a), static_cast<std::size_t>(b)), c, model)});
      }
    } else {
      for (std::size_t a = 0; a < n; ++a) {
        std::vector<std::pair<double, int>> cand;
        for (std::size_t b = 0; b < n; ++b) {
          if (a != b) cand.emplace_back(w[a][b], group[b]);
        }
        std::sort(cand.begin(), cand.end());
        for (int k = 0; k < prior.K; ++k) {
          nu.edges.push_back({group[a], cand[static_cast<std::size_t>(k)].second, c,
                              cand[static_cast<std::size_t>(k)].first});
        }
      }
    }
  }
  std::sort(nu.edges.begin(), nu.edges.end(), [](const NeighborEdge& x, const NeighborEdge& y) {
    return x.i != y.i ? x.i < y.i : x.j < y.j;
  });
  return nu;
}

}  // namespace

EdgeSet best_connected_subgraph(std::span<const int> members, const WeightFn& weight) {
  std::vector<int> nodes(members.begin(), members.end());
  std::sort(nodes.begin(), nodes.end());
  if (nodes.size() > 5) {
    fail(ErrorKind::size, "exhaustive subgraph search is limited to 5 members, got " +
                              std::to_string(nodes.size()));
  }
  const std::size_t n = nodes.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> w;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      pairs.emplace_back(a, b);
      w.push_back(weight(nodes[a], nodes[b]));
    }
  }

  EdgeSet best;
  best.members = nodes;
  if (n <= 1) return best;
  const std::size_t subsets = std::size_t{1} << pairs.size();
  bool found = false;
  double best_total = 0.0;
  std::vector<WeightedEdge> chosen;
  std::vector<std::pair<std::size_t, std::size_t>> local;
  for (std::size_t mask = 1; mask < subsets; ++mask) {
    local.clear();
    chosen.clear();
    double total = 0.0;
    for (std::size_t e = 0; e < pairs.size(); ++e) {
      if (mask & (std::size_t{1} << e)) {
        local.push_back(pairs[e]);
        chosen.push_back({nodes[pairs[e].first], nodes[pairs[e].second], w[e]});
        total += w[e];
      }
    }
    if (!connects(n, local)) continue;
    bool better = !found || total < best_total;
    if (found && total == best_total) {
      if (chosen.size() != best.edges.size()) {
        better = chosen.size() < best.edges.size();
      } else {
        better = std::lexicographical_compare(
            chosen.begin(), chosen.end(), best.edges.begin(), best.edges.end(),
            [](const WeightedEdge& x, const WeightedEdge& y) {
              return x.i != y.i ? x.i < y.i : x.j < y.j;
            });
      }
    }
    if (better) {
      found = true;
      best_total = total;
      best.edges = chosen;
    }
  }
  return best;
}

OracleResult enumerate_map(const DistanceMatrix& L, int M, const LikelihoodModel& model,
                           const PriorKind& prior) {
  const std::size_t N = L.size();
  if (N > 8) fail(ErrorKind::size, "labeling enumeration is limited to 8 points");
  if (N == 0) fail(ErrorKind::parameter, "enumeration needs at least one point");
  if (M < 1 || M > model.num_classes()) fail(ErrorKind::parameter, "class count out of range");

  OracleResult best;
  bool found = false;
  // Every labeling in {1..M}^N, lexicographically. Relabelings are skipped
  // only when all classes share one parameter set; otherwise they are
  // distinct states.
  bool exchangeable = true;
  for (int k = 2; k <= M; ++k) {
    exchangeable = exchangeable && model.cls(k).beta == model.cls(1).beta &&
                   model.cls(k).sigma2 == model.cls(1).sigma2;
  }
  const auto canonical = [&](const Labeling& C) {
    int next = 1;
    for (int c : C) {
      if (c > next) return false;
      if (c == next) ++next;
    }
    return true;
  };
  Labeling C(N, 1);
  while (true) {
    bool feasible = !exchangeable || canonical(C);
    if (feasible) ++best.states;
    if (feasible && !prior.is_connected()) {
      std::vector<std::size_t> sizes(static_cast<std::size_t>(M), 0);
      for (int c : C) ++sizes[static_cast<std::size_t>(c - 1)];
      for (std::size_t s : sizes) {
        if (s != 0 && s <= static_cast<std::size_t>(prior.K)) feasible = false;
      }
    }
    if (feasible) {
      NeighborGraph nu = optimal_graph(L, C, M, model, prior);
      const double score = log_joint(L, C, nu, model);
      const bool better = !found || score > best.score ||
                          (score == best.score && nu.edges.size() < best.graph.edges.size());
      if (better) {
        found = true;
        best.labels = C;
        best.graph = std::move(nu);
        best.score = score;
      }
    }

    std::size_t pos = N;
    while (pos > 0 && C[pos - 1] == M) C[--pos] = 1;
    if (pos == 0) break;
    ++C[pos - 1];
  }
  if (!found) {
    fail(ErrorKind::infeasible_prior, "no labeling satisfies the K-neighbor prior");
  }
  return best;
}

std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd A) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n) fail(ErrorKind::input, "eigenvalues need a square matrix");
  const double scale = std::max(A.norm(), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    }
    if (std::sqrt(off) <= 1e-15 * scale) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> values(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = A(i, i);
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

double rank_error_reference(const Eigen::MatrixXd& A, int t) {
  const std::vector<double> values = jacobi_eigenvalues(A);
  if (t < 0 || static_cast<std::size_t>(t) > values.size()) {
    fail(ErrorKind::parameter, "rank t out of range");
  }
  double sum = 0.0;
  for (std::size_t i = static_cast<std::size_t>(t); i < values.size(); ++i) {
    sum += values[i] * values[i];
  }
  return std::sqrt(sum);
}

}  // namespace simclust::oracle
