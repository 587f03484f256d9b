#include "simclust/serialize.hpp"

#include "simclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string_view>

namespace simclust {
namespace {

void write_number(double x, std::string& out) {
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
  // Keep floats recognizable as floats.
  if (std::string_view(buf).find_first_of(".eEn") == std::string_view::npos) out += ".0";
}

void write_string(const std::string& s, std::string& out) {
  // Reuse the library's escaping for strings.
  out += Json(s).dump();
}

void write(const Json& v, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        write_string(key, out);
        out += ": ";
        write(item, depth + 1, out);
      }
      out += '\n' + close + '}';
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_primitive(); });
      out += '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) out += '\n' + pad;
        write(item, depth + 1, out);
      }
      if (!flat) out += '\n' + close;
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      write_number(v.get<double>(), out);
      return;
    case Json::value_t::string:
      write_string(v.get<std::string>(), out);
      return;
    default:
      out += v.dump();
      return;
  }
}

Json number_array(const std::vector<double>& xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(x);
  return out;
}

}  // namespace

const char* to_string(LikelihoodKind kind) {
  return kind == LikelihoodKind::gaussian ? "gaussian" : "exponential";
}

const char* to_string(BackgroundPolicy policy) {
  return policy == BackgroundPolicy::envelope ? "envelope" : "pairwise_bound";
}

std::string dump(const Json& value) {
  std::string out;
  write(value, 0, out);
  out += '\n';
  return out;
}

Json to_json(const FitResult& r, const FitConfig& config) {
  Json doc;
  doc["kind"] = "latent_graph_fit";
  doc["likelihood"] = to_string(r.model.kind);
  Json prior;
  prior["kind"] = config.prior.is_connected() ? "connected" : "kneighbor";
  if (!config.prior.is_connected()) prior["K"] = config.prior.K;
  doc["prior"] = prior;
  doc["clusters"] = r.model.num_classes();
  doc["seed"] = r.seed;
  doc["labels"] = r.labels;

  Json edges = Json::array();
  for (const auto& e : r.graph.edges) edges.push_back(Json::array({e.i, e.j, e.cls, e.w}));
  doc["directed"] = r.graph.directed;
  doc["edges"] = edges;

  Json classes = Json::array();
  for (const auto& p : r.model.classes) {
    Json c;
    c["beta"] = p.beta;
    if (r.model.kind == LikelihoodKind::gaussian) c["sigma2"] = p.sigma2;
    classes.push_back(c);
  }
  doc["classes"] = classes;

  const Background& bg = r.model.background;
  Json background;
  background["policy"] = to_string(bg.policy);
  background["floor"] = bg.floor;
  if (r.model.kind == LikelihoodKind::gaussian) {
    background["sigma2_0"] = bg.sigma2_0;
  } else {
    background["beta_0"] = bg.beta_0;
  }
  background["clamped"] = bg.clamped;
  background["clamped_pairs"] = bg.clamped_pairs;
  doc["background"] = background;

  doc["score"] = r.score;
  doc["score_trace"] = number_array(r.score_trace);
  doc["restart_scores"] = number_array(r.restart_scores);
  doc["best_restart"] = r.best_restart;
  doc["sweeps"] = r.sweeps;
  doc["total_sweeps"] = r.total_sweeps;
  doc["converged"] = r.converged;

  Json diag;
  diag["checked_steps"] = r.diagnostics.checked_steps;
  diag["monotonicity_violations"] = r.diagnostics.monotonicity_violations;
  diag["min_step_delta"] = r.diagnostics.min_step_delta;
  diag["accepted_moves"] = r.diagnostics.accepted_moves;
  diag["clamped_pairs"] = r.diagnostics.clamped_pairs;
  doc["diagnostics"] = diag;
  return doc;
}

Json to_json(const SpectralResult& r) {
  Json doc;
  doc["kind"] = "spectral";
  doc["mode"] = to_string(r.mode);
  doc["gamma"] = r.gamma;
  doc["distortion"] = r.distortion;
  std::vector<double> eig(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size());
  doc["eigenvalues"] = number_array(eig);
  doc["zero_rows"] = r.zero_rows;
  Json grid = Json::array();
  for (const auto& g : r.grid) {
    Json t;
    t["gamma"] = g.gamma;
    t["distortion"] = g.distortion;
    t["usable"] = g.usable;
    if (!g.note.empty()) t["note"] = g.note;
    grid.push_back(t);
  }
  doc["grid"] = grid;
  doc["labels"] = r.labels;
  return doc;
}

Json to_json(const bench::MetricReport& m) {
  Json doc;
  doc["accuracy"] = m.accuracy;
  doc["ari"] = m.ari;
  doc["pred_classes"] = m.pred_classes;
  doc["truth_classes"] = m.truth_classes;
  doc["confusion"] = m.confusion;
  return doc;
}

Labeling labels_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("labels") || !doc["labels"].is_array()) {
    fail(ErrorKind::parse, "document has no labels array");
  }
  Labeling out;
  for (const auto& v : doc["labels"]) {
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      fail(ErrorKind::parse, "labels must be positive integers");
    }
    out.push_back(v.get<int>());
  }
  if (out.empty()) fail(ErrorKind::parse, "labels array is empty");
  return out;
}

}  // namespace simclust
