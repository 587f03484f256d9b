#pragma once

// JSON forms of results. Field order is fixed and every number is written
// with 17 significant digits, so identical results give identical bytes.

#include "simclust/bench.hpp"
#include "simclust/latent_graph.hpp"
#include "simclust/spectral.hpp"

#include "json.hpp"

#include <string>

namespace simclust {

using Json = nlohmann::ordered_json;

Json to_json(const FitResult& result, const FitConfig& config);
Json to_json(const SpectralResult& result);
Json to_json(const bench::MetricReport& report);

/// Serializes with 17-significant-digit numbers; non-finite numbers become null.
std::string dump(const Json& value);

/// The "labels" array of a fit or spectral result.
Labeling labels_from_json(const Json& doc);

const char* to_string(LikelihoodKind kind);
const char* to_string(BackgroundPolicy policy);

}  // namespace simclust
