#include "simclust/error.hpp"
#include "simclust/kernels.hpp"
#include "simclust/latent_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace simclust {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_class(int k, const LikelihoodModel& model) {
  if (k < 1 || k > model.num_classes()) {
    fail(ErrorKind::parameter, "class " + std::to_string(k) + " out of range");
  }
  const ClassParams& p = model.cls(k);
  if (model.kind == LikelihoodKind::gaussian) {
    if (!(p.sigma2 > 0.0) || !std::isfinite(p.beta)) {
      fail(ErrorKind::model, "class " + std::to_string(k) + " needs a positive variance");
    }
  } else if (!(p.beta > 0.0) || !std::isfinite(p.beta)) {
    fail(ErrorKind::model, "class " + std::to_string(k) + " needs a positive rate");
  }
}

double exp_rate_ceiling(double floor) { return 1.0 / std::sqrt(floor); }

// Off-diagonal entries i < j, sorted ascending.
std::vector<double> sorted_pairs(const DistanceMatrix& L) {
  const std::size_t n = L.size();
  std::vector<double> out;
  out.reserve(n * (n - 1) / 2);
  for (std::size_t j = 1; j < n; ++j) {
    const auto col = L.column(j);
    out.insert(out.end(), col.begin(), col.begin() + static_cast<std::ptrdiff_t>(j));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t count_negative_pairs(const DistanceMatrix& L, const LikelihoodModel& model) {
  const std::size_t n = L.size();
  std::size_t count = 0;
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      for (int k = 1; k <= model.num_classes(); ++k) {
        if (log_lik_entry(L(i, j), k, model) > log_lik_background(L(i, j), k, model)) {
          ++count;
          break;
        }
      }
    }
  }
  return count;
}

// Largest a > b with g(a, b) <= gamma; requires gamma > b.
double invert_bound(double gamma, double b) {
  double lo = b;
  double hi = 2.0 * b;
  while (background_bound(hi, b) <= gamma) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return lo;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (background_bound(mid, b) <= gamma) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

void calibrate_gaussian_pairwise(const DistanceMatrix& L, LikelihoodModel& model) {
  Background& bg = model.background;
  const std::size_t n = L.size();
  double gamma = std::numeric_limits<double>::infinity();
  for (const ClassParams& p : model.classes) {
    for (std::size_t j = 1; j < n; ++j) {
      for (std::size_t i = 0; i < j; ++i) {
        const double d = L(i, j) - p.beta;
        gamma = std::min(gamma, d * d);
      }
    }
  }
  // alpha = 0 only when some L_ij equals a class mean exactly.
  gamma = std::max(gamma, 1e-12);

  double max_var = 0.0;
  for (const ClassParams& p : model.classes) max_var = std::max(max_var, p.sigma2);

  bool feasible = gamma > max_var;
  double sigma2_0 = std::numeric_limits<double>::infinity();
  if (feasible) {
    for (const ClassParams& p : model.classes) {
      sigma2_0 = std::min(sigma2_0, invert_bound(gamma, p.sigma2));
    }
    feasible = sigma2_0 > max_var && std::isfinite(sigma2_0);
  }
  bg.calibrated = true;
  if (feasible) {
    bg.sigma2_0 = sigma2_0;
    bg.clamped = false;
    bg.clamped_pairs = 0;
  } else {
    bg.sigma2_0 = (1.0 + 1e-6) * max_var;
    bg.clamped = true;
    bg.clamped_pairs = n > 1 ? count_negative_pairs(L, model) : 0;
  }
}

void calibrate_exponential_pairwise(const DistanceMatrix& L, LikelihoodModel& model) {
  Background& bg = model.background;
  const std::vector<double> pairs = sorted_pairs(L);

  double lo_rate = std::numeric_limits<double>::infinity();
  double hi_rate = 0.0;
  for (const ClassParams& p : model.classes) {
    lo_rate = std::min(lo_rate, p.beta);
    hi_rate = std::max(hi_rate, p.beta);
  }

  // Class k is dominated by the background at L unless
  //   beta_k > beta_0 and L < t_k,  or  beta_k < beta_0 and L > t_k,
  // with t_k = ln(beta_k / beta_0) / (beta_k - beta_0).
  auto violations = [&](double beta_0) {
    double below = -std::numeric_limits<double>::infinity();
    double above = std::numeric_limits<double>::infinity();
    for (const ClassParams& p : model.classes) {
      const double t = std::log(p.beta / beta_0) / (p.beta - beta_0);
      if (p.beta > beta_0) {
        below = std::max(below, t);
      } else {
        above = std::min(above, t);
      }
    }
    if (below >= above) return pairs.size();
    const auto n_below = static_cast<std::size_t>(
        std::lower_bound(pairs.begin(), pairs.end(), below) - pairs.begin());
    const auto n_above = static_cast<std::size_t>(
        pairs.end() - std::upper_bound(pairs.begin(), pairs.end(), above));
    return n_below + n_above;
  };

  constexpr int kGrid = 601;
  const double log_lo = std::log(lo_rate) - 3.0 * std::numbers::ln10;
  const double log_hi = std::log(hi_rate) + 3.0 * std::numbers::ln10;
  double best_rate = lo_rate * 1e-3;
  std::size_t best_count = std::numeric_limits<std::size_t>::max();
  for (int g = 0; g < kGrid; ++g) {
    const double rate = std::exp(log_lo + (log_hi - log_lo) * g / (kGrid - 1));
    // beta_0 == beta_k makes the two densities identical.
    bool coincides = false;
    for (const ClassParams& p : model.classes) {
      if (std::abs(std::log(rate / p.beta)) < 1e-9) coincides = true;
    }
    if (coincides) continue;
    const std::size_t c = violations(rate);
    if (c < best_count) {
      best_count = c;
      best_rate = rate;
    }
  }
  bg.beta_0 = best_rate;
  bg.calibrated = true;
  bg.clamped = best_count > 0;
  bg.clamped_pairs = best_count;
}

}  // namespace

double log_lik_entry(double L, int k, const LikelihoodModel& model) {
  check_class(k, model);
  const ClassParams& p = model.cls(k);
  if (model.kind == LikelihoodKind::gaussian) {
    const double d = L - p.beta;
    return -0.5 * (d * d / p.sigma2 + std::log(p.sigma2) + kLog2Pi);
  }
  if (L < 0.0) fail(ErrorKind::input, "exponential likelihood needs L >= 0");
  return std::log(p.beta) - p.beta * L;
}

double log_lik_background(double L, int k, const LikelihoodModel& model) {
  const Background& bg = model.background;
  if (bg.policy == BackgroundPolicy::envelope) {
    if (!(bg.floor > 0.0)) fail(ErrorKind::model, "variance floor must be positive");
    if (model.kind == LikelihoodKind::gaussian) {
      return -0.5 * (std::log(bg.floor) + kLog2Pi);
    }
    return std::log(exp_rate_ceiling(bg.floor));
  }
  if (model.kind == LikelihoodKind::gaussian) {
    check_class(k, model);
    if (!(bg.sigma2_0 > 0.0)) fail(ErrorKind::model, "background variance must be positive");
    const double d = L - model.cls(k).beta;
    return -0.5 * (d * d / bg.sigma2_0 + std::log(bg.sigma2_0) + kLog2Pi);
  }
  if (!(bg.beta_0 > 0.0)) fail(ErrorKind::model, "background rate must be positive");
  if (L < 0.0) fail(ErrorKind::input, "exponential likelihood needs L >= 0");
  return std::log(bg.beta_0) - bg.beta_0 * L;
}

WeightCoefficients weight_coefficients(int k, const LikelihoodModel& model) {
  const Background& bg = model.background;
  if (!bg.calibrated) fail(ErrorKind::state, "model background is not calibrated");
  check_class(k, model);
  const ClassParams& p = model.cls(k);
  WeightCoefficients c;
  c.kind = model.kind;
  if (model.kind == LikelihoodKind::gaussian) {
    c.center = p.beta;
    if (bg.policy == BackgroundPolicy::envelope) {
      c.scale = 0.5 / p.sigma2;
      c.offset = 0.5 * (std::log(p.sigma2) - std::log(bg.floor));
    } else {
      c.scale = 0.5 * (1.0 / p.sigma2 - 1.0 / bg.sigma2_0);
      c.offset = 0.5 * (std::log(p.sigma2) - std::log(bg.sigma2_0));
    }
  } else {
    if (bg.policy == BackgroundPolicy::envelope) {
      c.scale = p.beta;
      c.offset = std::log(exp_rate_ceiling(bg.floor)) - std::log(p.beta);
    } else {
      c.scale = p.beta - bg.beta_0;
      c.offset = std::log(bg.beta_0) - std::log(p.beta);
    }
  }
  return c;
}

void WeightCoefficients::apply(std::span<const double> L, std::span<double> out) const {
  if (kind == LikelihoodKind::gaussian) {
    kernels::quadratic_hinge(L, center, scale, offset, out);
  } else {
    kernels::linear_hinge(L, scale, offset, out);
  }
}

double edge_weight(double L, int k, const LikelihoodModel& model) {
  return weight_coefficients(k, model)(L);
}

double background_bound(double a, double b) {
  if (a == b) return b;
  const double r = (a - b) / b;
  if (std::abs(r) < 1e-6) {
    return a * (1.0 - r / 2.0 + r * r / 3.0);
  }
  return a * std::log1p(r) / r;
}

double default_variance_floor(const DistanceMatrix& L) {
  const std::size_t n = L.size();
  double sum = 0.0;
  double sum2 = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      sum += L(i, j);
      ++count;
    }
  }
  if (count == 0) return 1e-12;
  const double mean = sum / static_cast<double>(count);
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double d = L(i, j) - mean;
      sum2 += d * d;
    }
  }
  const double var = sum2 / static_cast<double>(count);
  return var > 0.0 ? 1e-6 * var : 1e-12;
}

LikelihoodModel calibrate_background(const DistanceMatrix& L, LikelihoodModel model) {
  if (model.classes.empty()) fail(ErrorKind::model, "model has no classes");
  for (int k = 1; k <= model.num_classes(); ++k) check_class(k, model);
  Background& bg = model.background;
  if (bg.policy == BackgroundPolicy::envelope) {
    if (!(bg.floor > 0.0)) fail(ErrorKind::model, "variance floor must be positive");
    // Keep every class inside the envelope.
    if (model.kind == LikelihoodKind::gaussian) {
      for (ClassParams& p : model.classes) p.sigma2 = std::max(p.sigma2, bg.floor);
      bg.sigma2_0 = bg.floor;
    } else {
      const double ceiling = exp_rate_ceiling(bg.floor);
      for (ClassParams& p : model.classes) p.beta = std::min(p.beta, ceiling);
      bg.beta_0 = ceiling;
    }
    bg.calibrated = true;
    bg.clamped = false;
    bg.clamped_pairs = 0;
    return model;
  }
  if (model.kind == LikelihoodKind::gaussian) {
    calibrate_gaussian_pairwise(L, model);
  } else {
    calibrate_exponential_pairwise(L, model);
  }
  return model;
}

PriorKind PriorKind::k_neighbor(int K) {
  if (K < 1) fail(ErrorKind::parameter, "K-neighbor prior needs K >= 1");
  return {Tag::k_neighbor, K};
}

}  // namespace simclust
