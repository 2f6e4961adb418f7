#include <cmath>

#include "verilab/error.hpp"
#include "verilab/perturb.hpp"

namespace verilab {

namespace {

/// Offset of grid index j in [0, points) along one axis; the endpoints are exactly -eps and +eps.
double grid_offset(std::size_t j, std::size_t points, double eps) {
  if (j == 0) return -eps;
  if (j + 1 == points) return eps;
  return eps * (static_cast<double>(2 * j) / static_cast<double>(points - 1) - 1.0);
}

}  // namespace

bool brute_force_attack(const ModelSpec& spec, const ModelParams& params, std::span<const double> x, int label,
                        const ThreatModel& threat, Objective objective, std::size_t grid_points_per_dim,
                        int target) {
  threat.validate();
  const std::size_t d = x.size();
  require(d == spec.input_dim(), ErrorKind::dimension, "attack input does not match model width");
  require(grid_points_per_dim >= 2, ErrorKind::config, "grid needs at least 2 points per axis");

  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) {
    require(total <= kBruteForceBudget / grid_points_per_dim, ErrorKind::resource,
            [&] { return "brute-force grid exceeds " + std::to_string(kBruteForceBudget) + " points"; });
    total *= grid_points_per_dim;
  }

  const Tensor center(Shape{1, d}, std::vector<double>(x.begin(), x.end()));
  const int clean = predict_row(forward_logits(spec, params, center).row(0));
  auto met = [&](int prediction) { return objective_met(objective, prediction, label, target, clean); };
  if (met(clean)) return true;
  if (threat.eps == 0.0) return false;

  constexpr std::size_t kBlock = 4096;
  Tensor block(Shape{kBlock, d});
  std::size_t filled = 0;
  auto flush = [&]() {
    if (filled == 0) return false;
    const Tensor batch(Shape{filled, d},
                       std::vector<double>(block.data().begin(), block.data().begin() + static_cast<std::ptrdiff_t>(filled * d)));
    const auto pred = predict(forward_logits(spec, params, batch));
    filled = 0;
    for (int p : pred)
      if (met(p)) return true;
    return false;
  };
  auto push = [&](std::span<const double> delta) {
    auto row = block.row(filled++);
    for (std::size_t k = 0; k < d; ++k) row[k] = threat.clamp.apply(x[k] + delta[k]);
    return filled == kBlock && flush();
  };

  std::vector<double> delta(d, 0.0);
  if (threat.norm == Norm::l2) {
    for (std::size_t k = 0; k < d; ++k) {
      for (double s : {-1.0, 1.0}) {
        std::fill(delta.begin(), delta.end(), 0.0);
        delta[k] = s * threat.eps;
        if (push(delta)) return true;
      }
    }
  }

  std::vector<std::size_t> index(d, 0);
  for (std::size_t n = 0; n < total; ++n) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      delta[k] = grid_offset(index[k], grid_points_per_dim, threat.eps);
      sq += delta[k] * delta[k];
    }
    if (threat.norm == Norm::linf || std::sqrt(sq) <= threat.eps) {
      if (push(delta)) return true;
    }
    for (std::size_t k = 0; k < d; ++k) {
      if (++index[k] < grid_points_per_dim) break;
      index[k] = 0;
    }
  }
  return flush();
}

}  // namespace verilab
