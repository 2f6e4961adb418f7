#include "verilab/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "verilab/error.hpp"
#include "verilab/rng.hpp"

namespace verilab {

void Dataset::validate() const {
  require(num_classes >= 1, ErrorKind::config, "dataset needs at least one class");
  require(clamp.lo < clamp.hi, ErrorKind::config, "dataset clamp range needs lo < hi");
  if (labels.empty()) {
    require(inputs.size() == 0, ErrorKind::dimension, "empty dataset with inputs");
    return;
  }
  require(inputs.rank() == 2 && inputs.rows() == labels.size(), ErrorKind::dimension,
          [&] { return "dataset inputs " + shape_string(inputs.shape()) + " do not match " + std::to_string(labels.size()) +
              " labels"; });
  for (int y : labels)
    require(y >= 0 && y < num_classes, ErrorKind::index, [&] { return "label " + std::to_string(y) + " out of range"; });
  require(inputs.all_finite(), ErrorKind::numeric, "non-finite dataset features");
}

Dataset select(const Dataset& data, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.num_classes = data.num_classes;
  out.clamp = data.clamp;
  out.inputs = gather_rows(data.inputs, indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(data.labels[i]);
  return out;
}

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::gaussians: return "gaussians";
    case SyntheticKind::d1_piecewise: return "d1_piecewise";
    case SyntheticKind::circle_oracle: return "circle_oracle";
  }
  return "?";
}

SyntheticKind parse_synthetic_kind(const std::string& text) {
  if (text == "gaussians") return SyntheticKind::gaussians;
  if (text == "d1_piecewise") return SyntheticKind::d1_piecewise;
  if (text == "circle_oracle") return SyntheticKind::circle_oracle;
  fail(ErrorKind::config, "unknown synthetic dataset kind '" + text + "'");
}

void SyntheticSpec::validate() const {
  switch (kind) {
    case SyntheticKind::gaussians: {
      require(means.size() >= 2, ErrorKind::config, "gaussians need at least 2 class means");
      require(stddevs.size() == means.size(), ErrorKind::config, "gaussians need one stddev per class");
      const std::size_t d = means.front().size();
      require(d > 0, ErrorKind::config, "gaussian means must be non-empty");
      for (const auto& m : means) require(m.size() == d, ErrorKind::config, "gaussian means differ in dimension");
      for (double s : stddevs)
        require(std::isfinite(s) && s > 0.0, ErrorKind::config, "gaussian stddevs must be positive");
      break;
    }
    case SyntheticKind::d1_piecewise:
      require(std::isfinite(interval_eps) && interval_eps > 0.0, ErrorKind::config,
              "piecewise interval eps must be positive");
      break;
    case SyntheticKind::circle_oracle:
      require(center.size() == 2, ErrorKind::config, "circle centre must be 2-D");
      require(std::isfinite(radius) && radius > 0.0, ErrorKind::config, "circle radius must be positive");
      break;
  }
}

double piecewise_positive_rate(double x, double interval_eps) {
  const auto cell = static_cast<long long>(std::floor(x / interval_eps));
  return cell % 2 == 0 ? 0.25 : 1.0;
}

Dataset gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(stream_seed(spec.seed, {0xda7a}));
  Dataset out;
  const std::size_t n = spec.samples;
  out.labels.resize(n);
  switch (spec.kind) {
    case SyntheticKind::gaussians: {
      const std::size_t d = spec.means.front().size();
      out.num_classes = static_cast<int>(spec.means.size());
      out.clamp = ClampRange::unclamped();
      out.inputs = Tensor(Shape{n, d});
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(rng.below(spec.means.size()));
        out.labels[i] = static_cast<int>(c);
        for (std::size_t k = 0; k < d; ++k) out.inputs.at(i, k) = spec.means[c][k] + spec.stddevs[c] * rng.normal();
      }
      break;
    }
    case SyntheticKind::d1_piecewise: {
      out.num_classes = 2;
      out.clamp = ClampRange{0.0, 1.0};
      out.inputs = Tensor(Shape{n, 1});
      for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform();
        out.inputs.at(i, 0) = x;
        out.labels[i] = class_of_sign(rng.uniform() < piecewise_positive_rate(x, spec.interval_eps) ? 1 : -1);
      }
      break;
    }
    case SyntheticKind::circle_oracle: {
      out.num_classes = 2;
      out.clamp = ClampRange{0.0, 1.0};
      out.inputs = Tensor(Shape{n, 2});
      for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform(), b = rng.uniform();
        out.inputs.at(i, 0) = a;
        out.inputs.at(i, 1) = b;
        const double dist = std::hypot(a - spec.center[0], b - spec.center[1]);
        out.labels[i] = class_of_sign(spec.radius - dist > 0.0 ? 1 : -1);
      }
      break;
    }
  }
  return out;
}

std::string to_string(Flaw flaw) {
  switch (flaw) {
    case Flaw::quality: return "quality";
    case Flaw::noise: return "noise";
    case Flaw::mislabeling: return "mislabeling";
    case Flaw::poisoning: return "poisoning";
  }
  return "?";
}

Flaw parse_flaw(const std::string& text) {
  if (text == "quality") return Flaw::quality;
  if (text == "noise") return Flaw::noise;
  if (text == "mislabeling") return Flaw::mislabeling;
  if (text == "poisoning") return Flaw::poisoning;
  fail(ErrorKind::config, "unknown dataset variant '" + text + "'");
}

Dataset make_quality(const Dataset& data) { return data; }

Dataset make_noise(const Dataset& data, std::uint64_t seed) {
  require(data.clamp.bounded(), ErrorKind::config, "noise variant needs a bounded clamp range");
  Rng rng(stream_seed(seed, {0x9015e}));
  Dataset out = data;
  for (double& v : out.inputs.data()) v = rng.uniform(data.clamp.lo, data.clamp.hi);
  return out;
}

Dataset make_mislabeling(const Dataset& data, std::uint64_t seed) {
  require(data.num_classes >= 2, ErrorKind::config, "mislabeling needs at least 2 classes");
  Rng rng(stream_seed(seed, {0x1abe1}));
  Dataset out = data;
  for (int& y : out.labels) y = static_cast<int>(rng.below(static_cast<std::uint64_t>(data.num_classes)));
  return out;
}

std::vector<int> cyclic_permutation(int num_classes) {
  std::vector<int> perm(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) perm[static_cast<std::size_t>(c)] = (c + 1) % num_classes;
  return perm;
}

Dataset make_poisoning(const Dataset& data, const ModelSpec& reference_spec, const ModelParams& reference_params,
                       const PoisoningConfig& cfg) {
  const std::vector<int> perm = cfg.permutation.empty() ? cyclic_permutation(data.num_classes) : cfg.permutation;
  require(perm.size() == static_cast<std::size_t>(data.num_classes), ErrorKind::config,
          "poisoning permutation must cover every class");
  std::vector<int> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (int c = 0; c < data.num_classes; ++c) {
    require(sorted[static_cast<std::size_t>(c)] == c, ErrorKind::config, "poisoning map is not a permutation");
    require(perm[static_cast<std::size_t>(c)] != c, ErrorKind::config,
            [&] { return "poisoning permutation maps class " + std::to_string(c) + " to itself"; });
  }
  require(static_cast<std::size_t>(data.num_classes) == reference_spec.num_classes(), ErrorKind::config,
          "reference model class count differs from dataset");
  ThreatModel threat = cfg.threat;
  threat.clamp = data.clamp;

  AttackConfig attack;
  attack.objective = Objective::adversarial_targeted;
  attack.steps = cfg.steps;
  attack.step_size = threat.eps * cfg.step_fraction;
  attack.early_exit = false;
  attack.seed = cfg.seed;

  std::vector<int> targets(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) targets[i] = perm[static_cast<std::size_t>(data.labels[i])];
  const auto results = batch_attack(reference_spec, reference_params, data, threat, attack, cfg.workers, targets);
  Dataset out = data;
  if (!data.empty()) out.inputs = attack_points(results, data.dim());
  return out;
}

}  // namespace verilab
