#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "verilab/dataset.hpp"
#include "verilab/models.hpp"
#include "verilab/perturb.hpp"

namespace verilab {

enum class SyntheticKind { gaussians, d1_piecewise, circle_oracle };

std::string to_string(SyntheticKind kind);
SyntheticKind parse_synthetic_kind(const std::string& text);

/// Parameters of a synthetic distribution.
///
/// - gaussians: class c has mean `means[c]` and isotropic standard deviation
///   `stddevs[c]`; labels are drawn uniformly. Unclamped.
/// - d1_piecewise: x ~ U[0, 1), Pr(y = 1 | x) is 1/4 on [2k eps, (2k+1) eps)
///   and 1 on [(2k+1) eps, (2k+2) eps). Class 1 is the positive class.
/// - circle_oracle: x ~ U[0, 1)^2, label 1 iff ||x - center||_2 < radius.
struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::gaussians;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> means;
  std::vector<double> stddevs;
  double interval_eps = 0.1;
  std::vector<double> center{0.5, 0.5};
  double radius = 0.4;

  void validate() const;
};

/// Class index for a {-1, +1} label: +1 maps to class 1, -1 to class 0.
inline int class_of_sign(int sign) { return sign > 0 ? 1 : 0; }
inline int sign_of_class(int cls) { return cls == 1 ? 1 : -1; }

/// Pr(y = +1 | x) of the one-dimensional piecewise distribution (left-closed intervals).
double piecewise_positive_rate(double x, double interval_eps);

Dataset gen_synthetic(const SyntheticSpec& spec);

enum class Flaw { quality, noise, mislabeling, poisoning };

std::string to_string(Flaw flaw);
Flaw parse_flaw(const std::string& text);

/// Identity transform; the clean training set labelled as its own variant.
Dataset make_quality(const Dataset& data);
/// Inputs replaced by uniform noise over the clamp range; labels unchanged.
Dataset make_noise(const Dataset& data, std::uint64_t seed);
/// Labels replaced by uniform draws over [0, M); inputs unchanged.
Dataset make_mislabeling(const Dataset& data, std::uint64_t seed);

/// y -> (y + 1) mod M.
std::vector<int> cyclic_permutation(int num_classes);

struct PoisoningConfig {
  ThreatModel threat;
  std::vector<int> permutation;  // empty: cyclic shift
  int steps = 100;
  /// Step size as a fraction of eps.
  double step_fraction = 0.2;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// Each input is pushed by targeted PGD toward class permutation[y] under the
/// reference model; labels are kept.
Dataset make_poisoning(const Dataset& data, const ModelSpec& reference_spec, const ModelParams& reference_params,
                       const PoisoningConfig& cfg);

// Binary dataset file: "VLDS", version byte 1, u32 n, u32 d, u32 M, u32 clamp
// flag, f64 lo, f64 hi, n*d f64 features, n u32 labels; all little-endian.
std::string encode_dataset(const Dataset& data);
Dataset decode_dataset(const std::string& bytes);
void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Text format: one example per line, "label,f1,f2,...". Blank lines and lines
/// starting with '#' are skipped. num_classes = 0 infers max label + 1 (at least 2).
Dataset parse_dataset_text(const std::string& text, int num_classes = 0, ClampRange clamp = ClampRange::unclamped());
Dataset load_dataset_text(const std::filesystem::path& path, int num_classes = 0,
                          ClampRange clamp = ClampRange::unclamped());

}  // namespace verilab
