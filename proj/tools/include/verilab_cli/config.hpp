#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "verilab/analytic.hpp"
#include "verilab/datasets.hpp"
#include "verilab/models.hpp"
#include "verilab/perturb.hpp"
#include "verilab/risk.hpp"
#include "verilab/train.hpp"

namespace verilab::cli {

// Experiment file grammar (INI):
//
//   file     := { section }
//   section  := "[" name "]" { key "=" value }
//   value    := number | rational "p/q" | word | list
//   list     := item { "," item }   (vectors of vectors use ";" between rows)
//
// Lines starting with ';' or '#' are comments. Unknown sections or keys are
// config errors. The sections and keys are listed in the README.

struct DatasetSection {
  /// Source of the clean data: a synthetic distribution or a file.
  std::optional<SyntheticSpec> synthetic;
  std::optional<std::filesystem::path> path;
  /// Text files: class count (0 = infer) and clamp box.
  int num_classes = 0;
  ClampRange clamp = ClampRange::unclamped();
  /// Size of the generated held-out split (0 = none).
  std::size_t heldout_samples = 0;
  std::vector<Flaw> flaws;
  std::optional<std::filesystem::path> reference_model;
  PoisoningConfig poisoning;
};

struct ModelSection {
  ModelSpec spec;
  InitRange init;
};

struct TrainSection {
  TrainConfig cfg;
  /// Non-empty: train one model per lambda.
  std::vector<double> lambdas;
  std::optional<std::filesystem::path> data;
};

struct EvalSection {
  ThreatModel threat = ThreatModel::cifar_linf();
  int steps = 20;
  double step_fraction = 0.25;
  int restarts = 1;
  bool random_start = false;
  int repeat = 1;
  /// Certification radii; empty means threat.eps alone.
  std::vector<double> eps_sweep;
  std::optional<std::filesystem::path> data;

  [[nodiscard]] AttackSuite suite(double eps, std::uint64_t seed) const;
};

struct AnalyticSection {
  Rational example1_eps{1, 10};
  std::vector<double> b_grid;
  Example2Setup example2;
  std::size_t sample = 0;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::filesystem::path out = ".";
  DatasetSection dataset;
  ModelSection model;
  TrainSection train;
  EvalSection eval;
  AnalyticSection analytic;
  /// Seeds set explicitly in a section; others follow `seed`.
  std::optional<std::uint64_t> dataset_seed;
  std::optional<std::uint64_t> poisoning_seed;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::uint64_t> attack_seed;

  /// Copies `seed` into every section without an explicit seed.
  void resolve_seeds();
};

/// Parses a number, accepting "p/q" fractions such as 8/255.
double parse_number(const std::string& text);
std::vector<double> parse_number_list(const std::string& text);

ExperimentConfig default_config();
ExperimentConfig parse_config(const std::string& text);
/// Throws an io error when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace verilab::cli
