#include "verilab_cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "verilab/analytic.hpp"
#include "verilab/certify.hpp"
#include "verilab/datasets.hpp"
#include "verilab/report_format.hpp"
#include "verilab/rng.hpp"
#include "verilab/train.hpp"
#include "verilab_cli/config.hpp"

namespace verilab::cli {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io:
    case ErrorKind::parse: return kExitIo;
    case ErrorKind::numeric: return kExitNumeric;
    case ErrorKind::config:
    case ErrorKind::contract:
    case ErrorKind::dimension:
    case ErrorKind::index:
    case ErrorKind::resource: return kExitConfig;
  }
  return kExitOther;
}

namespace {

struct Context {
  ExperimentConfig cfg;
  std::ostream& out;
};

void write_text(const fs::path& path, const std::string& text, std::ostream& log) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  file << text;
  file.close();
  if (!file) fail(ErrorKind::io, "failed writing " + path.string());
  log << "wrote " << path.string() << "\n";
}

void write_dataset(const fs::path& path, const Dataset& data, std::ostream& log) {
  save_dataset(data, path);
  log << "wrote " << path.string() << "\n";
}

Dataset read_dataset(const fs::path& path, const DatasetSection& section) {
  const std::string ext = path.extension().string();
  if (ext == ".csv" || ext == ".txt") return load_dataset_text(path, section.num_classes, section.clamp);
  return load_dataset(path);
}

Dataset clean_data(const ExperimentConfig& cfg) {
  if (cfg.dataset.path) return read_dataset(*cfg.dataset.path, cfg.dataset);
  return gen_synthetic(*cfg.dataset.synthetic);
}

std::optional<Dataset> heldout_data(const ExperimentConfig& cfg, std::uint64_t offset = 0) {
  if (!cfg.dataset.synthetic || cfg.dataset.heldout_samples == 0) return std::nullopt;
  SyntheticSpec spec = *cfg.dataset.synthetic;
  spec.samples = cfg.dataset.heldout_samples;
  spec.seed = stream_seed(spec.seed, {0x4e1du, offset});
  return gen_synthetic(spec);
}

Dataset data_for(const ExperimentConfig& cfg, const std::string& flag, const std::optional<fs::path>& section_path,
                 bool prefer_heldout) {
  if (!flag.empty()) return read_dataset(flag, cfg.dataset);
  if (section_path) return read_dataset(*section_path, cfg.dataset);
  if (prefer_heldout)
    if (auto held = heldout_data(cfg)) return *held;
  return clean_data(cfg);
}

ThreatModel threat_for(ThreatModel threat, const Dataset& data) {
  threat.clamp = data.clamp;
  return threat;
}

void check_model_fits(const ModelSpec& spec, const Dataset& data) {
  require(spec.widths.front() == data.dim(), ErrorKind::dimension,
          "model expects " + std::to_string(spec.widths.front()) + " inputs, data has " + std::to_string(data.dim()));
  require(spec.widths.back() == static_cast<std::size_t>(data.num_classes), ErrorKind::dimension,
          "model has " + std::to_string(spec.widths.back()) + " outputs, data has " +
              std::to_string(data.num_classes) + " classes");
}

std::string lambda_tag(double lambda) { return "lambda_" + format_number(lambda); }

void cmd_gen(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Dataset clean = clean_data(cfg);
  write_dataset(cfg.out / "clean.vlds", clean, ctx.out);
  if (auto held = heldout_data(cfg)) write_dataset(cfg.out / "heldout.vlds", *held, ctx.out);
  const std::uint64_t base = cfg.dataset.synthetic ? cfg.dataset.synthetic->seed : cfg.dataset_seed.value_or(cfg.seed);
  for (Flaw flaw : cfg.dataset.flaws) {
    const std::uint64_t seed = stream_seed(base, {0xf1a3u, static_cast<std::uint64_t>(flaw)});
    Dataset variant;
    switch (flaw) {
      case Flaw::quality: variant = make_quality(clean); break;
      case Flaw::noise: variant = make_noise(clean, seed); break;
      case Flaw::mislabeling: variant = make_mislabeling(clean, seed); break;
      case Flaw::poisoning: {
        require(cfg.dataset.reference_model.has_value(), ErrorKind::config,
                "poisoning needs [dataset] reference_model (a model file trained on the clean data)");
        const LoadedModel ref = load_model(*cfg.dataset.reference_model);
        check_model_fits(ref.spec, clean);
        PoisoningConfig pc = cfg.dataset.poisoning;
        pc.workers = cfg.workers;
        variant = make_poisoning(clean, ref.spec, ref.params, pc);
        break;
      }
    }
    write_dataset(cfg.out / (to_string(flaw) + ".vlds"), variant, ctx.out);
  }
}

void cmd_train(Context& ctx, const std::string& data_flag, const std::string& lambdas_flag) {
  ExperimentConfig& cfg = ctx.cfg;
  const Dataset data = data_for(cfg, data_flag, cfg.train.data, false);
  check_model_fits(cfg.model.spec, data);
  TrainConfig tc = cfg.train.cfg;
  tc.workers = cfg.workers;
  if (tc.attack) tc.attack->threat = threat_for(tc.attack->threat, data);
  const ModelParams init = init_params(cfg.model.spec, tc.seed, cfg.model.init);

  std::vector<double> lambdas = cfg.train.lambdas;
  if (!lambdas_flag.empty()) lambdas = parse_number_list(lambdas_flag);
  const auto run_one = [&](const TrainConfig& run_cfg, const std::string& suffix) {
    const TrainResult result = train(cfg.model.spec, init, data, run_cfg);
    save_model(cfg.out / ("model" + suffix + ".vlm"), cfg.model.spec, result.params);
    ctx.out << "wrote " << (cfg.out / ("model" + suffix + ".vlm")).string() << "\n";
    std::string log = "# method=" + to_string(run_cfg.method) + " lambda=" + format_number(run_cfg.lambda) +
                      " epochs=" + std::to_string(run_cfg.epochs) + " seed=" + std::to_string(run_cfg.seed) + "\n";
    for (const EpochMetrics& m : result.metrics) log += format_metrics_line(m) + "\n";
    write_text(cfg.out / ("metrics" + suffix + ".log"), log, ctx.out);
  };
  if (lambdas.empty()) {
    run_one(tc, "");
    return;
  }
  for (double lambda : lambdas) {
    TrainConfig run_cfg = tc;
    run_cfg.lambda = lambda;
    try {
      run_cfg.validate();
    } catch (const Error& e) {
      fail(ErrorKind::config, e.message());
    }
    run_one(run_cfg, "_" + lambda_tag(lambda));
  }
}

LoadedModel model_from(const std::string& path) {
  require(!path.empty(), ErrorKind::config, "--model is required");
  return load_model(path);
}

Report evaluate_once(const ExperimentConfig& cfg, const LoadedModel& model, const Dataset& data, std::uint64_t seed) {
  const ThreatModel threat = threat_for(cfg.eval.threat, data);
  const AttackSuite suite = cfg.eval.suite(threat.eps, seed);
  return risk_report_document(
      estimate_risks(build_ledger(model.spec, model.params, data, threat, suite, cfg.workers)));
}

void cmd_eval(Context& ctx, const std::string& model_path, const std::string& data_flag, int repeat_flag) {
  const ExperimentConfig& cfg = ctx.cfg;
  const LoadedModel model = model_from(model_path);
  const int repeat = repeat_flag > 0 ? repeat_flag : cfg.eval.repeat;
  const bool resample = data_flag.empty() && !cfg.eval.data && heldout_data(cfg).has_value();
  const Dataset data = data_for(cfg, data_flag, cfg.eval.data, true);
  check_model_fits(model.spec, data);
  Report doc;
  if (repeat == 1) {
    doc = evaluate_once(cfg, model, data, cfg.seed);
  } else {
    std::vector<Report> runs;
    for (int r = 0; r < repeat; ++r) {
      const auto run = static_cast<std::uint64_t>(r);
      const Dataset run_data = resample && r > 0 ? *heldout_data(cfg, run) : data;
      runs.push_back(evaluate_once(cfg, model, run_data, stream_seed(cfg.seed, {0xe7a1u, run})));
    }
    doc = summarize_runs(runs, "verilab risk report v1 (empirical, attack-bounded; mean and std over runs)");
  }
  Report header(doc.title());
  header.add("norm", ReportValue(to_string(cfg.eval.threat.norm)));
  header.add("eps", cfg.eval.threat.eps);
  header.append(doc);
  write_text(cfg.out / "risk_report.txt", header.to_text(), ctx.out);
}

void cmd_certify(Context& ctx, const std::string& model_path, const std::string& data_flag,
                 const std::string& eps_flag) {
  const ExperimentConfig& cfg = ctx.cfg;
  const LoadedModel model = model_from(model_path);
  require(model.spec.kind == ModelKind::linf_dist_net, ErrorKind::contract,
          "certification requires an linf_dist_net model, got " + to_string(model.spec.kind));
  const Dataset data = data_for(cfg, data_flag, cfg.eval.data, true);
  check_model_fits(model.spec, data);
  std::vector<double> radii = cfg.eval.eps_sweep;
  if (!eps_flag.empty()) radii = parse_number_list(eps_flag);
  if (radii.empty()) radii = {cfg.eval.threat.eps};

  Report doc("verilab certificate report v1");
  doc.add("norm", ReportValue(std::string("linf")));
  for (std::size_t i = 0; i < radii.size(); ++i) {
    ThreatModel threat = threat_for(cfg.eval.threat, data);
    threat.norm = Norm::linf;
    threat.eps = radii[i];
    try {
      threat.validate();
    } catch (const Error& e) {
      fail(ErrorKind::config, e.message());
    }
    CertReport cert = certify(model.spec, model.params, data, threat.eps);
    const RiskReport empirical = estimate_risks(
        build_ledger(model.spec, model.params, data, threat, cfg.eval.suite(threat.eps, cfg.seed), cfg.workers));
    attach_empirical(cert, empirical);
    check_soundness(cert);
    const Report part = cert_report_document(cert);
    doc.append(part, radii.size() == 1 ? std::string() : "sweep" + std::to_string(i) + ".");
  }
  write_text(cfg.out / "cert_report.txt", doc.to_text(), ctx.out);
}

void cmd_analytic(Context& ctx, const std::string& which, const std::string& eps_flag, const std::string& b_flag,
                  std::size_t resolution_flag, std::size_t sample_flag) {
  const ExperimentConfig& cfg = ctx.cfg;
  if (which == "example1") {
    const Rational eps = eps_flag.empty() ? cfg.analytic.example1_eps : parse_rational(eps_flag);
    const auto table = example1_table(eps);
    write_text(cfg.out / "example1.csv", format_example1_table(table, eps), ctx.out);
    const std::size_t sample = sample_flag > 0 ? sample_flag : cfg.analytic.sample;
    if (sample > 0) {
      Report doc("verilab example1 sampler comparison v1");
      doc.add("n", static_cast<double>(sample));
      doc.add("eps", ReportValue(to_string(eps)));
      for (ToyClassifier c : {ToyClassifier::bayes_optimal, ToyClassifier::all_one}) {
        const SamplerComparison cmp = example1_sampler_consistency(c, sample, cfg.seed, eps);
        const std::string prefix = to_string(c) + ".";
        for (const SampledRisk& r : cmp.risks) {
          doc.add(prefix + r.name + ".exact", r.exact);
          doc.add(prefix + r.name + ".sampled", r.sampled);
          doc.add(prefix + r.name + ".sigma", r.sigma);
        }
        doc.add(prefix + "within_3sigma", ReportValue(cmp.all_within()));
      }
      write_text(cfg.out / "example1_sampler.txt", doc.to_text(), ctx.out);
    }
    return;
  }
  if (which == "example2") {
    Example2Setup setup = cfg.analytic.example2;
    if (!eps_flag.empty()) setup.eps = parse_number(eps_flag);
    if (resolution_flag > 0) setup.resolution = resolution_flag;
    const std::vector<double> grid = b_flag.empty() ? cfg.analytic.b_grid : parse_number_list(b_flag);
    write_text(cfg.out / "example2.csv", format_example2_csv(example2_curves(grid, setup, cfg.workers)), ctx.out);
    return;
  }
  fail(ErrorKind::config, "unknown analytic example '" + which + "' (example1, example2)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"verilab: hypocritical and adversarial risk laboratory", "verilab"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Base seed (overrides [experiment] seed)");
  auto* workers_opt =
      app.add_option("--workers", workers, "Worker threads; never changes outputs")->check(CLI::PositiveNumber);
  app.add_option("--config", config_path, "Experiment file (INI)");
  app.add_option("--out", out_dir, "Output directory (overrides [experiment] out)");

  std::string model_path, data_path, lambdas, eps_list, which, b_grid;
  int repeat = 0;
  std::size_t resolution = 0, sample = 0;

  auto* gen = app.add_subcommand("gen", "Write the clean dataset and its flawed variants");
  auto* train_cmd = app.add_subcommand("train", "Train a model (or one per lambda)");
  train_cmd->add_option("--data", data_path, "Training dataset file");
  train_cmd->add_option("--lambdas", lambdas, "Comma-separated lambda sweep");
  auto* eval = app.add_subcommand("eval", "Estimate the empirical risks of a model");
  eval->add_option("--model", model_path, "Model file")->required();
  eval->add_option("--data", data_path, "Evaluation dataset file");
  eval->add_option("--repeat", repeat, "Runs to average (mean and std)")->check(CLI::PositiveNumber);
  auto* cert = app.add_subcommand("certify", "Certify an l-infinity distance net");
  cert->add_option("--model", model_path, "Model file")->required();
  cert->add_option("--data", data_path, "Evaluation dataset file");
  cert->add_option("--eps", eps_list, "Comma-separated certification radii");
  auto* analytic = app.add_subcommand("analytic", "Closed-form toy examples");
  analytic->add_option("which", which, "example1 or example2")->required();
  analytic->add_option("--eps", eps_list, "Perturbation size (exact rational for example1)");
  analytic->add_option("--b", b_grid, "Comma-separated thresholds (example2)");
  analytic->add_option("--resolution", resolution, "Grid cells per axis (example2)");
  analytic->add_option("--sample", sample, "Also compare with n sampled points (example1)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "verilab: config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    Context ctx{config_path.empty() ? default_config() : load_config(config_path), out};
    if (*seed_opt) ctx.cfg.seed = seed;
    if (*workers_opt) ctx.cfg.workers = workers;
    if (!out_dir.empty()) ctx.cfg.out = out_dir;
    ctx.cfg.resolve_seeds();
    std::error_code ec;
    fs::create_directories(ctx.cfg.out, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory " + ctx.cfg.out.string() + ": " + ec.message());

    if (gen->parsed()) cmd_gen(ctx);
    else if (train_cmd->parsed()) cmd_train(ctx, data_path, lambdas);
    else if (eval->parsed()) cmd_eval(ctx, model_path, data_path, repeat);
    else if (cert->parsed()) cmd_certify(ctx, model_path, data_path, eps_list);
    else if (analytic->parsed()) cmd_analytic(ctx, which, eps_list, b_grid, resolution, sample);
    return kExitOk;
  } catch (const Error& e) {
    err << "verilab: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "verilab: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "verilab: error: " << e.what() << "\n";
    return kExitOther;
  }
}

}  // namespace verilab::cli
