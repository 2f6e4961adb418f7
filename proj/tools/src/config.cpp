#include "verilab_cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "verilab/error.hpp"

namespace verilab::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_plain(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) fail(ErrorKind::config, "'" + text + "' is not a number");
  return v;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"seed", "workers", "out"}},
      {"dataset",
       {"kind", "path", "samples", "seed", "means", "stddevs", "interval_eps", "center", "radius", "classes", "clamp_lo",
        "clamp_hi", "heldout_samples", "flaws", "reference_model"}},
      {"poisoning", {"preset", "norm", "eps", "steps", "step_fraction", "seed", "permutation"}},
      {"model", {"kind", "widths", "init_lo", "init_hi"}},
      {"train",
       {"method", "epochs", "batch_size", "lr", "momentum", "weight_decay", "lr_decay_epochs", "lr_decay_factor",
        "lambda", "lambdas", "seed", "monitor_every", "monitor_samples", "data"}},
      {"attack", {"preset", "norm", "eps", "steps", "step_fraction", "restarts", "random_start", "seed"}},
      {"eval", {"preset", "norm", "eps", "steps", "step_fraction", "restarts", "random_start", "repeat", "eps_sweep",
                "data"}},
      {"analytic", {"eps", "b_grid", "example2_eps", "resolution", "sample", "center", "radius"}},
  };
  return keys;
}

class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  [[nodiscard]] std::optional<std::string> get(const std::string& key) const {
    if (tree_ == nullptr) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  }
  [[nodiscard]] std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  template <class F>
  auto with(const std::string& key, F&& convert) const -> std::optional<decltype(convert(std::string()))> {
    const auto raw = get(key);
    if (!raw) return std::nullopt;
    try {
      return convert(*raw);
    } catch (const Error& e) {
      fail(ErrorKind::config, where(key) + ": " + e.message());
    }
  }

  void number(const std::string& key, double& target) const {
    if (auto v = with(key, parse_number)) target = *v;
  }
  template <class Int>
  void integer(const std::string& key, Int& target, long long min_value = 0) const {
    if (auto v = with(key, [&](const std::string& s) {
          long long out = 0;
          const char* end = s.data() + s.size();
          const auto res = std::from_chars(s.data(), end, out);
          if (res.ec != std::errc() || res.ptr != end) fail(ErrorKind::config, "'" + s + "' is not an integer");
          if (out < min_value) fail(ErrorKind::config, "must be >= " + std::to_string(min_value));
          return out;
        }))
      target = static_cast<Int>(*v);
  }
  void seed(const std::string& key, std::optional<std::uint64_t>& target) const {
    std::uint64_t v = 0;
    if (get(key)) {
      integer(key, v);
      target = v;
    }
  }
  void flag(const std::string& key, bool& target) const {
    if (auto v = with(key, [](const std::string& s) {
          if (s == "true" || s == "1" || s == "yes") return true;
          if (s == "false" || s == "0" || s == "no") return false;
          fail(ErrorKind::config, "'" + s + "' is not a boolean");
        }))
      target = *v;
  }

 private:
  std::string name_;
  const pt::ptree* tree_;
};

void apply_threat(const Section& s, ThreatModel& threat) {
  if (auto preset = s.get("preset")) {
    if (*preset == "cifar-linf") threat = ThreatModel::cifar_linf();
    else if (*preset == "cifar-l2") threat = ThreatModel::cifar_l2();
    else fail(ErrorKind::config, s.where("preset") + ": unknown preset '" + *preset + "' (cifar-linf, cifar-l2)");
  }
  if (auto v = s.with("norm", parse_norm)) threat.norm = *v;
  s.number("eps", threat.eps);
}

}  // namespace

double parse_number(const std::string& raw) {
  const std::string text = trim(raw);
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const double den = parse_plain(trim(text.substr(slash + 1)));
    if (den == 0.0) fail(ErrorKind::config, "zero denominator in '" + text + "'");
    return parse_plain(trim(text.substr(0, slash))) / den;
  }
  return parse_plain(text);
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number(item));
  return out;
}

AttackSuite EvalSection::suite(double eps, std::uint64_t seed) const {
  AttackSuite s = AttackSuite::evaluation(eps, seed, restarts);
  for (AttackConfig* cfg : {&s.hypocritical, &s.adversarial, &s.stability}) {
    cfg->steps = steps;
    cfg->step_size = step_fraction * eps;
    cfg->random_start = random_start;
  }
  return s;
}

void ExperimentConfig::resolve_seeds() {
  if (dataset.synthetic) dataset.synthetic->seed = dataset_seed.value_or(seed);
  dataset.poisoning.seed = poisoning_seed.value_or(seed);
  train.cfg.seed = train_seed.value_or(seed);
  if (train.cfg.attack) train.cfg.attack->attack.seed = attack_seed.value_or(seed);
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.model.spec = {ModelKind::mlp, {2, 32, 2}};
  TrainAttack attack;
  attack.threat = ThreatModel::cifar_linf();
  attack.attack = AttackConfig::training(Objective::adversarial_untargeted, attack.threat.eps);
  cfg.train.cfg.attack = attack;
  cfg.dataset.poisoning.threat = ThreatModel::cifar_linf();
  cfg.analytic.b_grid = {0.1, 0.3, 0.5, 0.7, 0.9};
  return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::config, "config line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [name, body] : tree) {
    const auto it = known_keys().find(name);
    if (it == known_keys().end()) {
      if (body.empty()) fail(ErrorKind::config, "config key '" + name + "' must appear inside a section");
      fail(ErrorKind::config, "unknown config section [" + name + "]");
    }
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) fail(ErrorKind::config, "unknown key '" + key + "' in section [" + name + "]");
  }
  const auto section = [&](const std::string& name) {
    const auto child = tree.get_child_optional(name);
    return Section(name, child ? &*child : nullptr);
  };

  ExperimentConfig cfg = default_config();

  const Section exp = section("experiment");
  exp.integer("seed", cfg.seed);
  exp.integer("workers", cfg.workers, 1);
  if (auto v = exp.get("out")) cfg.out = *v;

  const Section ds = section("dataset");
  const std::string kind = ds.get("kind").value_or("gaussians");
  if (kind == "file") {
    const auto path = ds.get("path");
    require(path.has_value(), ErrorKind::config, "[dataset] kind = file needs a path");
    cfg.dataset.path = *path;
  } else {
    SyntheticSpec spec;
    spec.kind = parse_synthetic_kind(kind);
    spec.samples = 1000;
    if (spec.kind == SyntheticKind::gaussians) {
      spec.means = {{-1.0, 0.0}, {1.0, 0.0}};
      spec.stddevs = {1.0, 1.0};
    }
    ds.integer("samples", spec.samples);
    if (auto v = ds.with("means", [](const std::string& s) {
          std::vector<std::vector<double>> rows;
          for (const auto& row : split(s, ';')) rows.push_back(parse_number_list(row));
          return rows;
        }))
      spec.means = *v;
    if (auto v = ds.with("stddevs", parse_number_list)) spec.stddevs = *v;
    ds.number("interval_eps", spec.interval_eps);
    if (auto v = ds.with("center", parse_number_list)) spec.center = *v;
    ds.number("radius", spec.radius);
    try {
      spec.validate();
    } catch (const Error& e) {
      fail(ErrorKind::config, std::string("[dataset] ") + e.message());
    }
    cfg.dataset.synthetic = spec;
  }
  ds.seed("seed", cfg.dataset_seed);
  ds.integer("classes", cfg.dataset.num_classes);
  if (ds.get("clamp_lo") || ds.get("clamp_hi")) {
    cfg.dataset.clamp = ClampRange{0.0, 1.0};
    ds.number("clamp_lo", cfg.dataset.clamp.lo);
    ds.number("clamp_hi", cfg.dataset.clamp.hi);
    require(cfg.dataset.clamp.lo < cfg.dataset.clamp.hi, ErrorKind::config, "[dataset] clamp_lo must be < clamp_hi");
  }
  ds.integer("heldout_samples", cfg.dataset.heldout_samples);
  if (auto v = ds.with("flaws", [](const std::string& s) {
        std::vector<Flaw> flaws;
        for (const auto& item : split(s, ',')) flaws.push_back(parse_flaw(item));
        return flaws;
      }))
    cfg.dataset.flaws = *v;
  if (auto v = ds.get("reference_model")) cfg.dataset.reference_model = *v;

  const Section po = section("poisoning");
  apply_threat(po, cfg.dataset.poisoning.threat);
  po.integer("steps", cfg.dataset.poisoning.steps, 1);
  po.number("step_fraction", cfg.dataset.poisoning.step_fraction);
  po.seed("seed", cfg.poisoning_seed);
  if (auto v = po.with("permutation", [](const std::string& s) {
        std::vector<int> perm;
        for (double d : parse_number_list(s)) perm.push_back(static_cast<int>(d));
        return perm;
      }))
    cfg.dataset.poisoning.permutation = *v;

  const Section mo = section("model");
  if (auto v = mo.with("kind", parse_model_kind)) cfg.model.spec.kind = *v;
  if (auto v = mo.with("widths", [](const std::string& s) {
        std::vector<std::size_t> widths;
        for (double d : parse_number_list(s)) {
          if (d < 1 || d != std::floor(d)) fail(ErrorKind::config, "widths must be positive integers");
          widths.push_back(static_cast<std::size_t>(d));
        }
        return widths;
      }))
    cfg.model.spec.widths = *v;
  mo.number("init_lo", cfg.model.init.lo);
  mo.number("init_hi", cfg.model.init.hi);
  try {
    cfg.model.spec.validate();
  } catch (const Error& e) {
    fail(ErrorKind::config, std::string("[model] ") + e.message());
  }

  const Section tr = section("train");
  TrainConfig& t = cfg.train.cfg;
  if (auto v = tr.with("method", parse_train_method)) t.method = *v;
  tr.integer("epochs", t.epochs);
  tr.integer("batch_size", t.batch_size, 1);
  tr.number("lr", t.lr);
  tr.number("momentum", t.momentum);
  tr.number("weight_decay", t.weight_decay);
  if (auto v = tr.with("lr_decay_epochs", [](const std::string& s) {
        std::vector<int> epochs;
        for (double d : parse_number_list(s)) epochs.push_back(static_cast<int>(d));
        return epochs;
      }))
    t.lr_decay_epochs = *v;
  tr.number("lr_decay_factor", t.lr_decay_factor);
  tr.number("lambda", t.lambda);
  if (auto v = tr.with("lambdas", parse_number_list)) cfg.train.lambdas = *v;
  tr.seed("seed", cfg.train_seed);
  tr.integer("monitor_every", t.monitor_every);
  tr.integer("monitor_samples", t.monitor_samples);
  if (auto v = tr.get("data")) cfg.train.data = *v;

  const Section at = section("attack");
  TrainAttack& ta = *t.attack;
  apply_threat(at, ta.threat);
  double train_fraction = 0.25;
  at.integer("steps", ta.attack.steps, 1);
  at.number("step_fraction", train_fraction);
  ta.attack.step_size = train_fraction * ta.threat.eps;
  at.integer("restarts", ta.attack.restarts, 1);
  at.flag("random_start", ta.attack.random_start);
  at.seed("seed", cfg.attack_seed);

  const Section ev = section("eval");
  apply_threat(ev, cfg.eval.threat);
  ev.integer("steps", cfg.eval.steps, 1);
  ev.number("step_fraction", cfg.eval.step_fraction);
  ev.integer("restarts", cfg.eval.restarts, 1);
  ev.flag("random_start", cfg.eval.random_start);
  ev.integer("repeat", cfg.eval.repeat, 1);
  if (auto v = ev.with("eps_sweep", parse_number_list)) cfg.eval.eps_sweep = *v;
  if (auto v = ev.get("data")) cfg.eval.data = *v;

  const Section an = section("analytic");
  if (auto v = an.with("eps", parse_rational)) cfg.analytic.example1_eps = *v;
  if (auto v = an.with("b_grid", parse_number_list)) cfg.analytic.b_grid = *v;
  an.number("example2_eps", cfg.analytic.example2.eps);
  an.integer("resolution", cfg.analytic.example2.resolution, 2);
  an.integer("sample", cfg.analytic.sample);
  if (auto v = an.with("center", parse_number_list)) {
    require(v->size() == 2, ErrorKind::config, "[analytic] center needs two coordinates");
    cfg.analytic.example2.center = {(*v)[0], (*v)[1]};
  }
  an.number("radius", cfg.analytic.example2.radius);

  for (const ThreatModel* threat : {&cfg.eval.threat, &ta.threat, &cfg.dataset.poisoning.threat}) {
    try {
      threat->validate();
    } catch (const Error& e) {
      fail(ErrorKind::config, e.message());
    }
  }
  try {
    TrainConfig check = t;
    check.validate();
  } catch (const Error& e) {
    fail(ErrorKind::config, std::string("[train] ") + e.message());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace verilab::cli
