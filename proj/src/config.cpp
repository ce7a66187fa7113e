#include "osp/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace osp {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected integer, got '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected number, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    std::uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected unsigned integer, got '" + v + "'");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> items;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

bool one_of(const std::string& v, std::initializer_list<const char*> opts) {
  return std::any_of(opts.begin(), opts.end(),
                     [&](const char* o) { return v == o; });
}

}  // namespace

std::pair<std::string, std::string> split_tag(const std::string& s) {
  auto pos = s.find(':');
  if (pos == std::string::npos) return {s, ""};
  return {s.substr(0, pos), s.substr(pos + 1)};
}

void apply_key(ExperimentConfig& cfg, const std::string& key,
               const std::string& value) {
  if (key == "structure") cfg.structure = value;
  else if (key == "d") cfg.d = static_cast<int>(parse_long(key, value));
  else if (key == "m") cfg.m = static_cast<int>(parse_long(key, value));
  else if (key == "zeta") cfg.zeta = parse_double(key, value);
  else if (key == "stream") cfg.stream = value;
  else if (key == "nprime") cfg.nprime = static_cast<int>(parse_long(key, value));
  else if (key == "noise") cfg.noise = parse_double(key, value);
  else if (key == "stream_n") cfg.stream_n = static_cast<int>(parse_long(key, value));
  else if (key == "margin") cfg.margin = parse_double(key, value);
  else if (key == "mnist_images") cfg.mnist_images = value;
  else if (key == "mnist_labels") cfg.mnist_labels = value;
  else if (key == "horizon") cfg.horizon = parse_long(key, value);
  else if (key == "reps") cfg.reps = static_cast<int>(parse_long(key, value));
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "feedback") cfg.feedback = value;
  else if (key == "estimator") cfg.estimator = value;
  else if (key == "q_policy") cfg.q_policy = value;
  else if (key == "learner") cfg.learner = value;
  else if (key == "B") cfg.B = parse_double(key, value);
  else if (key == "R") cfg.R = parse_double(key, value);
  else if (key == "eps0") cfg.eps0 = parse_double(key, value);
  else if (key == "delay") cfg.delay = value;
  else if (key == "comparator") cfg.comparator = value;
  else if (key == "offline_passes")
    cfg.offline_passes = static_cast<int>(parse_long(key, value));
  else if (key == "threads") cfg.threads = static_cast<int>(parse_long(key, value));
  else if (key == "out") cfg.out = value;
  else if (key == "log_every") cfg.log_every = parse_long(key, value);
  else throw ConfigError("unknown config key: " + key);
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.rfind("sweep.", 0) == 0) {
      std::string axis = key.substr(6);
      if (axis.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty sweep key");
      auto items = split_list(value);
      if (items.empty())
        throw ConfigError("sweep." + axis + ": empty value list");
      // Validate the axis name and each value by applying to a scratch copy.
      ExperimentConfig scratch = cfg;
      for (const auto& item : items) apply_key(scratch, axis, item);
      cfg.sweep.emplace_back(axis, items);
    } else {
      apply_key(cfg, key, value);
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate(const ExperimentConfig& cfg) {
  if (!one_of(cfg.structure, {"multiclass", "multilabel", "ranking"}))
    throw ConfigError("structure: unknown value '" + cfg.structure + "'");
  if (cfg.d < 2) throw ConfigError("d: must be at least 2");
  if (cfg.structure == "multilabel" && (cfg.m < 1 || cfg.m >= cfg.d))
    throw ConfigError("m: must satisfy 1 <= m < d");
  if (cfg.structure == "ranking" && cfg.d > 12)
    throw ConfigError("d: ranking supports at most 12 items");
  if (cfg.zeta <= 0) throw ConfigError("zeta: must be positive");

  if (!one_of(cfg.stream, {"synth_multiclass", "synth_multilabel", "separable",
                           "mnist"}))
    throw ConfigError("stream: unknown value '" + cfg.stream + "'");
  if (cfg.stream == "synth_multiclass" && cfg.structure != "multiclass")
    throw ConfigError("stream: synth_multiclass requires structure = multiclass");
  if (cfg.stream == "synth_multilabel" && cfg.structure != "multilabel")
    throw ConfigError("stream: synth_multilabel requires structure = multilabel");
  if (cfg.stream == "mnist") {
    if (cfg.structure != "multiclass" || cfg.d != 10)
      throw ConfigError("stream: mnist requires structure = multiclass, d = 10");
    if (cfg.mnist_images.empty() || cfg.mnist_labels.empty())
      throw ConfigError("stream: mnist needs mnist_images and mnist_labels");
  }
  if (cfg.stream == "synth_multiclass" && cfg.nprime < 1)
    throw ConfigError("nprime: must be positive");
  if (cfg.noise < 0 || cfg.noise > 1)
    throw ConfigError("noise: must lie in [0, 1]");
  if (cfg.stream == "separable" && cfg.margin <= 0)
    throw ConfigError("margin: must be positive");

  if (cfg.horizon < 1) throw ConfigError("horizon: must be positive");
  if (cfg.reps < 1) throw ConfigError("reps: must be positive");
  if (!one_of(cfg.feedback, {"full", "bandit"}))
    throw ConfigError("feedback: unknown value '" + cfg.feedback + "'");
  if (!one_of(cfg.estimator, {"exact", "iw", "pi"}))
    throw ConfigError("estimator: unknown value '" + cfg.estimator + "'");
  if (cfg.feedback == "full" && cfg.estimator != "exact")
    throw ConfigError("estimator: full feedback implies estimator = exact");
  if (cfg.feedback == "bandit" && cfg.estimator == "exact")
    throw ConfigError("estimator: bandit feedback needs iw or pi");

  auto [qname, qarg] = split_tag(cfg.q_policy);
  if (!one_of(qname, {"zero", "fixed", "theory_iw", "theory_pi",
                      "theory_pi_delayed"}))
    throw ConfigError("q_policy: unknown value '" + cfg.q_policy + "'");
  if (qname == "fixed") {
    double q = parse_double("q_policy", qarg);
    if (!(q > 0 && q <= 1)) throw ConfigError("q_policy: fixed q must lie in (0, 1]");
  }
  if (cfg.feedback == "full" && qname != "zero")
    throw ConfigError("q_policy: full feedback implies q_policy = zero");
  if (cfg.feedback == "bandit" && qname == "zero")
    throw ConfigError("q_policy: bandit feedback needs q > 0 for unbiasedness");

  if (!one_of(cfg.learner, {"ogd", "bold", "odaftrl", "solid"}))
    throw ConfigError("learner: unknown value '" + cfg.learner + "'");
  if (cfg.B <= 0) throw ConfigError("B: must be positive");
  if (cfg.eps0 <= 0) throw ConfigError("eps0: must be positive");

  auto [dname, darg] = split_tag(cfg.delay);
  if (!one_of(dname, {"none", "fixed", "uniform", "trace"}))
    throw ConfigError("delay: unknown value '" + cfg.delay + "'");
  if (dname == "fixed" || dname == "uniform") {
    long v = parse_long("delay", darg);
    if (v < 0) throw ConfigError("delay: bound must be nonnegative");
  }
  if (dname == "trace" && darg.empty())
    throw ConfigError("delay: trace needs a file path");
  if (cfg.learner == "odaftrl" && dname != "none" && dname != "fixed")
    throw ConfigError(
        "learner: odaftrl needs feedback in origin order; use delay = none "
        "or fixed:<d>");

  if (!one_of(cfg.comparator, {"zero", "planted", "offline"}))
    throw ConfigError("comparator: unknown value '" + cfg.comparator + "'");
  if (cfg.comparator == "planted" && cfg.stream != "separable")
    throw ConfigError("comparator: planted is only defined for stream = separable");
  if (cfg.offline_passes < 1) throw ConfigError("offline_passes: must be positive");
  if (cfg.threads < 1) throw ConfigError("threads: must be positive");
  if (cfg.log_every < 1) throw ConfigError("log_every: must be positive");
}

}  // namespace osp
