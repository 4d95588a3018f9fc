#include "hdpower/config.hpp"

#include "hdpower/error.hpp"
#include "hdpower/format.hpp"

#include <functional>
#include <map>
#include <set>

namespace hdpower {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Power: return "power";
    case ExperimentKind::Calibration: return "calibration";
    case ExperimentKind::Approximation: return "approximation";
  }
  return "power";
}

namespace {

/// Reads keys from one section, remembering which were consumed so the rest
/// can be reported as unknown.
class SectionReader {
 public:
  SectionReader(const IniDocument& doc, const std::string& name, std::vector<std::string>& errors,
                std::vector<std::pair<std::string, std::string>>& resolved)
      : doc_(doc), name_(name), section_(doc.find(name)), errors_(errors), resolved_(resolved) {}

  bool present() const { return section_ != nullptr; }

  /// Parses `key` with `parse` when present, else keeps `fallback`.
  template <typename T, typename F>
  T get(const std::string& key, T fallback, F&& parse) {
    const IniEntry* entry = find(key);
    if (entry == nullptr) {
      return fallback;
    }
    try {
      return parse(entry->value);
    } catch (const Error& e) {
      errors_.push_back(where(*entry) + name_ + "." + key + ": " + e.what());
      return fallback;
    }
  }

  std::string text(const std::string& key, std::string fallback) {
    const IniEntry* entry = find(key);
    return entry == nullptr ? fallback : entry->value;
  }

  bool has(const std::string& key) const {
    if (section_ == nullptr) return false;
    for (const auto& e : section_->entries) {
      if (e.key == key) return true;
    }
    return false;
  }

  void record(const std::string& key, const std::string& value) {
    resolved_.emplace_back(name_ + "." + key, value);
  }

  /// Every key not consumed so far is an error; `context` explains why keys
  /// that exist elsewhere do not apply here.
  void finish(const std::string& context) {
    if (section_ == nullptr) return;
    for (const auto& e : section_->entries) {
      if (used_.count(e.key) == 0) {
        errors_.push_back(where(e) + "unknown key '" + e.key + "' in [" + name_ + "]" +
                          (context.empty() ? "" : " for " + context));
      }
    }
  }

 private:
  const IniEntry* find(const std::string& key) {
    if (section_ == nullptr) return nullptr;
    for (const auto& e : section_->entries) {
      if (e.key == key) {
        used_.insert(key);
        return &e;
      }
    }
    return nullptr;
  }

  std::string where(const IniEntry& e) const {
    return doc_.source + ":" + std::to_string(e.line) + ": ";
  }

  const IniDocument& doc_;
  std::string name_;
  const IniSection* section_;
  std::vector<std::string>& errors_;
  std::vector<std::pair<std::string, std::string>>& resolved_;
  std::set<std::string> used_;
};

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  for (auto part : split(text, ',')) {
    const auto item = trim(part);
    if (item.empty()) throw InputError("empty list item");
    out.emplace_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ",";
    out += items[i];
  }
  return out;
}

Index parse_count(const std::string& text) {
  const auto v = parse_int(text, "count");
  if (v < 1) throw InputError("must be a positive integer, got " + text);
  return static_cast<Index>(v);
}

double parse_real(const std::string& text) { return parse_double(text, "number"); }

std::vector<Index> parse_dims(const std::string& text) {
  std::vector<Index> dims;
  for (const auto& item : split_list(text)) dims.push_back(parse_count(item));
  return dims;
}

ExperimentKind parse_kind(const std::string& text) {
  if (text == "power") return ExperimentKind::Power;
  if (text == "calibration") return ExperimentKind::Calibration;
  if (text == "approximation") return ExperimentKind::Approximation;
  throw InputError("unknown experiment kind '" + text +
                   "' (expected power, calibration or approximation)");
}

Method parse_method(const std::string& text) {
  if (text == "exact") return Method::Exact;
  if (text == "taylor") return Method::Taylor;
  if (text == "regime") return Method::RegimeFormula;
  throw InputError("unknown method '" + text + "' (expected exact, taylor or regime)");
}

Tolerance parse_tolerance(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InputError("tolerance must be se:<k> or rel:<r>");
  const std::string kind = text.substr(0, colon);
  const double value = parse_double(text.substr(colon + 1), "tolerance");
  if (!(value > 0.0)) throw InputError("tolerance must be positive");
  if (kind == "se") return {Tolerance::Kind::StdErrors, value};
  if (kind == "rel") return {Tolerance::Kind::Relative, value};
  throw InputError("tolerance must be se:<k> or rel:<r>");
}

std::string to_string(const Tolerance& t) {
  return (t.kind == Tolerance::Kind::StdErrors ? "se:" : "rel:") + format_double(t.value);
}

/// Indents the bullet list of a nested validation message one level.
std::string nested(std::string message) {
  std::string out;
  for (char c : message) {
    out += c;
    if (c == '\n') out += "  ";
  }
  return out;
}

std::string dims_text(const std::vector<Index>& dims) {
  std::vector<std::string> items;
  for (Index d : dims) items.push_back(std::to_string(d));
  return join(items);
}

std::vector<AlternativeSpec> read_scenario(SectionReader& s, std::string& type) {
  type = s.text("type", "");
  if (type.empty()) throw InputError("[scenario] needs a type");
  if (type == "gaussian-dep") {
    // sigma is not consumed here, so finish() reports it as inapplicable.
    const auto ks = s.get("k", std::vector<Index>{4}, parse_dims);
    const double rho = s.get("rho", 0.5, parse_real);
    s.record("k", dims_text(ks));
    s.record("rho", format_double(rho));
    std::vector<AlternativeSpec> out;
    for (Index k : ks) out.push_back(GaussianDependent{1, k, rho});
    return out;
  }
  const double sigma = s.get("sigma", 1.0, parse_real);
  if (type == "gaussian-mean" || type == "gaussian-mean-all") {
    GaussianMeanShift g;
    g.sigma = sigma;
    g.delta = s.get("delta", 1.0, parse_real);
    g.mode = type == "gaussian-mean" ? ShiftMode::FirstCoordinate : ShiftMode::AllCoordinates;
    s.record("sigma", format_double(g.sigma));
    s.record("delta", format_double(g.delta));
    return {g};
  }
  if (type == "laplace-mean") {
    LaplaceMeanShift l;
    l.sigma = sigma;
    l.delta = s.get("delta", 1.0, parse_real);
    s.record("sigma", format_double(l.sigma));
    s.record("delta", format_double(l.delta));
    return {l};
  }
  if (type == "gaussian-var") {
    GaussianDiffVariance v;
    v.sigma = sigma;
    v.tau = s.get("tau", 2.0, parse_real);
    s.record("sigma", format_double(v.sigma));
    s.record("tau", format_double(v.tau));
    return {v};
  }
  throw InputError("unknown scenario type '" + type +
                   "' (expected gaussian-mean, gaussian-mean-all, laplace-mean, gaussian-var or "
                   "gaussian-dep)");
}

}  // namespace

ExperimentFile parse_experiment(std::string_view text, const std::string& source) {
  const IniDocument doc = parse_ini(text, source);
  ExperimentFile out;
  std::vector<std::string> errors;
  auto& resolved = out.resolved;

  static const std::set<std::string> known{"experiment", "scenario", "test", "approximation"};
  for (const auto& section : doc.sections) {
    if (known.count(section.name) == 0) {
      errors.push_back(source + ":" + std::to_string(section.line) + ": unknown section [" +
                       section.name + "]");
    }
  }

  SectionReader exp(doc, "experiment", errors, resolved);
  out.kind = exp.get("kind", ExperimentKind::Power, parse_kind);
  out.name = exp.text("name", std::filesystem::path(source).stem().string());
  out.output = exp.text("output", out.name + ".csv");
  const std::uint64_t seed = exp.get("seed", std::uint64_t{1}, [](const std::string& v) {
    return parse_uint64(v, "seed");
  });
  exp.record("kind", to_string(out.kind));
  exp.record("name", out.name);
  exp.record("output", out.output);
  exp.record("seed", std::to_string(seed));
  exp.finish("");
  if (out.output.empty() || out.output.find('/') != std::string::npos) {
    errors.push_back(source + ": output must be a plain file name");
  }

  SectionReader sc(doc, "scenario", errors, resolved);
  std::vector<AlternativeSpec> scenarios{GaussianMeanShift{}};
  std::string type;
  std::vector<Index> dims;
  bool scenario_ok = false;
  if (!sc.present()) {
    errors.push_back(source + ": missing [scenario] section");
  } else {
    try {
      scenarios = read_scenario(sc, type);
      scenario_ok = true;
    } catch (const Error& e) {
      errors.push_back(source + ": " + e.what());
    }
    if (!sc.has("dims")) errors.push_back(source + ": [scenario] needs dims");
    dims = sc.get("dims", std::vector<Index>{}, parse_dims);
    sc.record("type", type);
    sc.record("dims", dims_text(dims));
    sc.finish(type.empty() ? "" : "type " + type);
  }
  const AlternativeSpec& scenario = scenarios.front();
  const bool two_sample = is_two_sample(scenario);

  SectionReader ts(doc, "test", errors, resolved);
  SectionReader ap(doc, "approximation", errors, resolved);
  if (out.kind == ExperimentKind::Approximation) {
    if (ts.present()) errors.push_back(source + ": [test] does not apply to approximation runs");
    if (scenarios.size() > 1) errors.push_back(source + ": approximation runs take a single k");
    auto& cfg = out.approximation;
    cfg.name = out.name;
    cfg.scenario = scenario;
    cfg.dims = dims;
    cfg.master_seed = seed;
    cfg.kernel = ap.get("kernel", KernelFamily::Gaussian,
                        [](const std::string& v) { return parse_kernel_family(v); });
    cfg.method = ap.get("method", Method::Exact, parse_method);
    if (cfg.method == Method::RegimeFormula) {
      cfg.regime = ap.get("regime", Regime::GaussianObs2,
                          [](const std::string& v) { return parse_regime(v); });
      cfg.eps = ap.get("eps", 0.0, parse_real);
      ap.record("regime", to_string(cfg.regime));
      ap.record("eps", format_double(cfg.eps));
    } else {
      cfg.bandwidth = ap.get("bandwidth", cfg.bandwidth,
                             [](const std::string& v) { return parse_bandwidth_rule(v); });
      ap.record("bandwidth", to_string(cfg.bandwidth));
    }
    cfg.samples = ap.get("samples", cfg.samples, parse_count);
    cfg.replicates = ap.get("replicates", cfg.replicates, parse_count);
    cfg.tolerance = ap.get("tolerance", cfg.tolerance, parse_tolerance);
    ap.record("kernel", to_string(cfg.kernel));
    ap.record("method", to_string(cfg.method));
    ap.record("samples", std::to_string(cfg.samples));
    ap.record("replicates", std::to_string(cfg.replicates));
    ap.record("tolerance", to_string(cfg.tolerance));
    ap.finish("method " + to_string(cfg.method));
    if (scenario_ok) {
      try {
        cfg.validate();
      } catch (const ConfigError& e) {
        errors.emplace_back(nested(e.what()));
      }
    }
  } else {
    if (ap.present()) {
      errors.push_back(source + ": [approximation] does not apply to " + to_string(out.kind) +
                       " runs");
    }
    ExperimentConfig cfg;
    cfg.name = out.name;
    cfg.scenario = scenario;
    cfg.dims = dims;
    cfg.master_seed = seed;
    const auto kernel = ts.get("kernel", KernelFamily::Gaussian,
                               [](const std::string& v) { return parse_kernel_family(v); });
    const auto metric = ts.get("metric", DistanceMetric::L2,
                               [](const std::string& v) { return parse_distance_metric(v); });
    const auto names = ts.get("statistics",
                              std::vector<std::string>{two_sample ? "mmd2u" : "dcor2"},
                              [](const std::string& v) { return split_list(v); });
    cfg.statistics.clear();
    bool any_kernel = false;
    bool any_distance = false;
    for (const auto& name : names) {
      try {
        StatisticKind kind;
        kind.statistic = parse_statistic(name);
        kind.kernel = kernel;
        kind.metric = metric;
        (uses_kernel(kind.statistic) ? any_kernel : any_distance) = true;
        cfg.statistics.push_back(kind);
      } catch (const Error& e) {
        errors.push_back(source + ": test.statistics: " + e.what());
      }
    }
    std::vector<std::string> rule_names{"median"};
    if (any_kernel) {
      rule_names = ts.get("bandwidths", rule_names, [](const std::string& v) {
        return split_list(v);
      });
      cfg.bandwidth_rules.clear();
      for (const auto& r : rule_names) {
        try {
          cfg.bandwidth_rules.push_back(parse_bandwidth_rule(r));
        } catch (const Error& e) {
          errors.push_back(source + ": test.bandwidths: " + e.what());
        }
      }
      ts.record("kernel", to_string(kernel));
      ts.record("bandwidths", join(rule_names));
    } else {
      cfg.bandwidth_rules = {MedianHeuristic{}};
    }
    if (any_distance) ts.record("metric", to_string(metric));
    if (!any_kernel && (ts.has("kernel") || ts.has("bandwidths"))) {
      errors.push_back(source + ": kernel and bandwidths do not apply to distance statistics");
    }
    if (!any_distance && ts.has("metric")) {
      errors.push_back(source + ": metric does not apply to kernel statistics");
    }
    cfg.n = ts.get("n", cfg.n, parse_count);
    if (two_sample) {
      cfg.m = ts.get("m", cfg.n, parse_count);
    } else {
      if (ts.has("m")) errors.push_back(source + ": m does not apply to independence scenarios");
      cfg.m = cfg.n;
    }
    cfg.trials = ts.get("trials", cfg.trials, parse_count);
    cfg.permutation.permutations = ts.get("permutations", cfg.permutation.permutations, parse_count);
    cfg.permutation.alpha = ts.get("alpha", cfg.permutation.alpha, parse_real);
    cfg.permutation.mode = two_sample ? TestMode::TwoSample : TestMode::Independence;
    {
      std::vector<std::string> stat_names;
      for (const auto& s : cfg.statistics) stat_names.push_back(to_string(s.statistic));
      ts.record("statistics", join(stat_names));
    }
    ts.record("n", std::to_string(cfg.n));
    if (two_sample) ts.record("m", std::to_string(cfg.m));
    ts.record("trials", std::to_string(cfg.trials));
    ts.record("permutations", std::to_string(cfg.permutation.permutations));
    ts.record("alpha", format_double(cfg.permutation.alpha));
    // Keys rejected above were reported already; mark them consumed.
    for (const char* key : {"kernel", "bandwidths", "metric", "m"}) ts.text(key, "");
    ts.finish("");
    for (const auto& variant : scenarios) {
      cfg.scenario = variant;
      if (out.kind == ExperimentKind::Calibration && !is_null(variant)) {
        errors.push_back(source + ": calibration needs a null scenario (" + describe(variant) +
                         ")");
      }
      if (scenario_ok) {
        try {
          cfg.validate();
        } catch (const ConfigError& e) {
          errors.emplace_back(nested(e.what()));
        }
      }
      out.power.push_back(cfg);
    }
  }

  if (!errors.empty()) {
    std::string message = "experiment file " + source + " is invalid:";
    for (const auto& e : errors) message += "\n  - " + e;
    throw ConfigError(message);
  }
  return out;
}

ExperimentFile load_experiment(const std::filesystem::path& path) {
  return parse_experiment(read_text_file(path), path.string());
}

}  // namespace hdpower
