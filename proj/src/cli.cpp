#include "ipid/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ipid/csv.hpp"
#include "ipid/error.hpp"
#include "ipid/fit.hpp"
#include "ipid/information.hpp"
#include "ipid/robust.hpp"
#include "ipid/simulate.hpp"

namespace ipid {

namespace {

using nlohmann::json;

// Flag values land here as strings/numbers. Only flags the user actually passed are
// merged over the config file, which itself sits over the defaults.
struct FlagSet {
  std::map<std::string, std::string> text;
  std::map<std::string, double> number;
  std::map<std::string, long long> integer;
  std::map<std::string, bool> toggle;
  std::vector<std::pair<std::string, CLI::Option*>> options;
};

void add_text(CLI::App& app, FlagSet& flags, const std::string& name, const std::string& help) {
  flags.options.emplace_back(name, app.add_option("--" + name, flags.text[name], help));
}

void add_number(CLI::App& app, FlagSet& flags, const std::string& name, const std::string& help) {
  flags.options.emplace_back(name, app.add_option("--" + name, flags.number[name], help));
}

void add_integer(CLI::App& app, FlagSet& flags, const std::string& name, const std::string& help) {
  flags.options.emplace_back(name, app.add_option("--" + name, flags.integer[name], help));
}

void add_toggle(CLI::App& app, FlagSet& flags, const std::string& name, const std::string& help) {
  flags.options.emplace_back(name, app.add_flag("--" + name, flags.toggle[name], help));
}

std::string key_of(std::string name) {
  std::replace(name.begin(), name.end(), '-', '_');
  return name;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, path + ": " + e.what());
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open " + path);
  return in;
}

// Resolved configuration: defaults < config file < flags.
json resolve(const FlagSet& flags, const json& defaults) {
  json cfg = defaults;
  for (const auto& [name, opt] : flags.options) {
    if (name == "config" && opt->count() > 0) {
      const json file = read_json_file(flags.text.at("config"));
      require(file.is_object(), ErrorCode::parse, "config file must hold a JSON object");
      for (auto it = file.begin(); it != file.end(); ++it) cfg[key_of(it.key())] = it.value();
    }
  }
  for (const auto& [name, opt] : flags.options) {
    if (name == "config" || opt->count() == 0) continue;
    const auto key = key_of(name);
    json value;
    if (flags.text.count(name)) {
      value = flags.text.at(name);
    } else if (flags.number.count(name)) {
      value = flags.number.at(name);
    } else if (flags.integer.count(name)) {
      value = flags.integer.at(name);
    } else {
      value = flags.toggle.at(name);
    }
    if (key == "detector" && cfg.contains("detector") && cfg["detector"].is_object()) {
      cfg["detector"]["kind"] = value;
    } else {
      cfg[key] = value;
    }
  }
  return cfg;
}

bool has(const json& cfg, const std::string& key) { return cfg.contains(key) && !cfg.at(key).is_null(); }

// File-valued settings accept a path or an inline JSON value.
json load_ref(const json& cfg, const std::string& key) {
  const auto& v = cfg.at(key);
  return v.is_string() ? read_json_file(v.get<std::string>()) : v;
}

// Model files are either a bare law or the output of `fit` / `lfl select`.
IpidLaw load_law(const json& cfg, const std::string& key) {
  const json j = load_ref(cfg, key);
  return (j.contains("model") ? j.at("model") : j).get<IpidLaw>();
}

Subset parse_subset(const json& v) {
  if (v.is_array()) return v.get<Subset>();
  Subset s;
  std::string text = v.get<std::string>();
  for (auto field : csv::split_fields(text)) {
    s.push_back(static_cast<std::size_t>(csv::parse_double(field)));
  }
  return s;
}

DetectorSpec detector_spec(const json& cfg) {
  DetectorSpec spec;
  if (has(cfg, "detector") && cfg.at("detector").is_object()) {
    spec = cfg.at("detector").get<DetectorSpec>();
  } else {
    spec.kind = parse_detector_kind(cfg.value("detector", std::string("shiryaev")));
  }
  if (has(cfg, "model")) spec.pre = load_law(cfg, "model");
  if (has(cfg, "model2")) spec.post = load_law(cfg, "model2");
  if (has(cfg, "family")) spec.family = load_ref(cfg, "family").get<MultislotFamily>();
  if (has(cfg, "bank")) spec.bank = load_ref(cfg, "bank").get<ClassBank>();
  if (has(cfg, "multistream")) spec.multistream = load_ref(cfg, "multistream").get<MultistreamConfig>();
  if (has(cfg, "prior_rho")) spec.prior = ChangePointPrior::geometric(cfg.at("prior_rho").get<double>());
  if (has(cfg, "threshold")) spec.threshold = cfg.at("threshold").get<PeriodicThresholds>();
  if (has(cfg, "alpha")) spec.alpha = cfg.at("alpha").get<double>();
  if (has(cfg, "beta")) spec.beta = cfg.at("beta").get<double>();
  if (has(cfg, "window")) spec.window = cfg.at("window").get<long long>();
  if (cfg.value("reset_on_alarm", false)) spec.reset_on_alarm = true;
  return spec;
}

std::uint64_t seed_of(const json& cfg) { return cfg.value("seed", std::uint64_t{0}); }

void emit(const json& cfg, const json& body, std::ostream& out) {
  const std::string text = body.dump(2) + "\n";
  if (has(cfg, "out")) {
    std::ofstream file(cfg.at("out").get<std::string>());
    require(file.good(), ErrorCode::io, "cannot write " + cfg.at("out").get<std::string>());
    file << text;
  } else {
    out << text;
  }
}

json with_config(json body, const json& cfg) {
  body["config"] = cfg;
  return body;
}

// fit

int cmd_fit(const json& cfg, std::ostream& out) {
  require(has(cfg, "input"), ErrorCode::invalid_argument, "fit requires --input");
  auto in = open_input(cfg.at("input").get<std::string>());
  const auto layout = cfg.value("layout", std::string("cycles"));
  CycleSet set;
  set.label = cfg.value("label", std::string());
  if (layout == "cycles") {
    set.cycles = read_cycle_rows(in);
    require(!set.cycles.empty(), ErrorCode::insufficient_data, "no cycles in input");
    set.target_period = has(cfg, "period") ? cfg.at("period").get<std::size_t>() : set.cycles.front().size();
  } else if (layout == "long") {
    auto series = read_long_series(in);
    if (cfg.value("smooth", 0LL) > 1) series = median_smooth(series, cfg.at("smooth").get<std::size_t>());
    if (has(cfg, "boundaries")) {
      auto bin = open_input(cfg.at("boundaries").get<std::string>());
      std::vector<std::size_t> bounds;
      for (const auto& row : csv::read_numeric(bin).rows) {
        for (double b : row) bounds.push_back(static_cast<std::size_t>(b));
      }
      set.cycles = segment_cycles(series, bounds);
      require(has(cfg, "period"), ErrorCode::invalid_argument, "segmented fits require --period");
      set.target_period = cfg.at("period").get<std::size_t>();
    } else {
      require(has(cfg, "period"), ErrorCode::invalid_argument, "long layout requires --period");
      set.target_period = cfg.at("period").get<std::size_t>();
      set.cycles = split_periods(series, set.target_period);
    }
  } else {
    fail(ErrorCode::invalid_argument, "unknown layout: " + layout);
  }
  const auto dist = cfg.value("distribution", std::string("gaussian"));
  IpidLaw law;
  if (dist == "gaussian") {
    law = fit_gaussian(set);
  } else if (dist == "poisson") {
    law = fit_poisson(set);
  } else {
    fail(ErrorCode::invalid_argument, "unknown distribution: " + dist);
  }
  emit(cfg, with_config({{"model", law}, {"label", set.label}, {"cycles", set.cycles.size()}}, cfg), out);
  return 0;
}

// detect

int cmd_detect(const json& cfg, std::ostream& out) {
  require(has(cfg, "input"), ErrorCode::invalid_argument, "detect requires --input");
  const auto spec = detector_spec(cfg);
  auto detector = spec.build();
  auto in = open_input(cfg.at("input").get<std::string>());
  const auto observations = csv::read_observations(in);
  for (std::size_t i = 0; i < observations.size(); ++i) {
    require(observations[i].size() == detector->streams(), ErrorCode::period_mismatch,
            "observation row " + std::to_string(i + 1) + " has " + std::to_string(observations[i].size()) +
                " values, detector expects " + std::to_string(detector->streams()));
  }
  const bool stop = cfg.value("stop_on_alarm", false);
  const auto trajectory = run(*detector, observations, stop);

  if (has(cfg, "trajectory")) {
    std::ofstream file(cfg.at("trajectory").get<std::string>());
    require(file.good(), ErrorCode::io, "cannot write " + cfg.at("trajectory").get<std::string>());
    write_trajectory_csv(file, detector->period(), observations, trajectory);
  }

  json summary;
  summary["samples"] = trajectory.size();
  summary["alarms"] = json::array();
  for (const auto& r : trajectory) {
    if (r.alarm) summary["alarms"].push_back(r);
  }
  const auto first = std::find_if(trajectory.begin(), trajectory.end(), [](const StepResult& r) { return r.alarm; });
  if (first == trajectory.end()) {
    summary["status"] = "no alarm";
    summary["first_alarm"] = nullptr;
  } else {
    summary["status"] = "alarm";
    summary["first_alarm"] = first->time_index;
    summary["decided_class"] = first->decided_class ? json(*first->decided_class) : json(nullptr);
  }
  summary["final_statistic"] = trajectory.empty() ? json(nullptr) : json(trajectory.back().statistic);
  summary["threshold"] = spec.resolved_threshold();
  emit(cfg, with_config(summary, cfg), out);
  return 0;
}

// Scenario from --scenario, or derived from the detector configuration.
ScenarioSpec scenario_from(const json& cfg, const DetectorSpec& spec, const std::string& metric) {
  ScenarioSpec scenario;
  if (has(cfg, "scenario")) {
    scenario = load_ref(cfg, "scenario").get<ScenarioSpec>();
  } else {
    ChangePoint cp;
    if (metric == "pfa") {
      require(spec.prior.has_value(), ErrorCode::invalid_argument, "pfa requires a prior (--prior-rho)");
      cp = ChangePoint::drawn(*spec.prior);
    } else if (metric == "arl") {
      cp = ChangePoint::none();
    } else {
      cp = ChangePoint::fixed(cfg.value("nu", 1LL));
    }
    const long long horizon = cfg.value("horizon", 1000LL);
    if (spec.family) {
      require(has(cfg, "true_subset"), ErrorCode::invalid_argument, "multislot scenarios require --true-subset");
      scenario = multislot_scenario(*spec.family, parse_subset(cfg.at("true_subset")), cp, horizon, 0);
    } else if (spec.multistream) {
      require(has(cfg, "true_subset"), ErrorCode::invalid_argument, "multistream scenarios require --true-subset");
      scenario = multistream_scenario(*spec.multistream, parse_subset(cfg.at("true_subset")), cp, horizon, 0);
    } else if (spec.bank) {
      scenario = classbank_scenario(*spec.bank, cfg.value("true_class", std::size_t{1}), cp, horizon, 0);
    } else {
      require(spec.pre && spec.post, ErrorCode::invalid_argument, "scenario requires --model and --model2");
      const IpidLaw truth = has(cfg, "truth") ? load_law(cfg, "truth") : *spec.post;
      scenario = single_stream_scenario(*spec.pre, truth, cp, horizon, 0);
    }
  }
  if (has(cfg, "horizon")) scenario.horizon = cfg.at("horizon").get<long long>();
  if (has(cfg, "seed")) scenario.seed = seed_of(cfg);
  if (has(cfg, "nu") && scenario.change_point.mode == ChangePoint::Mode::fixed) {
    scenario.change_point.nu = cfg.at("nu").get<long long>();
  }
  scenario.validate();
  return scenario;
}

int cmd_simulate(const json& cfg, std::ostream& out) {
  ScenarioSpec scenario;
  if (has(cfg, "scenario")) {
    scenario = scenario_from(cfg, DetectorSpec{}, "");
  } else {
    require(has(cfg, "model") && has(cfg, "model2"), ErrorCode::invalid_argument,
            "simulate requires --scenario or --model and --model2");
    ChangePoint cp = ChangePoint::none();
    if (has(cfg, "nu")) {
      cp = ChangePoint::fixed(cfg.at("nu").get<long long>());
    } else if (has(cfg, "prior_rho")) {
      cp = ChangePoint::drawn(ChangePointPrior::geometric(cfg.at("prior_rho").get<double>()));
    }
    scenario = single_stream_scenario(load_law(cfg, "model"), load_law(cfg, "model2"), cp,
                                      cfg.value("horizon", 1000LL), seed_of(cfg));
  }
  const auto data = generate(scenario);
  if (has(cfg, "observations")) {
    std::ofstream file(cfg.at("observations").get<std::string>());
    require(file.good(), ErrorCode::io, "cannot write " + cfg.at("observations").get<std::string>());
    const std::size_t L = scenario.streams.size();
    file << "time";
    for (std::size_t l = 0; l < L; ++l) file << (L == 1 ? ",value" : ",value_" + std::to_string(l));
    file << '\n';
    file.precision(17);
    for (std::size_t n = 0; n < data.observations.size(); ++n) {
      file << n + 1;
      for (double v : data.observations[n]) file << ',' << v;
      file << '\n';
    }
  }
  json body = {{"samples", data.observations.size()},
               {"nu", data.nu ? json(*data.nu) : json(nullptr)},
               {"scenario", scenario}};
  emit(cfg, with_config(body, cfg), out);
  return 0;
}

// evaluate

std::optional<DelayPrediction> prediction_for(const DetectorSpec& spec, const ScenarioSpec& scenario) {
  DelayPrediction p;
  p.kind = spec.kind;
  if (is_bayesian(spec.kind)) {
    if (!spec.alpha) return std::nullopt;
    p.budget = *spec.alpha;
    p.d = spec.prior ? spec.prior->tail_exponent() : 0.0;
  } else {
    if (!spec.beta) return std::nullopt;
    p.budget = *spec.beta;
  }
  if (spec.kind == DetectorKind::classifier) {
    p.info = info_matrix(*spec.bank).i_star;
  } else if (spec.kind == DetectorKind::robust_shiryaev) {
    p.info = info_number(*spec.pre, *spec.post);
  } else {
    p.info = 0.0;
    for (const auto& s : scenario.streams) p.info += info_number(s.pre, s.post);
  }
  return p;
}

int cmd_evaluate(const json& cfg, std::ostream& out) {
  const auto metric = cfg.value("metric", std::string("add"));
  const auto spec = detector_spec(cfg);
  auto detector = spec.build();
  McOptions options;
  const long long trials = cfg.value("trials", 1000LL);
  require(trials >= 1, ErrorCode::invalid_argument, "trials must be >= 1");
  options.trials = static_cast<std::size_t>(trials);
  options.workers = cfg.value("workers", std::size_t{0});
  options.pin_state_at_change = cfg.value("pin_state", false);

  json body;
  if (metric == "misclass") {
    const auto* cls = dynamic_cast<const ClassifierDetector*>(detector.get());
    require(cls != nullptr, ErrorCode::invalid_argument, "misclass requires a classifier detector");
    auto report = estimate_misclass(*cls, cfg.value("true_class", std::size_t{1}), cfg.value("horizon", 10000LL),
                                    seed_of(cfg), options);
    if (spec.beta) report.budget = 1.0 / *spec.beta;
    body = report;
  } else {
    const auto scenario = scenario_from(cfg, spec, metric);
    if (metric == "pfa") {
      auto report = estimate_pfa(*detector, scenario, options);
      report.budget = spec.alpha;
      body = report;
    } else if (metric == "add") {
      body = estimate_add(*detector, scenario, options, prediction_for(spec, scenario));
    } else if (metric == "arl") {
      auto report = estimate_arl(*detector, scenario, options);
      report.budget = spec.beta;
      body = report;
    } else if (metric == "worst_case") {
      std::vector<long long> nus;
      if (has(cfg, "nus")) nus = cfg.at("nus").get<std::vector<long long>>();
      body = worst_case_delay(*detector, scenario, options, nus);
    } else {
      fail(ErrorCode::invalid_argument, "unknown metric: " + metric);
    }
  }
  emit(cfg, with_config(body, cfg), out);
  return 0;
}

// info

int cmd_info(const json& cfg, std::ostream& out) {
  json body;
  if (has(cfg, "bank")) {
    const auto bank = load_ref(cfg, "bank").get<ClassBank>();
    const auto m = info_matrix(bank);
    body = m;
    if (has(cfg, "beta")) {
      const double beta = cfg.at("beta").get<double>();
      body["threshold"] = threshold_for(DetectorKind::classifier, beta, bank.classes());
      body["predicted_delay"] = asymptotic_delay(DetectorKind::classifier, beta, m.i_star);
      if (has(cfg, "epsilon")) body["window"] = window_size(beta, m.i_star, cfg.at("epsilon").get<double>());
    }
  } else if (has(cfg, "family")) {
    require(has(cfg, "subset"), ErrorCode::invalid_argument, "multislot info requires --subset");
    const auto fam = load_ref(cfg, "family").get<MultislotFamily>();
    body = info_multislot_report(fam, parse_subset(cfg.at("subset")));
  } else if (has(cfg, "multistream")) {
    require(has(cfg, "subset"), ErrorCode::invalid_argument, "multistream info requires --subset");
    const auto ms = load_ref(cfg, "multistream").get<MultistreamConfig>();
    body = {{"aggregate", info_multistream(ms, parse_subset(cfg.at("subset")))}, {"formula_id", "multistream"}};
  } else {
    require(has(cfg, "model") && has(cfg, "model2"), ErrorCode::invalid_argument,
            "info requires --model and --model2, --family, --multistream or --bank");
    body = info_report(load_law(cfg, "model"), load_law(cfg, "model2"));
  }
  if (!has(cfg, "bank") && body.contains("aggregate")) {
    const double info = body.at("aggregate").get<double>();
    const auto kind = parse_detector_kind(cfg.value("detector", std::string(has(cfg, "alpha") ? "shiryaev" : "cusum")));
    const double d = has(cfg, "prior_rho") ? ChangePointPrior::geometric(cfg.at("prior_rho").get<double>()).tail_exponent() : 0.0;
    const auto budget_key = is_bayesian(kind) ? "alpha" : "beta";
    if (has(cfg, budget_key) && info > 0) {
      const double budget = cfg.at(budget_key).get<double>();
      body["threshold"] = threshold_for(kind, budget);
      body["predicted_delay"] = asymptotic_delay(kind, budget, info, is_bayesian(kind) ? d : 0.0);
    }
  }
  emit(cfg, with_config(body, cfg), out);
  return 0;
}

// lfl

int cmd_lfl(const std::string& action, const json& cfg, std::ostream& out) {
  require(has(cfg, "model") && has(cfg, "family"), ErrorCode::invalid_argument, "lfl requires --model and --family");
  const auto pre = load_law(cfg, "model");
  const auto family = load_ref(cfg, "family").get<UncertaintyFamily>();
  DominanceOptions options;
  options.seed = cfg.value("seed", options.seed);
  options.samples = cfg.value("samples", options.samples);
  json body;
  if (action == "validate") {
    require(has(cfg, "model2"), ErrorCode::invalid_argument, "lfl validate requires --model2");
    body = validate_lfl(pre, load_law(cfg, "model2"), family, options);
  } else if (action == "select") {
    const auto lfl = select_lfl(pre, family, options);
    body = {{"model", lfl}, {"report", validate_lfl(pre, lfl, family, options)}};
  } else {
    fail(ErrorCode::invalid_argument, "lfl action must be validate or select");
  }
  emit(cfg, with_config(body, cfg), out);
  return 0;
}

void error_json(std::ostream& err, std::string_view code, const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quickest change detection for periodic (i.p.i.d.) processes", "ipid"};
  app.require_subcommand(1);

  struct Command {
    CLI::App* app;
    FlagSet flags;
    json defaults;
  };
  std::map<std::string, Command> commands;
  std::string lfl_action;

  auto make = [&](const std::string& name, const std::string& help, json defaults) -> Command& {
    auto& c = commands[name];
    c.app = app.add_subcommand(name, help);
    c.defaults = std::move(defaults);
    add_text(*c.app, c.flags, "config", "JSON config file; flags override its values");
    add_text(*c.app, c.flags, "out", "Write the result JSON here instead of stdout");
    return c;
  };
  auto detector_flags = [](Command& c) {
    add_text(*c.app, c.flags, "detector", "shiryaev, robust_shiryaev, cusum, mps, msps or classifier");
    add_text(*c.app, c.flags, "model", "Pre-change law JSON");
    add_text(*c.app, c.flags, "model2", "Post-change law (or LFL) JSON");
    add_text(*c.app, c.flags, "family", "Multislot family JSON");
    add_text(*c.app, c.flags, "bank", "Class bank JSON");
    add_text(*c.app, c.flags, "multistream", "Multistream configuration JSON");
    add_number(*c.app, c.flags, "prior-rho", "Geometric prior parameter");
    add_number(*c.app, c.flags, "alpha", "False alarm probability budget");
    add_number(*c.app, c.flags, "beta", "Mean time to false alarm budget");
    add_number(*c.app, c.flags, "threshold", "Explicit threshold");
    add_integer(*c.app, c.flags, "window", "Classifier window length");
    add_toggle(*c.app, c.flags, "reset-on-alarm", "Restart the statistic after every alarm");
  };

  {
    auto& c = make("fit", "Fit a per-slot model from training cycles", {{"layout", "cycles"}, {"distribution", "gaussian"}});
    add_text(*c.app, c.flags, "input", "Training CSV");
    add_text(*c.app, c.flags, "layout", "cycles (one cycle per row) or long (timestamp,value)");
    add_text(*c.app, c.flags, "distribution", "gaussian or poisson");
    add_integer(*c.app, c.flags, "period", "Slots per period");
    add_integer(*c.app, c.flags, "smooth", "Trailing median window applied to long series");
    add_text(*c.app, c.flags, "boundaries", "CSV of cycle start indices for long series");
    add_text(*c.app, c.flags, "label", "Class label stored with the model");
  }
  {
    auto& c = make("detect", "Run a detector over an observation CSV", {{"detector", "shiryaev"}});
    detector_flags(c);
    add_text(*c.app, c.flags, "input", "Observation CSV (time,value...)");
    add_text(*c.app, c.flags, "trajectory", "Trajectory CSV output path");
    add_toggle(*c.app, c.flags, "stop-on-alarm", "Stop at the first alarm");
  }
  {
    auto& c = make("simulate", "Generate an observation sequence", {});
    add_text(*c.app, c.flags, "scenario", "Scenario JSON");
    add_text(*c.app, c.flags, "model", "Pre-change law JSON");
    add_text(*c.app, c.flags, "model2", "Post-change law JSON");
    add_number(*c.app, c.flags, "prior-rho", "Draw the change point from Geometric(rho)");
    add_integer(*c.app, c.flags, "nu", "Fixed change point");
    add_integer(*c.app, c.flags, "horizon", "Number of samples");
    add_integer(*c.app, c.flags, "seed", "Master seed");
    add_text(*c.app, c.flags, "observations", "Observation CSV output path");
  }
  {
    auto& c = make("evaluate", "Monte Carlo performance evaluation", {{"detector", "shiryaev"}, {"metric", "add"}, {"trials", 1000}, {"seed", 0}});
    detector_flags(c);
    add_text(*c.app, c.flags, "scenario", "Scenario JSON");
    add_text(*c.app, c.flags, "metric", "pfa, add, arl, misclass or worst_case");
    add_text(*c.app, c.flags, "truth", "True post-change law when it differs from --model2");
    add_text(*c.app, c.flags, "true-subset", "True changed slots or streams, e.g. 0,2");
    add_integer(*c.app, c.flags, "true-class", "True class for misclassification runs");
    add_integer(*c.app, c.flags, "nu", "Fixed change point");
    add_integer(*c.app, c.flags, "trials", "Monte Carlo trials");
    add_integer(*c.app, c.flags, "workers", "Worker threads (0: all cores)");
    add_integer(*c.app, c.flags, "horizon", "Samples per trial");
    add_integer(*c.app, c.flags, "seed", "Master seed");
    add_toggle(*c.app, c.flags, "pin-state", "Reset the detector at the change point");
  }
  {
    auto& c = make("info", "Information numbers, thresholds and predicted delays", {});
    add_text(*c.app, c.flags, "detector", "Detector kind for threshold and delay");
    add_text(*c.app, c.flags, "model", "Pre-change law JSON");
    add_text(*c.app, c.flags, "model2", "Post-change law JSON");
    add_text(*c.app, c.flags, "family", "Multislot family JSON");
    add_text(*c.app, c.flags, "multistream", "Multistream configuration JSON");
    add_text(*c.app, c.flags, "bank", "Class bank JSON");
    add_text(*c.app, c.flags, "subset", "Changed slots or streams, e.g. 0,2");
    add_number(*c.app, c.flags, "prior-rho", "Geometric prior parameter");
    add_number(*c.app, c.flags, "alpha", "False alarm probability budget");
    add_number(*c.app, c.flags, "beta", "Mean time to false alarm budget");
    add_number(*c.app, c.flags, "epsilon", "Window slack for the window-limited classifier");
  }
  {
    auto& c = make("lfl", "Validate or select a least favorable law", {});
    c.app->add_option("action", lfl_action, "validate or select")->required();
    add_text(*c.app, c.flags, "model", "Pre-change law JSON");
    add_text(*c.app, c.flags, "model2", "Candidate LFL JSON (validate)");
    add_text(*c.app, c.flags, "family", "Uncertainty family JSON");
    add_integer(*c.app, c.flags, "samples", "Monte Carlo samples per dominance check");
    add_integer(*c.app, c.flags, "seed", "Dominance sampling seed");
  }

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    error_json(err, "usage", e.what());
    return 1;
  }

  try {
    for (auto& [name, c] : commands) {
      if (!c.app->parsed()) continue;
      const json cfg = resolve(c.flags, c.defaults);
      if (name == "fit") return cmd_fit(cfg, out);
      if (name == "detect") return cmd_detect(cfg, out);
      if (name == "simulate") return cmd_simulate(cfg, out);
      if (name == "evaluate") return cmd_evaluate(cfg, out);
      if (name == "info") return cmd_info(cfg, out);
      if (name == "lfl") return cmd_lfl(lfl_action, cfg, out);
    }
  } catch (const Error& e) {
    error_json(err, to_string(e.code()), e.what());
    return 2;
  } catch (const json::exception& e) {
    error_json(err, to_string(ErrorCode::parse), e.what());
    return 2;
  }
  error_json(err, "usage", "no command");
  return 1;
}

}  // namespace ipid
