#include "ipid/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "ipid/error.hpp"

namespace ipid {

// Change points and scenarios

ChangePoint ChangePoint::fixed(long long nu) {
  require(nu >= 1, ErrorCode::invalid_argument, "fixed change point must be >= 1");
  ChangePoint c;
  c.mode = Mode::fixed;
  c.nu = nu;
  return c;
}

ChangePoint ChangePoint::drawn(ChangePointPrior prior) {
  ChangePoint c;
  c.mode = Mode::drawn;
  c.prior = std::move(prior);
  return c;
}

void ScenarioSpec::validate() const {
  require(!streams.empty(), ErrorCode::invalid_argument, "scenario has no streams");
  const std::size_t T = streams.front().pre.period();
  for (const auto& s : streams) {
    require(s.pre.period() == T && s.post.period() == T, ErrorCode::period_mismatch,
            "scenario laws must share one period");
  }
  require(horizon >= 1, ErrorCode::invalid_argument, "horizon must be >= 1");
  if (change_point.mode == ChangePoint::Mode::fixed) {
    require(change_point.nu >= 1, ErrorCode::invalid_argument, "fixed change point must be >= 1");
  }
  if (change_point.mode == ChangePoint::Mode::drawn) {
    require(change_point.prior.has_value(), ErrorCode::invalid_argument,
            "drawn change point needs a prior");
  }
}

ScenarioSpec single_stream_scenario(IpidLaw pre, IpidLaw post, ChangePoint cp, long long horizon,
                                    std::uint64_t seed) {
  ScenarioSpec s{{StreamPair{std::move(pre), std::move(post)}}, std::move(cp), horizon, seed};
  s.validate();
  return s;
}

ScenarioSpec multislot_scenario(const MultislotFamily& fam, const Subset& subset, ChangePoint cp,
                                long long horizon, std::uint64_t seed) {
  return single_stream_scenario(fam.base_pre(), post_change_law(fam, subset), std::move(cp),
                                horizon, seed);
}

ScenarioSpec classbank_scenario(const ClassBank& bank, std::size_t true_class, ChangePoint cp,
                                long long horizon, std::uint64_t seed) {
  require(true_class >= 1 && true_class <= bank.classes(), ErrorCode::invalid_argument,
          "true class must lie in 1..M");
  return single_stream_scenario(bank.law(0), bank.law(true_class), std::move(cp), horizon, seed);
}

ScenarioSpec multistream_scenario(const MultistreamConfig& cfg, const Subset& b, ChangePoint cp,
                                  long long horizon, std::uint64_t seed) {
  ScenarioSpec s{stream_laws(cfg, b), std::move(cp), horizon, seed};
  s.validate();
  return s;
}

namespace {

std::optional<long long> draw_change_point(const ChangePoint& cp, Rng& rng) {
  switch (cp.mode) {
    case ChangePoint::Mode::fixed: return cp.nu;
    case ChangePoint::Mode::drawn: return cp.prior->draw(rng);
    case ChangePoint::Mode::none: return std::nullopt;
  }
  return std::nullopt;
}

void draw_row(const ScenarioSpec& spec, long long n, std::optional<long long> nu, Rng& rng,
              std::vector<double>& row) {
  const bool changed = nu && n >= *nu;
  const std::size_t slot = slot_of(n, spec.period());
  for (std::size_t l = 0; l < spec.streams.size(); ++l) {
    const auto& law = changed ? spec.streams[l].post : spec.streams[l].pre;
    row[l] = sample(law.slot(slot), rng);
  }
}

}  // namespace

Realization generate(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng = stream_rng(spec.seed, 0);
  Realization out;
  out.nu = draw_change_point(spec.change_point, rng);
  out.observations.assign(static_cast<std::size_t>(spec.horizon),
                          std::vector<double>(spec.streams.size()));
  for (long long n = 1; n <= spec.horizon; ++n) {
    draw_row(spec, n, out.nu, rng, out.observations[static_cast<std::size_t>(n - 1)]);
  }
  return out;
}

// Signals

SignalKind parse_signal_kind(const std::string& name) {
  if (name == "half-sine" || name == "half_sine") return SignalKind::half_sine;
  if (name == "square") return SignalKind::square;
  if (name == "mexican-hat" || name == "mexican_hat") return SignalKind::mexican_hat;
  fail(ErrorCode::invalid_argument, "unknown signal kind \"" + name + "\"");
}

double mexican_hat(double t) {
  const double norm = 2.0 / std::pow(9.0 * std::numbers::pi, 0.25);
  return norm * (1.0 - t * t) * std::exp(-0.5 * t * t);
}

IpidLaw signal_law(SignalKind kind, std::size_t period, const SignalParams& params,
                   double variance) {
  require(period >= 2, ErrorCode::invalid_argument, "signal period must be >= 2");
  require(variance > 0.0, ErrorCode::invalid_argument, "signal noise variance must be > 0");
  std::vector<SlotDensity> slots;
  slots.reserve(period);
  const auto T = static_cast<double>(period);
  const std::size_t high_slots = params.high_slots.value_or(period / 2);
  for (std::size_t i = 0; i < period; ++i) {
    const auto x = static_cast<double>(i);
    double mean = params.offset;
    switch (kind) {
      case SignalKind::half_sine:
        mean += params.amplitude * std::sin(std::numbers::pi * x / T);
        break;
      case SignalKind::square:
        mean += i < high_slots ? params.high : params.low;
        break;
      case SignalKind::mexican_hat: {
        const double t = -params.half_width + 2.0 * params.half_width * x / (T - 1.0);
        mean += params.amplitude * mexican_hat(t - params.shift);
        break;
      }
    }
    slots.push_back(SlotDensity::gaussian(mean, variance));
  }
  return IpidLaw(std::move(slots));
}

// Monte Carlo

namespace {

struct Trial {
  std::optional<long long> nu;
  std::optional<long long> tau;
  std::optional<std::size_t> decided_class;
  long long last_time = 0;
};

enum class StopRule { before_change, alarm_or_horizon };

template <class F>
auto run_trials(std::size_t trials, std::size_t workers, F&& body) {
  using R = decltype(body(std::size_t{0}));
  std::vector<R> results(trials);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(trials, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < trials; i = next++) {
      try {
        results[i] = body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

Trial simulate_trial(const Detector& prototype, const ScenarioSpec& spec, std::size_t index,
                     StopRule rule, bool pin_state) {
  Rng rng = stream_rng(spec.seed, index);
  Trial trial;
  trial.nu = draw_change_point(spec.change_point, rng);
  auto detector = prototype.clone();
  detector->restart();
  detector->set_reset_on_alarm(false);
  std::vector<double> row(spec.streams.size());
  for (long long n = 1; n <= spec.horizon; ++n) {
    if (rule == StopRule::before_change && trial.nu && n >= *trial.nu) break;
    if (pin_state && trial.nu && n == *trial.nu) detector->reset_statistic();
    draw_row(spec, n, trial.nu, rng, row);
    const auto r = detector->step(row);
    trial.last_time = n;
    if (r.alarm) {
      trial.tau = n;
      trial.decided_class = r.decided_class;
      break;
    }
  }
  return trial;
}

void check_prototype(const Detector& prototype, const ScenarioSpec& spec) {
  spec.validate();
  require(prototype.period() == spec.period(), ErrorCode::period_mismatch,
          "detector period does not match the scenario period");
  require(prototype.streams() == spec.streams.size(), ErrorCode::invalid_argument,
          "detector stream count does not match the scenario");
}

void check_trials(const McOptions& options) {
  require(options.trials >= 1, ErrorCode::invalid_argument, "trials must be >= 1");
}

Estimate binomial(std::size_t hits, std::size_t n, bool bound) {
  const double p = n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
  const double se = n ? std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0;
  return {p, se, n, bound};
}

Estimate sample_mean(const std::vector<double>& values, bool bound) {
  const auto n = values.size();
  if (n == 0) return {0.0, 0.0, 0, bound};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return {mean, se, n, bound};
}

}  // namespace

MonteCarloReport estimate_pfa(const Detector& prototype, const ScenarioSpec& scenario,
                              const McOptions& options) {
  check_prototype(prototype, scenario);
  check_trials(options);
  require(scenario.change_point.mode == ChangePoint::Mode::drawn, ErrorCode::invalid_argument,
          "false-alarm probability needs a prior-drawn change point");
  const auto outcomes = run_trials(options.trials, options.workers, [&](std::size_t i) {
    return simulate_trial(prototype, scenario, i, StopRule::before_change, false);
  });
  std::size_t false_alarms = 0;
  std::size_t censored = 0;
  for (const auto& t : outcomes) {
    if (t.tau) {
      ++false_alarms;
    } else if (*t.nu > scenario.horizon) {
      ++censored;
    }
  }
  MonteCarloReport report;
  report.metric = "pfa";
  report.trials = options.trials;
  report.censored_trials = censored;
  report.pfa = binomial(false_alarms, options.trials, censored > 0);
  report.seed = scenario.seed;
  return report;
}

MonteCarloReport estimate_add(const Detector& prototype, const ScenarioSpec& scenario,
                              const McOptions& options, std::optional<DelayPrediction> prediction) {
  check_prototype(prototype, scenario);
  check_trials(options);
  require(scenario.change_point.mode != ChangePoint::Mode::none, ErrorCode::invalid_argument,
          "detection delay needs a change point");
  std::optional<double> predicted;
  if (prediction) {
    predicted = asymptotic_delay(prediction->kind, prediction->budget, prediction->info,
                                 prediction->d);
  }
  const auto outcomes = run_trials(options.trials, options.workers, [&](std::size_t i) {
    return simulate_trial(prototype, scenario, i, StopRule::alarm_or_horizon,
                          options.pin_state_at_change);
  });
  std::vector<double> conditional;
  std::vector<double> unconditional;
  std::size_t censored = 0;
  for (const auto& t : outcomes) {
    const long long nu = *t.nu;
    if (!t.tau) {
      ++censored;
      if (nu > scenario.horizon) continue;
      const double lower = static_cast<double>(scenario.horizon + 1 - nu);
      conditional.push_back(lower);
      unconditional.push_back(lower);
      continue;
    }
    const long long delay = *t.tau - nu;
    unconditional.push_back(static_cast<double>(std::max<long long>(delay, 0)));
    if (delay >= 0) conditional.push_back(static_cast<double>(delay));
  }
  require(!conditional.empty(), ErrorCode::insufficient_data,
          "no trial reached the change point before alarming");
  MonteCarloReport report;
  report.metric = "add";
  report.trials = options.trials;
  report.censored_trials = censored;
  report.add = sample_mean(conditional, censored > 0);
  report.add_unconditional = sample_mean(unconditional, censored > 0);
  report.predicted = predicted;
  if (prediction) report.budget = prediction->budget;
  report.seed = scenario.seed;
  return report;
}

MonteCarloReport estimate_arl(const Detector& prototype, const ScenarioSpec& scenario,
                              const McOptions& options) {
  check_prototype(prototype, scenario);
  check_trials(options);
  ScenarioSpec no_change = scenario;
  no_change.change_point = ChangePoint::none();
  const auto outcomes = run_trials(options.trials, options.workers, [&](std::size_t i) {
    return simulate_trial(prototype, no_change, i, StopRule::alarm_or_horizon, false);
  });
  std::vector<double> run_lengths;
  run_lengths.reserve(outcomes.size());
  std::size_t censored = 0;
  for (const auto& t : outcomes) {
    if (!t.tau) ++censored;
    run_lengths.push_back(static_cast<double>(t.tau.value_or(scenario.horizon)));
  }
  MonteCarloReport report;
  report.metric = "arl";
  report.trials = options.trials;
  report.censored_trials = censored;
  report.arl = sample_mean(run_lengths, censored > 0);
  report.seed = scenario.seed;
  return report;
}

MonteCarloReport estimate_misclass(const ClassifierDetector& prototype, std::size_t true_class,
                                   long long horizon, std::uint64_t seed,
                                   const McOptions& options) {
  check_trials(options);
  const auto scenario =
      classbank_scenario(prototype.bank(), true_class, ChangePoint::fixed(1), horizon, seed);
  const auto outcomes = run_trials(options.trials, options.workers, [&](std::size_t i) {
    return simulate_trial(prototype, scenario, i, StopRule::alarm_or_horizon, false);
  });
  std::size_t alarmed = 0;
  std::size_t wrong = 0;
  std::size_t censored = 0;
  std::vector<double> stopping;
  for (const auto& t : outcomes) {
    if (!t.tau) {
      ++censored;
      stopping.push_back(static_cast<double>(horizon + 1));
      continue;
    }
    ++alarmed;
    if (t.decided_class != true_class) ++wrong;
    stopping.push_back(static_cast<double>(*t.tau));
  }
  MonteCarloReport report;
  report.metric = "misclass";
  report.trials = options.trials;
  report.censored_trials = censored;
  report.misclass = binomial(wrong, alarmed, false);
  report.mean_stopping_time = sample_mean(stopping, censored > 0);
  report.seed = seed;
  return report;
}

WorstCaseReport worst_case_delay(const Detector& prototype, const ScenarioSpec& scenario,
                                 const McOptions& options, std::vector<long long> nus) {
  if (nus.empty()) {
    for (std::size_t v = 1; v <= scenario.period(); ++v) nus.push_back(static_cast<long long>(v));
  }
  WorstCaseReport out;
  out.nus = nus;
  for (long long nu : nus) {
    ScenarioSpec s = scenario;
    s.change_point = ChangePoint::fixed(nu);
    McOptions natural = options;
    natural.pin_state_at_change = false;
    McOptions pinned = options;
    pinned.pin_state_at_change = true;
    out.natural.push_back(estimate_add(prototype, s, natural));
    out.pinned.push_back(estimate_add(prototype, s, pinned));
    out.max_natural = std::max(out.max_natural, out.natural.back().add->value);
    out.max_pinned = std::max(out.max_pinned, out.pinned.back().add->value);
  }
  return out;
}

// JSON

void to_json(nlohmann::json& j, const Estimate& e) {
  j = {{"value", e.value}, {"std_error", e.std_error}, {"samples", e.samples}, {"is_bound", e.is_bound}};
}

void from_json(const nlohmann::json& j, Estimate& e) {
  e.value = j.at("value").get<double>();
  e.std_error = j.at("std_error").get<double>();
  e.samples = j.at("samples").get<std::size_t>();
  e.is_bound = j.at("is_bound").get<bool>();
}

namespace {

template <class T>
void put(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <class T>
void take(const nlohmann::json& j, const char* key, std::optional<T>& v) {
  if (j.contains(key) && !j.at(key).is_null()) v = j.at(key).get<T>();
}

}  // namespace

void to_json(nlohmann::json& j, const MonteCarloReport& r) {
  j = {{"metric", r.metric},
       {"trials", r.trials},
       {"censored_trials", r.censored_trials},
       {"seed", r.seed}};
  put(j, "pfa", r.pfa);
  put(j, "add", r.add);
  put(j, "add_unconditional", r.add_unconditional);
  put(j, "arl", r.arl);
  put(j, "misclass", r.misclass);
  put(j, "mean_stopping_time", r.mean_stopping_time);
  put(j, "predicted", r.predicted);
  put(j, "budget", r.budget);
}

void from_json(const nlohmann::json& j, MonteCarloReport& r) {
  r = MonteCarloReport{};
  r.metric = j.at("metric").get<std::string>();
  r.trials = j.at("trials").get<std::size_t>();
  r.censored_trials = j.at("censored_trials").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  take(j, "pfa", r.pfa);
  take(j, "add", r.add);
  take(j, "add_unconditional", r.add_unconditional);
  take(j, "arl", r.arl);
  take(j, "misclass", r.misclass);
  take(j, "mean_stopping_time", r.mean_stopping_time);
  take(j, "predicted", r.predicted);
  take(j, "budget", r.budget);
}

void to_json(nlohmann::json& j, const WorstCaseReport& r) {
  j = {{"nus", r.nus},
       {"natural", r.natural},
       {"pinned", r.pinned},
       {"max_natural", r.max_natural},
       {"max_pinned", r.max_pinned}};
}

void to_json(nlohmann::json& j, const ChangePoint& c) {
  switch (c.mode) {
    case ChangePoint::Mode::fixed: j = {{"type", "fixed"}, {"nu", c.nu}}; break;
    case ChangePoint::Mode::drawn: j = {{"type", "prior"}, {"prior", *c.prior}}; break;
    case ChangePoint::Mode::none: j = {{"type", "none"}}; break;
  }
}

void from_json(const nlohmann::json& j, ChangePoint& c) {
  const auto type = j.at("type").get<std::string>();
  if (type == "fixed") {
    c = ChangePoint::fixed(j.at("nu").get<long long>());
  } else if (type == "prior" || type == "drawn") {
    c = ChangePoint::drawn(j.at("prior").get<ChangePointPrior>());
  } else if (type == "none") {
    c = ChangePoint::none();
  } else {
    fail(ErrorCode::parse, "unknown change point type \"" + type + "\"");
  }
}

void to_json(nlohmann::json& j, const ScenarioSpec& s) {
  auto streams = nlohmann::json::array();
  for (const auto& p : s.streams) streams.push_back({{"pre", p.pre}, {"post", p.post}});
  j = {{"streams", streams}, {"change_point", s.change_point}, {"horizon", s.horizon}, {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, ScenarioSpec& s) {
  const auto cp = j.contains("change_point") ? j.at("change_point").get<ChangePoint>()
                                             : ChangePoint::none();
  const long long horizon = j.value("horizon", 1000LL);
  const std::uint64_t seed = j.value("seed", std::uint64_t{0});
  if (j.contains("streams")) {
    std::vector<StreamPair> streams;
    for (const auto& p : j.at("streams")) {
      streams.push_back({p.at("pre").get<IpidLaw>(), p.at("post").get<IpidLaw>()});
    }
    s = ScenarioSpec{std::move(streams), cp, horizon, seed};
    s.validate();
  } else if (j.contains("multislot")) {
    s = multislot_scenario(j.at("multislot").get<MultislotFamily>(),
                           j.at("true_subset").get<Subset>(), cp, horizon, seed);
  } else if (j.contains("multistream")) {
    s = multistream_scenario(j.at("multistream").get<MultistreamConfig>(),
                             j.at("true_subset").get<Subset>(), cp, horizon, seed);
  } else if (j.contains("bank")) {
    s = classbank_scenario(j.at("bank").get<ClassBank>(), j.at("true_class").get<std::size_t>(), cp,
                           horizon, seed);
  } else {
    s = single_stream_scenario(j.at("pre").get<IpidLaw>(), j.at("post").get<IpidLaw>(), cp, horizon,
                               seed);
  }
}

}  // namespace ipid
