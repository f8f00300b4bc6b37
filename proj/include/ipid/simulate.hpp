#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ipid/detectors.hpp"
#include "ipid/model.hpp"

namespace ipid {

/// When the change happens in a simulated run.
struct ChangePoint {
  enum class Mode { fixed, drawn, none };
  Mode mode = Mode::none;
  long long nu = 1;                       // fixed
  std::optional<ChangePointPrior> prior;  // drawn

  static ChangePoint fixed(long long nu);
  static ChangePoint drawn(ChangePointPrior prior);
  static ChangePoint none() { return {}; }
};

/// Observation model of one simulated run. One (pre, post) pair per stream; the
/// univariate case has a single stream.
struct ScenarioSpec {
  std::vector<StreamPair> streams;
  ChangePoint change_point;
  long long horizon = 1000;
  std::uint64_t seed = 0;

  std::size_t period() const { return streams.front().pre.period(); }
  /// Throws invalid_argument on an empty stream list, period mismatch, horizon < 1 or nu < 1.
  void validate() const;
};

ScenarioSpec single_stream_scenario(IpidLaw pre, IpidLaw post, ChangePoint cp, long long horizon,
                                    std::uint64_t seed);
ScenarioSpec multislot_scenario(const MultislotFamily& fam, const Subset& s, ChangePoint cp,
                                long long horizon, std::uint64_t seed);
ScenarioSpec classbank_scenario(const ClassBank& bank, std::size_t true_class, ChangePoint cp,
                                long long horizon, std::uint64_t seed);
ScenarioSpec multistream_scenario(const MultistreamConfig& cfg, const Subset& b, ChangePoint cp,
                                  long long horizon, std::uint64_t seed);

struct Realization {
  std::vector<std::vector<double>> observations;  // [time][stream]
  std::optional<long long> nu;                    // empty when no change
};

/// Draws nu (if drawn) and then horizon observations. Deterministic in spec.seed.
Realization generate(const ScenarioSpec& spec);

enum class SignalKind { half_sine, square, mexican_hat };
SignalKind parse_signal_kind(const std::string& name);

struct SignalParams {
  double amplitude = 1.0;  // half_sine, mexican_hat
  double offset = 0.0;     // added to every mean
  double high = 1.0;       // square
  double low = -1.0;       // square
  std::optional<std::size_t> high_slots;  // square; default T / 2
  double half_width = 5.0;                // mexican_hat support [-half_width, half_width]
  double shift = 0.0;                     // mexican_hat time shift
};

/// psi(t) = 2 / (9 pi)^(1/4) (1 - t^2) exp(-t^2 / 2).
double mexican_hat(double t);

/// Gaussian i.p.i.d. law whose slot means trace one period of the waveform.
IpidLaw signal_law(SignalKind kind, std::size_t period, const SignalParams& params,
                   double variance);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  bool is_bound = false;  // censored trials make the value a lower bound

  friend bool operator==(const Estimate&, const Estimate&) = default;
};

struct MonteCarloReport {
  std::string metric;
  std::size_t trials = 0;
  std::size_t censored_trials = 0;
  std::optional<Estimate> pfa;
  std::optional<Estimate> add;               // E[tau - nu | tau >= nu]
  std::optional<Estimate> add_unconditional;  // E[(tau - nu)^+]
  std::optional<Estimate> arl;
  std::optional<Estimate> misclass;
  std::optional<Estimate> mean_stopping_time;
  std::optional<double> predicted;
  std::optional<double> budget;
  std::uint64_t seed = 0;

  friend bool operator==(const MonteCarloReport&, const MonteCarloReport&) = default;
};

struct McOptions {
  std::size_t trials = 1000;
  std::size_t workers = 0;  // 0: hardware concurrency
  bool pin_state_at_change = false;
};

struct DelayPrediction {
  DetectorKind kind = DetectorKind::shiryaev;
  double budget = 0.05;
  double info = 0.0;
  double d = 0.0;
};

/// Fraction of trials alarming strictly before a prior-drawn change point.
MonteCarloReport estimate_pfa(const Detector& prototype, const ScenarioSpec& scenario,
                              const McOptions& options);

/// Conditional and unconditional detection delay. Trials censored at the horizon
/// enter with tau = horizon + 1 and flag the estimates as bounds.
MonteCarloReport estimate_add(const Detector& prototype, const ScenarioSpec& scenario,
                              const McOptions& options,
                              std::optional<DelayPrediction> prediction = std::nullopt);

/// Mean of min(tau, horizon) with no change ever occurring.
MonteCarloReport estimate_arl(const Detector& prototype, const ScenarioSpec& scenario,
                              const McOptions& options);

/// Fraction of alarmed trials whose decided class differs from true_class, change at nu = 1.
MonteCarloReport estimate_misclass(const ClassifierDetector& prototype, std::size_t true_class,
                                   long long horizon, std::uint64_t seed,
                                   const McOptions& options);

struct WorstCaseReport {
  std::vector<long long> nus;
  std::vector<MonteCarloReport> natural;
  std::vector<MonteCarloReport> pinned;
  double max_natural = 0.0;
  double max_pinned = 0.0;
};

/// Conditional delay for each nu in the grid (default 1..T), with the detector state
/// evolved naturally over the pre-change samples and, separately, reset at nu.
WorstCaseReport worst_case_delay(const Detector& prototype, const ScenarioSpec& scenario,
                                 const McOptions& options, std::vector<long long> nus = {});

void to_json(nlohmann::json& j, const Estimate& e);
void from_json(const nlohmann::json& j, Estimate& e);
void to_json(nlohmann::json& j, const MonteCarloReport& r);
void from_json(const nlohmann::json& j, MonteCarloReport& r);
void to_json(nlohmann::json& j, const WorstCaseReport& r);
void to_json(nlohmann::json& j, const ChangePoint& c);
void from_json(const nlohmann::json& j, ChangePoint& c);
void to_json(nlohmann::json& j, const ScenarioSpec& s);
/// Accepts {"pre","post"}, {"multislot","true_subset"}, {"bank","true_class"} or
/// {"multistream","true_subset"}, plus "change_point", "horizon" and "seed".
void from_json(const nlohmann::json& j, ScenarioSpec& s);

}  // namespace ipid
