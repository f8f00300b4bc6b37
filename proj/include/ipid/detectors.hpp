#pragma once

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "ipid/information.hpp"
#include "ipid/model.hpp"

namespace ipid {

struct StepResult {
  double statistic = 0.0;
  bool alarm = false;
  std::optional<std::size_t> decided_class;  // classifier banks only, 1-based class
  long long time_index = 0;                  // 1-based observation index

  friend bool operator==(const StepResult&, const StepResult&) = default;
};

/// Streaming detector over an i.p.i.d. observation process. Each call to step()
/// consumes observation n = time() + 1, which belongs to slot (n - 1) mod T.
class Detector {
public:
  virtual ~Detector() = default;

  StepResult step(std::span<const double> x);
  StepResult step(double x) { return step(std::span<const double>(&x, 1)); }

  /// Statistic back to its initial value; the clock (and so slot alignment) is kept.
  void reset_statistic() { clear(); }
  /// Statistic and clock back to time 0.
  void restart() {
    clear();
    time_ = 0;
  }

  long long time() const noexcept { return time_; }
  std::size_t period() const noexcept { return period_; }
  virtual std::size_t streams() const noexcept { return 1; }
  virtual DetectorKind kind() const noexcept = 0;
  virtual double threshold_at(std::size_t slot) const = 0;
  virtual std::unique_ptr<Detector> clone() const = 0;

  bool reset_on_alarm() const noexcept { return reset_on_alarm_; }
  void set_reset_on_alarm(bool on) noexcept { reset_on_alarm_ = on; }

protected:
  explicit Detector(std::size_t period) : period_(period) {}

  virtual StepResult advance(std::span<const double> x, long long n, std::size_t slot) = 0;
  virtual void clear() = 0;

private:
  std::size_t period_;
  long long time_ = 0;
  bool reset_on_alarm_ = false;
};

/// Periodic Shiryaev rule: posterior P(nu <= n | X_1..X_n), alarm when it reaches
/// the threshold of the current slot. Kept as log-odds internally.
class ShiryaevDetector final : public Detector {
public:
  ShiryaevDetector(IpidLaw pre, IpidLaw post, ChangePointPrior prior, PeriodicThresholds thresholds,
                   DetectorKind kind = DetectorKind::shiryaev);

  double belief() const noexcept;
  double log_odds() const noexcept { return log_odds_; }
  const IpidLaw& pre() const noexcept { return pre_; }
  const IpidLaw& post() const noexcept { return post_; }

  DetectorKind kind() const noexcept override { return kind_; }
  double threshold_at(std::size_t slot) const override { return thresholds_.at_slot(slot); }
  std::unique_ptr<Detector> clone() const override {
    return std::make_unique<ShiryaevDetector>(*this);
  }

private:
  StepResult advance(std::span<const double> x, long long n, std::size_t slot) override;
  void clear() override { log_odds_ = -std::numeric_limits<double>::infinity(); }

  IpidLaw pre_;
  IpidLaw post_;
  ChangePointPrior prior_;
  PeriodicThresholds thresholds_;
  DetectorKind kind_;
  double log_odds_ = -std::numeric_limits<double>::infinity();
};

/// Shiryaev rule designed with the least favorable post-change law. The law is
/// trusted as given; robust.hpp offers a validating constructor.
ShiryaevDetector robust_shiryaev(IpidLaw pre, IpidLaw lfl, ChangePointPrior prior,
                                 PeriodicThresholds thresholds);

/// Periodic CUSUM: W_n = max(W_{n-1}, 0) + ln g1(X_n)/g0(X_n), alarm when W_n >= A.
class CusumDetector final : public Detector {
public:
  CusumDetector(IpidLaw pre, IpidLaw post, PeriodicThresholds thresholds);

  double score() const noexcept { return score_; }

  DetectorKind kind() const noexcept override { return DetectorKind::cusum; }
  double threshold_at(std::size_t slot) const override { return thresholds_.at_slot(slot); }
  std::unique_ptr<Detector> clone() const override { return std::make_unique<CusumDetector>(*this); }

private:
  StepResult advance(std::span<const double> x, long long n, std::size_t slot) override;
  void clear() override { score_ = 0.0; }

  IpidLaw pre_;
  IpidLaw post_;
  PeriodicThresholds thresholds_;
  double score_ = 0.0;
};

/// Shared machinery of the mixture rules: one Shiryaev log-odds per candidate,
/// statistic R_n = sum_c w_c exp(log_odds_c), alarm when R_n > A.
class MixtureShiryaevDetector : public Detector {
public:
  /// Per-candidate log-odds.
  const std::vector<double>& log_odds() const noexcept { return log_odds_; }
  double log_statistic() const noexcept { return log_statistic_; }
  double threshold_at(std::size_t slot) const override { return thresholds_.at_slot(slot); }

protected:
  MixtureShiryaevDetector(std::size_t period, const ChangePointPrior& prior,
                          std::vector<double> weights, PeriodicThresholds thresholds);

  /// Advances every candidate given its log-likelihood ratio for this sample.
  StepResult mix(std::span<const double> candidate_llr, std::size_t slot);
  void clear() override;

private:
  double log_rho_;
  double log_stay_;  // ln(1 - rho)
  std::vector<double> log_weights_;
  PeriodicThresholds thresholds_;
  std::vector<double> log_odds_;
  double log_statistic_;
};

/// Mixture periodic Shiryaev over an unknown set of changed slots. Geometric prior only.
class MpsDetector final : public MixtureShiryaevDetector {
public:
  MpsDetector(MultislotFamily family, const ChangePointPrior& prior, PeriodicThresholds thresholds);

  const MultislotFamily& family() const noexcept { return family_; }
  DetectorKind kind() const noexcept override { return DetectorKind::mps; }
  std::unique_ptr<Detector> clone() const override { return std::make_unique<MpsDetector>(*this); }

private:
  StepResult advance(std::span<const double> x, long long n, std::size_t slot) override;

  MultislotFamily family_;
  std::vector<std::vector<bool>> in_candidate_;  // [candidate][slot]
  std::vector<double> scratch_;
};

/// Mixture Shiryaev over an unknown subset of affected streams. Geometric prior only.
class MspsDetector final : public MixtureShiryaevDetector {
public:
  MspsDetector(MultistreamConfig config, const ChangePointPrior& prior,
               PeriodicThresholds thresholds);

  const MultistreamConfig& config() const noexcept { return config_; }
  std::size_t streams() const noexcept override { return config_.stream_count(); }
  DetectorKind kind() const noexcept override { return DetectorKind::msps; }
  std::unique_ptr<Detector> clone() const override { return std::make_unique<MspsDetector>(*this); }

private:
  StepResult advance(std::span<const double> x, long long n, std::size_t slot) override;

  MultistreamConfig config_;
  std::vector<double> stream_llr_;
  std::vector<double> scratch_;
};

/// Joint detection and classification over a class bank. For class l the statistic is
///   U_l(n) = max_{k in window} min_{m != l} sum_{i=k}^n ln g^(l)_i(X_i)/g^(m)_i(X_i),
/// with the window k in [max(1, n - L), n] (all of 1..n when unlimited).
class ClassifierDetector final : public Detector {
public:
  ClassifierDetector(ClassBank bank, PeriodicThresholds thresholds,
                     std::optional<long long> window = std::nullopt);

  const ClassBank& bank() const noexcept { return bank_; }
  std::optional<long long> window() const noexcept { return window_; }
  /// U_1..U_M from the last step (index 0 is class 1).
  const std::vector<double>& class_statistics() const noexcept { return class_stats_; }
  /// C_{lm}(n) for the current n.
  double pair_sum(std::size_t l, std::size_t m) const;

  DetectorKind kind() const noexcept override { return DetectorKind::classifier; }
  double threshold_at(std::size_t slot) const override { return thresholds_.at_slot(slot); }
  std::unique_ptr<Detector> clone() const override {
    return std::make_unique<ClassifierDetector>(*this);
  }

private:
  StepResult advance(std::span<const double> x, long long n, std::size_t slot) override;
  void clear() override;
  std::size_t pair_index(std::size_t l, std::size_t m) const noexcept {
    return l * (bank_.classes() + 1) + m;
  }

  ClassBank bank_;
  PeriodicThresholds thresholds_;
  std::optional<long long> window_;
  std::vector<double> sums_;                     // C_{lm}(n), (M+1)^2 layout
  std::deque<std::vector<double>> checkpoints_;  // C(k - 1) for the admissible k
  std::vector<double> class_stats_;
};

/// Steps the detector over observations (one row per time step; a row holds one
/// value per stream). Truncates at the first alarm when stop_on_alarm is set.
std::vector<StepResult> run(Detector& detector, std::span<const std::vector<double>> observations,
                            bool stop_on_alarm);
std::vector<StepResult> run(Detector& detector, std::span<const double> observations,
                            bool stop_on_alarm);

/// Trajectory CSV: time_index,slot,observation,statistic,alarm,decided_class.
/// Multistream observations are joined with ';'.
void write_trajectory_csv(std::ostream& out, std::size_t period,
                          std::span<const std::vector<double>> observations,
                          std::span<const StepResult> trajectory);

/// Declarative detector description, the JSON form used by scenarios and the CLI.
struct DetectorSpec {
  DetectorKind kind = DetectorKind::shiryaev;
  std::optional<IpidLaw> pre;
  std::optional<IpidLaw> post;  // the LFL for robust_shiryaev
  std::optional<MultislotFamily> family;
  std::optional<MultistreamConfig> multistream;
  std::optional<ClassBank> bank;
  std::optional<ChangePointPrior> prior;
  std::optional<PeriodicThresholds> threshold;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<long long> window;
  bool reset_on_alarm = false;

  /// Explicit threshold if given, else the budget formula for this kind.
  PeriodicThresholds resolved_threshold() const;
  std::unique_ptr<Detector> build() const;
};

void to_json(nlohmann::json& j, const DetectorSpec& s);
void from_json(const nlohmann::json& j, DetectorSpec& s);
void to_json(nlohmann::json& j, const StepResult& r);

}  // namespace ipid
