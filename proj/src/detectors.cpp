#include "ipid/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "ipid/error.hpp"

namespace ipid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) noexcept {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a == kInf || b == kInf) return kInf;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

double logistic(double r) noexcept {
  if (r >= 0.0) return 1.0 / (1.0 + std::exp(-r));
  const double e = std::exp(r);
  return e / (1.0 + e);
}

double logit(double p) noexcept {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return std::log(p) - std::log1p(-p);
}

void check_observation(double x) {
  require(std::isfinite(x), ErrorCode::domain, "non-finite observation");
}

}  // namespace

// Detector

StepResult Detector::step(std::span<const double> x) {
  require(x.size() == streams(), ErrorCode::invalid_argument,
          "expected " + std::to_string(streams()) + " observation(s) per step, got " +
              std::to_string(x.size()));
  for (double v : x) check_observation(v);
  const long long n = time_ + 1;
  StepResult result = advance(x, n, slot_of(n, period_));
  time_ = n;
  result.time_index = n;
  if (result.alarm && reset_on_alarm_) clear();
  return result;
}

// Shiryaev

ShiryaevDetector::ShiryaevDetector(IpidLaw pre, IpidLaw post, ChangePointPrior prior,
                                   PeriodicThresholds thresholds, DetectorKind kind)
    : Detector(pre.period()),
      pre_(std::move(pre)),
      post_(std::move(post)),
      prior_(std::move(prior)),
      thresholds_(std::move(thresholds)),
      kind_(kind) {
  require(pre_.period() == post_.period(), ErrorCode::period_mismatch,
          "pre- and post-change laws must share a period");
  thresholds_.check_belief_scale();
  thresholds_.check_period(period());
}

double ShiryaevDetector::belief() const noexcept { return logistic(log_odds_); }

StepResult ShiryaevDetector::advance(std::span<const double> x, long long n, std::size_t slot) {
  const double z = llr(post_.slot(slot), pre_.slot(slot), x[0]);
  // odds(p~) = (odds(p) + h) / (1 - h) with h the prior hazard at n.
  const double h = prior_.hazard(n);
  double prior_odds;
  if (h >= 1.0) {
    prior_odds = kInf;
  } else {
    const double log_h = h > 0.0 ? std::log(h) : -kInf;
    prior_odds = log_add_exp(log_odds_, log_h) - std::log1p(-h);
  }
  log_odds_ = (prior_odds == kInf || prior_odds == -kInf) ? prior_odds : prior_odds + z;
  const double threshold = thresholds_.at_slot(slot);
  return {belief(), log_odds_ >= logit(threshold), std::nullopt, n};
}

ShiryaevDetector robust_shiryaev(IpidLaw pre, IpidLaw lfl, ChangePointPrior prior,
                                 PeriodicThresholds thresholds) {
  return ShiryaevDetector(std::move(pre), std::move(lfl), std::move(prior), std::move(thresholds),
                          DetectorKind::robust_shiryaev);
}

// CUSUM

CusumDetector::CusumDetector(IpidLaw pre, IpidLaw post, PeriodicThresholds thresholds)
    : Detector(pre.period()),
      pre_(std::move(pre)),
      post_(std::move(post)),
      thresholds_(std::move(thresholds)) {
  require(pre_.period() == post_.period(), ErrorCode::period_mismatch,
          "pre- and post-change laws must share a period");
  thresholds_.check_period(period());
}

StepResult CusumDetector::advance(std::span<const double> x, long long n, std::size_t slot) {
  score_ = std::max(score_, 0.0) + llr(post_.slot(slot), pre_.slot(slot), x[0]);
  return {score_, score_ >= thresholds_.at_slot(slot), std::nullopt, n};
}

// Mixtures

MixtureShiryaevDetector::MixtureShiryaevDetector(std::size_t period, const ChangePointPrior& prior,
                                                 std::vector<double> weights,
                                                 PeriodicThresholds thresholds)
    : Detector(period), thresholds_(std::move(thresholds)) {
  require(prior.is_geometric(), ErrorCode::unsupported,
          "mixture Shiryaev recursion requires a geometric change-point prior");
  log_rho_ = std::log(prior.rho());
  log_stay_ = std::log1p(-prior.rho());
  log_weights_.reserve(weights.size());
  for (double w : weights) log_weights_.push_back(std::log(w));
  thresholds_.check_period(period);
  for (double a : thresholds_.values()) {
    require(a >= 0.0, ErrorCode::invalid_argument, "mixture threshold must be >= 0");
  }
  log_odds_.assign(log_weights_.size(), -kInf);
  log_statistic_ = -kInf;
}

void MixtureShiryaevDetector::clear() {
  std::fill(log_odds_.begin(), log_odds_.end(), -kInf);
  log_statistic_ = -kInf;
}

StepResult MixtureShiryaevDetector::mix(std::span<const double> candidate_llr, std::size_t slot) {
  // Per candidate: R^c_n = (R^c_{n-1} + rho) / (1 - rho) * LR^c_n, in logs.
  double total = -kInf;
  for (std::size_t c = 0; c < log_odds_.size(); ++c) {
    log_odds_[c] = log_add_exp(log_odds_[c], log_rho_) - log_stay_ + candidate_llr[c];
    total = log_add_exp(total, log_weights_[c] + log_odds_[c]);
  }
  log_statistic_ = total;
  const double statistic = std::exp(total);
  const double threshold = thresholds_.at_slot(slot);
  const bool alarm = std::isinf(statistic) || total > std::log(threshold);
  return {statistic, alarm, std::nullopt, 0};
}

MpsDetector::MpsDetector(MultislotFamily family, const ChangePointPrior& prior,
                         PeriodicThresholds thresholds)
    : MixtureShiryaevDetector(family.period(), prior, family.weights(), std::move(thresholds)),
      family_(std::move(family)) {
  in_candidate_.assign(family_.candidates().size(), std::vector<bool>(period(), false));
  for (std::size_t c = 0; c < family_.candidates().size(); ++c) {
    for (std::size_t i : family_.candidates()[c]) in_candidate_[c][i] = true;
  }
  scratch_.resize(family_.candidates().size());
}

StepResult MpsDetector::advance(std::span<const double> x, long long, std::size_t slot) {
  const double z = llr(family_.base_post().slot(slot), family_.base_pre().slot(slot), x[0]);
  for (std::size_t c = 0; c < scratch_.size(); ++c) scratch_[c] = in_candidate_[c][slot] ? z : 0.0;
  return mix(scratch_, slot);
}

MspsDetector::MspsDetector(MultistreamConfig config, const ChangePointPrior& prior,
                           PeriodicThresholds thresholds)
    : MixtureShiryaevDetector(config.period(), prior, config.weights(), std::move(thresholds)),
      config_(std::move(config)) {
  stream_llr_.resize(config_.stream_count());
  scratch_.resize(config_.candidates().size());
}

StepResult MspsDetector::advance(std::span<const double> x, long long, std::size_t slot) {
  for (std::size_t l = 0; l < stream_llr_.size(); ++l) {
    const auto& s = config_.streams()[l];
    stream_llr_[l] = llr(s.post.slot(slot), s.pre.slot(slot), x[l]);
  }
  for (std::size_t c = 0; c < scratch_.size(); ++c) {
    double sum = 0.0;
    for (std::size_t l : config_.candidates()[c]) sum += stream_llr_[l];
    scratch_[c] = sum;
  }
  return mix(scratch_, slot);
}

// Classifier bank

ClassifierDetector::ClassifierDetector(ClassBank bank, PeriodicThresholds thresholds,
                                       std::optional<long long> window)
    : Detector(bank.period()),
      bank_(std::move(bank)),
      thresholds_(std::move(thresholds)),
      window_(window) {
  thresholds_.check_period(period());
  if (window_) require(*window_ >= 1, ErrorCode::invalid_argument, "window must be >= 1");
  const std::size_t k = bank_.classes() + 1;
  sums_.assign(k * k, 0.0);
  class_stats_.assign(bank_.classes(), -kInf);
  checkpoints_.push_back(sums_);
}

double ClassifierDetector::pair_sum(std::size_t l, std::size_t m) const {
  return sums_.at(pair_index(l, m));
}

void ClassifierDetector::clear() {
  std::fill(sums_.begin(), sums_.end(), 0.0);
  std::fill(class_stats_.begin(), class_stats_.end(), -kInf);
  checkpoints_.clear();
  checkpoints_.push_back(sums_);
}

StepResult ClassifierDetector::advance(std::span<const double> x, long long n, std::size_t slot) {
  const std::size_t M = bank_.classes();
  if (bank_.slot_active(slot)) {
    for (std::size_t l = 1; l <= M; ++l) {
      for (std::size_t m = 0; m <= M; ++m) {
        if (m != l) sums_[pair_index(l, m)] += llr(bank_.law(l).slot(slot), bank_.law(m).slot(slot), x[0]);
      }
    }
  } else {
    for (std::size_t l = 0; l <= M; ++l) {
      require(bank_.law(l).slot(slot).in_support(x[0]), ErrorCode::domain,
              "observation outside the support of the class bank");
    }
  }

  // checkpoints_ holds C(k - 1) for every admissible window start k, oldest first.
  for (std::size_t l = 1; l <= M; ++l) {
    double best = -kInf;
    for (const auto& start : checkpoints_) {
      double worst = kInf;
      for (std::size_t m = 0; m <= M; ++m) {
        if (m == l) continue;
        const std::size_t p = pair_index(l, m);
        worst = std::min(worst, sums_[p] - start[p]);
      }
      best = std::max(best, worst);
    }
    class_stats_[l - 1] = best;
  }

  checkpoints_.push_back(sums_);
  if (window_) {
    // Next step n + 1 admits k in [n + 1 - L, n + 1], i.e. L + 1 checkpoints.
    while (static_cast<long long>(checkpoints_.size()) > *window_ + 1) checkpoints_.pop_front();
  }

  const double threshold = thresholds_.at_slot(slot);
  StepResult result;
  result.time_index = n;
  result.statistic = *std::max_element(class_stats_.begin(), class_stats_.end());
  for (std::size_t l = 1; l <= M; ++l) {
    const double u = class_stats_[l - 1];
    if (u >= threshold && (!result.decided_class || u > class_stats_[*result.decided_class - 1])) {
      result.decided_class = l;
    }
  }
  result.alarm = result.decided_class.has_value();
  return result;
}

// Drivers

std::vector<StepResult> run(Detector& detector, std::span<const std::vector<double>> observations,
                            bool stop_on_alarm) {
  std::vector<StepResult> out;
  out.reserve(observations.size());
  for (const auto& row : observations) {
    out.push_back(detector.step(row));
    if (stop_on_alarm && out.back().alarm) break;
  }
  return out;
}

std::vector<StepResult> run(Detector& detector, std::span<const double> observations,
                            bool stop_on_alarm) {
  std::vector<StepResult> out;
  out.reserve(observations.size());
  for (double x : observations) {
    out.push_back(detector.step(x));
    if (stop_on_alarm && out.back().alarm) break;
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, std::size_t period,
                          std::span<const std::vector<double>> observations,
                          std::span<const StepResult> trajectory) {
  out << "time_index,slot,observation,statistic,alarm,decided_class\n";
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& r = trajectory[i];
    out << r.time_index << ',' << slot_of(r.time_index, period) << ',';
    if (i < observations.size()) {
      const auto& row = observations[i];
      for (std::size_t l = 0; l < row.size(); ++l) out << (l ? ";" : "") << row[l];
    }
    out << ',' << r.statistic << ',' << (r.alarm ? 1 : 0) << ',';
    if (r.decided_class) out << *r.decided_class;
    out << '\n';
  }
  out.precision(old_precision);
}

// DetectorSpec

namespace {

template <class T>
const T& need(const std::optional<T>& v, const char* field, DetectorKind kind) {
  require(v.has_value(), ErrorCode::invalid_argument,
          to_string(kind) + " detector requires \"" + field + "\"");
  return *v;
}

}  // namespace

PeriodicThresholds DetectorSpec::resolved_threshold() const {
  if (threshold) return *threshold;
  if (is_bayesian(kind)) {
    return threshold_for(kind, need(alpha, "alpha or threshold", kind));
  }
  const std::size_t classes = bank ? bank->classes() : 1;
  return threshold_for(kind, need(beta, "beta or threshold", kind), classes);
}

std::unique_ptr<Detector> DetectorSpec::build() const {
  std::unique_ptr<Detector> out;
  const auto thresholds = resolved_threshold();
  switch (kind) {
    case DetectorKind::shiryaev:
    case DetectorKind::robust_shiryaev:
      out = std::make_unique<ShiryaevDetector>(need(pre, "pre", kind), need(post, "post", kind),
                                               need(prior, "prior", kind), thresholds, kind);
      break;
    case DetectorKind::cusum:
      out = std::make_unique<CusumDetector>(need(pre, "pre", kind), need(post, "post", kind),
                                            thresholds);
      break;
    case DetectorKind::mps:
      out = std::make_unique<MpsDetector>(need(family, "family", kind), need(prior, "prior", kind),
                                          thresholds);
      break;
    case DetectorKind::msps:
      out = std::make_unique<MspsDetector>(need(multistream, "multistream", kind),
                                           need(prior, "prior", kind), thresholds);
      break;
    case DetectorKind::classifier:
      out = std::make_unique<ClassifierDetector>(need(bank, "bank", kind), thresholds, window);
      break;
  }
  out->set_reset_on_alarm(reset_on_alarm);
  return out;
}

void to_json(nlohmann::json& j, const DetectorSpec& s) {
  j = {{"kind", to_string(s.kind)}, {"reset_on_alarm", s.reset_on_alarm}};
  if (s.pre) j["pre"] = *s.pre;
  if (s.post) j["post"] = *s.post;
  if (s.family) j["family"] = *s.family;
  if (s.multistream) j["multistream"] = *s.multistream;
  if (s.bank) j["bank"] = *s.bank;
  if (s.prior) j["prior"] = *s.prior;
  if (s.threshold) j["threshold"] = *s.threshold;
  if (s.alpha) j["alpha"] = *s.alpha;
  if (s.beta) j["beta"] = *s.beta;
  if (s.window) j["window"] = *s.window;
}

void from_json(const nlohmann::json& j, DetectorSpec& s) {
  s = DetectorSpec{};
  s.kind = parse_detector_kind(j.at("kind").get<std::string>());
  if (j.contains("pre")) s.pre = j.at("pre").get<IpidLaw>();
  if (j.contains("post")) s.post = j.at("post").get<IpidLaw>();
  if (j.contains("lfl")) s.post = j.at("lfl").get<IpidLaw>();
  if (j.contains("family")) s.family = j.at("family").get<MultislotFamily>();
  if (j.contains("multistream")) s.multistream = j.at("multistream").get<MultistreamConfig>();
  if (j.contains("bank")) s.bank = j.at("bank").get<ClassBank>();
  if (j.contains("prior")) s.prior = j.at("prior").get<ChangePointPrior>();
  if (j.contains("rho")) s.prior = ChangePointPrior::geometric(j.at("rho").get<double>());
  if (j.contains("threshold")) s.threshold = j.at("threshold").get<PeriodicThresholds>();
  if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
  if (j.contains("beta")) s.beta = j.at("beta").get<double>();
  if (j.contains("window")) s.window = j.at("window").get<long long>();
  if (j.contains("reset_on_alarm")) s.reset_on_alarm = j.at("reset_on_alarm").get<bool>();
}

void to_json(nlohmann::json& j, const StepResult& r) {
  j = {{"time_index", r.time_index}, {"statistic", r.statistic}, {"alarm", r.alarm}};
  j["decided_class"] = r.decided_class ? nlohmann::json(*r.decided_class) : nlohmann::json(nullptr);
}

}  // namespace ipid
