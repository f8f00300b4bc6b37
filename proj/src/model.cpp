#include "ipid/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ipid/error.hpp"

namespace ipid {

namespace {

constexpr double kNormTolerance = 1e-9;

Subset normalized_subset(Subset s, std::size_t universe, const char* what) {
  std::sort(s.begin(), s.end());
  require(std::adjacent_find(s.begin(), s.end()) == s.end(), ErrorCode::invalid_argument,
          std::string(what) + " contains duplicate indices");
  require(!s.empty(), ErrorCode::invalid_argument, std::string(what) + " must be nonempty");
  require(s.back() < universe, ErrorCode::invalid_argument,
          std::string(what) + " index out of range");
  return s;
}

std::vector<double> normalized_weights(std::vector<double> weights, std::size_t count) {
  if (weights.empty()) return std::vector<double>(count, 1.0 / static_cast<double>(count));
  require(weights.size() == count, ErrorCode::invalid_argument,
          "weight count does not match candidate count");
  for (double w : weights) {
    require(std::isfinite(w) && w > 0.0, ErrorCode::invalid_argument,
            "candidate weights must be strictly positive");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(std::abs(total - 1.0) <= kNormTolerance, ErrorCode::invalid_argument,
          "candidate weights must sum to 1");
  return weights;
}

std::size_t find_subset(const std::vector<Subset>& candidates, Subset s) {
  std::sort(s.begin(), s.end());
  const auto it = std::find(candidates.begin(), candidates.end(), s);
  require(it != candidates.end(), ErrorCode::unknown_candidate, "subset is not a candidate");
  return static_cast<std::size_t>(it - candidates.begin());
}

void check_unique(const std::vector<Subset>& candidates) {
  auto sorted = candidates;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
          ErrorCode::invalid_argument, "duplicate candidate subsets");
}

}  // namespace

// IpidLaw

IpidLaw::IpidLaw(std::vector<SlotDensity> slots) : slots_(std::move(slots)) {
  require(!slots_.empty(), ErrorCode::invalid_argument, "an i.p.i.d. law needs period >= 1");
}

const SlotDensity& IpidLaw::at_time(long long n) const {
  require(n >= 1, ErrorCode::invalid_argument, "observation index is 1-based");
  return slots_[slot_of(n, period())];
}

// ChangePointPrior

ChangePointPrior ChangePointPrior::geometric(double rho) {
  require(rho > 0.0 && rho < 1.0, ErrorCode::invalid_argument,
          "geometric prior needs rho in (0, 1)");
  return ChangePointPrior(Geometric{rho});
}

ChangePointPrior ChangePointPrior::explicit_pmf(std::vector<double> pmf,
                                                std::optional<double> tail_exponent) {
  require(!pmf.empty(), ErrorCode::invalid_argument, "explicit prior needs a nonempty pmf");
  for (double p : pmf) {
    require(std::isfinite(p) && p >= 0.0, ErrorCode::invalid_argument,
            "prior probabilities must be nonnegative");
  }
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  require(std::abs(total - 1.0) <= kNormTolerance, ErrorCode::invalid_argument,
          "explicit prior pmf must sum to 1");
  if (tail_exponent) {
    require(*tail_exponent >= 0.0, ErrorCode::invalid_argument, "tail exponent must be >= 0");
  }
  std::vector<double> tail(pmf.size() + 1, 0.0);
  for (std::size_t n = pmf.size(); n > 0; --n) tail[n - 1] = tail[n] + pmf[n - 1];
  return ChangePointPrior(Explicit{std::move(pmf), tail_exponent, std::move(tail)});
}

double ChangePointPrior::mass(long long n) const {
  require(n >= 1, ErrorCode::invalid_argument, "prior mass is defined for n >= 1");
  if (const auto* g = std::get_if<Geometric>(&prior_)) {
    return std::exp(static_cast<double>(n - 1) * std::log1p(-g->rho)) * g->rho;
  }
  const auto& e = std::get<Explicit>(prior_);
  require(static_cast<std::size_t>(n) <= e.pmf.size(), ErrorCode::invalid_argument,
          "explicit prior queried beyond its support (n = " + std::to_string(n) + ")");
  return e.pmf[static_cast<std::size_t>(n - 1)];
}

double ChangePointPrior::survival(long long n) const {
  require(n >= 0, ErrorCode::invalid_argument, "survival is defined for n >= 0");
  if (const auto* g = std::get_if<Geometric>(&prior_)) {
    return std::exp(static_cast<double>(n) * std::log1p(-g->rho));
  }
  const auto& e = std::get<Explicit>(prior_);
  if (static_cast<std::size_t>(n) >= e.pmf.size()) return 0.0;
  return e.tail[static_cast<std::size_t>(n)];
}

double ChangePointPrior::hazard(long long n) const {
  require(n >= 1, ErrorCode::invalid_argument, "hazard is defined for n >= 1");
  if (const auto* g = std::get_if<Geometric>(&prior_)) return g->rho;
  const auto& e = std::get<Explicit>(prior_);
  if (static_cast<std::size_t>(n) > e.pmf.size()) return 1.0;
  const double before = survival(n - 1);
  if (before <= 0.0) return 1.0;
  return std::min(1.0, e.pmf[static_cast<std::size_t>(n - 1)] / before);
}

double ChangePointPrior::tail_exponent() const noexcept {
  if (const auto* g = std::get_if<Geometric>(&prior_)) return std::abs(std::log1p(-g->rho));
  return std::get<Explicit>(prior_).tail_exponent.value_or(0.0);
}

long long ChangePointPrior::draw(Rng& rng) const {
  if (const auto* g = std::get_if<Geometric>(&prior_)) {
    std::geometric_distribution<long long> dist(g->rho);
    return dist(rng) + 1;
  }
  const auto& e = std::get<Explicit>(prior_);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double cumulative = 0.0;
  for (std::size_t k = 0; k < e.pmf.size(); ++k) {
    cumulative += e.pmf[k];
    if (u < cumulative) return static_cast<long long>(k + 1);
  }
  // Rounding residue: last index with positive mass.
  for (std::size_t k = e.pmf.size(); k > 0; --k) {
    if (e.pmf[k - 1] > 0.0) return static_cast<long long>(k);
  }
  return static_cast<long long>(e.pmf.size());
}

// MultislotFamily

MultislotFamily::MultislotFamily(IpidLaw base_pre, IpidLaw base_post,
                                 std::vector<Subset> candidates, std::vector<double> weights)
    : pre_(std::move(base_pre)), post_(std::move(base_post)) {
  require(pre_.period() == post_.period(), ErrorCode::period_mismatch,
          "multislot pre and post laws must share a period");
  require(!candidates.empty(), ErrorCode::invalid_argument, "multislot family has no candidates");
  for (auto& s : candidates) {
    s = normalized_subset(std::move(s), period(), "candidate slot set");
    const bool informative = std::any_of(s.begin(), s.end(), [this](std::size_t i) {
      return !(pre_.slot(i) == post_.slot(i));
    });
    require(informative, ErrorCode::degenerate,
            "candidate slot set has identical pre and post densities on every slot");
  }
  check_unique(candidates);
  candidates_ = std::move(candidates);
  weights_ = normalized_weights(std::move(weights), candidates_.size());
}

std::size_t MultislotFamily::index_of(const Subset& s) const { return find_subset(candidates_, s); }

IpidLaw post_change_law(const MultislotFamily& fam, const Subset& s) {
  const auto& chosen = fam.candidates()[fam.index_of(s)];
  std::vector<SlotDensity> slots = fam.base_pre().slots();
  for (std::size_t i : chosen) slots[i] = fam.base_post().slot(i);
  return IpidLaw(std::move(slots));
}

// ClassBank

ClassBank::ClassBank(std::vector<IpidLaw> laws, std::optional<Subset> active_slots)
    : laws_(std::move(laws)) {
  require(laws_.size() >= 2, ErrorCode::invalid_argument,
          "a class bank needs a pre-change law and at least one post-change class");
  const std::size_t T = laws_.front().period();
  for (const auto& law : laws_) {
    require(law.period() == T, ErrorCode::period_mismatch, "class bank laws must share a period");
  }
  active_mask_.assign(T, !active_slots.has_value());
  if (active_slots) {
    active_ = normalized_subset(std::move(*active_slots), T, "active slot set");
    for (std::size_t i : *active_) active_mask_[i] = true;
  }
  for (std::size_t l = 0; l < laws_.size(); ++l) {
    for (std::size_t m = l + 1; m < laws_.size(); ++m) {
      bool differs = false;
      for (std::size_t i = 0; i < T && !differs; ++i) {
        differs = active_mask_[i] && !(laws_[l].slot(i) == laws_[m].slot(i));
      }
      require(differs, ErrorCode::degenerate,
              "classes " + std::to_string(l) + " and " + std::to_string(m) +
                  " coincide on every active slot");
    }
  }
}

bool ClassBank::slot_active(std::size_t slot) const { return active_mask_.at(slot); }

// MultistreamConfig

MultistreamConfig::MultistreamConfig(std::vector<StreamPair> streams, std::vector<Subset> candidates,
                                     std::vector<double> weights)
    : streams_(std::move(streams)) {
  require(!streams_.empty(), ErrorCode::invalid_argument, "multistream config has no streams");
  const std::size_t T = streams_.front().pre.period();
  for (const auto& s : streams_) {
    require(s.pre.period() == T && s.post.period() == T, ErrorCode::period_mismatch,
            "all streams must share one period");
  }
  require(!candidates.empty(), ErrorCode::invalid_argument, "multistream config has no candidates");
  for (auto& b : candidates) b = normalized_subset(std::move(b), streams_.size(), "stream subset");
  check_unique(candidates);
  candidates_ = std::move(candidates);
  weights_ = normalized_weights(std::move(weights), candidates_.size());
}

std::size_t MultistreamConfig::index_of(const Subset& b) const {
  return find_subset(candidates_, b);
}

std::vector<StreamPair> stream_laws(const MultistreamConfig& cfg, const Subset& b) {
  const auto& chosen = cfg.candidates()[cfg.index_of(b)];
  std::vector<StreamPair> out;
  out.reserve(cfg.stream_count());
  for (std::size_t l = 0; l < cfg.stream_count(); ++l) {
    const auto& s = cfg.streams()[l];
    const bool changes = std::binary_search(chosen.begin(), chosen.end(), l);
    out.push_back({s.pre, changes ? s.post : s.pre});
  }
  return out;
}

// PeriodicThresholds

PeriodicThresholds::PeriodicThresholds(std::vector<double> values) : values_(std::move(values)) {
  require(!values_.empty(), ErrorCode::invalid_argument, "threshold vector is empty");
  for (double v : values_) {
    require(!std::isnan(v), ErrorCode::invalid_argument, "threshold is NaN");
  }
}

void PeriodicThresholds::check_belief_scale() const {
  for (double v : values_) {
    require(v >= 0.0 && v <= 1.0, ErrorCode::invalid_argument,
            "belief thresholds must lie in [0, 1], got " + std::to_string(v));
  }
}

void PeriodicThresholds::check_period(std::size_t period) const {
  require(is_scalar() || values_.size() == period, ErrorCode::period_mismatch,
          "threshold vector length does not match the period");
}

// JSON

void to_json(nlohmann::json& j, const IpidLaw& law) {
  j = {{"period", law.period()}, {"slots", law.slots()}};
}

void from_json(const nlohmann::json& j, IpidLaw& law) {
  auto slots = j.at("slots").get<std::vector<SlotDensity>>();
  if (j.contains("period")) {
    require(j.at("period").get<std::size_t>() == slots.size(), ErrorCode::parse,
            "law \"period\" does not match the number of slots");
  }
  law = IpidLaw(std::move(slots));
}

void to_json(nlohmann::json& j, const ChangePointPrior& p) {
  if (p.is_geometric()) {
    j = {{"type", "geometric"}, {"rho", p.rho()}};
    return;
  }
  const auto& e = std::get<ChangePointPrior::Explicit>(p.value());
  j = {{"type", "explicit"}, {"pmf", e.pmf}};
  if (e.tail_exponent) j["tail_exponent"] = *e.tail_exponent;
}

void from_json(const nlohmann::json& j, ChangePointPrior& p) {
  const auto type = j.at("type").get<std::string>();
  if (type == "geometric") {
    p = ChangePointPrior::geometric(j.at("rho").get<double>());
  } else if (type == "explicit") {
    std::optional<double> d;
    if (j.contains("tail_exponent")) d = j.at("tail_exponent").get<double>();
    p = ChangePointPrior::explicit_pmf(j.at("pmf").get<std::vector<double>>(), d);
  } else {
    fail(ErrorCode::parse, "unknown prior type \"" + type + "\"");
  }
}

void to_json(nlohmann::json& j, const MultislotFamily& f) {
  j = {{"pre", f.base_pre()},
       {"post", f.base_post()},
       {"candidates", f.candidates()},
       {"weights", f.weights()}};
}

void from_json(const nlohmann::json& j, MultislotFamily& f) {
  std::vector<double> weights;
  if (j.contains("weights")) weights = j.at("weights").get<std::vector<double>>();
  f = MultislotFamily(j.at("pre").get<IpidLaw>(), j.at("post").get<IpidLaw>(),
                      j.at("candidates").get<std::vector<Subset>>(), std::move(weights));
}

void to_json(nlohmann::json& j, const ClassBank& b) {
  j = {{"laws", b.laws()}};
  if (b.active_slots()) j["active_slots"] = *b.active_slots();
}

void from_json(const nlohmann::json& j, ClassBank& b) {
  std::optional<Subset> active;
  if (j.contains("active_slots")) active = j.at("active_slots").get<Subset>();
  b = ClassBank(j.at("laws").get<std::vector<IpidLaw>>(), std::move(active));
}

void to_json(nlohmann::json& j, const MultistreamConfig& c) {
  auto streams = nlohmann::json::array();
  for (const auto& s : c.streams()) streams.push_back({{"pre", s.pre}, {"post", s.post}});
  j = {{"streams", streams}, {"candidates", c.candidates()}, {"weights", c.weights()}};
}

void from_json(const nlohmann::json& j, MultistreamConfig& c) {
  std::vector<StreamPair> streams;
  for (const auto& s : j.at("streams")) {
    streams.push_back({s.at("pre").get<IpidLaw>(), s.at("post").get<IpidLaw>()});
  }
  std::vector<double> weights;
  if (j.contains("weights")) weights = j.at("weights").get<std::vector<double>>();
  c = MultistreamConfig(std::move(streams), j.at("candidates").get<std::vector<Subset>>(),
                        std::move(weights));
}

void to_json(nlohmann::json& j, const PeriodicThresholds& t) {
  if (t.is_scalar()) {
    j = t.values().front();
  } else {
    j = {{"values", t.values()}};
  }
}

void from_json(const nlohmann::json& j, PeriodicThresholds& t) {
  if (j.is_number()) {
    t = PeriodicThresholds(j.get<double>());
  } else {
    t = PeriodicThresholds(j.at("values").get<std::vector<double>>());
  }
}

}  // namespace ipid
