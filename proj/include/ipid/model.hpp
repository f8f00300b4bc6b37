#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ipid/densities.hpp"

namespace ipid {

/// Law of an i.p.i.d. process: one density per slot of the period. Observation n
/// (1-based) is drawn from slot (n - 1) mod T.
class IpidLaw {
public:
  IpidLaw() = default;
  explicit IpidLaw(std::vector<SlotDensity> slots);

  std::size_t period() const noexcept { return slots_.size(); }
  const std::vector<SlotDensity>& slots() const noexcept { return slots_; }
  const SlotDensity& slot(std::size_t i) const { return slots_.at(i); }

  /// Density governing 1-based observation index n.
  const SlotDensity& at_time(long long n) const;

  friend bool operator==(const IpidLaw&, const IpidLaw&) = default;

private:
  std::vector<SlotDensity> slots_;
};

/// 0-based slot of 1-based observation index n.
inline std::size_t slot_of(long long n, std::size_t period) {
  return static_cast<std::size_t>((n - 1) % static_cast<long long>(period));
}

/// Distribution of the change point nu over {1, 2, ...}.
class ChangePointPrior {
public:
  struct Geometric {
    double rho;
    friend bool operator==(const Geometric&, const Geometric&) = default;
  };
  struct Explicit {
    std::vector<double> pmf;  // pmf[n - 1] = P(nu = n)
    std::optional<double> tail_exponent;
    std::vector<double> tail;  // tail[n] = P(nu > n), n = 0..N_max
    friend bool operator==(const Explicit&, const Explicit&) = default;
  };

  ChangePointPrior() : prior_(Geometric{0.01}) {}
  static ChangePointPrior geometric(double rho);
  static ChangePointPrior explicit_pmf(std::vector<double> pmf,
                                       std::optional<double> tail_exponent = std::nullopt);

  bool is_geometric() const noexcept { return std::holds_alternative<Geometric>(prior_); }
  double rho() const { return std::get<Geometric>(prior_).rho; }
  const std::variant<Geometric, Explicit>& value() const noexcept { return prior_; }

  /// P(nu = n), n >= 1.
  double mass(long long n) const;
  /// P(nu > n), n >= 0.
  double survival(long long n) const;
  /// P(nu = n | nu > n - 1); 1 once the survival function is exhausted.
  double hazard(long long n) const;
  /// d in the delay asymptotics: |ln(1 - rho)| for geometric, declared value (default 0) otherwise.
  double tail_exponent() const noexcept;

  /// Inverse-CDF draw of nu.
  long long draw(Rng& rng) const;

  friend bool operator==(const ChangePointPrior&, const ChangePointPrior&) = default;

private:
  explicit ChangePointPrior(std::variant<Geometric, Explicit> p) : prior_(std::move(p)) {}
  std::variant<Geometric, Explicit> prior_;
};

using Subset = std::vector<std::size_t>;  // sorted, unique

/// Unknown set S of slots that change, with mixing weights over the candidates.
class MultislotFamily {
public:
  MultislotFamily() = default;
  /// Empty weights means uniform.
  MultislotFamily(IpidLaw base_pre, IpidLaw base_post, std::vector<Subset> candidates,
                  std::vector<double> weights = {});

  std::size_t period() const noexcept { return pre_.period(); }
  const IpidLaw& base_pre() const noexcept { return pre_; }
  const IpidLaw& base_post() const noexcept { return post_; }
  const std::vector<Subset>& candidates() const noexcept { return candidates_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// Index of S among the candidates; throws unknown_candidate.
  std::size_t index_of(const Subset& s) const;

  friend bool operator==(const MultislotFamily&, const MultislotFamily&) = default;

private:
  IpidLaw pre_;
  IpidLaw post_;
  std::vector<Subset> candidates_;
  std::vector<double> weights_;
};

/// g_S: base_post on the slots of S, base_pre elsewhere.
IpidLaw post_change_law(const MultislotFamily& fam, const Subset& s);

/// Pre-change law g^(0) followed by M >= 1 post-change classes.
class ClassBank {
public:
  ClassBank() = default;
  ClassBank(std::vector<IpidLaw> laws, std::optional<Subset> active_slots = std::nullopt);

  std::size_t period() const noexcept { return laws_.front().period(); }
  std::size_t classes() const noexcept { return laws_.size() - 1; }  // M
  const std::vector<IpidLaw>& laws() const noexcept { return laws_; }
  const IpidLaw& law(std::size_t l) const { return laws_.at(l); }
  const std::optional<Subset>& active_slots() const noexcept { return active_; }
  bool slot_active(std::size_t slot) const;

  friend bool operator==(const ClassBank&, const ClassBank&) = default;

private:
  std::vector<IpidLaw> laws_;
  std::optional<Subset> active_;
  std::vector<bool> active_mask_;
};

struct StreamPair {
  IpidLaw pre;
  IpidLaw post;
  friend bool operator==(const StreamPair&, const StreamPair&) = default;
};

/// L independent i.p.i.d. streams; an unknown subset B of them changes.
class MultistreamConfig {
public:
  MultistreamConfig() = default;
  MultistreamConfig(std::vector<StreamPair> streams, std::vector<Subset> candidates,
                    std::vector<double> weights = {});

  std::size_t period() const noexcept { return streams_.front().pre.period(); }
  std::size_t stream_count() const noexcept { return streams_.size(); }
  const std::vector<StreamPair>& streams() const noexcept { return streams_; }
  const std::vector<Subset>& candidates() const noexcept { return candidates_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t index_of(const Subset& b) const;

  friend bool operator==(const MultistreamConfig&, const MultistreamConfig&) = default;

private:
  std::vector<StreamPair> streams_;
  std::vector<Subset> candidates_;
  std::vector<double> weights_;
};

/// Per-slot post-change laws for the streams when subset B changes.
std::vector<StreamPair> stream_laws(const MultistreamConfig& cfg, const Subset& b);

/// Scalar or period-T threshold vector. Slot i of the period uses values[i].
class PeriodicThresholds {
public:
  PeriodicThresholds() : values_{0.0} {}
  PeriodicThresholds(double scalar) : values_{scalar} {}  // NOLINT(implicit)
  explicit PeriodicThresholds(std::vector<double> values);

  bool is_scalar() const noexcept { return values_.size() == 1; }
  const std::vector<double>& values() const noexcept { return values_; }
  double at_slot(std::size_t slot) const { return is_scalar() ? values_[0] : values_.at(slot); }

  /// Every value in [0, 1]; throws invalid_argument otherwise.
  void check_belief_scale() const;
  /// Vector thresholds must match the detector period.
  void check_period(std::size_t period) const;

  friend bool operator==(const PeriodicThresholds&, const PeriodicThresholds&) = default;

private:
  std::vector<double> values_;
};

void to_json(nlohmann::json& j, const IpidLaw& law);
void from_json(const nlohmann::json& j, IpidLaw& law);
void to_json(nlohmann::json& j, const ChangePointPrior& p);
void from_json(const nlohmann::json& j, ChangePointPrior& p);
void to_json(nlohmann::json& j, const MultislotFamily& f);
void from_json(const nlohmann::json& j, MultislotFamily& f);
void to_json(nlohmann::json& j, const ClassBank& b);
void from_json(const nlohmann::json& j, ClassBank& b);
void to_json(nlohmann::json& j, const MultistreamConfig& c);
void from_json(const nlohmann::json& j, MultistreamConfig& c);
void to_json(nlohmann::json& j, const PeriodicThresholds& t);
void from_json(const nlohmann::json& j, PeriodicThresholds& t);

}  // namespace ipid
