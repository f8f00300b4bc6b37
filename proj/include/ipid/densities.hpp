#pragma once

#include <variant>

#include "json.hpp"

#include "ipid/rng.hpp"

namespace ipid {

struct Gaussian {
  double mean = 0.0;
  double variance = 1.0;
  friend bool operator==(const Gaussian&, const Gaussian&) = default;
};

struct Poisson {
  double rate = 1.0;
  friend bool operator==(const Poisson&, const Poisson&) = default;
};

inline constexpr double kGaussianVarianceFloor = 1e-8;
inline constexpr double kPoissonRateFloor = 1e-6;

/// Observation law for one slot of a period.
class SlotDensity {
public:
  SlotDensity() : law_(Gaussian{}) {}

  /// Throws ErrorCode::invalid_argument on a non-positive (or non-finite) variance.
  static SlotDensity gaussian(double mean, double variance);
  /// Throws ErrorCode::invalid_argument on a non-positive rate.
  static SlotDensity poisson(double rate);

  /// Construction from estimated parameters; variance/rate are floored instead of rejected.
  static SlotDensity fitted_gaussian(double mean, double variance);
  static SlotDensity fitted_poisson(double rate);

  bool is_gaussian() const noexcept { return std::holds_alternative<Gaussian>(law_); }
  bool is_poisson() const noexcept { return std::holds_alternative<Poisson>(law_); }
  const Gaussian& as_gaussian() const { return std::get<Gaussian>(law_); }
  const Poisson& as_poisson() const { return std::get<Poisson>(law_); }
  const std::variant<Gaussian, Poisson>& law() const noexcept { return law_; }

  bool same_family(const SlotDensity& other) const noexcept {
    return law_.index() == other.law_.index();
  }

  /// Mean of the distribution.
  double mean() const noexcept;

  bool in_support(double x) const noexcept;

  friend bool operator==(const SlotDensity&, const SlotDensity&) = default;

private:
  explicit SlotDensity(std::variant<Gaussian, Poisson> law) : law_(law) {}
  std::variant<Gaussian, Poisson> law_;
};

/// ln d(x). Poisson requires a nonnegative integer observation.
double log_density(const SlotDensity& d, double x);

/// ln g(x) - ln f(x).
double llr(const SlotDensity& g, const SlotDensity& f, double x);

double sample(const SlotDensity& d, Rng& rng);

/// D(g || f) in nats, closed form. Same-family pairs only.
double kl(const SlotDensity& g, const SlotDensity& f);

void to_json(nlohmann::json& j, const SlotDensity& d);
void from_json(const nlohmann::json& j, SlotDensity& d);

}  // namespace ipid
