#include "ipid/densities.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ipid/error.hpp"

namespace ipid {

namespace {

constexpr double kHalfLog2Pi = 0.918938533204672741780329736406;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_count(double x) noexcept { return x >= 0.0 && std::isfinite(x) && std::floor(x) == x; }

}  // namespace

SlotDensity SlotDensity::gaussian(double mean, double variance) {
  require(std::isfinite(mean), ErrorCode::invalid_argument, "gaussian mean must be finite");
  require(std::isfinite(variance) && variance > 0.0, ErrorCode::invalid_argument,
          "gaussian variance must be positive, got " + std::to_string(variance));
  return SlotDensity(Gaussian{mean, variance});
}

SlotDensity SlotDensity::poisson(double rate) {
  require(std::isfinite(rate) && rate > 0.0, ErrorCode::invalid_argument,
          "poisson rate must be positive, got " + std::to_string(rate));
  return SlotDensity(Poisson{rate});
}

SlotDensity SlotDensity::fitted_gaussian(double mean, double variance) {
  if (!(variance > kGaussianVarianceFloor)) variance = kGaussianVarianceFloor;
  return gaussian(mean, variance);
}

SlotDensity SlotDensity::fitted_poisson(double rate) {
  if (!(rate > kPoissonRateFloor)) rate = kPoissonRateFloor;
  return poisson(rate);
}

double SlotDensity::mean() const noexcept {
  return std::visit(overloaded{[](const Gaussian& g) { return g.mean; },
                               [](const Poisson& p) { return p.rate; }},
                    law_);
}

bool SlotDensity::in_support(double x) const noexcept {
  return std::visit(overloaded{[x](const Gaussian&) { return std::isfinite(x); },
                               [x](const Poisson&) { return is_count(x); }},
                    law_);
}

double log_density(const SlotDensity& d, double x) {
  return std::visit(
      overloaded{[x](const Gaussian& g) {
                   require(std::isfinite(x), ErrorCode::domain, "non-finite observation");
                   const double z = x - g.mean;
                   return -kHalfLog2Pi - 0.5 * std::log(g.variance) - 0.5 * z * z / g.variance;
                 },
                 [x](const Poisson& p) {
                   require(is_count(x), ErrorCode::domain,
                           "poisson observation must be a nonnegative integer, got " +
                               std::to_string(x));
                   return x * std::log(p.rate) - p.rate - std::lgamma(x + 1.0);
                 }},
      d.law());
}

namespace {

// Parameter-order key so that llr(g, f, x) == -llr(f, g, x) holds bit-for-bit.
bool canonical_first(const SlotDensity& a, const SlotDensity& b) {
  if (a.is_gaussian() && b.is_gaussian()) {
    const auto& ga = a.as_gaussian();
    const auto& gb = b.as_gaussian();
    return ga.mean != gb.mean ? ga.mean < gb.mean : ga.variance <= gb.variance;
  }
  return a.mean() <= b.mean();
}

double llr_core(const SlotDensity& g, const SlotDensity& f, double x) {
  if (g.is_gaussian() && f.is_gaussian()) {
    require(std::isfinite(x), ErrorCode::domain, "non-finite observation");
    const auto& a = g.as_gaussian();
    const auto& b = f.as_gaussian();
    const double za = x - a.mean;
    const double zb = x - b.mean;
    return 0.5 * (std::log(b.variance) - std::log(a.variance)) +
           0.5 * (zb * zb / b.variance - za * za / a.variance);
  }
  if (g.is_poisson() && f.is_poisson()) {
    require(is_count(x), ErrorCode::domain,
            "poisson observation must be a nonnegative integer, got " + std::to_string(x));
    const double lg = g.as_poisson().rate;
    const double lf = f.as_poisson().rate;
    return x * (std::log(lg) - std::log(lf)) + (lf - lg);
  }
  require(g.in_support(x) && f.in_support(x), ErrorCode::domain,
          "observation outside the support of one of the densities");
  return log_density(g, x) - log_density(f, x);
}

}  // namespace

double llr(const SlotDensity& g, const SlotDensity& f, double x) {
  if (canonical_first(g, f)) return llr_core(g, f, x);
  return -llr_core(f, g, x);
}

double sample(const SlotDensity& d, Rng& rng) {
  return std::visit(overloaded{[&rng](const Gaussian& g) {
                                 std::normal_distribution<double> dist(g.mean,
                                                                       std::sqrt(g.variance));
                                 return dist(rng);
                               },
                               [&rng](const Poisson& p) {
                                 std::poisson_distribution<long long> dist(p.rate);
                                 return static_cast<double>(dist(rng));
                               }},
                    d.law());
}

double kl(const SlotDensity& g, const SlotDensity& f) {
  if (g.is_gaussian() && f.is_gaussian()) {
    const auto& a = g.as_gaussian();
    const auto& b = f.as_gaussian();
    const double dm = a.mean - b.mean;
    return 0.5 * std::log(b.variance / a.variance) + (a.variance + dm * dm) / (2.0 * b.variance) -
           0.5;
  }
  if (g.is_poisson() && f.is_poisson()) {
    const double lg = g.as_poisson().rate;
    const double lf = f.as_poisson().rate;
    return lg * std::log(lg / lf) + lf - lg;
  }
  fail(ErrorCode::unsupported_pair, "KL divergence is defined only for same-family pairs");
}

void to_json(nlohmann::json& j, const SlotDensity& d) {
  std::visit(overloaded{[&j](const Gaussian& g) {
                          j = {{"type", "gaussian"}, {"mean", g.mean}, {"variance", g.variance}};
                        },
                        [&j](const Poisson& p) { j = {{"type", "poisson"}, {"rate", p.rate}}; }},
             d.law());
}

void from_json(const nlohmann::json& j, SlotDensity& d) {
  require(j.is_object() && j.contains("type"), ErrorCode::parse,
          "slot density must be an object with a \"type\" field");
  const auto type = j.at("type").get<std::string>();
  if (type == "gaussian") {
    d = SlotDensity::gaussian(j.at("mean").get<double>(), j.at("variance").get<double>());
  } else if (type == "poisson") {
    d = SlotDensity::poisson(j.at("rate").get<double>());
  } else {
    fail(ErrorCode::parse, "unknown slot density type \"" + type + "\"");
  }
}

}  // namespace ipid
