#include "ipid/robust.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ipid/error.hpp"

namespace ipid {

// ParameterInterval

SlotDensity ParameterInterval::at(double theta) const {
  return family == Family::gaussian ? SlotDensity::gaussian(theta, variance)
                                    : SlotDensity::poisson(theta);
}

bool ParameterInterval::contains(const SlotDensity& d) const {
  double theta = 0.0;
  if (family == Family::gaussian) {
    if (!d.is_gaussian() || d.as_gaussian().variance != variance) return false;
    theta = d.as_gaussian().mean;
  } else {
    if (!d.is_poisson()) return false;
    theta = d.as_poisson().rate;
  }
  return direction == Direction::above ? theta >= boundary : theta <= boundary;
}

// UncertaintyFamily

UncertaintyFamily::UncertaintyFamily(std::vector<SlotFamily> slots) : slots_(std::move(slots)) {
  require(!slots_.empty(), ErrorCode::invalid_argument, "uncertainty family needs period >= 1");
  for (const auto& s : slots_) {
    if (const auto* fin = std::get_if<FiniteCandidates>(&s)) {
      require(!fin->members.empty(), ErrorCode::invalid_argument,
              "finite candidate set must be nonempty");
    } else {
      const auto& iv = std::get<ParameterInterval>(s);
      require(std::isfinite(iv.boundary), ErrorCode::invalid_argument,
              "interval boundary must be finite");
      // Validates the boundary density itself (positive rate / variance).
      (void)iv.at(iv.boundary);
    }
  }
}

bool UncertaintyFamily::contains(std::size_t slot, const SlotDensity& d) const {
  const auto& s = slots_.at(slot);
  if (const auto* fin = std::get_if<FiniteCandidates>(&s)) {
    return std::find(fin->members.begin(), fin->members.end(), d) != fin->members.end();
  }
  return std::get<ParameterInterval>(s).contains(d);
}

// Dominance

namespace {

bool equal_variance_gaussians(const SlotDensity& a, const SlotDensity& b, const SlotDensity& c) {
  return a.is_gaussian() && b.is_gaussian() && c.is_gaussian() &&
         a.as_gaussian().variance == b.as_gaussian().variance &&
         b.as_gaussian().variance == c.as_gaussian().variance;
}

}  // namespace

bool dominance_check(const SlotDensity& f, const SlotDensity& g_bar, const SlotDensity& g,
                     const DominanceOptions& options) {
  require(f.same_family(g_bar) && f.same_family(g), ErrorCode::unsupported_pair,
          "dominance check needs three densities of one family");
  if (g == g_bar) return true;

  if (equal_variance_gaussians(f, g_bar, g)) {
    // Z = a X + b with a = (mu_bar - mu_f) / v; equal spreads, so only the means of Z matter.
    const double slope = g_bar.as_gaussian().mean - f.as_gaussian().mean;
    return slope * (g.as_gaussian().mean - g_bar.as_gaussian().mean) >= 0.0;
  }

  require(options.samples >= 2 && options.grid_points >= 2, ErrorCode::invalid_argument,
          "dominance check needs at least 2 samples and 2 grid points");
  const std::size_t n = options.samples;
  std::vector<double> z_g(n), z_bar(n);
  {
    Rng rng_g = stream_rng(options.seed, 0);
    Rng rng_bar = stream_rng(options.seed, 1);
    for (std::size_t i = 0; i < n; ++i) {
      z_g[i] = llr(g_bar, f, sample(g, rng_g));
      z_bar[i] = llr(g_bar, f, sample(g_bar, rng_bar));
    }
  }
  std::sort(z_g.begin(), z_g.end());
  std::sort(z_bar.begin(), z_bar.end());

  const auto tail_fraction = [n](const std::vector<double>& sorted, double t) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), t);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(n);
  };

  const double lo = 0.001;
  const double hi = 0.999;
  const auto dn = static_cast<double>(n);
  for (std::size_t k = 0; k < options.grid_points; ++k) {
    const double q = lo + (hi - lo) * static_cast<double>(k) /
                              static_cast<double>(options.grid_points - 1);
    const auto idx = std::min(n - 1, static_cast<std::size_t>(q * dn));
    const double t = z_bar[idx];
    const double p_g = tail_fraction(z_g, t);
    const double p_bar = tail_fraction(z_bar, t);
    const double se = std::sqrt((p_g * (1.0 - p_g) + p_bar * (1.0 - p_bar)) / dn);
    if (p_g < p_bar - 3.0 * se - 1.0 / dn) return false;
  }
  return true;
}

std::vector<SlotDensity> check_points(const SlotFamily& family, const SlotDensity& pre) {
  if (const auto* fin = std::get_if<FiniteCandidates>(&family)) return fin->members;
  const auto& iv = std::get<ParameterInterval>(family);
  const double theta0 = pre.mean();
  require(iv.boundary != theta0, ErrorCode::invalid_argument,
          "interval boundary must differ from the pre-change parameter");
  const bool above = iv.direction == ParameterInterval::Direction::above;
  require(above ? iv.boundary > theta0 : iv.boundary < theta0, ErrorCode::invalid_argument,
          "interval must point away from the pre-change parameter");
  std::vector<SlotDensity> out{iv.at(iv.boundary)};
  const double gap = std::abs(iv.boundary - theta0);
  for (double s : {0.5, 1.0, 2.0}) {
    if (above) {
      out.push_back(iv.at(iv.boundary + s * gap));
    } else if (iv.family == ParameterInterval::Family::poisson) {
      out.push_back(iv.at(iv.boundary / (1.0 + s)));
    } else {
      out.push_back(iv.at(iv.boundary - s * gap));
    }
  }
  return out;
}

LflReport validate_lfl(const IpidLaw& pre, const IpidLaw& g_bar, const UncertaintyFamily& family,
                       const DominanceOptions& options) {
  require(pre.period() == g_bar.period() && pre.period() == family.period(),
          ErrorCode::period_mismatch, "pre law, LFL and family must share a period");
  LflReport report;
  for (std::size_t i = 0; i < family.period(); ++i) {
    require(family.contains(i, g_bar.slot(i)), ErrorCode::membership,
            "LFL density on slot " + std::to_string(i) + " is not in the uncertainty set");
    const auto points = check_points(family.slots()[i], pre.slot(i));
    report.checked_per_slot.push_back(points.size());
    DominanceOptions slot_options = options;
    slot_options.seed = mix64(options.seed ^ (0x100000001b3ULL * (i + 1)));
    for (const auto& g : points) {
      if (!dominance_check(pre.slot(i), g_bar.slot(i), g, slot_options)) {
        report.valid = false;
        report.violations.push_back({i, g});
      }
    }
  }
  return report;
}

IpidLaw select_lfl(const IpidLaw& pre, const UncertaintyFamily& family,
                   const DominanceOptions& options) {
  require(pre.period() == family.period(), ErrorCode::period_mismatch,
          "pre law and family must share a period");
  std::vector<SlotDensity> slots;
  slots.reserve(family.period());
  for (std::size_t i = 0; i < family.period(); ++i) {
    const auto& sf = family.slots()[i];
    if (const auto* iv = std::get_if<ParameterInterval>(&sf)) {
      (void)check_points(sf, pre.slot(i));  // direction sanity
      slots.push_back(iv->at(iv->boundary));
      continue;
    }
    const auto& members = std::get<FiniteCandidates>(sf).members;
    DominanceOptions slot_options = options;
    slot_options.seed = mix64(options.seed ^ (0x100000001b3ULL * (i + 1)));
    const auto it = std::find_if(members.begin(), members.end(), [&](const SlotDensity& c) {
      return std::all_of(members.begin(), members.end(), [&](const SlotDensity& g) {
        return dominance_check(pre.slot(i), c, g, slot_options);
      });
    });
    require(it != members.end(), ErrorCode::no_lfl,
            "slot " + std::to_string(i) + " has no least favorable member");
    slots.push_back(*it);
  }
  return IpidLaw(std::move(slots));
}

ShiryaevDetector validated_robust_shiryaev(IpidLaw pre, IpidLaw lfl, const UncertaintyFamily& family,
                                           ChangePointPrior prior, PeriodicThresholds thresholds,
                                           const DominanceOptions& options) {
  const auto report = validate_lfl(pre, lfl, family, options);
  require(report.valid, ErrorCode::no_lfl,
          "law is not least favorable: " + std::to_string(report.violations.size()) +
              " dominance violation(s)");
  return robust_shiryaev(std::move(pre), std::move(lfl), std::move(prior), std::move(thresholds));
}

// JSON

void to_json(nlohmann::json& j, const UncertaintyFamily& f) {
  auto slots = nlohmann::json::array();
  for (const auto& s : f.slots()) {
    if (const auto* fin = std::get_if<FiniteCandidates>(&s)) {
      slots.push_back({{"kind", "finite"}, {"candidates", fin->members}});
      continue;
    }
    const auto& iv = std::get<ParameterInterval>(s);
    nlohmann::json e = {
        {"kind", "interval"},
        {"family", iv.family == ParameterInterval::Family::gaussian ? "gaussian" : "poisson"},
        {"direction", iv.direction == ParameterInterval::Direction::above ? "above" : "below"},
        {"boundary", iv.boundary}};
    if (iv.family == ParameterInterval::Family::gaussian) e["variance"] = iv.variance;
    slots.push_back(std::move(e));
  }
  j = {{"period", f.period()}, {"slots", slots}};
}

void from_json(const nlohmann::json& j, UncertaintyFamily& f) {
  std::vector<SlotFamily> slots;
  for (const auto& e : j.at("slots")) {
    const auto kind = e.at("kind").get<std::string>();
    if (kind == "finite") {
      slots.emplace_back(FiniteCandidates{e.at("candidates").get<std::vector<SlotDensity>>()});
    } else if (kind == "interval") {
      ParameterInterval iv;
      const auto fam = e.at("family").get<std::string>();
      require(fam == "gaussian" || fam == "poisson", ErrorCode::parse,
              "interval family must be gaussian or poisson");
      iv.family = fam == "gaussian" ? ParameterInterval::Family::gaussian
                                    : ParameterInterval::Family::poisson;
      const auto dir = e.at("direction").get<std::string>();
      require(dir == "above" || dir == "below", ErrorCode::parse,
              "interval direction must be above or below");
      iv.direction = dir == "above" ? ParameterInterval::Direction::above
                                    : ParameterInterval::Direction::below;
      iv.boundary = e.at("boundary").get<double>();
      if (iv.family == ParameterInterval::Family::gaussian) iv.variance = e.at("variance").get<double>();
      slots.emplace_back(iv);
    } else {
      fail(ErrorCode::parse, "unknown slot family kind \"" + kind + "\"");
    }
  }
  if (j.contains("period")) {
    require(j.at("period").get<std::size_t>() == slots.size(), ErrorCode::parse,
            "family \"period\" does not match the number of slots");
  }
  f = UncertaintyFamily(std::move(slots));
}

void to_json(nlohmann::json& j, const LflReport& r) {
  auto violations = nlohmann::json::array();
  for (const auto& v : r.violations) violations.push_back({{"slot", v.slot}, {"candidate", v.candidate}});
  j = {{"valid", r.valid}, {"checked_per_slot", r.checked_per_slot}, {"violations", violations}};
}

}  // namespace ipid
