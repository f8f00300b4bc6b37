#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ipid/detectors.hpp"
#include "ipid/model.hpp"

namespace ipid {

/// Explicit list of possible post-change densities for one slot.
struct FiniteCandidates {
  std::vector<SlotDensity> members;
  friend bool operator==(const FiniteCandidates&, const FiniteCandidates&) = default;
};

/// One-parameter family {theta >= boundary} (above) or {theta <= boundary} (below),
/// where theta is the Gaussian mean (variance held fixed) or the Poisson rate.
struct ParameterInterval {
  enum class Family { gaussian, poisson };
  enum class Direction { above, below };
  Family family = Family::gaussian;
  Direction direction = Direction::above;
  double boundary = 0.0;
  double variance = 1.0;  // gaussian only

  SlotDensity at(double theta) const;
  bool contains(const SlotDensity& d) const;
  friend bool operator==(const ParameterInterval&, const ParameterInterval&) = default;
};

using SlotFamily = std::variant<FiniteCandidates, ParameterInterval>;

/// Per-slot post-change uncertainty sets P_1..P_T.
class UncertaintyFamily {
public:
  UncertaintyFamily() = default;
  explicit UncertaintyFamily(std::vector<SlotFamily> slots);

  std::size_t period() const noexcept { return slots_.size(); }
  const std::vector<SlotFamily>& slots() const noexcept { return slots_; }
  bool contains(std::size_t slot, const SlotDensity& d) const;

  friend bool operator==(const UncertaintyFamily&, const UncertaintyFamily&) = default;

private:
  std::vector<SlotFamily> slots_;
};

struct DominanceOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 0x5eedULL;
  std::size_t grid_points = 201;
};

/// True iff Z = ln g_bar(X)/f(X) is stochastically larger under g than under g_bar,
/// i.e. P_g(Z >= t) >= P_gbar(Z >= t) on the grid. Equal-variance Gaussian triples are
/// decided in closed form; everything else by a seeded Monte Carlo comparison with a
/// tolerance of 3 binomial standard errors per grid point.
bool dominance_check(const SlotDensity& f, const SlotDensity& g_bar, const SlotDensity& g,
                     const DominanceOptions& options = {});

struct LflViolation {
  std::size_t slot = 0;
  SlotDensity candidate;
};

struct LflReport {
  bool valid = true;
  std::vector<std::size_t> checked_per_slot;
  std::vector<LflViolation> violations;
};

/// Members of P_i that the boundedness condition is checked against: every finite
/// member, or the interval boundary plus three interior probe points.
std::vector<SlotDensity> check_points(const SlotFamily& family, const SlotDensity& pre);

/// Checks slot-wise that g_bar is stochastically dominated by every checked member of
/// the family. Throws ErrorCode::membership when some g_bar_i is not in P_i.
LflReport validate_lfl(const IpidLaw& pre, const IpidLaw& g_bar, const UncertaintyFamily& family,
                       const DominanceOptions& options = {});

/// Least favorable law: interval boundaries, or for finite sets the member dominated by
/// all others. Throws ErrorCode::no_lfl when a slot has no such member.
IpidLaw select_lfl(const IpidLaw& pre, const UncertaintyFamily& family,
                   const DominanceOptions& options = {});

/// Robust Shiryaev detector after validating the LFL against the family.
ShiryaevDetector validated_robust_shiryaev(IpidLaw pre, IpidLaw lfl, const UncertaintyFamily& family,
                                           ChangePointPrior prior, PeriodicThresholds thresholds,
                                           const DominanceOptions& options = {});

void to_json(nlohmann::json& j, const UncertaintyFamily& f);
void from_json(const nlohmann::json& j, UncertaintyFamily& f);
void to_json(nlohmann::json& j, const LflReport& r);

}  // namespace ipid
