#include <random>

#include "doctest.h"
#include "ipid/error.hpp"
#include "ipid/robust.hpp"
#include "ipid/simulate.hpp"

using namespace ipid;

namespace {

ParameterInterval gaussian_interval(ParameterInterval::Direction dir, double boundary, double variance) {
  ParameterInterval p;
  p.family = ParameterInterval::Family::gaussian;
  p.direction = dir;
  p.boundary = boundary;
  p.variance = variance;
  return p;
}

UncertaintyFamily square_family() {
  std::vector<SlotFamily> slots;
  for (int i = 0; i < 100; ++i) {
    slots.push_back(i < 50 ? gaussian_interval(ParameterInterval::Direction::above, 1.1, 0.01)
                           : gaussian_interval(ParameterInterval::Direction::below, -1.1, 0.01));
  }
  return UncertaintyFamily(slots);
}

}  // namespace

TEST_SUITE("robust") {

TEST_CASE("dominance examples") {
  const auto f = SlotDensity::gaussian(0, 1);
  const auto gbar = SlotDensity::gaussian(0.5, 1);
  CHECK(dominance_check(f, gbar, gbar));
  CHECK(dominance_check(f, gbar, SlotDensity::gaussian(1, 1)));
  CHECK_FALSE(dominance_check(f, gbar, SlotDensity::gaussian(0.25, 1)));
  CHECK_THROWS_AS(dominance_check(f, gbar, SlotDensity::poisson(1)), Error);
}

TEST_CASE("dominance by monte carlo") {
  const auto f = SlotDensity::poisson(1);
  const auto gbar = SlotDensity::poisson(1.2);
  CHECK(dominance_check(f, gbar, gbar));
  CHECK(dominance_check(f, gbar, SlotDensity::poisson(2.0)));
  CHECK_FALSE(dominance_check(f, gbar, SlotDensity::poisson(0.9)));
  // Unequal Gaussian variances go through the sampled comparison.
  CHECK(dominance_check(SlotDensity::gaussian(0, 1), SlotDensity::gaussian(0.5, 1), SlotDensity::gaussian(3, 1.1)));
  const DominanceOptions opts;
  CHECK(dominance_check(f, gbar, SlotDensity::poisson(2.0), opts) ==
        dominance_check(f, gbar, SlotDensity::poisson(2.0), opts));
}

TEST_CASE("dominance is reflexive and transitive along the mean order") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  const auto f = SlotDensity::gaussian(0, 0.5);
  for (int i = 0; i < 200; ++i) {
    double a = u(rng), b = u(rng), c = u(rng);
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    const auto ga = SlotDensity::gaussian(a, 0.5), gb = SlotDensity::gaussian(b, 0.5),
               gc = SlotDensity::gaussian(c, 0.5);
    CHECK(dominance_check(f, ga, ga));
    if (dominance_check(f, ga, gb) && dominance_check(f, gb, gc)) CHECK(dominance_check(f, ga, gc));
  }
}

TEST_CASE("interval families") {
  const auto above = gaussian_interval(ParameterInterval::Direction::above, 0.1, 2.0);
  CHECK(above.contains(SlotDensity::gaussian(0.3, 2.0)));
  CHECK_FALSE(above.contains(SlotDensity::gaussian(0.05, 2.0)));
  CHECK_FALSE(above.contains(SlotDensity::gaussian(0.3, 1.0)));
  const auto points = check_points(above, SlotDensity::gaussian(0, 2.0));
  CHECK(points.size() == 4);
  for (const auto& p : points) CHECK(above.contains(p));
  CHECK(points.front() == SlotDensity::gaussian(0.1, 2.0));

  ParameterInterval pois;
  pois.family = ParameterInterval::Family::poisson;
  pois.direction = ParameterInterval::Direction::below;
  pois.boundary = 0.5;
  for (const auto& p : check_points(pois, SlotDensity::poisson(1))) {
    CHECK(pois.contains(p));
    CHECK(p.mean() > 0);
  }
}

TEST_CASE("validate lfl") {
  SUBCASE("singleton families are vacuously valid") {
    const IpidLaw pre({SlotDensity::gaussian(0, 1), SlotDensity::gaussian(1, 1)});
    const IpidLaw lfl({SlotDensity::gaussian(0.5, 1), SlotDensity::gaussian(2, 1)});
    const UncertaintyFamily fam({FiniteCandidates{{lfl.slot(0)}}, FiniteCandidates{{lfl.slot(1)}}});
    CHECK(validate_lfl(pre, lfl, fam).valid);
  }
  SUBCASE("square-wave boundary law") {
    SignalParams sq;
    const auto pre = signal_law(SignalKind::square, 100, sq, 0.01);
    SignalParams b;
    b.high = 1.1;
    b.low = -1.1;
    const auto lfl = signal_law(SignalKind::square, 100, b, 0.01);
    const auto report = validate_lfl(pre, lfl, square_family());
    CHECK(report.valid);
    CHECK(report.violations.empty());
    CHECK(report.checked_per_slot.size() == 100);
  }
  SUBCASE("candidate between f and g_bar is a violation") {
    const IpidLaw pre({SlotDensity::gaussian(0, 1)});
    const IpidLaw lfl({SlotDensity::gaussian(0.5, 1)});
    const UncertaintyFamily fam(
        {FiniteCandidates{{SlotDensity::gaussian(0.5, 1), SlotDensity::gaussian(0.25, 1), SlotDensity::gaussian(2, 1)}}});
    const auto report = validate_lfl(pre, lfl, fam);
    CHECK_FALSE(report.valid);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].slot == 0);
    CHECK(report.violations[0].candidate == SlotDensity::gaussian(0.25, 1));
  }
  SUBCASE("lfl outside the family") {
    const IpidLaw pre({SlotDensity::gaussian(0, 1)});
    const IpidLaw lfl({SlotDensity::gaussian(0.05, 1)});
    const UncertaintyFamily fam({gaussian_interval(ParameterInterval::Direction::above, 0.1, 1)});
    try {
      validate_lfl(pre, lfl, fam);
      FAIL("expected membership error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::membership);
    }
  }
}

TEST_CASE("select lfl") {
  CHECK(select_lfl(IpidLaw({SlotDensity::gaussian(0, 0.3)}),
                   UncertaintyFamily({gaussian_interval(ParameterInterval::Direction::above, 0.1, 0.3)}))
            .slot(0) == SlotDensity::gaussian(0.1, 0.3));
  ParameterInterval pois;
  pois.family = ParameterInterval::Family::poisson;
  pois.boundary = 1.2;
  CHECK(select_lfl(IpidLaw({SlotDensity::poisson(1)}), UncertaintyFamily({pois})).slot(0) ==
        SlotDensity::poisson(1.2));
  CHECK(select_lfl(IpidLaw({SlotDensity::gaussian(0, 1)}),
                   UncertaintyFamily({FiniteCandidates{{SlotDensity::gaussian(2, 1), SlotDensity::gaussian(1, 1)}}}))
            .slot(0) == SlotDensity::gaussian(1, 1));
  // Means on both sides of f: neither member is dominated by the other.
  try {
    select_lfl(IpidLaw({SlotDensity::gaussian(0, 1)}),
               UncertaintyFamily({FiniteCandidates{{SlotDensity::gaussian(1, 1), SlotDensity::gaussian(-1, 1)}}}));
    FAIL("expected no_lfl");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_lfl);
  }
}

TEST_CASE("selected lfl validates") {
  const auto pre = signal_law(SignalKind::square, 100, SignalParams{}, 0.01);
  const auto fam = square_family();
  const auto lfl = select_lfl(pre, fam);
  CHECK(validate_lfl(pre, lfl, fam).valid);

  ParameterInterval pois;
  pois.family = ParameterInterval::Family::poisson;
  pois.boundary = 3.0;
  const IpidLaw ppre({SlotDensity::poisson(2), SlotDensity::poisson(4)});
  const UncertaintyFamily pfam({pois, FiniteCandidates{{SlotDensity::poisson(6), SlotDensity::poisson(5)}}});
  const auto plfl = select_lfl(ppre, pfam);
  CHECK(plfl.slot(1) == SlotDensity::poisson(5));
  CHECK(validate_lfl(ppre, plfl, pfam).valid);
}

TEST_CASE("validated robust shiryaev") {
  const IpidLaw pre({SlotDensity::gaussian(0, 1)});
  const UncertaintyFamily fam({gaussian_interval(ParameterInterval::Direction::above, 0.5, 1)});
  auto det = validated_robust_shiryaev(pre, IpidLaw({SlotDensity::gaussian(0.5, 1)}), fam,
                                       ChangePointPrior::geometric(0.1), 0.9);
  CHECK(det.kind() == DetectorKind::robust_shiryaev);
  const UncertaintyFamily bad({FiniteCandidates{{SlotDensity::gaussian(0.5, 1), SlotDensity::gaussian(0.2, 1)}}});
  CHECK_THROWS_AS(validated_robust_shiryaev(pre, IpidLaw({SlotDensity::gaussian(0.5, 1)}), bad,
                                            ChangePointPrior::geometric(0.1), 0.9),
                  Error);
}

TEST_CASE("family json round trip") {
  const UncertaintyFamily fam({gaussian_interval(ParameterInterval::Direction::below, -1.1, 0.01),
                               FiniteCandidates{{SlotDensity::poisson(2)}}});
  const nlohmann::json j = fam;
  CHECK(j.at("slots")[0].at("direction") == "below");
  CHECK(j.get<UncertaintyFamily>() == fam);
  CHECK_THROWS(nlohmann::json::parse(R"({"period":1,"slots":[{"kind":"weird"}]})").get<UncertaintyFamily>());
}

}
