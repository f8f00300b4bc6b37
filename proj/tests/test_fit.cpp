#include <random>
#include <sstream>

#include "doctest.h"
#include "ipid/csv.hpp"
#include "ipid/detectors.hpp"
#include "ipid/error.hpp"
#include "ipid/fit.hpp"
#include "ipid/simulate.hpp"

using namespace ipid;

namespace {

CycleSet cycles(std::vector<std::vector<double>> c, std::size_t period) {
  CycleSet s;
  s.cycles = std::move(c);
  s.target_period = period;
  return s;
}

}  // namespace

TEST_SUITE("fit") {

TEST_CASE("resample") {
  const std::vector<double> same{1, 4, 2, 8};
  CHECK(resample_cycle(same, 4) == same);
  CHECK(resample_cycle(std::vector<double>{0, 2}, 3) == std::vector<double>{0, 1, 2});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> c(2 + rng() % 30);
    double acc = 0;
    for (auto& v : c) v = (acc += u(rng));
    const auto r = resample_cycle(c, 2 + rng() % 40);
    CHECK(r.front() == c.front());
    CHECK(r.back() == c.back());
    for (std::size_t j = 1; j < r.size(); ++j) CHECK(r[j] >= r[j - 1]);
  }
  CHECK_THROWS_AS(resample_cycle(std::vector<double>{1}, 3), Error);
}

TEST_CASE("median smoothing") {
  const std::vector<double> s{1, 9, 1, 1};
  CHECK(median_smooth(s, 1) == s);
  CHECK(median_smooth(s, 3) == std::vector<double>{1, 5, 1, 1});
  CHECK(median_smooth(std::vector<double>{4, 4, 4, 4, 4}, 3) == std::vector<double>{4, 4, 4, 4, 4});
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> x(200);
  for (auto& v : x) v = n(rng);
  const std::size_t w = 7;
  const auto m = median_smooth(x, w);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto lo = x.begin() + static_cast<long>(i >= w - 1 ? i - (w - 1) : 0);
    const auto hi = x.begin() + static_cast<long>(i) + 1;
    CHECK(m[i] >= *std::min_element(lo, hi));
    CHECK(m[i] <= *std::max_element(lo, hi));
  }
}

TEST_CASE("segmentation") {
  const std::vector<double> series{0, 1, 2, 3, 4, 5, 6};
  const std::vector<std::size_t> bounds{1, 3, 6};
  const auto segs = segment_cycles(series, bounds);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0] == std::vector<double>{1, 2});
  CHECK(segs[1] == std::vector<double>{3, 4, 5});
  const auto periods = split_periods(series, 3);
  REQUIRE(periods.size() == 2);
  CHECK(periods[1] == std::vector<double>{3, 4, 5});
}

TEST_CASE("gaussian fit") {
  const auto law = fit_gaussian(cycles({{0, 1}, {2, 3}}, 2));
  CHECK(law.slot(0) == SlotDensity::gaussian(1, 2));
  CHECK(law.slot(1) == SlotDensity::gaussian(2, 2));
  const auto flat = fit_gaussian(cycles({{1, 2, 3}, {1, 2, 3}}, 3));
  for (std::size_t i = 0; i < 3; ++i) CHECK(flat.slot(i).as_gaussian().variance == 1e-8);
  const auto one = fit_gaussian(cycles({{1, 0}, {1, 2}}, 2));
  CHECK(one.slot(0).as_gaussian().variance == 1e-8);
  CHECK(one.slot(1).as_gaussian().variance == 2.0);
  // Unequal lengths are resampled to the target.
  const auto mixed = fit_gaussian(cycles({{0, 2}, {0, 1, 2}}, 3));
  CHECK(mixed.slot(1).mean() == 1.0);
  try {
    fit_gaussian(cycles({{0, 1}}, 2));
    FAIL("expected insufficient_data");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_data);
  }
}

TEST_CASE("gaussian fit round trip") {
  const auto truth = signal_law(SignalKind::half_sine, 20, SignalParams{}, 0.04);
  const auto data = generate(single_stream_scenario(truth, truth, ChangePoint::none(), 20 * 500, 17));
  std::vector<double> flat;
  for (const auto& row : data.observations) flat.push_back(row[0]);
  const auto law = fit_gaussian(cycles(split_periods(flat, 20), 20));
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(std::abs(law.slot(i).mean() - truth.slot(i).mean()) <= 3 * 0.2 / std::sqrt(500.0));
    CHECK(std::abs(law.slot(i).as_gaussian().variance / 0.04 - 1) <= 0.2);
  }
}

TEST_CASE("poisson fit") {
  const auto law = fit_poisson(cycles({{2, 4}, {4, 6}}, 2));
  CHECK(law.slot(0) == SlotDensity::poisson(3));
  CHECK(law.slot(1) == SlotDensity::poisson(5));
  CHECK(fit_poisson(cycles({{0, 3}, {0, 1}}, 2)).slot(0) == SlotDensity::poisson(1e-6));
  CHECK(fit_poisson(cycles({{7, 1}}, 2)).slot(0) == SlotDensity::poisson(7));
  for (double bad : {-1.0, 1.5}) {
    try {
      fit_poisson(cycles({{bad, 1}}, 2));
      FAIL("expected domain error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::domain);
    }
  }
}

TEST_CASE("restrict slots") {
  auto law = [](std::vector<double> m) {
    std::vector<SlotDensity> s;
    for (double v : m) s.push_back(SlotDensity::gaussian(v, 1));
    return IpidLaw(s);
  };
  const ClassBank bank({law({0, 0, 0}), law({1, 0, 1}), law({1, 2, -1})});
  ClassifierDetector full(bank, 1e9);
  ClassifierDetector all(restrict_slots(bank, {0, 1, 2}), 1e9);
  for (double x : {0.3, 1.1, -0.5, 0.8}) CHECK(full.step(x) == all.step(x));
  // Classes 0 and 1 coincide on slot 1.
  CHECK_THROWS_AS(restrict_slots(bank, {1}), Error);
  CHECK_THROWS_AS(restrict_slots(bank, {}), Error);
  CHECK_THROWS_AS(restrict_slots(bank, {5}), Error);
}

TEST_CASE("csv readers") {
  std::istringstream with_header("time,value\n1,0.5\n2,-1.25e1\n");
  const auto obs = csv::read_observations(with_header);
  REQUIRE(obs.size() == 2);
  CHECK(obs[1] == std::vector<double>{-12.5});
  std::istringstream multi("time,value_0,value_1\n1,1,2\n");
  CHECK(csv::read_observations(multi)[0] == std::vector<double>{1, 2});
  std::istringstream empty("time,value\n");
  CHECK(csv::read_observations(empty).empty());
  std::istringstream bad("time,value\n1,2\n2,abc\n");
  try {
    csv::read_observations(bad);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(csv::parse_double("1,5"), Error);
  CHECK(csv::parse_double(" 2.5 ") == 2.5);

  std::istringstream longfmt("timestamp,value\n0,1\n1,2\n2,3\n");
  CHECK(read_long_series(longfmt) == std::vector<double>{1, 2, 3});
  std::istringstream rows("1,2,3\n4,5\n");
  const auto c = read_cycle_rows(rows);
  REQUIRE(c.size() == 2);
  CHECK(c[1] == std::vector<double>{4, 5});
}

}
