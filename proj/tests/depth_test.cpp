#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "floodroute/depth.hpp"

namespace floodroute {
namespace {

PolePairMeasurement pair(double pre_px, double pre_scale, double post_px, double post_scale) {
  return {"p1", {29.76, -95.37}, pre_px, pre_scale, post_px, post_scale,
          parse_rfc3339("2017-08-30T15:00:00Z")};
}

TEST(EstimateDepth, PoleDifference) {
  const auto obs = estimate_depth(pair(84, 40, 60, 40));
  EXPECT_NEAR(obs.depth_m, 0.6, 1e-12);  // 2.1 m - 1.5 m
  EXPECT_EQ(obs.id, "p1");
  EXPECT_EQ(obs.source, ObservationSource::pole_pair);
  EXPECT_EQ(obs.location, (GeoPoint{29.76, -95.37}));
  EXPECT_EQ(format_rfc3339(obs.timestamp), "2017-08-30T15:00:00Z");
}

TEST(EstimateDepth, EqualLengthsGiveZero) {
  EXPECT_EQ(estimate_depth(pair(70, 35, 70, 35)).depth_m, 0.0);
}

TEST(EstimateDepth, NegativeDifferenceClamps) {
  EXPECT_EQ(estimate_depth(pair(80, 40, 90, 40)).depth_m, 0.0);
}

TEST(EstimateDepth, DifferentScalesPerPhoto) {
  // 120/50 = 2.4 m before, 45/30 = 1.5 m after.
  EXPECT_NEAR(estimate_depth(pair(120, 50, 45, 30)).depth_m, 0.9, 1e-12);
}

TEST(EstimateDepth, RejectsNonPositiveScale) {
  for (const auto& m : {pair(80, 0, 60, 40), pair(80, 40, 60, 0), pair(80, -1, 60, 40)}) {
    try {
      estimate_depth(m);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_measurement);
    }
  }
}

TEST(EstimateDepth, ScaleInvarianceProperty) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> len(1.0, 400.0), scale(5.0, 120.0), factor(0.01, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const auto m = pair(len(rng), scale(rng), len(rng), scale(rng));
    const double k = factor(rng);
    const auto scaled = pair(m.pre_len_px * k, m.pre_scale_px_per_m * k, m.post_len_px * k,
                             m.post_scale_px_per_m * k);
    const double a = estimate_depth(m).depth_m;
    const double b = estimate_depth(scaled).depth_m;
    EXPECT_GE(a, 0.0);
    EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, a));
  }
}

TEST(Rmse, Identical) {
  const std::vector<double> v{1, 2, 3};
  EXPECT_EQ(rmse(v, v), 0.0);
}

TEST(Rmse, KnownValue) {
  const std::vector<double> e{0, 0}, t{3, 4};
  EXPECT_NEAR(rmse(e, t), 3.5355339059327378, 1e-4);
}

TEST(Rmse, Errors) {
  const std::vector<double> a{1, 2}, b{1}, empty;
  EXPECT_THROW(rmse(a, b), Error);
  EXPECT_THROW(rmse(empty, empty), Error);
}

TEST(Rmse, PermutationInvariantAndNonNegative) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.5, 0.3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> e(12), t(12);
    for (auto& v : e) v = n(rng);
    for (auto& v : t) v = n(rng);
    std::vector<std::size_t> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pe, pt;
    for (auto i : perm) {
      pe.push_back(e[i]);
      pt.push_back(t[i]);
    }
    EXPECT_GT(rmse(e, t), 0.0);
    EXPECT_NEAR(rmse(e, t), rmse(pe, pt), 1e-12);
  }
}

TEST(Units, InchesAndMeters) {
  EXPECT_NEAR(inches_to_meters(4.69), 0.119126, 1e-12);
  EXPECT_EQ(inches_to_meters(0.0), 0.0);
  EXPECT_NEAR(meters_to_inches(1.0), 39.37007874015748, 1e-4);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    EXPECT_NEAR(meters_to_inches(inches_to_meters(x)), x, 1e-12 * std::abs(x));
  }
}

TEST(Timestamps, Rfc3339) {
  EXPECT_EQ(format_rfc3339(parse_rfc3339("2017-08-30T10:00:00-05:00")), "2017-08-30T15:00:00Z");
  EXPECT_EQ(format_rfc3339(parse_rfc3339("2017-08-30T15:00:00.250Z")), "2017-08-30T15:00:00.250Z");
  for (const char* bad : {"2017-08-30", "2017-13-01T00:00:00Z", "2017-02-30T00:00:00Z",
                          "2017-08-30T15:00:00", "2017-08-30T15:00:00Zjunk", "yesterday"}) {
    EXPECT_THROW(parse_rfc3339(bad), Error) << bad;
  }
}

}  // namespace
}  // namespace floodroute
