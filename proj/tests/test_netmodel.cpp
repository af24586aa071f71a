#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qnet/netmodel.hpp"

using namespace qnet;

namespace {

Topology metro() {
  Topology t;
  t.add_node({"UTC", NodeRole::kSourceLab}).add_node({"TQN", NodeRole::kRemote}).add_node({"BQN", NodeRole::kRemote});
  t.add_link({"UTC", "TQN", 2.5, 11.297, 2.5});
  t.add_link({"UTC", "BQN", 5.0, 16.5895, 4.0});
  return t;
}

RoutePlan remote_plan() {
  RoutePlan p;
  p.assignments["e"] = {"UTC", "TQN", "UTC"};
  p.assignments["f"] = {"UTC", "BQN", "UTC"};
  return p;
}

ThroughputSpec observed() {
  ThroughputSpec s;
  s.pair_rate_hz = 6000;
  s.fusion_probability = 1.0 / 32;
  s.insertion_loss_db = 8;
  return s;
}

}  // namespace

TEST(Topology, RoundTripLossAndDelay) {
  const Topology t = metro();
  const RoutePlan p = remote_plan();
  EXPECT_DOUBLE_EQ(path_loss_db(p, t, "e"), 5.0);
  EXPECT_DOUBLE_EQ(path_loss_db(p, t, "f"), 10.0);
  EXPECT_NEAR(mode_delay_us(p, t, "e"), 22.594, 1e-9);
  EXPECT_NEAR(mode_delay_us(p, t, "f"), 33.179, 1e-9);
  EXPECT_EQ(path_loss_db(p, t, "b"), 0.0);
  EXPECT_EQ(mode_delay_us(p, t, "b"), 0.0);
}

TEST(Topology, MissingLink) {
  const Topology t = metro();
  RoutePlan p;
  p.assignments["e"] = {"UTC", "TQN", "BQN", "UTC"};
  try {
    validate_plan(p, t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMissingLink);
  }
  EXPECT_THROW(path_loss_db(t, p.assignments["e"]), Error);
}

TEST(Topology, RejectsBadRoutesAndLinks) {
  const Topology t = metro();
  RoutePlan unknown;
  unknown.assignments["e"] = {"UTC", "XQN", "UTC"};
  EXPECT_THROW(validate_plan(unknown, t), Error);
  RoutePlan ends_remote;
  ends_remote.assignments["e"] = {"UTC", "TQN"};
  EXPECT_THROW(validate_plan(ends_remote, t), Error);

  Topology u = metro();
  EXPECT_THROW(u.add_link({"TQN", "BQN", -1.0, 1.0, std::nullopt}), Error);
  EXPECT_THROW(u.add_link({"TQN", "BQN", 1.0, std::nullopt, std::nullopt}), Error);
  EXPECT_THROW(u.add_link({"TQN", "UTC", 1.0, 1.0, std::nullopt}), Error);
  EXPECT_THROW(u.add_node({"UTC", NodeRole::kRemote}), Error);
}

TEST(Topology, DelayFromLength) {
  Topology t;
  t.add_node({"A", NodeRole::kSourceLab}).add_node({"B", NodeRole::kRemote});
  t.add_link({"A", "B", 1.0, std::nullopt, 10.0});
  // 10 km at group index 1.468: 10e3 * 1.468 / c
  EXPECT_NEAR(t.link_delay_us(t.links()[0]), 10e3 * 1.468 / 299792458.0 * 1e6, 1e-12);
  EXPECT_NEAR(t.link_delay_us(t.links()[0]), 48.967, 1e-3);
}

TEST(Rates, LocalFourFold) {
  EXPECT_DOUBLE_EQ(local_fourfold_rate(observed()), 93.75);
  ThroughputSpec s = observed();
  s.pair_rate_hz = 0;
  EXPECT_EQ(local_fourfold_rate(s), 0.0);
  s.pair_rate_hz = 1000;
  s.fusion_probability = 1.0;
  EXPECT_DOUBLE_EQ(local_fourfold_rate(s), 500.0);
}

TEST(Rates, NaiveBudgetAndUnbudgetedLoss) {
  const double naive = single_application_rate(observed(), remote_plan(), metro());
  EXPECT_NEAR(naive, 93.75 * std::pow(10.0, -2.3), 1e-12);
  EXPECT_NEAR(naive, 0.46986, 1e-4);
  EXPECT_NEAR(unbudgeted_loss_db(naive, 0.07), 10.0 * std::log10(naive / 0.07), 1e-12);
  EXPECT_NEAR(unbudgeted_loss_db(naive, 0.07), 8.27, 0.01);
  EXPECT_THROW(unbudgeted_loss_db(0.0, 0.07), Error);
}

TEST(Rates, PerPhotonBudget) {
  const double t2 = std::pow(10.0, -0.2);
  const double te = std::pow(10.0, -0.7);
  const double tf = std::pow(10.0, -1.2);
  const RateBudget bell = rate_budget(observed(), remote_plan(), metro(), HeraldClass::kBell);
  ASSERT_EQ(bell.photons.size(), 4u);
  EXPECT_DOUBLE_EQ(bell.photons[0].insertion_share_db, 2.0);
  EXPECT_NEAR(bell.rate_hz, 93.75 * t2 * t2 * te * tf, 1e-12);
  const double noon = distributed_rate(observed(), remote_plan(), metro(), HeraldClass::kNoonH);
  EXPECT_NEAR(noon, 93.75 * t2 * t2 * 0.5 * (te * te + tf * tf), 1e-12);
}

// Property: dB losses compose multiplicatively, and the rate never rises
// when any loss grows.
TEST(RatesProperty, DbMultiplicativeAndMonotone) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> db(0.0, 30.0);
  for (int i = 0; i < 200; ++i) {
    const double x = db(rng);
    const double y = db(rng);
    EXPECT_NEAR(db_to_transmission(x + y), db_to_transmission(x) * db_to_transmission(y), 1e-15);
    if (x < y) {
      EXPECT_GE(db_to_transmission(x), db_to_transmission(y));
    }
  }
  for (int i = 0; i < 50; ++i) {
    ThroughputSpec a = observed();
    a.per_mode_loss_db["e"] = db(rng);
    ThroughputSpec b = a;
    b.per_mode_loss_db["e"] += db(rng);
    b.insertion_loss_db += db(rng);
    for (HeraldClass h : {HeraldClass::kBell, HeraldClass::kNoonV}) {
      EXPECT_GE(distributed_rate(a, remote_plan(), metro(), h), distributed_rate(b, remote_plan(), metro(), h));
    }
    EXPECT_GE(single_application_rate(a, remote_plan(), metro()), single_application_rate(b, remote_plan(), metro()));
  }
}

TEST(RatesProperty, PathLossIsAdditive) {
  std::mt19937_64 rng(78);
  std::uniform_real_distribution<double> db(0.0, 10.0);
  for (int i = 0; i < 30; ++i) {
    Topology t;
    t.add_node({"A", NodeRole::kSourceLab}).add_node({"B", NodeRole::kRemote}).add_node({"C", NodeRole::kRemote});
    const double ab = db(rng);
    const double bc = db(rng);
    t.add_link({"A", "B", ab, 1.0, std::nullopt});
    t.add_link({"B", "C", bc, 2.0, std::nullopt});
    EXPECT_NEAR(path_loss_db(t, {"A", "B", "C", "B", "A"}), 2 * (ab + bc), 1e-12);
    EXPECT_NEAR(path_delay_us(t, {"A", "B", "C", "B", "A"}), 6.0, 1e-12);
  }
}

TEST(Rates, Validation) {
  ThroughputSpec s = observed();
  s.fusion_probability = 1.5;
  EXPECT_THROW(s.validate(), Error);
  s = observed();
  s.detector_efficiency["x"] = 2.0;
  EXPECT_THROW(s.validate(), Error);
  s = observed();
  s.detector_efficiency["x"] = 0.5;
  EXPECT_NEAR(distributed_rate(s, remote_plan(), metro(), HeraldClass::kBell),
              0.5 * distributed_rate(observed(), remote_plan(), metro(), HeraldClass::kBell), 1e-12);
}
