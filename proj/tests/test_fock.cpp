#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle/dense_fock.hpp"
#include "qnet/fock.hpp"
#include "support.hpp"

using namespace qnet;

namespace {

SlotKey H(const std::string& m) { return SlotKey{m, Polarization::H}; }
SlotKey V(const std::string& m) { return SlotKey{m, Polarization::V}; }

const Matrix2 kBs = [] {
  const double r = 1.0 / std::sqrt(2.0);
  return Matrix2{{{r, r}, {r, -r}}};
}();

}  // namespace

TEST(BasisKet, CanonicalOrderAndMerge) {
  const BasisKet k1({{V("b"), 1}, {H("a"), 1}, {H("a"), 1}, {H("c"), 0}});
  const BasisKet k2({{H("a"), 2}, {V("b"), 1}});
  EXPECT_EQ(k1, k2);
  EXPECT_EQ(k1.total(), 3);
  EXPECT_EQ(k1.count(H("a")), 2);
  EXPECT_EQ(k1.mode_count("b"), 1);
  EXPECT_EQ(k1.serialize(), "a:H:0^2 b:V:0^1");
}

TEST(BasisKet, SlotOrderIsModeThenPolThenTbin) {
  EXPECT_LT((SlotKey{"a", Polarization::V, 1}), (SlotKey{"b", Polarization::H, 0}));
  EXPECT_LT((SlotKey{"a", Polarization::H, 1}), (SlotKey{"a", Polarization::V, 0}));
  EXPECT_LT((SlotKey{"a", Polarization::H, 0}), (SlotKey{"a", Polarization::H, 1}));
}

TEST(BasisKet, WithAddedAndRemoved) {
  const BasisKet k({{H("a"), 1}});
  EXPECT_EQ(k.with_added(H("a")).count(H("a")), 2);
  EXPECT_TRUE(k.with_added(H("a"), -1).empty());
  EXPECT_THROW(k.with_added(V("a"), -1), Error);
}

TEST(BasisKet, ParseRoundTrip) {
  const BasisKet k({{H("e"), 2}, {SlotKey{"f", Polarization::V, 1}, 1}});
  EXPECT_EQ(BasisKet::parse(k.serialize()), k);
  EXPECT_THROW(BasisKet::parse("e-H-0^1"), Error);
  EXPECT_THROW(BasisKet::parse("e:X:0^1"), Error);
}

TEST(PureState, VacuumAndCreation) {
  const PureState v = vacuum();
  EXPECT_EQ(v.size(), 1u);
  EXPECT_DOUBLE_EQ(v.norm2(), 1.0);
  EXPECT_EQ(v.photon_number(), 0);
  // a†a†|0> = sqrt(2)|2>
  const PureState two = create(create(v, H("a")), H("a"));
  EXPECT_NEAR(std::abs(two.amplitude(BasisKet({{H("a"), 2}}))), std::sqrt(2.0), 1e-15);
}

TEST(PureState, SerializeRoundTrip) {
  std::mt19937_64 rng(11);
  const auto s = testing_support::random_state(rng, {H("a"), V("a"), H("b")}, 3, 6);
  const PureState back = PureState::parse(s.serialize());
  EXPECT_EQ(back.size(), s.size());
  for (const auto& [ket, amp] : s.terms()) EXPECT_NEAR(std::abs(back.amplitude(ket) - amp), 0.0, 1e-15);
  EXPECT_EQ(vacuum().serialize(), "1 0 |\n");
}

TEST(PureState, PruneDropsTinyAmplitudes) {
  const PureState s(PureState::TermMap{{BasisKet({{H("a"), 1}}), 1.0}, {BasisKet({{V("a"), 1}}), 1e-17}});
  EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(s.with_prune_epsilon(0.0).size(), 1u);
}

TEST(PureState, TensorRejectsSharedModes) {
  const PureState a = PureState::from_ket(BasisKet({{H("a"), 1}}));
  const PureState b = PureState::from_ket(BasisKet({{V("b"), 1}}));
  const PureState ab = tensor(a, b);
  EXPECT_EQ(ab.size(), 1u);
  try {
    tensor(a, a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kOverlappingModes);
  }
}

TEST(PureState, InnerProductIsConjugateLinear) {
  std::mt19937_64 rng(3);
  const std::vector<SlotKey> slots{H("a"), V("a"), H("b")};
  for (int i = 0; i < 20; ++i) {
    const auto s = testing_support::random_state(rng, slots, 2);
    const auto t = testing_support::random_state(rng, slots, 2);
    EXPECT_NEAR(std::abs(inner_product(s, t) - std::conj(inner_product(t, s))), 0.0, 1e-14);
    EXPECT_NEAR(inner_product(s, s).real(), 1.0, 1e-14);
  }
}

TEST(Coupler, HongOuMandelBunching) {
  const PureState in = PureState::from_ket(BasisKet({{H("a"), 1}, {H("b"), 1}}));
  const PureState out = apply_coupler(in, SlotFamily{"a", std::nullopt}, SlotFamily{"b", std::nullopt}, kBs);
  EXPECT_EQ(out.size(), 2u);
  EXPECT_NEAR(std::abs(out.amplitude(BasisKet({{H("a"), 1}, {H("b"), 1}}))), 0.0, 1e-15);
  EXPECT_NEAR(out.amplitude(BasisKet({{H("a"), 2}})).real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(out.amplitude(BasisKet({{H("b"), 2}})).real(), -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Coupler, OrthogonalPolarizationsDoNotInterfere) {
  const PureState in = PureState::from_ket(BasisKet({{H("a"), 1}, {V("b"), 1}}));
  const PureState out = apply_coupler(in, SlotFamily{"a", std::nullopt}, SlotFamily{"b", std::nullopt}, kBs);
  ProjectionSpec split;
  split.require(SlotPattern{"a", std::nullopt, std::nullopt}, 1);
  split.require(SlotPattern{"b", std::nullopt, std::nullopt}, 1);
  EXPECT_NEAR(project(out, split).probability, 0.5, 1e-15);
}

TEST(Coupler, RejectsNonUnitary) {
  const Matrix2 bad{{{1.0, 1.0}, {0.0, 1.0}}};
  try {
    apply_coupler(vacuum(), SlotFamily{"a", std::nullopt}, SlotFamily{"b", std::nullopt}, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNonUnitary);
  }
}

TEST(Coupler, VacuumIsInvariant) {
  const PureState out = apply_coupler(vacuum(), SlotFamily{"a", std::nullopt}, SlotFamily{"b", std::nullopt}, kBs);
  EXPECT_NEAR(std::abs(inner_product(out, vacuum()) - Complex(1.0)), 0.0, 1e-15);
}

// Property: random unitaries on random states agree with the dense oracle and
// preserve norm and photon number.
TEST(CouplerProperty, MatchesDenseOracle) {
  std::mt19937_64 rng(20240611);
  const std::vector<SlotKey> in_slots{H("a"), V("a"), H("b"), V("b")};
  const oracle::DenseSpace space(in_slots, 4);
  for (int trial = 0; trial < 40; ++trial) {
    const Matrix2 u = testing_support::random_unitary(rng);
    const PureState s = testing_support::random_state(rng, in_slots, 4, 5);
    const PureState out = apply_coupler(s, SlotFamily{"a", std::nullopt}, SlotFamily{"b", std::nullopt}, u);
    EXPECT_NEAR(out.norm2(), 1.0, 1e-12);
    const auto dense = oracle::transform(space, s, [&](const SlotKey& k) {
      const int i = k.mode == "a" ? 0 : 1;
      return std::vector<std::pair<SlotKey, oracle::C>>{{SlotKey{"a", k.pol}, u[i][0]}, {SlotKey{"b", k.pol}, u[i][1]}};
    });
    EXPECT_LT(oracle::max_deviation(space, out, dense), 1e-12) << "trial " << trial;
    for (const auto& [ket, amp] : out.terms()) {
      (void)amp;
      bool found = false;
      for (const auto& [k2, a2] : s.terms()) {
        (void)a2;
        found = found || k2.total() == ket.total();
      }
      EXPECT_TRUE(found);
    }
  }
}

TEST(CouplerProperty, InverseRestoresState) {
  std::mt19937_64 rng(99);
  const std::vector<SlotKey> slots{H("a"), V("a"), H("b")};
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix2 u = testing_support::random_unitary(rng);
    Matrix2 udag{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) udag[i][j] = std::conj(u[j][i]);
    const PureState s = testing_support::random_state(rng, slots, 3);
    const SlotFamily a{"a", std::nullopt};
    const SlotFamily b{"b", std::nullopt};
    const PureState back = apply_coupler(apply_coupler(s, a, b, u), a, b, udag);
    EXPECT_NEAR(std::abs(inner_product(s, back)), 1.0, 1e-12);
  }
}

TEST(Projection, ProbabilityAndCollapse) {
  const double r = 1.0 / std::sqrt(2.0);
  const PureState s(PureState::TermMap{{BasisKet({{H("a"), 1}}), r}, {BasisKet({{V("a"), 1}}), r}});
  const auto res = project(s, ProjectionSpec::one_each({{"a", Polarization::H}}));
  EXPECT_NEAR(res.probability, 0.5, 1e-15);
  EXPECT_NEAR(res.collapsed.norm2(), 1.0, 1e-15);
  EXPECT_EQ(res.collapsed.size(), 1u);
}

TEST(Projection, RejectsDoubleConstraint) {
  ProjectionSpec spec;
  spec.require(SlotPattern{"a", Polarization::H, std::nullopt}, 1);
  EXPECT_THROW(spec.require(SlotPattern{"a", std::nullopt, std::nullopt}, 1), Error);
  EXPECT_NO_THROW(spec.require(SlotPattern{"a", Polarization::V, std::nullopt}, 0));
}

TEST(Projection, ZeroProbabilityGivesEmptyState) {
  const PureState s = PureState::from_ket(BasisKet({{H("a"), 1}}));
  const auto res = project(s, ProjectionSpec::one_each({{"a", Polarization::V}}));
  EXPECT_EQ(res.probability, 0.0);
  EXPECT_TRUE(res.collapsed.empty());
}
