#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qnet/optics.hpp"
#include "qnet/protocol.hpp"
#include "qnet/source.hpp"

using namespace qnet;

namespace {
SlotKey H(const std::string& m) { return SlotKey{m, Polarization::H}; }
SlotKey V(const std::string& m) { return SlotKey{m, Polarization::V}; }
PureState one(const SlotKey& s) { return PureState::from_ket(BasisKet({{s, 1}})); }
}  // namespace

TEST(Matrices, AreUnitary) {
  for (double r : {0.1, 0.5, 0.9}) EXPECT_LT(unitarity_defect(beam_splitter_matrix(r)), 1e-15);
  for (double a : {0.0, 22.5, 45.0, 90.0, 133.0}) EXPECT_LT(unitarity_defect(rotation_matrix(a)), 1e-15);
  for (double p : {0.0, 1.0, std::numbers::pi}) EXPECT_LT(unitarity_defect(lcvr_matrix(p)), 1e-15);
  EXPECT_THROW(beam_splitter_matrix(0.0), Error);
  EXPECT_THROW(beam_splitter_matrix(1.0), Error);
}

TEST(Elements, RotationTakesHToDiagonal) {
  Circuit c(std::set<std::string>{"a"});
  c.add(Rotation{"a", 45.0, "r"});
  const PureState out = run_circuit(one(H("a")), c, WavepacketModel{});
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(out.amplitude(BasisKet({{H("a"), 1}})).real(), r, 1e-15);
  EXPECT_NEAR(out.amplitude(BasisKet({{V("a"), 1}})).real(), r, 1e-15);
}

TEST(Elements, LcvrPhasesOnlyV) {
  Circuit c(std::set<std::string>{"a"});
  c.add(Lcvr{"a", std::numbers::pi / 2, "l"});
  const double r = 1.0 / std::sqrt(2.0);
  const PureState d(PureState::TermMap{{BasisKet({{H("a"), 1}}), r}, {BasisKet({{V("a"), 1}}), r}});
  const PureState out = run_circuit(d, c, WavepacketModel{});
  EXPECT_NEAR(std::abs(out.amplitude(BasisKet({{H("a"), 1}})) - Complex(r)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(out.amplitude(BasisKet({{V("a"), 1}})) - Complex(0.0, r)), 0.0, 1e-15);
}

TEST(Elements, PbsRoutesByPolarization) {
  Circuit c(std::set<std::string>{"s"});
  c.add(Pbs{"s", "t", "r", 0.0, 0.0, "pbs"});
  const PureState in = PureState::from_ket(BasisKet({{H("s"), 1}, {V("s"), 1}}));
  const PureState out = run_circuit(in, c, WavepacketModel{});
  EXPECT_NEAR(std::abs(out.amplitude(BasisKet({{H("t"), 1}, {V("r"), 1}}))), 1.0, 1e-15);
  EXPECT_TRUE(c.modes().count("t") && c.modes().count("r"));
}

TEST(Elements, PbsAt45SplitsHEvenly) {
  Circuit c(std::set<std::string>{"s"});
  c.add(Pbs{"s", "t", "r", 45.0, 0.0, "pbs"});
  const PureState out = run_circuit(one(H("s")), c, WavepacketModel{});
  EXPECT_NEAR(project(out, ProjectionSpec::one_each({{"t", Polarization::H}})).probability, 0.5, 1e-15);
}

TEST(Elements, UnbalancedSplitterRatio) {
  Circuit c(std::set<std::string>{"a", "z"});
  c.add(BeamSplitter{"a", "z", "x", "y", 0.3, "bs"});
  const PureState out = run_circuit(one(H("a")), c, WavepacketModel{});
  EXPECT_NEAR(project(out, ProjectionSpec::one_each({{"x", Polarization::H}})).probability, 0.3, 1e-15);
}

TEST(Circuit, RejectsUnregisteredInput) {
  Circuit c(std::set<std::string>{"a"});
  try {
    c.add(BeamSplitter{"a", "q", "e", "f", 0.5, "bs"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnknownMode);
  }
}

TEST(Circuit, RejectsStateOnUnknownMode) {
  Circuit c(std::set<std::string>{"a"});
  EXPECT_THROW(run_circuit(one(H("zz")), c, WavepacketModel{}), Error);
}

TEST(Circuit, FindReplaceAndCompose) {
  Circuit c(std::set<std::string>{"a", "c"});
  c.add(DelayLine{"c", 0.0, "vdl"});
  const auto idx = c.find("vdl");
  ASSERT_TRUE(idx.has_value());
  const Circuit moved = c.with_replaced(*idx, DelayLine{"c", 2.0, "vdl"});
  EXPECT_DOUBLE_EQ(std::get<DelayLine>(moved.elements()[0]).delay_ps, 2.0);
  EXPECT_DOUBLE_EQ(std::get<DelayLine>(c.elements()[0]).delay_ps, 0.0);
  Circuit tail(std::set<std::string>{"a", "c"});
  tail.add(BeamSplitter{"a", "c", "e", "f", 0.5, "bs"});
  EXPECT_EQ(c.then(tail).elements().size(), 2u);
  EXPECT_FALSE(c.find("nope").has_value());
}

TEST(Distinguishability, OverlapLaw) {
  const WavepacketModel m{0.5, 1.0};
  EXPECT_DOUBLE_EQ(resolve_distinguishability(0.0, m).overlap, 1.0);
  const auto d = resolve_distinguishability(1.0, m);
  EXPECT_NEAR(d.overlap, std::exp(-1.0), 1e-15);
  EXPECT_NEAR(d.overlap * d.overlap + d.orthogonal * d.orthogonal, 1.0, 1e-15);
  try {
    resolve_distinguishability(1.0, WavepacketModel{0.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNonPositiveWidth);
  }
}

// Coincidences behind a 50/50 splitter follow (1 - v^2)/2.
TEST(Distinguishability, HomCoincidenceMatchesClosedForm) {
  const WavepacketModel m{0.6, std::sqrt(0.68)};
  for (double d : {-3.0, -1.0, -0.2, 0.0, 0.4, 1.5, 5.0}) {
    const double v = resolve_distinguishability(d, m).overlap;
    EXPECT_NEAR(hom_coincidence_via_state(d, m), 0.5 * (1.0 - v * v), 1e-14) << d;
    EXPECT_NEAR(hom_coincidence_via_state(d, m), hom_dip(d, m.sigma_t_ps, m.overlap_cap, 0.5), 1e-14) << d;
  }
}

TEST(Distinguishability, IdealDipReachesZero) {
  EXPECT_NEAR(hom_coincidence_via_state(0.0, WavepacketModel{0.5, 1.0}), 0.0, 1e-15);
  EXPECT_NEAR(hom_coincidence_via_state(50.0, WavepacketModel{0.5, 1.0}), 0.5, 1e-15);
}

TEST(Distinguishability, SecondDelayIsUnsupported) {
  Circuit c(std::set<std::string>{"a", "b", "z"});
  c.add(DelayLine{"b", 1.0, "d1"});
  c.add(BeamSplitter{"a", "b", "e", "f", 0.5, "bs1"});
  c.add(DelayLine{"f", 1.0, "d2"});
  c.add(BeamSplitter{"e", "f", "g", "h", 0.5, "bs2"});
  const PureState in = PureState::from_ket(BasisKet({{H("a"), 1}, {H("b"), 1}}));
  EXPECT_THROW(run_circuit(in, c, WavepacketModel{0.5, 1.0}), Error);
}

TEST(LcvrCalibration, InterpolatesAndRejectsOutOfRange) {
  const LcvrCalibration cal({{0.0, 0.0}, {1.0, 2.0}, {3.0, 3.0}});
  EXPECT_DOUBLE_EQ(cal.retardance(0.5), 1.0);
  EXPECT_DOUBLE_EQ(cal.retardance(1.0), 2.0);
  EXPECT_DOUBLE_EQ(cal.retardance(2.0), 2.5);
  EXPECT_THROW(cal.retardance(3.5), Error);
  EXPECT_THROW(LcvrCalibration({{0.0, 0.0}}), Error);
  EXPECT_DOUBLE_EQ(LcvrCalibration().retardance(1.25), 1.25);
}
