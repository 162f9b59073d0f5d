#include <gtest/gtest.h>

#include <cmath>

#include "pnm/error.hpp"
#include "pnm/physics.hpp"

using namespace pnm;

TEST(Physics, PcRoundTrip) {
  const double gamma = 0.0725;
  for (double r : {2e-4, 3e-3}) {
    for (double sw = 0.002; sw <= 1.0; sw += 0.0137) {
      const double pc = pc_of_sw(gamma, r, sw).value;
      EXPECT_NEAR(sw_of_pc(gamma, r, pc), sw, 1e-12) << "sw " << sw;
    }
  }
}

TEST(Physics, PcIsDecreasingInSw) {
  double prev = INFINITY;
  for (double sw = 0.01; sw <= 1.0; sw += 0.01) {
    const double pc = pc_of_sw(0.0725, 2e-4, sw).value;
    EXPECT_LT(pc, prev);
    prev = pc;
  }
}

TEST(Physics, ClampBelowThreshold) {
  const auto at = pc_of_sw(0.0725, 2e-4, kSwClamp);
  const auto below = pc_of_sw(0.0725, 2e-4, 1e-6);
  EXPECT_TRUE(below.clamped);
  EXPECT_DOUBLE_EQ(below.value, at.value);
  EXPECT_DOUBLE_EQ(dpc_dsw(0.0725, 2e-4, 1e-6), 0.0);
  EXPECT_THROW(pc_of_sw(0.0725, 2e-4, 1.5), Error);
  EXPECT_THROW(pc_of_sw(0.0725, 2e-4, std::nan("")), Error);
}

TEST(Physics, SwOfPcBelowMinimumIsOutOfRange) {
  const double pc1 = pc_of_sw(0.0725, 2e-4, 1.0).value;
  try {
    sw_of_pc(0.0725, 2e-4, 0.5 * pc1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfRange);
  }
}

TEST(Physics, DerivativeMatchesDifference) {
  for (double sw : {0.05, 0.3, 0.8, 0.99}) {
    const double h = 1e-7;
    const double fd = (pc_of_sw(0.0725, 2e-4, sw + h).value - pc_of_sw(0.0725, 2e-4, sw - h).value) / (2 * h);
    EXPECT_NEAR(dpc_dsw(0.0725, 2e-4, sw), fd, 1e-6 * std::abs(fd));
  }
}

TEST(Physics, PoiseuilleConductance) {
  const double g = single_phase_conductance(1e-4, 1e-3, 1e-3);
  EXPECT_DOUBLE_EQ(g, M_PI * 1e-16 / (8 * 1e-3 * 1e-3));
  EXPECT_THROW(single_phase_conductance(1e-4, 0.0, 1e-3), Error);
}

TEST(Physics, InvasionSwitchesPhaseConductances) {
  Throat t;
  t.radius = 1e-4;
  t.length = 8e-4;
  const PhaseConductances g = phase_conductances(t, FluidPair{});
  EXPECT_GT(g.wetting.less, 0.0);
  EXPECT_EQ(g.nonwetting.less, 0.0);
  EXPECT_GT(g.nonwetting.greater, 0.0);
  EXPECT_EQ(g.wetting.greater, 0.0);
}

TEST(Physics, FluidValidation) {
  FluidPair f;
  f.mu_n = 0.0;
  EXPECT_THROW(f.validate(), Error);
}
