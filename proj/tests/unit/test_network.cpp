#include <gtest/gtest.h>

#include <sstream>

#include "pnm/error.hpp"
#include "pnm/network.hpp"
#include "pnm/network_io.hpp"

using namespace pnm;

TEST(Network, LineTopologyAndBoundaries) {
  const Network net = build_line_network(LineNetworkParams{});
  ASSERT_EQ(net.pore_count(), 10u);
  ASSERT_EQ(net.throat_count(), 9u);
  EXPECT_TRUE(std::holds_alternative<FluxInlet>(net.pore(0).boundary));
  EXPECT_DOUBLE_EQ(std::get<FluxInlet>(net.pore(0).boundary).mass_rate, 5e-10);
  EXPECT_TRUE(std::holds_alternative<PressureOutlet>(net.pore(9).boundary));
  for (std::size_t i = 1; i < 9; ++i) EXPECT_EQ(net.coordination(i), 2u);
  // Young-Laplace with gamma = 0.0725 N/m and r = 100 um.
  EXPECT_NEAR(net.throat(0).entry_pressure, 1450.0, 1e-9);
}

TEST(Network, EntryPressureFollowsYoungLaplace) {
  EXPECT_DOUBLE_EQ(young_laplace_entry_pressure(0.0725, 1e-4), 2.0 * 0.0725 / 1e-4);
  EXPECT_THROW(young_laplace_entry_pressure(0.0725, 0.0), Error);
}

TEST(Network, RejectsDanglingThroat) {
  std::vector<Pore> pores(2);
  for (std::size_t i = 0; i < 2; ++i) {
    pores[i].id = i;
    pores[i].radius = 1e-4;
    pores[i].volume = cubic_pore_volume(1e-4);
    pores[i].center = {static_cast<double>(i) * 1e-3, 0, 0};
  }
  Throat t;
  t.i = 0;
  t.j = 5;
  t.radius = 5e-5;
  t.length = 1e-4;
  t.entry_pressure = 100;
  EXPECT_THROW(Network(pores, {t}), Error);
}

TEST(Network, BifurcatingIsATreeWithDistinctRadii) {
  BifurcatingNetworkParams p;
  p.seed = 7;
  const Network net = build_bifurcating_network(p);
  EXPECT_EQ(net.throat_count() + 1, net.pore_count());
  std::size_t outlets = 0;
  for (const Pore& q : net.pores()) outlets += std::holds_alternative<PressureOutlet>(q.boundary);
  EXPECT_EQ(outlets, 4u);
  for (std::size_t a = 0; a < net.throat_count(); ++a)
    for (std::size_t b = a + 1; b < net.throat_count(); ++b)
      EXPECT_NE(net.throat(a).radius, net.throat(b).radius);
}

TEST(Network, SameSeedSameNetwork) {
  BifurcatingNetworkParams p;
  p.seed = 3;
  EXPECT_EQ(build_bifurcating_network(p), build_bifurcating_network(p));
  BifurcatingNetworkParams q = p;
  q.seed = 4;
  EXPECT_FALSE(build_bifurcating_network(p) == build_bifurcating_network(q));
}

TEST(Network, LatticeCounts) {
  const Network net = build_lattice_network(LatticeNetworkParams{});
  EXPECT_EQ(net.pore_count(), 51u);
  // 5 x 9 horizontal, 4 x 10 vertical, 5 inlet throats.
  EXPECT_EQ(net.throat_count(), 45u + 40u + 5u);
  std::size_t inlet_throats = 0;
  for (const Throat& t : net.throats()) {
    if (t.i == 50 || t.j == 50) {
      ++inlet_throats;
      EXPECT_DOUBLE_EQ(t.entry_pressure, 150.0);
    }
  }
  EXPECT_EQ(inlet_throats, 5u);
  EXPECT_TRUE(std::holds_alternative<PressureInletCapillary>(net.pore(50).boundary));
  for (const Throat& t : net.throats()) {
    EXPECT_GE(t.radius, 0.3e-3);
    EXPECT_LE(t.radius, 2.7e-3);
  }
}

TEST(Network, SingleRowLatticeIsAChain) {
  LatticeNetworkParams p;
  p.rows = 1;
  p.cols = 6;
  const Network net = build_lattice_network(p);
  EXPECT_EQ(net.pore_count(), 7u);
  EXPECT_EQ(net.throat_count(), 6u);
  for (std::size_t i = 0; i < net.pore_count(); ++i) EXPECT_LE(net.coordination(i), 2u);
}

TEST(NetworkIo, RoundTripIsExact) {
  LatticeNetworkParams p;
  p.seed = 11;
  const Network net = build_lattice_network(p);
  std::stringstream buf;
  write_network(buf, net);
  const Network back = read_network(buf);
  EXPECT_EQ(net, back);
}

TEST(NetworkIo, RejectsUnknownTag) {
  std::stringstream in("# pnm-network format 1\npores 2\n0 0 0 0 1e-4 sink\n1 1 0 0 1e-4 interior\nthroats 1\n0 0 1 5e-5 1e-4 100\n");
  EXPECT_THROW(read_network(in), Error);
}
