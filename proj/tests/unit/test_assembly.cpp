#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "pnm/assembly.hpp"
#include "pnm/error.hpp"

using namespace pnm;

namespace {

// Two free pores joined by one throat, nothing pinned.
Network two_pores() {
  std::vector<Pore> pores(2);
  for (std::size_t i = 0; i < 2; ++i) {
    pores[i].id = i;
    pores[i].radius = 2e-4;
    pores[i].volume = cubic_pore_volume(2e-4);
    pores[i].center = {static_cast<double>(i) * 8e-4, 0, 0};
  }
  Throat t;
  t.id = 0;
  t.i = 0;
  t.j = 1;
  t.radius = 1e-4;
  t.length = 4e-4;
  t.entry_pressure = young_laplace_entry_pressure(0.0725, 1e-4);
  return Network(pores, {t});
}

SystemState state_with(double sn0, double sn1, double theta) {
  SystemState s;
  s.pw = {1.0002e5, 1e5};
  s.sn = {sn0, sn1};
  s.throats = {ThroatRegime{false, theta}};
  return s;
}

// Row-wise relative agreement: max_j |A_ij - B_ij| <= tol * max_j |A_ij|.
void expect_close(const Eigen::SparseMatrix<double>& a, const Eigen::SparseMatrix<double>& b, double tol) {
  const Eigen::MatrixXd da(a), db(b);
  ASSERT_EQ(da.rows(), db.rows());
  for (Eigen::Index r = 0; r < da.rows(); ++r) {
    const double scale = da.row(r).cwiseAbs().maxCoeff();
    const double diff = (da.row(r) - db.row(r)).cwiseAbs().maxCoeff();
    EXPECT_LE(diff, tol * std::max(scale, 1e-300)) << "row " << r << "\nanalytic\n" << da << "\nfd\n" << db;
  }
}

}  // namespace

TEST(Assembly, DofMapSkipsPinnedPores) {
  const Network net = build_line_network(LineNetworkParams{});
  const DofMap d(net, true);
  EXPECT_TRUE(d.is_free(0));
  EXPECT_FALSE(d.is_free(9));
  EXPECT_EQ(d.pw(9), DofMap::npos);
  EXPECT_EQ(d.size(), 9u * 2u + 9u);
  EXPECT_EQ(d.theta(0), d.theta_base());
  EXPECT_EQ(DofMap(net, false).theta(0), DofMap::npos);
}

// Invasion pending, invaded, and the FI-R band; each scheme's Jacobian against differences.
TEST(Assembly, AnalyticJacobianMatchesDifferences) {
  const Network net = two_pores();
  const FluidPair f;
  const double pce = net.throat(0).entry_pressure;
  const double pc_full = pc_of_sw(f.gamma, 2e-4, 1.0).value;
  const double sw_below = sw_of_pc(f.gamma, 2e-4, 0.9 * pce);
  const double sw_above = sw_of_pc(f.gamma, 2e-4, 1.5 * pce);
  const double sw_band = sw_of_pc(f.gamma, 2e-4, pce + 0.1 * pce);
  ASSERT_LT(pc_full, pce);
  for (const SchemeKind& scheme : {SchemeKind{FiN{}}, SchemeKind{FiR{0.4}}, SchemeKind{FiTheta{}}}) {
    const Assembler a(net, f, scheme);
    for (double sw0 : {sw_below, sw_above, sw_band}) {
      for (double theta : {0.0, 0.4, 1.0}) {
        SystemState old = state_with(0.1, 0.0, 0.0);
        SystemState trial = state_with(1.0 - sw0, 0.05, is_fi_theta(scheme) || theta == 1.0 ? theta : 0.0);
        old.throats = trial.throats;
        expect_close(a.assemble_jacobian(old, trial, 0.7), a.assemble_jacobian_fd(old, trial, 0.7), 1e-5);
      }
    }
  }
}

TEST(Assembly, JacobianRespectsSparsityPattern) {
  LatticeNetworkParams p;
  p.rows = 3;
  p.cols = 4;
  const Network net = build_lattice_network(p);
  const FluidPair f;
  const Assembler a(net, f, FiTheta{});
  SystemState s = initial_state(net, f, 1e5);
  for (std::size_t i = 0; i < net.pore_count(); ++i)
    if (a.dofs().is_free(i)) s.sn[i] = 0.01 * static_cast<double>(i % 7);
  const auto pattern = a.sparsity_pattern();
  const std::set<std::pair<std::size_t, std::size_t>> allowed(pattern.begin(), pattern.end());
  const Eigen::SparseMatrix<double> j = a.assemble_jacobian(s, s, 0.1);
  for (int k = 0; k < j.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(j, k); it; ++it)
      EXPECT_TRUE(allowed.count({static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col())}))
          << it.row() << "," << it.col();
}

TEST(Assembly, InletSourceAppearsInExactlyOneRow) {
  const Network net = build_line_network(LineNetworkParams{});
  const FluidPair f;
  const Assembler a(net, f, FiTheta{});
  const SystemState s = initial_state(net, f, 1e5);
  const auto rows = a.pore_rows(s, s, 1.0);
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].wetting, 0.0);
    if (rows[i].nonwetting != 0.0) {
      ++nonzero;
      EXPECT_DOUBLE_EQ(rows[i].nonwetting, -5e-10);
    }
  }
  EXPECT_EQ(nonzero, 1u);
}

TEST(Assembly, BoundaryRowsCleared) {
  const Network net = build_line_network(LineNetworkParams{});
  std::vector<PoreRows> rows(net.pore_count(), PoreRows{1.0, 1.0});
  apply_boundary_conditions(net, rows);
  EXPECT_EQ(rows[9].wetting, 0.0);
  EXPECT_EQ(rows[9].nonwetting, 0.0);
  EXPECT_DOUBLE_EQ(rows[0].nonwetting, 1.0 - 5e-10);
  std::vector<PoreRows> wrong(3);
  EXPECT_THROW(apply_boundary_conditions(net, wrong), Error);
}

TEST(Assembly, CapillaryInletPinnedAtEntryPressure) {
  const Network net = build_lattice_network(LatticeNetworkParams{});
  const FluidPair f;
  const SystemState s = initial_state(net, f, 1e5);
  const Assembler a(net, f, FiTheta{});
  const PoreLocal in = a.pore_local(50, s.pw[50], s.sn[50]);
  EXPECT_DOUBLE_EQ(in.pn - in.pw, 150.0);
  // Inlet throats start at dpc = 0 and are therefore invaded.
  for (const Throat& t : net.throats())
    if (t.i == 50 || t.j == 50) {
      EXPECT_TRUE(s.throats[t.id].invaded);
    }
}

TEST(Assembly, GatherScatterRoundTrip) {
  const Network net = build_line_network(LineNetworkParams{});
  const FluidPair f;
  const Assembler a(net, f, FiTheta{});
  SystemState s = initial_state(net, f, 1e5);
  s.sn[3] = 0.25;
  s.throats[2].theta = 0.5;
  SystemState t = initial_state(net, f, 1e5);
  a.scatter(a.gather(s), t);
  EXPECT_EQ(s.sn, t.sn);
  EXPECT_EQ(s.pw, t.pw);
  EXPECT_EQ(t.throats[2].theta, 0.5);
}

TEST(Assembly, RejectsNonPositiveStep) {
  const Network net = build_line_network(LineNetworkParams{});
  const FluidPair f;
  const Assembler a(net, f, FiN{});
  const SystemState s = initial_state(net, f, 1e5);
  EXPECT_THROW(a.evaluate(s, s, 0.0), Error);
}
