#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pnm/config.hpp"
#include "pnm/harness.hpp"

using namespace pnm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pnm_harness_" + name);
  fs::remove_all(p);
  return p;
}

Config line_config() { return parse_config_file(fs::path(PNM_CONFIG_DIR) / "line.ini"); }

}  // namespace

TEST(Harness, LineRunInvadesFourThroats) {
  const Config cfg = line_config();
  const RunOutcome o = execute_run(cfg.run, build_network(cfg.run));
  ASSERT_TRUE(o.completed) << o.message;
  EXPECT_EQ(o.events.size(), 4u);
  EXPECT_EQ(o.summary.invaded_count, 4u);
  for (std::size_t m = 0; m < o.events.size(); ++m) EXPECT_EQ(o.events[m].throat, m);
  EXPECT_LT(o.summary.e_pce, 1e-6);
  EXPECT_LE(o.checks.max_imbalance_n, 1e-8);
  EXPECT_GE(o.checks.sn_min, -1e-10);
  EXPECT_DOUBLE_EQ(o.record.states.back().time, 500.0);
}

TEST(Harness, RunCaseFilesAreDeterministic) {
  const Config cfg = line_config();
  const fs::path a = scratch("a"), b = scratch("b");
  const CaseResult ra = run_case(cfg, a);
  run_case(cfg, b);
  for (const char* f : {"run.csv", "events.csv", "config.ini"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_FALSE(fs::exists(a / "abort_state.csv"));
  const std::string run = slurp(a / "run.csv");
  EXPECT_EQ(run.rfind("# pnm-run format 1\n", 0), 0u);
  EXPECT_NE(run.find("t,dt,newton_iters,pw_0,sn_0,pc_0,"), std::string::npos);
  EXPECT_NE(ra.summary.find("events 4 invaded 4"), std::string::npos);
  // The echoed config parses back to the same configuration.
  EXPECT_EQ(parse_config_file(a / "config.ini"), cfg);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Harness, NetworkFile) {
  const fs::path d = scratch("net");
  const fs::path p = write_case_network(line_config(), d);
  EXPECT_TRUE(fs::exists(p));
  fs::remove_all(d);
}

TEST(Harness, CoordinationOfEventPores) {
  const Config cfg = line_config();
  const Network net = build_network(cfg.run);
  const RunOutcome o = execute_run(cfg.run, net);
  const auto c = event_coordination(net, o.record, o.events, cfg.run.fluids);
  ASSERT_EQ(c.size(), o.events.size());
  EXPECT_EQ(c[0], 1u);  // pore 0 is the chain end
  for (std::size_t m = 1; m < c.size(); ++m) EXPECT_EQ(c[m], 2u);
}

TEST(Harness, SmallEnsemble) {
  Config cfg = parse_config_text(
      "[case]\nkind = bifurcating\n[scheme]\nkind = fi-theta\n[timeloop]\nt_end = 2000\ndt_target = 100\ndt_min = "
      "1e-6\n[study]\nschemes = fi-theta, fi-n\ndt = 100, 20\nseed_count = 3\n");
  const EnsembleResult r = run_ensemble(cfg);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(r.members.size(), 12u);
  for (const EnsembleRow& row : r.rows) {
    EXPECT_EQ(row.seeds, 3u);
    EXPECT_EQ(row.failures, 0u);
    if (row.scheme == 0) {
      EXPECT_EQ(row.matches, 3u);
    }
  }
  EXPECT_THROW(run_ensemble(line_config()), Error);
}

TEST(Harness, SmallLineConvergence) {
  Config cfg = parse_config_text(
      "[case]\nkind = line\npores = 4\n[scheme]\nkind = fi-theta\n[timeloop]\nt_end = 250\ndt_target = 50\n"
      "[study]\nschemes = fi-theta\ndt = 50, 25, 10\n[reference]\ndt_target = 5\ntol_t = 1e-4\n");
  const fs::path d = scratch("conv");
  const ConvergenceResult r = run_convergence_study(cfg, d);
  ASSERT_EQ(r.references.size(), 1u);
  EXPECT_EQ(r.references[0].events, 2u);
  ASSERT_EQ(r.levels.size(), 3u);
  for (const LevelResult& l : r.levels) {
    EXPECT_TRUE(l.completed);
    EXPECT_TRUE(l.sequence_ok);
    EXPECT_LT(l.summary.e_sw, 1e-6);
  }
  EXPECT_TRUE(fs::exists(d / "errors.csv"));
  EXPECT_TRUE(fs::exists(d / "slopes.csv"));
  fs::remove_all(d);
}
