#include <gtest/gtest.h>

#include "pnm/config.hpp"
#include "pnm/error.hpp"

using namespace pnm;

namespace {

const char* kMinimal = R"(
[case]
kind = line

[scheme]
kind = fi-theta

[timeloop]
t_end = 500
dt_target = 10
)";

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Configuration);
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalGetsDefaults) {
  const Config c = parse_config_text(kMinimal);
  EXPECT_EQ(c.run.fluids.gamma, 0.0725);
  EXPECT_EQ(c.run.timeloop.retry_factor, 0.5);
  EXPECT_EQ(c.run.newton.tol_residual_rel, 1e-8);
  EXPECT_TRUE(std::holds_alternative<LineCase>(c.run.geometry));
  EXPECT_EQ(std::get<LineCase>(c.run.geometry).pores, 10u);
  EXPECT_FALSE(c.study.has_value());
}

TEST(Config, DeltaOnlyUnderFiR) {
  const std::string text = std::string(kMinimal) + "";
  EXPECT_NE(error_of("[case]\nkind = line\n[scheme]\nkind = fi-theta\ndelta = 0.4\n[timeloop]\nt_end = 1\ndt_target = 0.1\n")
                .find("scheme.delta"),
            std::string::npos);
  const Config c =
      parse_config_text("[case]\nkind = line\n[scheme]\nkind = fi-r\ndelta = 0.001\n[timeloop]\nt_end = 1\ndt_target = 0.1\n");
  EXPECT_EQ(std::get<FiR>(c.run.scheme).delta, 0.001);
}

TEST(Config, ErrorsNameTheKeyPath) {
  EXPECT_NE(error_of(std::string(kMinimal) + "[fluids]\nviscosity = 1\n").find("fluids.viscosity"), std::string::npos);
  EXPECT_NE(error_of("[case]\nkind = line\n[scheme]\nkind = fi-n\n[timeloop]\nt_end = 1\n").find("timeloop.dt_target"),
            std::string::npos);
  EXPECT_NE(error_of(std::string(kMinimal) + "[newton]\nmax_update_sn = -1\n").find("newton.max_update_sn"),
            std::string::npos);
  EXPECT_NE(error_of(std::string(kMinimal) + "[solver]\nx = 1\n").find("solver"), std::string::npos);
  EXPECT_NE(error_of("[case]\nkind = line\nrows = 3\n[scheme]\nkind = fi-n\n[timeloop]\nt_end = 1\ndt_target = 1\n")
                .find("case.rows"),
            std::string::npos);
  EXPECT_NE(error_of(std::string(kMinimal) + "[fluids]\ngamma = abc\n").find("fluids.gamma"), std::string::npos);
}

TEST(Config, StudyLevelsMustDecrease) {
  const std::string base = std::string(kMinimal) + "[study]\nschemes = fi-theta, fi-r:0.4\n";
  EXPECT_NE(error_of(base + "dt = 10, 20\n").find("study.dt"), std::string::npos);
  const Config c = parse_config_text(base + "dt = 20, 10, 5\nseed_count = 3\n[reference]\ntol_t = 1e-5\n");
  ASSERT_TRUE(c.study);
  EXPECT_EQ(c.study->dt_levels, (std::vector<double>{20, 10, 5}));
  EXPECT_EQ(c.study->schemes.size(), 2u);
  EXPECT_EQ(c.study->reference.tol_t, 1e-5);
}

TEST(Config, EchoRoundTrip) {
  const std::vector<std::string> texts = {
      kMinimal,
      "[case]\nkind = lattice\nseed = 9\nradius_std = 3.3e-4\n[fluids]\nmu_n = 2.1e-3\n[scheme]\nkind = fi-r\ndelta = "
      "0.001\n[newton]\nline_search = off\n[timeloop]\nt_end = 3\ndt_target = 0.01\n[output]\ndirectory = x/y\n"
      "[study]\nschemes = fi-theta, fi-r:0.001, fi-n\ndt = 0.01, 0.005, 0.0025, 0.00125\nseed_count = 3\n",
      "[case]\nkind = bifurcating\ndepth = 3\n[scheme]\nkind = fi-n\n[timeloop]\nt_end = 2000\ndt_target = "
      "0.1\n",
  };
  for (const std::string& t : texts) {
    const Config a = parse_config_text(t);
    const std::string echo = echo_config(a);
    const Config b = parse_config_text(echo);
    EXPECT_EQ(a, b) << echo;
    EXPECT_EQ(echo, echo_config(b));
  }
}

TEST(Config, ShortestRoundTripNumbers) {
  const Config a = parse_config_text(std::string(kMinimal) + "[fluids]\ngamma = 0.07250000000000001\n");
  EXPECT_NE(echo_config(a).find("gamma = 0.07250000000000001"), std::string::npos);
  EXPECT_NE(echo_config(parse_config_text(kMinimal)).find("gamma = 0.0725\n"), std::string::npos);
}
