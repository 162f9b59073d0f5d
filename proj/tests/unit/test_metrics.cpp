#include <gtest/gtest.h>

#include <cmath>

#include "pnm/error.hpp"
#include "pnm/metrics.hpp"

using namespace pnm;

namespace {

// Two pores, times 0, 1, 2, ... with the given S_n series for pore 0 and pore 1.
RunRecord series(const std::vector<double>& times, const std::vector<double>& sn0, double offset = 0.0) {
  RunRecord r;
  for (std::size_t k = 0; k < times.size(); ++k) {
    SystemState s;
    s.time = times[k];
    s.pw = {1e5, 1e5};
    s.sn = {sn0[k] + offset, 0.5 * sn0[k] + offset};
    s.throats = {ThroatRegime{}};
    r.states.push_back(s);
    if (k > 0) {
      StepOutcome o;
      o.converged = true;
      o.dt_used = times[k] - times[k - 1];
      r.steps.push_back(o);
    }
  }
  return r;
}

EventRecord event(std::size_t k, std::size_t throat, double dpc = 0.0, bool excluded = false) {
  EventRecord e;
  e.k = k;
  e.throat = throat;
  e.delta_pc = dpc;
  e.excluded = excluded;
  return e;
}

}  // namespace

TEST(SaturationError, SelfComparisonIsZero) {
  const RunRecord r = series({0, 1, 2, 3}, {0, 0.1, 0.3, 0.35});
  EXPECT_EQ(l2_saturation_error(r, r), 0.0);
}

TEST(SaturationError, ConstantOffset) {
  const RunRecord ref = series({0, 1, 2, 3}, {0, 0.1, 0.3, 0.35});
  const double c = 0.01;
  const RunRecord run = series({0, 1, 2, 3}, {0, 0.1, 0.3, 0.35}, c);
  // Both pores offset by c at every step: sqrt(sum dt * 2 c^2 / 2).
  EXPECT_NEAR(l2_saturation_error(run, ref), c * std::sqrt(3.0), 1e-15);
}

TEST(SaturationError, InterpolatesReferenceLinearly) {
  const RunRecord ref = series({0, 2}, {0, 0.4});
  const RunRecord run = series({0, 1, 2}, {0, 0.2, 0.4});
  EXPECT_NEAR(l2_saturation_error(run, ref), 0.0, 1e-16);
}

TEST(SaturationError, ReferenceMustCoverRun) {
  const RunRecord ref = series({0, 1}, {0, 0.1});
  const RunRecord run = series({0, 1, 2}, {0, 0.1, 0.2});
  try {
    l2_saturation_error(run, ref);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfRange);
  }
}

TEST(SequenceMatch, OrderAndSimultaneity) {
  const std::vector<std::size_t> truth = {3, 1, 4, 2};
  EXPECT_TRUE(invasion_sequence_match({event(1, 3), event(2, 1), event(5, 4), event(6, 2)}, truth));
  // Same step: compared as a set.
  EXPECT_TRUE(invasion_sequence_match({event(1, 3), event(2, 1), event(2, 4), event(6, 2)}, truth));
  EXPECT_FALSE(invasion_sequence_match({event(1, 1), event(2, 3)}, truth));
  EXPECT_FALSE(invasion_sequence_match({event(1, 3), event(2, 1), event(3, 4), event(4, 2), event(5, 0)}, truth));
}

TEST(GroundTruth, LargestAdjacentThroatFirst) {
  // Inlet 0 -> 1, then 1 -> {2, 3}; 3 is an outlet.
  std::vector<Pore> pores(4);
  for (std::size_t i = 0; i < 4; ++i) {
    pores[i].id = i;
    pores[i].radius = 3e-4;
    pores[i].volume = cubic_pore_volume(3e-4);
  }
  pores[0].center = {0, 0, 0};
  pores[1].center = {1e-3, 0, 0};
  pores[2].center = {2e-3, 1e-3, 0};
  pores[3].center = {2e-3, -1e-3, 0};
  pores[0].boundary = FluxInlet{1e-10};
  pores[2].boundary = PressureOutlet{1e5};
  pores[3].boundary = PressureOutlet{1e5};
  auto throat = [](std::size_t id, std::size_t i, std::size_t j, double r) {
    Throat t;
    t.id = id;
    t.i = i;
    t.j = j;
    t.radius = r;
    t.length = 5e-4;
    t.entry_pressure = young_laplace_entry_pressure(0.0725, r);
    return t;
  };
  const Network net(pores, {throat(0, 0, 1, 1e-4), throat(1, 1, 2, 0.8e-4), throat(2, 1, 3, 1.2e-4)});
  EXPECT_EQ(bifurcating_ground_truth(net), (std::vector<std::size_t>{0, 2}));
}

TEST(GroundTruth, RejectsCycles) {
  EXPECT_THROW(bifurcating_ground_truth(build_lattice_network(LatticeNetworkParams{})), Error);
}

TEST(PredictionError, RmsAndMaxSkipExcluded) {
  const Network net = build_line_network(LineNetworkParams{});
  const std::vector<EventRecord> ev = {event(1, 0, 3.0), event(2, 1, -4.0), event(3, 2, 100.0, true)};
  EXPECT_NEAR(prediction_error_rms(ev), std::sqrt(12.5), 1e-14);
  EXPECT_NEAR(prediction_error_max(ev, net), 4.0 / net.throat(1).entry_pressure, 1e-16);
  EXPECT_EQ(prediction_error_rms({}), 0.0);
}

TEST(Oracle, LineInvasionTimes) {
  const Network net = build_line_network(LineNetworkParams{});
  const FluidPair f;
  const FillingOracle o = sequential_filling_oracle_1d(net, f, 5e-10);
  ASSERT_EQ(o.invasion_times.size(), 9u);
  // (1 - S_w*) V / q with S_w* from p_c(S_w*) = p_ce.
  const double sw = sw_of_pc(f.gamma, 200e-6, 1450.0);
  const double t1 = (1.0 - sw) * cubic_pore_volume(200e-6) / 5e-13;
  EXPECT_NEAR(o.invasion_times[0], t1, 1e-9 * t1);
  EXPECT_NEAR(o.invasion_times[0], 115.0, 0.1);
  EXPECT_NEAR(o.invasion_times[1], 2 * t1, 1e-9 * t1);
  EXPECT_EQ(o.invaded_by(300.0), 2u);
  EXPECT_DOUBLE_EQ(o.sw_at(0, 0.0), 1.0);
  EXPECT_NEAR(o.sw_at(0, t1), sw, 1e-12);
  EXPECT_THROW(sequential_filling_oracle_1d(build_lattice_network(LatticeNetworkParams{}), f, 5e-10), Error);
}

TEST(ConvergenceFit, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (double dt : {1.0, 0.5, 0.25, 0.125}) pts.emplace_back(dt, 3.0 * dt);
  const ConvergenceFit fit = convergence_order(pts);
  EXPECT_NEAR(fit.slope, 1.0, 1e-12);
  EXPECT_EQ(fit.levels_used, 4u);
}

TEST(ConvergenceFit, ZeroErrorsExcludedWithNote) {
  const ConvergenceFit fit = convergence_order({{1.0, 1.0}, {0.5, 0.25}, {0.25, 0.0625}, {0.1, 0.0}});
  EXPECT_NEAR(fit.slope, 2.0, 1e-12);
  EXPECT_EQ(fit.levels_used, 3u);
  EXPECT_EQ(fit.notes.size(), 1u);
  EXPECT_THROW(convergence_order({{1.0, 1.0}, {0.5, 0.0}, {0.25, 0.0}}), Error);
}

TEST(Summary, InvadedCountIgnoresInitiallyInvaded) {
  RunRecord r = series({0, 1}, {0, 0.1});
  r.states[0].throats = {ThroatRegime{true, 1.0}, ThroatRegime{}};
  r.states[1].throats = {ThroatRegime{true, 1.0}, ThroatRegime{true, 1.0}};
  const Network net = build_line_network(LineNetworkParams{3});
  const ErrorSummary s = summarize_run(r, {event(1, 1)}, net, nullptr);
  EXPECT_EQ(s.invaded_count, 1u);
  EXPECT_EQ(mean_time_step(r), 1.0);
}

TEST(Events, ExclusionOnlyForSaturatedTheta) {
  RunRecord r = series({0, 2}, {0, 0.1});
  r.steps[0].events = {StepEvent{1, 1.0, 5.0}, StepEvent{0, 0.25, 1e-9}};
  const auto ev = detect_invasion_events(r, FiTheta{}, 1e-6);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].throat, 0u);
  EXPECT_FALSE(ev[0].excluded);
  EXPECT_DOUBLE_EQ(ev[0].t_star, 1.5);
  EXPECT_TRUE(ev[1].excluded);
  EXPECT_FALSE(detect_invasion_events(r, FiN{}, 1e-6)[1].excluded);
}
