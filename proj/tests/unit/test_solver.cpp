#include <gtest/gtest.h>

#include <cmath>

#include "pnm/error.hpp"
#include "pnm/solver.hpp"

using namespace pnm;

namespace {

struct LineSetup {
  Network net = build_line_network(LineNetworkParams{});
  FluidPair fluids;
  SystemState initial = initial_state(net, fluids, 1e5);
};

}  // namespace

TEST(Newton, StationaryStateConvergesInOneIteration) {
  LineSetup s;
  LineNetworkParams p;
  p.injection_rate = 0.0;
  const Network net = build_line_network(p);
  const Assembler a(net, s.fluids, FiTheta{});
  const SystemState init = initial_state(net, s.fluids, 1e5);
  const NewtonResult r = newton_solve(a, init, 1.0, NewtonConfig{});
  EXPECT_TRUE(r.outcome.converged);
  EXPECT_EQ(r.outcome.iterations, 1);
}

TEST(Newton, InjectionStepConservesMass) {
  LineSetup s;
  for (const SchemeKind& scheme : {SchemeKind{FiN{}}, SchemeKind{FiR{}}, SchemeKind{FiTheta{}}}) {
    const Assembler a(s.net, s.fluids, scheme);
    const NewtonResult r = newton_solve(a, s.initial, 10.0, NewtonConfig{});
    ASSERT_TRUE(r.outcome.converged) << scheme_name(scheme);
    const StepBalance b = step_mass_balance(a, s.initial, r.state, 10.0);
    EXPECT_LE(b.imbalance_n, 1e-8);
    EXPECT_LE(b.imbalance_w, 1e-8);
    // 5e-9 kg of non-wetting fluid in pore 0.
    const double injected = r.state.sn[0] * s.net.pore(0).volume * s.fluids.rho_n;
    EXPECT_NEAR(injected, 5e-9, 1e-15);
  }
}

TEST(TimeLoop, RetriesThenAborts) {
  LineSetup s;
  const Assembler a(s.net, s.fluids, FiTheta{});
  TimeLoopConfig loop;
  loop.dt_target = 1.0;
  loop.dt_min = 0.2;
  int calls = 0;
  const StepSolver never = [&](const SystemState& old, double) {
    ++calls;
    NewtonResult r;
    r.state = old;
    r.outcome.diagnostic = "forced";
    return r;
  };
  EXPECT_THROW(advance_time_step(a, s.initial, 1.0, NewtonConfig{}, loop, never), StepAbort);
  // 1, 0.5, 0.25 tried; 0.125 < dt_min.
  EXPECT_EQ(calls, 3);
}

TEST(TimeLoop, RetryUsesSmallerStep) {
  LineSetup s;
  const Assembler a(s.net, s.fluids, FiTheta{});
  TimeLoopConfig loop;
  std::vector<double> tried;
  const StepSolver picky = [&](const SystemState& old, double dt) {
    tried.push_back(dt);
    if (dt > 0.3) {
      NewtonResult r;
      r.state = old;
      return r;
    }
    return newton_solve(a, old, dt, NewtonConfig{});
  };
  const AdvanceResult r = advance_time_step(a, s.initial, 1.0, NewtonConfig{}, loop, picky);
  EXPECT_EQ(tried, (std::vector<double>{1.0, 0.5, 0.25}));
  EXPECT_DOUBLE_EQ(r.outcome.dt_used, 0.25);
  EXPECT_EQ(r.attempts, 3);
}

TEST(TimeLoop, EndsExactlyAtEndTime) {
  LineSetup s;
  const Assembler a(s.net, s.fluids, FiTheta{});
  TimeLoopConfig loop;
  loop.t_end = 95.0;
  loop.dt_target = 10.0;
  const RunRecord run = run_simulation(a, s.initial, NewtonConfig{}, loop);
  EXPECT_EQ(run.states.back().time, 95.0);
  EXPECT_EQ(run.step_count(), 10u);
  EXPECT_EQ(run.states.size(), run.steps.size() + 1);
}

TEST(TimeLoop, FirstInvasionCommittedOnce) {
  LineSetup s;
  const Assembler a(s.net, s.fluids, FiTheta{});
  TimeLoopConfig loop;
  loop.t_end = 200.0;
  loop.dt_target = 10.0;
  const RunRecord run = run_simulation(a, s.initial, NewtonConfig{}, loop);
  std::size_t events = 0;
  for (const StepOutcome& st : run.steps) {
    for (const StepEvent& e : st.events) {
      ++events;
      EXPECT_EQ(e.throat, 0u);
      EXPECT_GT(e.theta, 0.0);
      EXPECT_LT(e.theta, 1.0);
      EXPECT_LE(std::abs(e.delta_pc), 1e-6);
    }
  }
  EXPECT_EQ(events, 1u);
  EXPECT_TRUE(run.states.back().throats[0].invaded);
}

TEST(ReferenceRun, BracketsEventsWithinTolerance) {
  LineSetup s;
  const Assembler a(s.net, s.fluids, FiTheta{});
  TimeLoopConfig loop;
  loop.t_end = 130.0;
  loop.dt_target = 10.0;
  const RunRecord run = generate_reference_run(a, s.initial, NewtonConfig{}, loop, 1e-3);
  bool found = false;
  for (const StepOutcome& st : run.steps) {
    if (!st.events.empty()) {
      found = true;
      EXPECT_LE(st.dt_used, 1e-3);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Config, Validation) {
  NewtonConfig n;
  n.max_iterations = 0;
  EXPECT_THROW(n.validate(), Error);
  TimeLoopConfig t;
  t.retry_factor = 1.0;
  EXPECT_THROW(t.validate(), Error);
  EXPECT_TRUE(NewtonConfig{}.line_search_for(FiN{}));
  EXPECT_FALSE(NewtonConfig{}.line_search_for(FiTheta{}));
}
