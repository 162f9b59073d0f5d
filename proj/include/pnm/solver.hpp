#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pnm/assembly.hpp"
#include "pnm/error.hpp"

namespace pnm {

struct NewtonConfig {
  int max_iterations = 25;
  double tol_residual_rel = 1e-8;
  double tol_abs_mass = 1e-18;   // [kg/s]
  double tol_abs_theta = 1e-6;   // [Pa]; also the event tolerance
  std::optional<bool> line_search;  // unset: on for FI-N and FI-R, off for FI-Theta
  double max_update_pw = 1e5;    // [Pa]
  double max_update_sn = 0.2;
  double max_update_theta = 1.0;
  double pc_growth_limit = 1.1;  // per-iteration p_c growth cap factor, 0 disables

  void validate() const;
  bool line_search_for(const SchemeKind& scheme) const;
  friend bool operator==(const NewtonConfig&, const NewtonConfig&) = default;
};

struct TimeLoopConfig {
  double t_end = 1.0;
  double dt_target = 0.1;
  double dt_min = 1e-9;
  double retry_factor = 0.5;
  double growth_factor = 2.0;
  double dt_initial = 0.0;  // 0: start at dt_target

  void validate() const;
  friend bool operator==(const TimeLoopConfig&, const TimeLoopConfig&) = default;
};

/// Regime switch committed at the end of a step.
struct StepEvent {
  std::size_t throat = 0;
  double theta = 0.0;
  double delta_pc = 0.0;

  friend bool operator==(const StepEvent&, const StepEvent&) = default;
};

struct StepOutcome {
  bool converged = false;
  int iterations = 0;
  double dt_used = 0.0;
  std::vector<StepEvent> events;
  double mass_imbalance_w = 0.0;  // relative, this step
  double mass_imbalance_n = 0.0;
  std::string diagnostic;

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

struct NewtonResult {
  StepOutcome outcome;
  SystemState state;  // converged state, or the last iterate on failure
};

/// One implicit Euler step from `old` to old.time + dt. Does not commit throat regimes.
NewtonResult newton_solve(const Assembler& assembler, const SystemState& old, double dt, const NewtonConfig& cfg);

/// Converts the in-step throat state of a converged step into committed regimes and returns
/// the switches. Fills in per-step mass imbalance.
std::vector<StepEvent> commit_step(const Assembler& assembler, const SystemState& old, SystemState& converged,
                                   const NewtonConfig& cfg);

struct StepBalance {
  double imbalance_w = 0.0;
  double imbalance_n = 0.0;
};
StepBalance step_mass_balance(const Assembler& assembler, const SystemState& old, const SystemState& next, double dt);

using StepSolver = std::function<NewtonResult(const SystemState& old, double dt)>;

struct AdvanceResult {
  SystemState state;
  StepOutcome outcome;
  int attempts = 0;
  long newton_iterations = 0;  // including failed attempts
};

/// Thrown when the time step underflows dt_min.
class StepAbort : public Error {
 public:
  StepAbort(std::string message, SystemState failing) : Error(ErrorCode::Solver, std::move(message)), failing_(std::move(failing)) {}
  const SystemState& failing_state() const { return failing_; }

 private:
  SystemState failing_;
};

/// Newton with retry on failure (dt *= retry_factor until dt_min), then commit.
/// `solver` replaces newton_solve when given.
AdvanceResult advance_time_step(const Assembler& assembler, const SystemState& state, double dt_try,
                                const NewtonConfig& newton, const TimeLoopConfig& loop, const StepSolver& solver = {});

struct RunRecord {
  std::vector<SystemState> states;  // states[0] is the initial state
  std::vector<StepOutcome> steps;   // steps[k] leads from states[k] to states[k + 1]
  long newton_total = 0;
  int failed_attempts = 0;

  std::size_t step_count() const { return steps.size(); }
};

class RunAborted : public Error {
 public:
  RunAborted(std::string message, RunRecord partial, SystemState failing)
      : Error(ErrorCode::Solver, std::move(message)), partial_(std::move(partial)), failing_(std::move(failing)) {}
  const RunRecord& partial() const { return partial_; }
  const SystemState& failing_state() const { return failing_; }

 private:
  RunRecord partial_;
  SystemState failing_;
};

RunRecord run_simulation(const Assembler& assembler, const SystemState& initial, const NewtonConfig& newton,
                         const TimeLoopConfig& loop);

/// FI-Theta run that rejects any step containing an invasion while dt > tol_t and halves it,
/// so every event is bracketed within tol_t.
RunRecord generate_reference_run(const Assembler& assembler, const SystemState& initial, const NewtonConfig& newton,
                                 const TimeLoopConfig& loop, double tol_t);

}  // namespace pnm
