#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pnm/solver.hpp"

namespace pnm {

struct EventRecord {
  std::size_t k = 0;        // index of the state reached by the invasion step
  double t = 0.0;           // t^k
  std::size_t throat = 0;
  double delta_pc = 0.0;    // at convergence [Pa]
  double theta = 0.0;       // at convergence
  double t_star = 0.0;      // t^k - theta * dt^k
  bool excluded = false;    // FI-Theta theta = 1 with dpc > tol_event; not a prediction error

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// One record per committed regime switch, ordered by step then throat id.
std::vector<EventRecord> detect_invasion_events(const RunRecord& run, const SchemeKind& scheme, double tol_event);

/// RMS of |dpc| over non-excluded events (0 when there are none).
double prediction_error_rms(const std::vector<EventRecord>& events);

/// max |dpc| / p_ce over non-excluded events.
double prediction_error_max(const std::vector<EventRecord>& events, const Network& net);

/// Discrete L2-in-time error of the per-pore wetting saturation against a reference run,
/// interpolated linearly between reference states.
double l2_saturation_error(const RunRecord& run, const RunRecord& reference);

/// Events sharing a step are compared as a set with the matching slice of `ground_truth`.
/// More events than the ground truth holds is a mismatch.
bool invasion_sequence_match(const std::vector<EventRecord>& events, const std::vector<std::size_t>& ground_truth);

/// Greedy order for a tree network: starting from the flux inlets, repeatedly invade the
/// non-invaded throat with the largest radius adjacent to the invaded cluster, up to and
/// including the first throat that reaches an outlet.
std::vector<std::size_t> bifurcating_ground_truth(const Network& net);

/// Quasi-static solution of a homogeneous chain fed at one end with constant non-wetting
/// mass rate: pores fill one after another up to the entry pressure of the next throat.
struct FillingOracle {
  std::vector<std::size_t> chain;       // pores from the inlet to the outlet
  std::vector<std::size_t> throats;     // throats[m] joins chain[m] and chain[m + 1]
  std::vector<double> sw_star;          // per chain position, the saturation at invasion
  std::vector<double> invasion_times;   // invasion_times[m] for throats[m]
  std::vector<double> pore_volume;
  double rate = 0.0;                    // [m^3/s]

  /// Wetting saturation of chain position m at time t.
  double sw_at(std::size_t m, double t) const;
  /// Number of throats invaded by time t.
  std::size_t invaded_by(double t) const;
};

FillingOracle sequential_filling_oracle_1d(const Network& net, const FluidPair& fluids, double mass_rate);

struct ConvergenceFit {
  double slope = 0.0;
  std::size_t levels_used = 0;
  std::vector<std::string> notes;
};

/// Least-squares slope of log E against log dt. Zero-error levels are dropped with a note;
/// at least three usable levels are required.
ConvergenceFit convergence_order(const std::vector<std::pair<double, double>>& dt_error);

struct ErrorSummary {
  double e_sw = 0.0;
  double e_pce = 0.0;
  double e_max = 0.0;
  std::size_t invaded_count = 0;
  std::vector<std::size_t> invasion_sequence;
  std::size_t excluded_events = 0;
};

/// Per-run metrics. `reference` may be null, in which case e_sw stays 0.
ErrorSummary summarize_run(const RunRecord& run, const std::vector<EventRecord>& events, const Network& net,
                           const RunRecord* reference);

/// Time step averaged over the accepted steps of a run.
double mean_time_step(const RunRecord& run);

}  // namespace pnm
