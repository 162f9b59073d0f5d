#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "pnm/config.hpp"
#include "pnm/metrics.hpp"

namespace pnm {

Network build_network(const RunConfig& cfg);

/// Bounds and conservation audit of one run.
struct RunChecks {
  double max_imbalance_w = 0.0;
  double max_imbalance_n = 0.0;
  double sn_min = std::numeric_limits<double>::infinity();
  double sn_max = -std::numeric_limits<double>::infinity();
  double theta_min = std::numeric_limits<double>::infinity();
  double theta_max = -std::numeric_limits<double>::infinity();

  void merge(const RunChecks& other);
};

RunChecks audit_run(const RunRecord& run);

struct RunOutcome {
  RunRecord record;  // partial when the run aborted
  std::vector<EventRecord> events;
  ErrorSummary summary;
  RunChecks checks;
  bool completed = false;
  std::string message;         // abort reason
  SystemState failing_state;   // last Newton iterate of the aborted step
};

/// Runs one configuration in memory. Solver aborts are captured, not thrown.
RunOutcome execute_run(const RunConfig& cfg, const Network& net, const RunRecord* reference = nullptr);

/// One row per accepted step: t, dt, newton_iters, then p_w, S_n, p_c per pore, then theta
/// and invaded per throat. The first row is the initial state with dt = 0.
void write_run_csv(std::ostream& out, const Network& net, const RunConfig& cfg, const RunRecord& run,
                   const std::string& echo);
void write_events_csv(std::ostream& out, const std::vector<EventRecord>& events, const std::string& echo);

struct CaseResult {
  RunOutcome run;
  std::string summary;  // one line
};

/// Writes run.csv, events.csv and config.ini into `out_dir`; on abort also abort_state.csv.
CaseResult run_case(const Config& cfg, const std::filesystem::path& out_dir);

/// Writes network.txt into `out_dir`.
std::filesystem::path write_case_network(const Config& cfg, const std::filesystem::path& out_dir);

struct EnsembleMember {
  std::size_t scheme = 0;  // index into study.schemes
  double dt_max = 0.0;
  std::uint64_t seed = 0;
  bool completed = false;
  bool match = false;
  double e_pce = 0.0;
  std::vector<EventRecord> events;
  std::vector<std::size_t> coordination;  // per event, of the pore that triggered it
  RunChecks checks;
};

struct EnsembleRow {
  std::size_t scheme = 0;
  double dt_max = 0.0;
  std::size_t seeds = 0;
  std::size_t matches = 0;
  std::size_t failures = 0;
  double fraction = 0.0;
  double mean_e_pce_matching = std::numeric_limits<double>::quiet_NaN();  // NaN: no matching seed
  double mean_e_pce_all = std::numeric_limits<double>::quiet_NaN();       // over completed runs
  long newton_total = 0;
};

struct EnsembleResult {
  std::vector<EnsembleRow> rows;
  std::vector<EnsembleMember> members;
  std::string summary;
};

/// Bifurcating case only. `out_dir` empty: nothing is written.
EnsembleResult run_ensemble(const Config& cfg, const std::filesystem::path& out_dir = {});

struct LevelResult {
  std::uint64_t seed = 0;
  std::size_t scheme = 0;
  double dt_target = 0.0;
  double mean_dt = 0.0;
  bool completed = false;
  bool sequence_ok = false;
  ErrorSummary summary;
  long newton_total = 0;
  std::vector<EventRecord> events;
  std::vector<std::size_t> coordination;
  RunChecks checks;
  std::string message;
};

struct SlopeResult {
  std::uint64_t seed = 0;
  std::size_t scheme = 0;
  std::string metric;  // "E_Sw" or "E_max"
  ConvergenceFit fit;
  bool fitted = false;
};

struct ReferenceInfo {
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::size_t events = 0;
  std::vector<EventRecord> event_records;
  RunChecks checks;
};

struct ConvergenceResult {
  std::vector<ReferenceInfo> references;
  std::vector<LevelResult> levels;
  std::vector<SlopeResult> slopes;
  std::string summary;
};

/// One FI-Theta reference per seed, then every scheme at every dt level against it.
/// A reference abort throws RunAborted.
ConvergenceResult run_convergence_study(const Config& cfg, const std::filesystem::path& out_dir = {});

/// Coordination number of the higher-p_c endpoint of each event's throat.
std::vector<std::size_t> event_coordination(const Network& net, const RunRecord& run,
                                            const std::vector<EventRecord>& events, const FluidPair& fluids);

}  // namespace pnm
