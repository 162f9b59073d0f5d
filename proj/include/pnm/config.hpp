#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pnm/flux.hpp"
#include "pnm/network.hpp"
#include "pnm/physics.hpp"
#include "pnm/solver.hpp"

namespace pnm {

// The interfacial tension of the case builders always comes from the fluids section, so
// the per-case structs below carry geometry and boundary data only.
struct LineCase {
  std::size_t pores = 10;
  double pore_radius = 200e-6;
  double throat_radius = 100e-6;
  double spacing = 0.0;
  double injection_rate = 5e-10;
  double outlet_pressure = 1e5;

  friend bool operator==(const LineCase&, const LineCase&) = default;
};

struct BifurcatingCase {
  std::size_t depth = 2;
  std::size_t segment_throats = 2;
  double pore_radius = 200e-6;
  double spacing = 0.0;
  double radius_min = 60e-6;
  double radius_max = 140e-6;
  double injection_rate = 5e-10;
  double outlet_pressure = 1e5;

  friend bool operator==(const BifurcatingCase&, const BifurcatingCase&) = default;
};

struct LatticeCase {
  std::size_t rows = 5;
  std::size_t cols = 10;
  double pore_radius = 3e-3;
  double spacing = 0.0;
  double radius_mean = 1.2e-3;
  double radius_std = 0.3e-3;
  double radius_clip_min = 0.3e-3;
  double radius_clip_max = 2.7e-3;
  double inlet_entry_pressure = 150.0;
  double inlet_pressure = 1e5;
  double outlet_pressure = 1e5;

  friend bool operator==(const LatticeCase&, const LatticeCase&) = default;
};

using CaseParams = std::variant<LineCase, BifurcatingCase, LatticeCase>;

std::string case_name(const CaseParams& c);

struct RunConfig {
  CaseParams geometry = LineCase{};
  std::uint64_t seed = 1;  // ignored by the line case
  FluidPair fluids;
  SchemeKind scheme = FiTheta{};
  NewtonConfig newton;
  TimeLoopConfig timeloop;
  std::string output = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct ReferenceConfig {
  double dt_target = 0.0;  // 0: timeloop.dt_target / 100
  double tol_t = 1e-6;     // [s]

  friend bool operator==(const ReferenceConfig&, const ReferenceConfig&) = default;
};

/// Ensembles and convergence sweeps. For ensembles the dt levels are maximum step sizes.
struct StudyConfig {
  std::vector<SchemeKind> schemes;
  std::vector<double> dt_levels;  // strictly decreasing
  std::uint64_t seed_first = 1;
  std::size_t seed_count = 1;
  ReferenceConfig reference;

  friend bool operator==(const StudyConfig&, const StudyConfig&) = default;
};

struct Config {
  RunConfig run;
  std::optional<StudyConfig> study;

  friend bool operator==(const Config&, const Config&) = default;
};

/// INI text with sections [case], [fluids], [scheme], [newton], [timeloop], [output] and
/// optionally [study] and [reference]. Every error names the offending key path.
Config parse_config_text(const std::string& text);
Config parse_config_file(const std::filesystem::path& path);

/// Complete INI text with every default written out; parsing it gives back `cfg`.
std::string echo_config(const Config& cfg);

void validate(const Config& cfg);

}  // namespace pnm
