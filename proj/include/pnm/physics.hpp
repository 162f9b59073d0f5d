#pragma once

#include "pnm/network.hpp"

namespace pnm {

struct FluidPair {
  double rho_w = 1000.0;  // [kg/m^3]
  double rho_n = 1000.0;
  double mu_w = 1e-3;     // [Pa s]
  double mu_n = 1e-3;
  double gamma = 0.0725;  // interfacial tension [N/m]

  void validate() const;
  friend bool operator==(const FluidPair&, const FluidPair&) = default;
};

/// Exponent of the pore-body drainage relation p_c = 2 gamma / (r (1 - exp(-k S_w))).
inline constexpr double kPcSwExponent = 6.83;
/// Saturations at or below this value are clamped before evaluating p_c.
inline constexpr double kSwClamp = 1e-3;

struct CapillaryPressure {
  double value = 0.0;    // [Pa]
  bool clamped = false;  // S_w was at or below kSwClamp
};

/// Pore-body capillary pressure for 0 < S_w <= 1. Throws InvalidInput for S_w > 1 or NaN.
CapillaryPressure pc_of_sw(double gamma, double pore_radius, double sw);

/// Unchecked evaluation used inside Newton iterations, where S_w may transiently leave
/// [0, 1]; the clamp is applied below kSwClamp and the formula is continued above 1.
CapillaryPressure pc_of_sw_unchecked(double gamma, double pore_radius, double sw);

/// d p_c / d S_w (same clamping as pc_of_sw_unchecked; zero in the clamped range).
double dpc_dsw(double gamma, double pore_radius, double sw);

/// Analytic inverse of pc_of_sw. Throws OutOfRange below pc_of_sw(gamma, r, 1).
double sw_of_pc(double gamma, double pore_radius, double pc);

/// Hagen-Poiseuille conductance of a circular tube [m^3/(Pa s)].
double single_phase_conductance(double radius, double length, double viscosity);

/// Conductivities before (less) and after (greater) invasion of a throat, one phase.
struct ConductancePair {
  double less = 0.0;
  double greater = 0.0;
};

struct PhaseConductances {
  ConductancePair wetting;
  ConductancePair nonwetting;
};

/// Circular throats: the wetting phase is fully displaced on invasion and the non-wetting
/// phase is blocked before it.
PhaseConductances phase_conductances(const Throat& throat, const FluidPair& fluids);

/// max(p_c,i, p_c,j) - p_ce. Negative before invasion.
inline double delta_pc(double pc_i, double pc_j, double entry_pressure) {
  return (pc_i > pc_j ? pc_i : pc_j) - entry_pressure;
}

}  // namespace pnm
