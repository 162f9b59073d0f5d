#include "pnm/physics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pnm/csv.hpp"
#include "pnm/error.hpp"

namespace pnm {

void FluidPair::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::InvalidParameter, std::string("fluid property ") + name + " must be positive");
  };
  check(rho_w, "rho_w");
  check(rho_n, "rho_n");
  check(mu_w, "mu_w");
  check(mu_n, "mu_n");
  check(gamma, "gamma");
}

CapillaryPressure pc_of_sw_unchecked(double gamma, double pore_radius, double sw) {
  CapillaryPressure out;
  if (sw <= kSwClamp) {
    sw = kSwClamp;
    out.clamped = true;
  }
  out.value = 2.0 * gamma / (pore_radius * (-std::expm1(-kPcSwExponent * sw)));
  return out;
}

CapillaryPressure pc_of_sw(double gamma, double pore_radius, double sw) {
  if (std::isnan(sw) || sw > 1.0)
    throw Error(ErrorCode::InvalidInput, "wetting saturation " + format_double(sw) + " outside (0, 1]");
  return pc_of_sw_unchecked(gamma, pore_radius, sw);
}

double dpc_dsw(double gamma, double pore_radius, double sw) {
  if (sw <= kSwClamp) return 0.0;
  const double e = std::exp(-kPcSwExponent * sw);
  const double d = -std::expm1(-kPcSwExponent * sw);
  return -2.0 * gamma * kPcSwExponent * e / (pore_radius * d * d);
}

double sw_of_pc(double gamma, double pore_radius, double pc) {
  const double pc_min = pc_of_sw_unchecked(gamma, pore_radius, 1.0).value;
  if (!(pc >= pc_min))
    throw Error(ErrorCode::OutOfRange, "capillary pressure " + format_double(pc) +
                                           " below the pore minimum " + format_double(pc_min));
  return -std::log1p(-2.0 * gamma / (pore_radius * pc)) / kPcSwExponent;
}

double single_phase_conductance(double radius, double length, double viscosity) {
  if (!(radius > 0.0) || !(length > 0.0) || !(viscosity > 0.0))
    throw Error(ErrorCode::InvalidParameter, "conductance needs positive radius, length and viscosity");
  const double r2 = radius * radius;
  return std::numbers::pi * r2 * r2 / (8.0 * viscosity * length);
}

PhaseConductances phase_conductances(const Throat& throat, const FluidPair& fluids) {
  PhaseConductances g;
  g.wetting.less = single_phase_conductance(throat.radius, throat.length, fluids.mu_w);
  g.wetting.greater = 0.0;
  g.nonwetting.less = 0.0;
  g.nonwetting.greater = single_phase_conductance(throat.radius, throat.length, fluids.mu_n);
  return g;
}

}  // namespace pnm
