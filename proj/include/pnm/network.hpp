#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pnm {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

double distance(const Vec3& a, const Vec3& b);

// Boundary tags. Exactly one per pore.
struct Interior {
  friend bool operator==(const Interior&, const Interior&) = default;
};
// Prescribed non-wetting mass injection [kg/s].
struct FluxInlet {
  double mass_rate = 0.0;
  friend bool operator==(const FluxInlet&, const FluxInlet&) = default;
};
// Wetting pressure fixed and capillary pressure pinned to the inlet entry pressure,
// i.e. p_n = p_w + entry_pressure.
struct PressureInletCapillary {
  double wetting_pressure = 0.0;
  double entry_pressure = 0.0;
  friend bool operator==(const PressureInletCapillary&, const PressureInletCapillary&) = default;
};
// Wetting pressure fixed; non-wetting phase leaves freely (pore stays wetting-saturated).
struct PressureOutlet {
  double wetting_pressure = 0.0;
  friend bool operator==(const PressureOutlet&, const PressureOutlet&) = default;
};

using BoundaryTag = std::variant<Interior, FluxInlet, PressureInletCapillary, PressureOutlet>;

/// True for tags whose pore carries no unknowns (both primary variables pinned).
bool is_fixed(const BoundaryTag& tag);

struct Pore {
  std::size_t id = 0;
  Vec3 center;
  double radius = 0.0;  // inscribed radius [m]
  double volume = 0.0;  // [m^3]
  BoundaryTag boundary = Interior{};

  friend bool operator==(const Pore&, const Pore&) = default;
};

/// Circular cross-section throat between pores i and j.
struct Throat {
  std::size_t id = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  double radius = 0.0;          // [m]
  double length = 0.0;          // [m]
  double entry_pressure = 0.0;  // [Pa]

  std::size_t other(std::size_t pore) const { return pore == i ? j : i; }

  friend bool operator==(const Throat&, const Throat&) = default;
};

struct Neighbor {
  std::size_t pore = 0;
  std::size_t throat = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Immutable pore-network graph. Construction validates geometry and connectivity.
class Network {
 public:
  Network(std::vector<Pore> pores, std::vector<Throat> throats);

  std::span<const Pore> pores() const { return pores_; }
  std::span<const Throat> throats() const { return throats_; }
  const Pore& pore(std::size_t i) const { return pores_.at(i); }
  const Throat& throat(std::size_t t) const { return throats_.at(t); }
  std::span<const Neighbor> neighbors(std::size_t i) const { return adjacency_.at(i); }

  std::size_t pore_count() const { return pores_.size(); }
  std::size_t throat_count() const { return throats_.size(); }
  std::size_t coordination(std::size_t i) const { return adjacency_.at(i).size(); }

  friend bool operator==(const Network& a, const Network& b) {
    return a.pores_ == b.pores_ && a.throats_ == b.throats_;
  }

 private:
  std::vector<Pore> pores_;
  std::vector<Throat> throats_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

/// Volume of a cubic pore body with the given inscribed radius.
inline double cubic_pore_volume(double inscribed_radius) {
  const double edge = 2.0 * inscribed_radius;
  return edge * edge * edge;
}

/// Young-Laplace entry pressure for a circular throat with zero contact angle.
double young_laplace_entry_pressure(double interfacial_tension, double throat_radius);

struct LineNetworkParams {
  std::size_t pores = 10;
  double pore_radius = 200e-6;
  double throat_radius = 100e-6;
  double spacing = 0.0;  // center distance; 0 selects 4 * pore_radius
  double interfacial_tension = 0.0725;
  double injection_rate = 5e-10;  // non-wetting [kg/s] at pore 0
  double outlet_pressure = 1e5;
};

Network build_line_network(const LineNetworkParams& params);

enum class RadiusDistribution { Uniform, Normal };

/// Throat radius sampler. Uniform uses [a, b]; Normal uses mean a, standard deviation b,
/// clipped to [clip_min, clip_max]. All values in metres.
struct RadiusSampler {
  RadiusDistribution kind = RadiusDistribution::Uniform;
  double a = 0.0;
  double b = 0.0;
  double clip_min = 0.0;
  double clip_max = 0.0;
  // Two radii closer than this fraction of the larger one count as a tie and are resampled.
  double min_relative_gap = 1e-3;
};

struct BifurcatingNetworkParams {
  std::size_t depth = 2;             // number of binary splits; 2^depth outlet pores
  std::size_t segment_throats = 2;   // throats along each branch of the tree
  double pore_radius = 200e-6;
  double spacing = 0.0;              // 0 selects 4 * pore_radius
  RadiusSampler radius_sampler{RadiusDistribution::Uniform, 60e-6, 140e-6, 0.0, 0.0, 5e-3};
  std::uint64_t seed = 1;
  double interfacial_tension = 0.0725;
  double injection_rate = 5e-10;
  double outlet_pressure = 1e5;
};

Network build_bifurcating_network(const BifurcatingNetworkParams& params);

struct LatticeNetworkParams {
  std::size_t rows = 5;
  std::size_t cols = 10;
  double pore_radius = 3e-3;
  double spacing = 0.0;  // 0 selects 4 * pore_radius
  RadiusSampler radius_sampler{RadiusDistribution::Normal, 1.2e-3, 0.3e-3, 0.3e-3, 2.7e-3, 0.0};
  std::uint64_t seed = 1;
  double interfacial_tension = 0.0725;
  double inlet_entry_pressure = 150.0;
  double inlet_pressure = 1e5;
  double outlet_pressure = 1e5;
};

/// Rectangular lattice with 4-neighbour connectivity plus one inlet pore attached to
/// column 0. The last column holds the outlet pores.
Network build_lattice_network(const LatticeNetworkParams& params);

}  // namespace pnm
