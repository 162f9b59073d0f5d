#include "pnm/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "pnm/error.hpp"

namespace pnm {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParameter: return "invalid parameter";
    case ErrorCode::InvalidInput: return "invalid input";
    case ErrorCode::OutOfRange: return "out of range";
    case ErrorCode::Configuration: return "configuration error";
    case ErrorCode::Assembly: return "assembly error";
    case ErrorCode::Solver: return "solver error";
    case ErrorCode::UnsupportedTopology: return "unsupported topology";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown error";
}

double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

bool is_fixed(const BoundaryTag& tag) {
  return std::holds_alternative<PressureInletCapillary>(tag) || std::holds_alternative<PressureOutlet>(tag);
}

double young_laplace_entry_pressure(double interfacial_tension, double throat_radius) {
  if (!(interfacial_tension > 0.0) || !(throat_radius > 0.0))
    throw Error(ErrorCode::InvalidParameter, "entry pressure needs positive tension and radius");
  return 2.0 * interfacial_tension / throat_radius;
}

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidParameter, msg); }

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) invalid(std::string(what) + " must be positive and finite");
}

}  // namespace

Network::Network(std::vector<Pore> pores, std::vector<Throat> throats)
    : pores_(std::move(pores)), throats_(std::move(throats)), adjacency_(pores_.size()) {
  if (pores_.empty()) invalid("network has no pores");
  for (std::size_t i = 0; i < pores_.size(); ++i) {
    const Pore& p = pores_[i];
    if (p.id != i) invalid("pore ids must equal their index");
    require_positive(p.radius, "pore radius");
    require_positive(p.volume, "pore volume");
  }
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t t = 0; t < throats_.size(); ++t) {
    const Throat& th = throats_[t];
    if (th.id != t) invalid("throat ids must equal their index");
    if (th.i == th.j) invalid("throat " + std::to_string(t) + " connects a pore to itself");
    if (th.i >= pores_.size() || th.j >= pores_.size())
      invalid("throat " + std::to_string(t) + " references a missing pore");
    require_positive(th.radius, "throat radius");
    require_positive(th.length, "throat length");
    require_positive(th.entry_pressure, "throat entry pressure");
    if (!pairs.emplace(std::min(th.i, th.j), std::max(th.i, th.j)).second)
      invalid("duplicate throat between pores " + std::to_string(th.i) + " and " + std::to_string(th.j));
    adjacency_[th.i].push_back({th.j, t});
    adjacency_[th.j].push_back({th.i, t});
  }

  // connectivity
  std::vector<bool> seen(pores_.size(), false);
  std::queue<std::size_t> queue;
  queue.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop();
    for (const Neighbor& n : adjacency_[i]) {
      if (!seen[n.pore]) {
        seen[n.pore] = true;
        ++reached;
        queue.push(n.pore);
      }
    }
  }
  if (reached != pores_.size()) invalid("network is not connected");
}

namespace {

Throat make_throat(const std::vector<Pore>& pores, std::size_t i, std::size_t j, double radius,
                   double interfacial_tension) {
  Throat t;
  t.i = i;
  t.j = j;
  t.radius = radius;
  t.length = distance(pores[i].center, pores[j].center) - pores[i].radius - pores[j].radius;
  if (!(t.length > 0.0)) invalid("pore spacing leaves no room for throats");
  t.entry_pressure = young_laplace_entry_pressure(interfacial_tension, radius);
  return t;
}

void number(std::vector<Throat>& throats) {
  for (std::size_t t = 0; t < throats.size(); ++t) throats[t].id = t;
}

class ThroatRadiusDraw {
 public:
  ThroatRadiusDraw(const RadiusSampler& s, std::uint64_t seed) : sampler_(s), rng_(seed) {
    if (s.kind == RadiusDistribution::Uniform) {
      require_positive(s.a, "uniform radius lower bound");
      if (!(s.b > s.a)) invalid("uniform radius upper bound must exceed the lower bound");
    } else {
      require_positive(s.a, "normal radius mean");
      if (!(s.b >= 0.0)) invalid("normal radius standard deviation must be non-negative");
      require_positive(s.clip_min, "radius clip minimum");
      if (!(s.clip_max > s.clip_min)) invalid("radius clip maximum must exceed the minimum");
    }
  }

  double operator()() {
    if (sampler_.kind == RadiusDistribution::Uniform) {
      std::uniform_real_distribution<double> dist(sampler_.a, sampler_.b);
      return dist(rng_);
    }
    if (sampler_.b == 0.0) return std::clamp(sampler_.a, sampler_.clip_min, sampler_.clip_max);
    std::normal_distribution<double> dist(sampler_.a, sampler_.b);
    return std::clamp(dist(rng_), sampler_.clip_min, sampler_.clip_max);
  }

  /// Draws `count` radii; with a non-negative gap every pair is separated by it.
  std::vector<double> draw_distinct(std::size_t count) {
    std::vector<double> out;
    out.reserve(count);
    constexpr int kMaxAttempts = 10000;
    while (out.size() < count) {
      int attempts = 0;
      for (;;) {
        const double r = (*this)();
        if (!(r > 0.0)) invalid("radius sampler produced a non-positive radius");
        const bool tie = sampler_.min_relative_gap >= 0.0 &&
                         std::any_of(out.begin(), out.end(), [&](double q) {
                           return std::abs(q - r) <= sampler_.min_relative_gap * std::max(q, r);
                         });
        if (!tie) {
          out.push_back(r);
          break;
        }
        if (++attempts > kMaxAttempts) invalid("could not draw well-separated throat radii; reduce min_relative_gap");
      }
    }
    return out;
  }

 private:
  RadiusSampler sampler_;
  std::mt19937_64 rng_;
};

}  // namespace

Network build_line_network(const LineNetworkParams& p) {
  if (p.pores < 2) invalid("line network needs at least two pores");
  require_positive(p.pore_radius, "pore radius");
  require_positive(p.throat_radius, "throat radius");
  require_positive(p.interfacial_tension, "interfacial tension");
  if (p.spacing < 0.0) invalid("spacing must be positive");
  if (p.injection_rate < 0.0) invalid("injection rate must be non-negative");
  const double spacing = p.spacing > 0.0 ? p.spacing : 4.0 * p.pore_radius;

  std::vector<Pore> pores(p.pores);
  for (std::size_t i = 0; i < p.pores; ++i) {
    pores[i].id = i;
    pores[i].center = {static_cast<double>(i) * spacing, 0.0, 0.0};
    pores[i].radius = p.pore_radius;
    pores[i].volume = cubic_pore_volume(p.pore_radius);
  }
  pores.front().boundary = FluxInlet{p.injection_rate};
  pores.back().boundary = PressureOutlet{p.outlet_pressure};

  std::vector<Throat> throats;
  for (std::size_t i = 0; i + 1 < p.pores; ++i)
    throats.push_back(make_throat(pores, i, i + 1, p.throat_radius, p.interfacial_tension));
  number(throats);
  return Network(std::move(pores), std::move(throats));
}

Network build_bifurcating_network(const BifurcatingNetworkParams& p) {
  if (p.depth < 1) invalid("bifurcating network needs depth >= 1");
  if (p.segment_throats < 1) invalid("bifurcating network needs at least one throat per branch");
  require_positive(p.pore_radius, "pore radius");
  require_positive(p.interfacial_tension, "interfacial tension");
  const double s = p.spacing > 0.0 ? p.spacing : 4.0 * p.pore_radius;

  std::vector<Pore> pores;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  auto add_pore = [&](Vec3 c) {
    Pore pore;
    pore.id = pores.size();
    pore.center = c;
    pore.radius = p.pore_radius;
    pore.volume = cubic_pore_volume(p.pore_radius);
    pores.push_back(pore);
    return pore.id;
  };
  // Chain of segment_throats throats from `from`; the first step may shift sideways.
  auto add_branch = [&](std::size_t from, double dx) {
    std::size_t prev = from;
    Vec3 c = pores[from].center;
    for (std::size_t k = 0; k < p.segment_throats; ++k) {
      c.y += s;
      if (k == 0) c.x += dx;
      const std::size_t next = add_pore(c);
      edges.emplace_back(prev, next);
      prev = next;
    }
    return prev;
  };

  const std::size_t inlet = add_pore({0.0, 0.0, 0.0});
  std::vector<std::size_t> front{add_branch(inlet, 0.0)};
  for (std::size_t level = 0; level < p.depth; ++level) {
    const double w = s * std::pow(2.0, static_cast<double>(p.depth - level - 1));
    std::vector<std::size_t> next;
    for (std::size_t junction : front) {
      next.push_back(add_branch(junction, -w));
      next.push_back(add_branch(junction, +w));
    }
    front = std::move(next);
  }
  pores[inlet].boundary = FluxInlet{p.injection_rate};
  for (std::size_t leaf : front) pores[leaf].boundary = PressureOutlet{p.outlet_pressure};

  ThroatRadiusDraw draw(p.radius_sampler, p.seed);
  const std::vector<double> radii = draw.draw_distinct(edges.size());
  std::vector<Throat> throats;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (radii[e] >= p.pore_radius) invalid("throat radius must stay below the pore radius");
    throats.push_back(make_throat(pores, edges[e].first, edges[e].second, radii[e], p.interfacial_tension));
  }
  number(throats);
  return Network(std::move(pores), std::move(throats));
}

Network build_lattice_network(const LatticeNetworkParams& p) {
  if (p.rows < 1 || p.cols < 1 || p.rows * p.cols < 2) invalid("lattice needs rows * cols >= 2");
  require_positive(p.pore_radius, "pore radius");
  require_positive(p.inlet_entry_pressure, "inlet entry pressure");
  require_positive(p.interfacial_tension, "interfacial tension");
  const RadiusSampler& rs = p.radius_sampler;
  if (rs.kind == RadiusDistribution::Normal && rs.b < 0.0)
    invalid("normal radius standard deviation must be non-negative");
  if (rs.kind == RadiusDistribution::Normal && !(rs.clip_max < p.pore_radius))
    invalid("radius clip maximum must stay below the pore radius");
  const double s = p.spacing > 0.0 ? p.spacing : 4.0 * p.pore_radius;

  std::vector<Pore> pores;
  for (std::size_t r = 0; r < p.rows; ++r) {
    for (std::size_t c = 0; c < p.cols; ++c) {
      Pore pore;
      pore.id = pores.size();
      pore.center = {static_cast<double>(c) * s, static_cast<double>(r) * s, 0.0};
      pore.radius = p.pore_radius;
      pore.volume = cubic_pore_volume(p.pore_radius);
      if (c + 1 == p.cols) pore.boundary = PressureOutlet{p.outlet_pressure};
      pores.push_back(pore);
    }
  }
  const std::size_t inlet = pores.size();
  {
    Pore pore;
    pore.id = inlet;
    pore.center = {-s, 0.5 * static_cast<double>(p.rows - 1) * s, 0.0};
    pore.radius = p.pore_radius;
    pore.volume = cubic_pore_volume(p.pore_radius);
    pore.boundary = PressureInletCapillary{p.inlet_pressure, p.inlet_entry_pressure};
    pores.push_back(pore);
  }

  auto at = [&](std::size_t r, std::size_t c) { return r * p.cols + c; };
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t r = 0; r < p.rows; ++r)
    for (std::size_t c = 0; c + 1 < p.cols; ++c) edges.emplace_back(at(r, c), at(r, c + 1));
  for (std::size_t r = 0; r + 1 < p.rows; ++r)
    for (std::size_t c = 0; c < p.cols; ++c) edges.emplace_back(at(r, c), at(r + 1, c));

  ThroatRadiusDraw draw(rs, p.seed);
  const std::vector<double> radii = draw.draw_distinct(edges.size());
  std::vector<Throat> throats;
  for (std::size_t e = 0; e < edges.size(); ++e)
    throats.push_back(make_throat(pores, edges[e].first, edges[e].second, radii[e], p.interfacial_tension));

  const double inlet_radius = 2.0 * p.interfacial_tension / p.inlet_entry_pressure;
  for (std::size_t r = 0; r < p.rows; ++r) {
    Throat t = make_throat(pores, inlet, at(r, 0), inlet_radius, p.interfacial_tension);
    t.entry_pressure = p.inlet_entry_pressure;
    throats.push_back(t);
  }
  number(throats);
  return Network(std::move(pores), std::move(throats));
}

}  // namespace pnm
