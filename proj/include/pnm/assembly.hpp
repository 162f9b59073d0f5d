#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "pnm/flux.hpp"
#include "pnm/network.hpp"
#include "pnm/physics.hpp"

namespace pnm {

/// Primary variables at one time level. p_n is derived from p_w and p_c(S_w), never stored.
struct SystemState {
  double time = 0.0;
  std::vector<double> pw;  // wetting pressure per pore [Pa]
  std::vector<double> sn;  // non-wetting saturation per pore
  std::vector<ThroatRegime> throats;

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

/// Unknown numbering. Pores with pinned boundary values carry no unknowns; FI-Theta adds
/// one unknown per throat after all pore unknowns.
class DofMap {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  DofMap(const Network& net, bool with_theta);

  std::size_t size() const { return size_; }
  std::size_t pw(std::size_t pore) const { return pore_base_[pore]; }
  std::size_t sn(std::size_t pore) const { return pore_base_[pore] == npos ? npos : pore_base_[pore] + 1; }
  std::size_t theta(std::size_t throat) const { return with_theta_ ? theta_base_ + throat : npos; }
  bool is_free(std::size_t pore) const { return pore_base_[pore] != npos; }
  bool has_theta() const { return with_theta_; }
  std::size_t theta_base() const { return theta_base_; }

 private:
  std::vector<std::size_t> pore_base_;
  std::size_t theta_base_ = 0;
  std::size_t size_ = 0;
  bool with_theta_ = false;
};

/// Mass-balance residual of one pore, per phase [kg/s].
struct PoreRows {
  double wetting = 0.0;
  double nonwetting = 0.0;
};

/// Pins p_w and S_n of fixed pores in `state` (outlet: S_n = 0; capillary inlet:
/// p_c = inlet entry pressure).
void pin_boundary_values(const Network& net, const FluidPair& fluids, SystemState& state);

/// Adds the boundary contributions to pore rows: flux-inlet sources enter the non-wetting
/// row; rows of pinned pores are cleared because their unknowns are eliminated.
void apply_boundary_conditions(const Network& net, std::span<PoreRows> rows);

/// Fully wetting-saturated initial state at the given wetting pressure. Throats whose
/// capillary pressure difference is already non-negative start invaded.
SystemState initial_state(const Network& net, const FluidPair& fluids, double wetting_pressure);

/// Wetting pressure for initial_state: the first outlet pressure found, else the first
/// pinned inlet pressure, else 1e5 Pa.
double default_initial_pressure(const Network& net);

struct PoreLocal {
  double pw = 0.0;
  double pn = 0.0;
  double pc = 0.0;
  bool clamped = false;
};

struct ThroatEval {
  double delta_pc = 0.0;
  double theta = 0.0;       // theta entering the flux
  double mass_w = 0.0;      // wetting mass flux i -> j [kg/s]
  double mass_n = 0.0;      // non-wetting mass flux i -> j [kg/s]
  double theta_row = 0.0;   // FI-Theta residual [Pa]
};

struct BoundaryExchange {
  double injected_w = 0.0;  // [kg/s], sources and capillary-inlet inflow
  double injected_n = 0.0;
  double outflow_w = 0.0;   // [kg/s], net flux into outlet pores
  double outflow_n = 0.0;
};

struct Evaluation {
  Eigen::VectorXd residual;
  std::vector<double> row_scale;  // sum of |terms| of each mass row, zero for theta rows
  std::vector<double> row_floor;  // row change caused by one ulp of the pore pressures and S_n [kg/s]
  std::vector<PoreLocal> pores;
  std::vector<ThroatEval> throats;
  std::vector<std::size_t> clamped_pores;  // S_w hit the clamp threshold
};

/// Discrete implicit-Euler model for one scheme on one network.
class Assembler {
 public:
  Assembler(const Network& net, const FluidPair& fluids, const SchemeKind& scheme);

  const DofMap& dofs() const { return dofs_; }
  const Network& network() const { return net_; }
  const FluidPair& fluids() const { return fluids_; }
  const SchemeKind& scheme() const { return scheme_; }

  PoreLocal pore_local(std::size_t pore, double pw, double sn) const;
  ThroatEval throat_eval(std::size_t throat, const PoreLocal& a, const PoreLocal& b, double theta_value,
                         const ThroatRegime& regime) const;

  Evaluation evaluate(const SystemState& old, const SystemState& trial, double dt) const;
  Eigen::VectorXd assemble_residual(const SystemState& old, const SystemState& trial, double dt) const;

  /// Analytic Jacobian. At dpc = 0 the one-sided derivative towards invasion is used.
  Eigen::SparseMatrix<double> assemble_jacobian(const SystemState& old, const SystemState& trial, double dt) const;

  /// Forward-difference Jacobian, perturbing one unknown at a time and re-evaluating only
  /// its graph neighbourhood.
  Eigen::SparseMatrix<double> assemble_jacobian_fd(const SystemState& old, const SystemState& trial, double dt) const;

  /// Pore-wise mass rows (before elimination), including boundary sources.
  std::vector<PoreRows> pore_rows(const SystemState& old, const SystemState& trial, double dt) const;

  BoundaryExchange boundary_exchange(const SystemState& trial) const;

  Eigen::VectorXd gather(const SystemState& state) const;
  void scatter(const Eigen::VectorXd& u, SystemState& state) const;

  /// Non-zero pattern allowed for the Jacobian: (row, col) pairs of the graph neighbourhood.
  std::vector<std::pair<std::size_t, std::size_t>> sparsity_pattern() const;

 private:
  double accumulation_w(std::size_t pore, double sn_old, double sn, double dt) const;
  double accumulation_n(std::size_t pore, double sn_old, double sn, double dt) const;
  double dpc_dsn(std::size_t pore, double sn) const;

  Network net_;
  FluidPair fluids_;
  SchemeKind scheme_;
  DofMap dofs_;
  std::vector<PhaseConductances> conductances_;
  std::vector<PoreRows> sources_;
};

}  // namespace pnm
