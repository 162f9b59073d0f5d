#include "pnm/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pnm/error.hpp"

namespace pnm {

DofMap::DofMap(const Network& net, bool with_theta) : pore_base_(net.pore_count(), npos), with_theta_(with_theta) {
  std::size_t next = 0;
  for (const Pore& p : net.pores()) {
    if (!is_fixed(p.boundary)) {
      pore_base_[p.id] = next;
      next += 2;
    }
  }
  theta_base_ = next;
  size_ = next + (with_theta ? net.throat_count() : 0);
}

void pin_boundary_values(const Network& net, const FluidPair& fluids, SystemState& state) {
  for (const Pore& p : net.pores()) {
    if (const auto* out = std::get_if<PressureOutlet>(&p.boundary)) {
      state.pw[p.id] = out->wetting_pressure;
      state.sn[p.id] = 0.0;
    } else if (const auto* in = std::get_if<PressureInletCapillary>(&p.boundary)) {
      state.pw[p.id] = in->wetting_pressure;
      state.sn[p.id] = 1.0 - sw_of_pc(fluids.gamma, p.radius, in->entry_pressure);
    }
  }
}

void apply_boundary_conditions(const Network& net, std::span<PoreRows> rows) {
  if (rows.size() != net.pore_count()) {
    throw Error(ErrorCode::InvalidInput, "apply_boundary_conditions: row count does not match pore count");
  }
  for (const Pore& p : net.pores()) {
    if (const auto* in = std::get_if<FluxInlet>(&p.boundary)) {
      rows[p.id].nonwetting -= in->mass_rate;
    } else if (is_fixed(p.boundary)) {
      rows[p.id] = PoreRows{};
    }
  }
}

double default_initial_pressure(const Network& net) {
  for (const Pore& p : net.pores()) {
    if (const auto* out = std::get_if<PressureOutlet>(&p.boundary)) return out->wetting_pressure;
  }
  for (const Pore& p : net.pores()) {
    if (const auto* in = std::get_if<PressureInletCapillary>(&p.boundary)) return in->wetting_pressure;
  }
  return 1e5;
}

namespace {

double pore_pc(const Pore& p, const FluidPair& fluids, double sn, bool* clamped) {
  if (const auto* in = std::get_if<PressureInletCapillary>(&p.boundary)) {
    *clamped = false;
    return in->entry_pressure;
  }
  const CapillaryPressure pc = pc_of_sw_unchecked(fluids.gamma, p.radius, 1.0 - sn);
  *clamped = pc.clamped;
  return pc.value;
}

double ulp_of(double a, double b) {
  const double m = std::max(std::abs(a), std::abs(b));
  return std::nextafter(m, std::numeric_limits<double>::infinity()) - m;
}

}  // namespace

SystemState initial_state(const Network& net, const FluidPair& fluids, double wetting_pressure) {
  SystemState s;
  s.pw.assign(net.pore_count(), wetting_pressure);
  s.sn.assign(net.pore_count(), 0.0);
  s.throats.assign(net.throat_count(), ThroatRegime{});
  pin_boundary_values(net, fluids, s);
  for (const Throat& t : net.throats()) {
    bool c = false;
    const double pci = pore_pc(net.pore(t.i), fluids, s.sn[t.i], &c);
    const double pcj = pore_pc(net.pore(t.j), fluids, s.sn[t.j], &c);
    if (delta_pc(pci, pcj, t.entry_pressure) >= 0.0) s.throats[t.id] = ThroatRegime{true, 1.0};
  }
  return s;
}

Assembler::Assembler(const Network& net, const FluidPair& fluids, const SchemeKind& scheme)
    : net_(net), fluids_(fluids), scheme_(scheme), dofs_(net, is_fi_theta(scheme)) {
  fluids_.validate();
  validate(scheme_);
  conductances_.reserve(net_.throat_count());
  for (const Throat& t : net_.throats()) conductances_.push_back(phase_conductances(t, fluids_));
  sources_.assign(net_.pore_count(), PoreRows{});
  apply_boundary_conditions(net_, sources_);
  if (dofs_.size() == 0) throw Error(ErrorCode::Configuration, "network has no free pores");
}

PoreLocal Assembler::pore_local(std::size_t pore, double pw, double sn) const {
  PoreLocal out;
  out.pw = pw;
  out.pc = pore_pc(net_.pore(pore), fluids_, sn, &out.clamped);
  out.pn = pw + out.pc;
  return out;
}

ThroatEval Assembler::throat_eval(std::size_t throat, const PoreLocal& a, const PoreLocal& b, double theta_value,
                                  const ThroatRegime& regime) const {
  const Throat& t = net_.throat(throat);
  const PhaseConductances& g = conductances_[throat];
  ThroatEval e;
  e.delta_pc = delta_pc(a.pc, b.pc, t.entry_pressure);
  e.theta = theta_for_scheme(scheme_, e.delta_pc, theta_value, regime, t.entry_pressure);
  const double gw = effective_conductance(g.wetting.less, g.wetting.greater, e.theta);
  const double gn = effective_conductance(g.nonwetting.less, g.nonwetting.greater, e.theta);
  e.mass_w = fluids_.rho_w * generalized_flux(gw, a.pw, b.pw);
  e.mass_n = fluids_.rho_n * generalized_flux(gn, a.pn, b.pn);
  if (is_fi_theta(scheme_)) {
    e.theta_row = regime.invaded ? theta_value - 1.0 : theta_residual(e.delta_pc, theta_value);
  }
  return e;
}

double Assembler::accumulation_w(std::size_t pore, double sn_old, double sn, double dt) const {
  return -net_.pore(pore).volume * fluids_.rho_w * (sn - sn_old) / dt;
}

double Assembler::accumulation_n(std::size_t pore, double sn_old, double sn, double dt) const {
  return net_.pore(pore).volume * fluids_.rho_n * (sn - sn_old) / dt;
}

Evaluation Assembler::evaluate(const SystemState& old, const SystemState& trial, double dt) const {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidParameter, "time step must be positive");
  const std::size_t np = net_.pore_count();
  Evaluation ev;
  ev.residual = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs_.size()));
  ev.row_scale.assign(dofs_.size(), 0.0);
  ev.row_floor.assign(dofs_.size(), 0.0);
  ev.pores.resize(np);
  for (std::size_t i = 0; i < np; ++i) {
    ev.pores[i] = pore_local(i, trial.pw[i], trial.sn[i]);
    if (ev.pores[i].clamped && dofs_.is_free(i)) ev.clamped_pores.push_back(i);
  }
  for (std::size_t i = 0; i < np; ++i) {
    if (!dofs_.is_free(i)) continue;
    const double aw = accumulation_w(i, old.sn[i], trial.sn[i], dt);
    const double an = accumulation_n(i, old.sn[i], trial.sn[i], dt);
    const auto rw = static_cast<Eigen::Index>(dofs_.pw(i));
    const auto rn = static_cast<Eigen::Index>(dofs_.sn(i));
    ev.residual[rw] += aw + sources_[i].wetting;
    ev.residual[rn] += an + sources_[i].nonwetting;
    ev.row_scale[dofs_.pw(i)] += std::abs(aw) + std::abs(sources_[i].wetting);
    ev.row_scale[dofs_.sn(i)] += std::abs(an) + std::abs(sources_[i].nonwetting);
    // One ulp of S_n in the storage term; dominates at tiny dt.
    const double storage = net_.pore(i).volume * ulp_of(old.sn[i], trial.sn[i]) / dt;
    ev.row_floor[dofs_.pw(i)] += fluids_.rho_w * storage;
    ev.row_floor[dofs_.sn(i)] += fluids_.rho_n * storage;
  }
  ev.throats.resize(net_.throat_count());
  for (const Throat& t : net_.throats()) {
    const ThroatEval e = throat_eval(t.id, ev.pores[t.i], ev.pores[t.j], trial.throats[t.id].theta, trial.throats[t.id]);
    ev.throats[t.id] = e;
    const PhaseConductances& g = conductances_[t.id];
    const PoreLocal& a = ev.pores[t.i];
    const PoreLocal& b = ev.pores[t.j];
    const double ulp_w = ulp_of(a.pw, b.pw);
    const double ulp_n = ulp_of(a.pn, b.pn);
    const double floor_w = fluids_.rho_w * effective_conductance(g.wetting.less, g.wetting.greater, e.theta) * ulp_w;
    const double floor_n = fluids_.rho_n * effective_conductance(g.nonwetting.less, g.nonwetting.greater, e.theta) * ulp_n;
    for (const auto& [pore, sign] : {std::pair{t.i, 1.0}, std::pair{t.j, -1.0}}) {
      if (!dofs_.is_free(pore)) continue;
      ev.residual[static_cast<Eigen::Index>(dofs_.pw(pore))] += sign * e.mass_w;
      ev.residual[static_cast<Eigen::Index>(dofs_.sn(pore))] += sign * e.mass_n;
      ev.row_scale[dofs_.pw(pore)] += std::abs(e.mass_w);
      ev.row_scale[dofs_.sn(pore)] += std::abs(e.mass_n);
      ev.row_floor[dofs_.pw(pore)] += floor_w;
      ev.row_floor[dofs_.sn(pore)] += floor_n;
    }
    if (dofs_.has_theta()) ev.residual[static_cast<Eigen::Index>(dofs_.theta(t.id))] = e.theta_row;
  }
  return ev;
}

Eigen::VectorXd Assembler::assemble_residual(const SystemState& old, const SystemState& trial, double dt) const {
  return evaluate(old, trial, dt).residual;
}

std::vector<PoreRows> Assembler::pore_rows(const SystemState& old, const SystemState& trial, double dt) const {
  const Evaluation ev = evaluate(old, trial, dt);
  std::vector<PoreRows> rows(net_.pore_count());
  for (std::size_t i = 0; i < net_.pore_count(); ++i) {
    if (!dofs_.is_free(i)) continue;
    rows[i].wetting = ev.residual[static_cast<Eigen::Index>(dofs_.pw(i))];
    rows[i].nonwetting = ev.residual[static_cast<Eigen::Index>(dofs_.sn(i))];
  }
  return rows;
}

namespace {

double fd_step(double value, double floor) { return std::max(1e-8 * std::abs(value), floor); }

constexpr double kPressureStepFloor = 1e-6;  // [Pa]
constexpr double kFractionStepFloor = 1e-9;

using Triplets = std::vector<Eigen::Triplet<double>>;

void push(Triplets& out, std::size_t row, std::size_t col, double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::Assembly, "non-finite Jacobian entry at row " + std::to_string(row) + ", column " +
                                         std::to_string(col));
  }
  if (value != 0.0) out.emplace_back(static_cast<int>(row), static_cast<int>(col), value);
}

}  // namespace

Eigen::SparseMatrix<double> Assembler::assemble_jacobian_fd(const SystemState& old, const SystemState& trial,
                                                            double dt) const {
  const Evaluation base = evaluate(old, trial, dt);
  Triplets trips;
  trips.reserve(dofs_.size() * 12);

  auto throat_columns = [&](std::size_t col, std::size_t pore, const PoreLocal& moved, double inv_eps) {
    for (const Neighbor& nb : net_.neighbors(pore)) {
      const Throat& t = net_.throat(nb.throat);
      const ThroatRegime& reg = trial.throats[t.id];
      const PoreLocal& a = t.i == pore ? moved : base.pores[t.i];
      const PoreLocal& b = t.j == pore ? moved : base.pores[t.j];
      const ThroatEval e = throat_eval(t.id, a, b, reg.theta, reg);
      const ThroatEval& e0 = base.throats[t.id];
      const double dw = (e.mass_w - e0.mass_w) * inv_eps;
      const double dn = (e.mass_n - e0.mass_n) * inv_eps;
      for (const auto& [p, sign] : {std::pair{t.i, 1.0}, std::pair{t.j, -1.0}}) {
        if (!dofs_.is_free(p)) continue;
        push(trips, dofs_.pw(p), col, sign * dw);
        push(trips, dofs_.sn(p), col, sign * dn);
      }
      if (dofs_.has_theta()) push(trips, dofs_.theta(t.id), col, (e.theta_row - e0.theta_row) * inv_eps);
    }
  };

  for (std::size_t i = 0; i < net_.pore_count(); ++i) {
    if (!dofs_.is_free(i)) continue;
    {
      const double eps = fd_step(trial.pw[i], kPressureStepFloor);
      const PoreLocal moved = pore_local(i, trial.pw[i] + eps, trial.sn[i]);
      throat_columns(dofs_.pw(i), i, moved, 1.0 / eps);
    }
    {
      const double eps = fd_step(trial.sn[i], kFractionStepFloor);
      const double s = trial.sn[i] + eps;
      const PoreLocal moved = pore_local(i, trial.pw[i], s);
      const std::size_t col = dofs_.sn(i);
      push(trips, dofs_.pw(i), col, (accumulation_w(i, old.sn[i], s, dt) - accumulation_w(i, old.sn[i], trial.sn[i], dt)) / eps);
      push(trips, dofs_.sn(i), col, (accumulation_n(i, old.sn[i], s, dt) - accumulation_n(i, old.sn[i], trial.sn[i], dt)) / eps);
      throat_columns(col, i, moved, 1.0 / eps);
    }
  }

  if (dofs_.has_theta()) {
    for (const Throat& t : net_.throats()) {
      const ThroatRegime& reg = trial.throats[t.id];
      const double eps = fd_step(reg.theta, kFractionStepFloor);
      const ThroatEval e = throat_eval(t.id, base.pores[t.i], base.pores[t.j], reg.theta + eps, reg);
      const ThroatEval& e0 = base.throats[t.id];
      const std::size_t col = dofs_.theta(t.id);
      for (const auto& [p, sign] : {std::pair{t.i, 1.0}, std::pair{t.j, -1.0}}) {
        if (!dofs_.is_free(p)) continue;
        push(trips, dofs_.pw(p), col, sign * (e.mass_w - e0.mass_w) / eps);
        push(trips, dofs_.sn(p), col, sign * (e.mass_n - e0.mass_n) / eps);
      }
      // Keep the diagonal structurally present even where the residual is flat in theta.
      trips.emplace_back(static_cast<int>(col), static_cast<int>(col), (e.theta_row - e0.theta_row) / eps);
    }
  }

  const auto n = static_cast<Eigen::Index>(dofs_.size());
  Eigen::SparseMatrix<double> jac(n, n);
  jac.setFromTriplets(trips.begin(), trips.end());
  jac.makeCompressed();
  return jac;
}

double Assembler::dpc_dsn(std::size_t pore, double sn) const {
  const Pore& p = net_.pore(pore);
  if (!dofs_.is_free(pore)) return 0.0;
  return -dpc_dsw(fluids_.gamma, p.radius, 1.0 - sn);
}

Eigen::SparseMatrix<double> Assembler::assemble_jacobian(const SystemState& old, const SystemState& trial,
                                                         double dt) const {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidParameter, "time step must be positive");
  (void)old;
  Triplets trips;
  trips.reserve(dofs_.size() * 12);

  for (std::size_t i = 0; i < net_.pore_count(); ++i) {
    if (!dofs_.is_free(i)) continue;
    const double v = net_.pore(i).volume;
    push(trips, dofs_.pw(i), dofs_.sn(i), -v * fluids_.rho_w / dt);
    push(trips, dofs_.sn(i), dofs_.sn(i), v * fluids_.rho_n / dt);
  }

  for (const Throat& t : net_.throats()) {
    const ThroatRegime& reg = trial.throats[t.id];
    const PoreLocal a = pore_local(t.i, trial.pw[t.i], trial.sn[t.i]);
    const PoreLocal b = pore_local(t.j, trial.pw[t.j], trial.sn[t.j]);
    const PhaseConductances& g = conductances_[t.id];
    const ThroatEval e = throat_eval(t.id, a, b, reg.theta, reg);
    const double dgw = g.wetting.greater - g.wetting.less;
    const double dgn = g.nonwetting.greater - g.nonwetting.less;
    const double gw = effective_conductance(g.wetting.less, g.wetting.greater, e.theta);
    const double gn = effective_conductance(g.nonwetting.less, g.nonwetting.greater, e.theta);
    const double dpw = a.pw - b.pw;
    const double dpn = a.pn - b.pn;
    const std::size_t max_pore = a.pc >= b.pc ? t.i : t.j;

    double dtheta_ddelta = 0.0;
    if (const auto* r = std::get_if<FiR>(&scheme_); r && !reg.invaded) {
      dtheta_ddelta = h_delta_derivative(e.delta_pc, r->delta * t.entry_pressure);
    }
    const bool theta_free = dofs_.has_theta() && !reg.invaded;
    const double drow_ddelta = theta_free ? (e.delta_pc >= 0.0 ? 1.0 - reg.theta : -reg.theta) : 0.0;

    for (const auto& [p, sp] : {std::pair{t.i, 1.0}, std::pair{t.j, -1.0}}) {
      if (!dofs_.is_free(p)) continue;
      const double dpc = dpc_dsn(p, trial.sn[p]);
      const double ddelta = p == max_pore ? dpc : 0.0;
      const double dmw_dpw = fluids_.rho_w * gw * sp;
      const double dmn_dpw = fluids_.rho_n * gn * sp;
      const double dmw_dsn = fluids_.rho_w * dgw * dtheta_ddelta * ddelta * dpw;
      const double dmn_dsn = fluids_.rho_n * (gn * sp * dpc + dgn * dtheta_ddelta * ddelta * dpn);
      for (const auto& [q, sq] : {std::pair{t.i, 1.0}, std::pair{t.j, -1.0}}) {
        if (!dofs_.is_free(q)) continue;
        push(trips, dofs_.pw(q), dofs_.pw(p), sq * dmw_dpw);
        push(trips, dofs_.sn(q), dofs_.pw(p), sq * dmn_dpw);
        push(trips, dofs_.pw(q), dofs_.sn(p), sq * dmw_dsn);
        push(trips, dofs_.sn(q), dofs_.sn(p), sq * dmn_dsn);
      }
      if (dofs_.has_theta()) push(trips, dofs_.theta(t.id), dofs_.sn(p), drow_ddelta * ddelta);
    }

    if (dofs_.has_theta()) {
      const std::size_t col = dofs_.theta(t.id);
      if (!reg.invaded) {
        for (const auto& [q, sq] : {std::pair{t.i, 1.0}, std::pair{t.j, -1.0}}) {
          if (!dofs_.is_free(q)) continue;
          push(trips, dofs_.pw(q), col, sq * fluids_.rho_w * dgw * dpw);
          push(trips, dofs_.sn(q), col, sq * fluids_.rho_n * dgn * dpn);
        }
      }
      trips.emplace_back(static_cast<int>(col), static_cast<int>(col), reg.invaded ? 1.0 : -e.delta_pc);
    }
  }

  const auto n = static_cast<Eigen::Index>(dofs_.size());
  Eigen::SparseMatrix<double> jac(n, n);
  jac.setFromTriplets(trips.begin(), trips.end());
  jac.makeCompressed();
  return jac;
}

BoundaryExchange Assembler::boundary_exchange(const SystemState& trial) const {
  BoundaryExchange bx;
  for (std::size_t i = 0; i < net_.pore_count(); ++i) bx.injected_n -= sources_[i].nonwetting;
  for (std::size_t i = 0; i < net_.pore_count(); ++i) bx.injected_w -= sources_[i].wetting;
  std::vector<PoreLocal> local(net_.pore_count());
  for (std::size_t i = 0; i < net_.pore_count(); ++i) local[i] = pore_local(i, trial.pw[i], trial.sn[i]);
  for (const Throat& t : net_.throats()) {
    const bool fi = !dofs_.is_free(t.i);
    const bool fj = !dofs_.is_free(t.j);
    // Throats between two free pores are interior; between two pinned pores they never touch the domain.
    if (fi == fj) continue;
    const ThroatEval e = throat_eval(t.id, local[t.i], local[t.j], trial.throats[t.id].theta, trial.throats[t.id]);
    // Net flux into the pinned pore.
    const std::size_t fixed = fi ? t.i : t.j;
    const double sign = fi ? -1.0 : 1.0;
    const double into_w = sign * e.mass_w;
    const double into_n = sign * e.mass_n;
    if (std::holds_alternative<PressureOutlet>(net_.pore(fixed).boundary)) {
      bx.outflow_w += into_w;
      bx.outflow_n += into_n;
    } else {
      bx.injected_w -= into_w;
      bx.injected_n -= into_n;
    }
  }
  return bx;
}

Eigen::VectorXd Assembler::gather(const SystemState& state) const {
  Eigen::VectorXd u(static_cast<Eigen::Index>(dofs_.size()));
  for (std::size_t i = 0; i < net_.pore_count(); ++i) {
    if (!dofs_.is_free(i)) continue;
    u[static_cast<Eigen::Index>(dofs_.pw(i))] = state.pw[i];
    u[static_cast<Eigen::Index>(dofs_.sn(i))] = state.sn[i];
  }
  if (dofs_.has_theta()) {
    for (std::size_t t = 0; t < net_.throat_count(); ++t) u[static_cast<Eigen::Index>(dofs_.theta(t))] = state.throats[t].theta;
  }
  return u;
}

void Assembler::scatter(const Eigen::VectorXd& u, SystemState& state) const {
  for (std::size_t i = 0; i < net_.pore_count(); ++i) {
    if (!dofs_.is_free(i)) continue;
    state.pw[i] = u[static_cast<Eigen::Index>(dofs_.pw(i))];
    state.sn[i] = u[static_cast<Eigen::Index>(dofs_.sn(i))];
  }
  if (dofs_.has_theta()) {
    for (std::size_t t = 0; t < net_.throat_count(); ++t) state.throats[t].theta = u[static_cast<Eigen::Index>(dofs_.theta(t))];
  }
}

std::vector<std::pair<std::size_t, std::size_t>> Assembler::sparsity_pattern() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  auto pore_rows_of = [&](std::size_t p, auto&& fn) {
    if (dofs_.is_free(p)) {
      fn(dofs_.pw(p));
      fn(dofs_.sn(p));
    }
  };
  for (std::size_t i = 0; i < net_.pore_count(); ++i) {
    pore_rows_of(i, [&](std::size_t c) {
      pore_rows_of(i, [&](std::size_t r) { out.emplace_back(r, c); });
      for (const Neighbor& nb : net_.neighbors(i)) {
        pore_rows_of(nb.pore, [&](std::size_t r) { out.emplace_back(r, c); });
        if (dofs_.has_theta()) out.emplace_back(dofs_.theta(nb.throat), c);
      }
    });
  }
  if (dofs_.has_theta()) {
    for (const Throat& t : net_.throats()) {
      const std::size_t c = dofs_.theta(t.id);
      out.emplace_back(c, c);
      pore_rows_of(t.i, [&](std::size_t r) { out.emplace_back(r, c); });
      pore_rows_of(t.j, [&](std::size_t r) { out.emplace_back(r, c); });
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace pnm
