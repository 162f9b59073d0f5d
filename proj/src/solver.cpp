#include "pnm/solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "pnm/csv.hpp"

namespace pnm {

void NewtonConfig::validate() const {
  if (max_iterations < 1) throw Error(ErrorCode::InvalidParameter, "newton.max_iterations must be at least 1");
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidParameter, std::string("newton.") + name + " must be positive");
  };
  positive(tol_residual_rel, "tol_residual_rel");
  positive(tol_abs_mass, "tol_abs_mass");
  positive(tol_abs_theta, "tol_abs_theta");
  positive(max_update_pw, "max_update_pw");
  positive(max_update_sn, "max_update_sn");
  positive(max_update_theta, "max_update_theta");
}

bool NewtonConfig::line_search_for(const SchemeKind& scheme) const {
  return line_search.value_or(!is_fi_theta(scheme));
}

void TimeLoopConfig::validate() const {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error(ErrorCode::InvalidParameter, "timeloop.t_end must be positive");
  if (!(dt_min > 0.0) || !(dt_min <= dt_target) || !std::isfinite(dt_target))
    throw Error(ErrorCode::InvalidParameter, "timeloop needs 0 < dt_min <= dt_target");
  if (!(retry_factor > 0.0 && retry_factor < 1.0))
    throw Error(ErrorCode::InvalidParameter, "timeloop.retry_factor must lie in (0, 1)");
  if (!(growth_factor >= 1.0) || !std::isfinite(growth_factor))
    throw Error(ErrorCode::InvalidParameter, "timeloop.growth_factor must be at least 1");
  if (!(dt_initial >= 0.0) || !std::isfinite(dt_initial))
    throw Error(ErrorCode::InvalidParameter, "timeloop.dt_initial must be non-negative");
}

namespace {

// Multiple of the pressure-resolution floor accepted on mass rows.
constexpr double kRoundoffRows = 8.0;

struct Check {
  bool converged = true;
  double merit = 0.0;  // sum of squared tolerance-scaled residuals
  double worst = 0.0;
  std::size_t worst_row = 0;
};

Check check_residual(const Assembler& a, const Evaluation& ev, const SystemState& trial, const NewtonConfig& cfg) {
  const DofMap& d = a.dofs();
  Check c;
  auto add = [&](std::size_t row, double x) {
    if (!std::isfinite(x)) x = std::numeric_limits<double>::infinity();
    c.merit += x * x;
    if (x > c.worst) {
      c.worst = x;
      c.worst_row = row;
    }
    if (!(x <= 1.0)) c.converged = false;
  };
  for (std::size_t r = 0; r < d.theta_base(); ++r) {
    const double tol = cfg.tol_abs_mass + cfg.tol_residual_rel * ev.row_scale[r] + kRoundoffRows * ev.row_floor[r];
    add(r, std::abs(ev.residual[static_cast<Eigen::Index>(r)]) / tol);
  }
  if (d.has_theta()) {
    for (std::size_t t = 0; t < trial.throats.size(); ++t) {
      const std::size_t r = d.theta(t);
      double x = std::abs(ev.residual[static_cast<Eigen::Index>(r)]);
      const ThroatRegime& reg = trial.throats[t];
      // An interior theta is only meaningful at the entry pressure.
      if (!reg.invaded && reg.theta > kThetaCommit && reg.theta < 1.0 - kThetaCommit)
        x = std::max(x, std::abs(ev.throats[t].delta_pc));
      add(r, x / cfg.tol_abs_theta);
    }
  }
  return c;
}

void reset_in_step_theta(const SchemeKind& scheme, SystemState& s) {
  for (ThroatRegime& r : s.throats) {
    if (r.invaded) r.theta = 1.0;
    else if (!std::holds_alternative<FiR>(scheme)) r.theta = 0.0;
  }
}

// Scales the pressure part globally, chops saturation and theta components individually
// and projects onto the admissible box. S_n stays below the clamp band, where p_c is flat
// and the Jacobian loses its saturation coupling.
SystemState apply_update(const Assembler& a, const SystemState& trial, const Evaluation& ev, const Eigen::VectorXd& du,
                         double alpha, const NewtonConfig& cfg) {
  const DofMap& d = a.dofs();
  SystemState next = trial;
  for (std::size_t i = 0; i < a.network().pore_count(); ++i) {
    if (!d.is_free(i)) continue;
    next.pw[i] += alpha * du[static_cast<Eigen::Index>(d.pw(i))];
    const double ds = std::clamp(alpha * du[static_cast<Eigen::Index>(d.sn(i))], -cfg.max_update_sn, cfg.max_update_sn);
    double sn = std::clamp(trial.sn[i] + ds, 0.0, 1.0 - kSwClamp);
    if (cfg.pc_growth_limit > 0.0 && sn > trial.sn[i]) {
      // p_c may grow at most by the limit factor over the larger of its current value and
      // the highest adjacent entry pressure.
      double pce = 0.0;
      for (const Neighbor& nb : a.network().neighbors(i)) pce = std::max(pce, a.network().throat(nb.throat).entry_pressure);
      const double pc_now = a.pore_local(i, trial.pw[i], trial.sn[i]).pc;
      const double cap = cfg.pc_growth_limit * std::max(pc_now, pce);
      const double sn_cap = 1.0 - sw_of_pc(a.fluids().gamma, a.network().pore(i).radius, cap);
      if (sn > sn_cap) sn = std::max(trial.sn[i], sn_cap);
    }
    next.sn[i] = sn;
  }
  if (d.has_theta()) {
    for (std::size_t t = 0; t < next.throats.size(); ++t) {
      const double dth = std::clamp(alpha * du[static_cast<Eigen::Index>(d.theta(t))], -cfg.max_update_theta,
                                    cfg.max_update_theta);
      const double theta = trial.throats[t].theta + dth;
      // A closed throat above its entry pressure that Newton wants to close further: the
      // projection would pin theta at 0 and the iterates cycle across dpc = 0. The only
      // complementary point on that side is theta = 1.
      if (theta < 0.0 && trial.throats[t].theta <= kThetaCommit && ev.throats[t].delta_pc > cfg.tol_abs_theta)
        next.throats[t].theta = 1.0;
      else
        next.throats[t].theta = std::clamp(theta, 0.0, 1.0);
    }
  }
  return next;
}

Eigen::VectorXd apply_difference(const Assembler& a, const SystemState& from, const SystemState& to) {
  return a.gather(to) - a.gather(from);
}

double damping(const Assembler& a, const Eigen::VectorXd& du, const NewtonConfig& cfg) {
  const DofMap& d = a.dofs();
  double max_pw = 0.0;
  for (std::size_t i = 0; i < a.network().pore_count(); ++i) {
    if (d.is_free(i)) max_pw = std::max(max_pw, std::abs(du[static_cast<Eigen::Index>(d.pw(i))]));
  }
  return max_pw > cfg.max_update_pw ? cfg.max_update_pw / max_pw : 1.0;
}

// Row- and column-equilibrated sparse LU of the Jacobian. Norms of corrections are taken
// in the equilibrated variables, which makes them comparable across unknown classes.
class Factorization {
 public:
  bool factor(const Eigen::SparseMatrix<double>& jac, std::string& diagnostic) {
    const Eigen::Index n = jac.rows();
    row_ = Eigen::VectorXd::Zero(n);
    col_ = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < jac.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(jac, k); it; ++it)
        row_[it.row()] = std::max(row_[it.row()], std::abs(it.value()));
    for (Eigen::Index r = 0; r < n; ++r) {
      if (!(row_[r] > 0.0)) {
        diagnostic = "Jacobian row " + std::to_string(r) + " is zero";
        return false;
      }
      row_[r] = 1.0 / row_[r];
    }
    Eigen::SparseMatrix<double> scaled = row_.asDiagonal() * jac;
    for (Eigen::Index k = 0; k < scaled.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(scaled, k); it; ++it)
        col_[it.col()] = std::max(col_[it.col()], std::abs(it.value()));
    for (Eigen::Index c = 0; c < n; ++c) {
      if (!(col_[c] > 0.0)) {
        diagnostic = "Jacobian column " + std::to_string(c) + " is zero";
        return false;
      }
      col_[c] = 1.0 / col_[c];
    }
    scaled = scaled * col_.asDiagonal();
    scaled.makeCompressed();
    lu_.analyzePattern(scaled);
    lu_.factorize(scaled);
    if (lu_.info() != Eigen::Success) {
      diagnostic = "sparse LU factorization failed: " + lu_.lastErrorMessage();
      return false;
    }
    return true;
  }

  // Newton correction for the residual; false if the result is not finite.
  bool solve(const Eigen::VectorXd& residual, Eigen::VectorXd& du, double& scaled_norm) {
    Eigen::VectorXd y = lu_.solve(-(row_.asDiagonal() * residual));
    if (lu_.info() != Eigen::Success || !y.allFinite()) return false;
    scaled_norm = y.norm();
    du = col_.asDiagonal() * y;
    return true;
  }

  double scaled_norm_of(const Eigen::VectorXd& du) const { return du.cwiseQuotient(col_).norm(); }

 private:
  Eigen::VectorXd row_, col_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

bool flip_fi_n_flags(const Evaluation& ev, SystemState& trial) {
  bool flipped = false;
  for (std::size_t t = 0; t < trial.throats.size(); ++t) {
    ThroatRegime& r = trial.throats[t];
    if (!r.invaded && r.theta < 0.5 && ev.throats[t].delta_pc >= 0.0) {
      r.theta = 1.0;
      flipped = true;
    }
  }
  return flipped;
}

std::string describe_row(const Assembler& a, std::size_t row) {
  const DofMap& d = a.dofs();
  if (row >= d.theta_base()) return "theta row of throat " + std::to_string(row - d.theta_base());
  for (std::size_t i = 0; i < a.network().pore_count(); ++i) {
    if (d.pw(i) == row) return "wetting row of pore " + std::to_string(i);
    if (d.sn(i) == row) return "non-wetting row of pore " + std::to_string(i);
  }
  return "row " + std::to_string(row);
}

}  // namespace

NewtonResult newton_solve(const Assembler& assembler, const SystemState& old, double dt, const NewtonConfig& cfg) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidParameter, "time step must be positive");
  const SchemeKind& scheme = assembler.scheme();
  const bool fi_n = std::holds_alternative<FiN>(scheme);
  const bool line_search = cfg.line_search_for(scheme);

  NewtonResult res;
  res.outcome.dt_used = dt;
  SystemState trial = old;
  trial.time = old.time + dt;
  reset_in_step_theta(scheme, trial);

  Evaluation ev = assembler.evaluate(old, trial, dt);
  Check chk = check_residual(assembler, ev, trial, cfg);

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    res.outcome.iterations = iter;
    Eigen::VectorXd du;
    double du_norm = 0.0;
    std::string diag;
    Factorization fact;
    if (!fact.factor(assembler.assemble_jacobian(old, trial, dt), diag) || !fact.solve(ev.residual, du, du_norm)) {
      if (diag.empty()) diag = "linear solve produced a non-finite update";
      res.outcome.diagnostic = diag + " (iteration " + std::to_string(iter) + ")";
      res.state = trial;
      return res;
    }
    double alpha = damping(assembler, du, cfg);
    SystemState cand = apply_update(assembler, trial, ev, du, alpha, cfg);
    Evaluation cand_ev = assembler.evaluate(old, cand, dt);
    Check cand_chk = check_residual(assembler, cand_ev, cand, cfg);
    if (line_search && !cand_chk.converged) {
      // Natural monotonicity test: the simplified correction J(u_k)^-1 R(u_k + a du) has to
      // shrink relative to the Newton correction.
      for (int k = 0; k < 10; ++k) {
        Eigen::VectorXd bar;
        double bar_norm = 0.0;
        const bool ok = fact.solve(cand_ev.residual, bar, bar_norm);
        const double taken = fact.scaled_norm_of(apply_difference(assembler, trial, cand));
        const double ratio = taken > 0.0 ? taken / du_norm : 1.0;
        if (ok && bar_norm <= (1.0 - 0.25 * ratio) * du_norm) break;
        alpha *= 0.5;
        cand = apply_update(assembler, trial, ev, du, alpha, cfg);
        cand_ev = assembler.evaluate(old, cand, dt);
      }
      cand_chk = check_residual(assembler, cand_ev, cand, cfg);
    }
    trial = std::move(cand);
    ev = std::move(cand_ev);
    chk = cand_chk;
    if (fi_n && flip_fi_n_flags(ev, trial)) {
      ev = assembler.evaluate(old, trial, dt);
      chk = check_residual(assembler, ev, trial, cfg);
      continue;
    }
    if (chk.converged) {
      res.outcome.converged = true;
      res.state = std::move(trial);
      return res;
    }
  }
  std::ostringstream msg;
  msg << "Newton did not converge in " << cfg.max_iterations << " iterations; worst "
      << describe_row(assembler, chk.worst_row) << " at " << format_double(chk.worst) << " x tolerance";
  res.outcome.diagnostic = msg.str();
  res.state = std::move(trial);
  return res;
}

StepBalance step_mass_balance(const Assembler& assembler, const SystemState& old, const SystemState& next, double dt) {
  const Network& net = assembler.network();
  const FluidPair& f = assembler.fluids();
  double acc_w = 0.0, acc_n = 0.0;
  for (std::size_t i = 0; i < net.pore_count(); ++i) {
    if (!assembler.dofs().is_free(i)) continue;
    const double dm = net.pore(i).volume * (next.sn[i] - old.sn[i]);
    acc_w -= f.rho_w * dm;
    acc_n += f.rho_n * dm;
  }
  const BoundaryExchange bx = assembler.boundary_exchange(next);
  // Net exchange is a poor scale once a phase is globally at rest; its residual is then pure
  // roundoff. The total mass moved through throats in the step (both phases) joins the scale.
  const Evaluation ev = assembler.evaluate(old, next, dt);
  double gross = 0.0;
  for (const ThroatEval& t : ev.throats) gross += (std::abs(t.mass_w) + std::abs(t.mass_n)) * dt;
  auto rel = [gross](double injected, double accumulated, double outflow) {
    const double scale = std::max({std::abs(injected), std::abs(accumulated), std::abs(outflow), gross});
    const double imbalance = std::abs(injected - accumulated - outflow);
    return scale > 0.0 ? imbalance / scale : imbalance;
  };
  return {rel(bx.injected_w * dt, acc_w, bx.outflow_w * dt), rel(bx.injected_n * dt, acc_n, bx.outflow_n * dt)};
}

std::vector<StepEvent> commit_step(const Assembler& assembler, const SystemState& old, SystemState& converged,
                                   const NewtonConfig& cfg) {
  (void)cfg;
  const Network& net = assembler.network();
  const SchemeKind& scheme = assembler.scheme();
  std::vector<StepEvent> events;
  for (const Throat& t : net.throats()) {
    ThroatRegime& reg = converged.throats[t.id];
    if (old.throats[t.id].invaded) {
      reg = ThroatRegime{true, 1.0};
      continue;
    }
    const PoreLocal a = assembler.pore_local(t.i, converged.pw[t.i], converged.sn[t.i]);
    const PoreLocal b = assembler.pore_local(t.j, converged.pw[t.j], converged.sn[t.j]);
    const double dpc = delta_pc(a.pc, b.pc, t.entry_pressure);
    bool invade = false;
    if (is_fi_theta(scheme)) {
      invade = reg.theta > kThetaCommit;
    } else if (const auto* r = std::get_if<FiR>(&scheme)) {
      reg.theta = h_delta(dpc, r->delta * t.entry_pressure);
      invade = dpc >= 0.0;
    } else {
      invade = reg.theta >= 0.5;
    }
    if (invade) {
      reg.invaded = true;
      events.push_back({t.id, reg.theta, dpc});
    }
  }
  return events;
}

AdvanceResult advance_time_step(const Assembler& assembler, const SystemState& state, double dt_try,
                                const NewtonConfig& newton, const TimeLoopConfig& loop, const StepSolver& solver) {
  if (!(dt_try > 0.0)) throw Error(ErrorCode::InvalidParameter, "time step must be positive");
  AdvanceResult out;
  double dt = dt_try;
  while (true) {
    ++out.attempts;
    NewtonResult r = solver ? solver(state, dt) : newton_solve(assembler, state, dt, newton);
    out.newton_iterations += r.outcome.iterations;
    if (r.outcome.converged) {
      out.outcome = std::move(r.outcome);
      out.outcome.dt_used = dt;
      const StepBalance bal = step_mass_balance(assembler, state, r.state, dt);
      out.outcome.mass_imbalance_w = bal.imbalance_w;
      out.outcome.mass_imbalance_n = bal.imbalance_n;
      out.outcome.events = commit_step(assembler, state, r.state, newton);
      out.state = std::move(r.state);
      return out;
    }
    const double next = dt * loop.retry_factor;
    if (next < loop.dt_min) {
      std::ostringstream msg;
      msg << "time step underflow at t = " << format_double(state.time) << " (dt = " << format_double(dt)
          << " failed, dt_min = " << format_double(loop.dt_min) << "): " << r.outcome.diagnostic;
      throw StepAbort(msg.str(), std::move(r.state));
    }
    dt = next;
  }
}

namespace {

struct LoopHooks {
  double tol_t = 0.0;  // > 0: reject event steps larger than this
};

RunRecord march(const Assembler& assembler, const SystemState& initial, const NewtonConfig& newton,
                const TimeLoopConfig& loop, LoopHooks hooks) {
  newton.validate();
  loop.validate();
  RunRecord rec;
  rec.states.push_back(initial);
  double dt = loop.dt_initial > 0.0 ? std::min(loop.dt_initial, loop.dt_target) : loop.dt_target;
  bool hold = false;
  const double t_eps = 1e-12 * loop.t_end;
  while (rec.states.back().time < loop.t_end - t_eps) {
    const SystemState& cur = rec.states.back();
    double step = dt;
    bool last = false;
    if (cur.time + step >= loop.t_end - t_eps) {
      step = loop.t_end - cur.time;
      last = true;
    }
    AdvanceResult adv;
    try {
      adv = advance_time_step(assembler, cur, step, newton, loop);
    } catch (const StepAbort& e) {
      SystemState failing = e.failing_state();
      throw RunAborted(e.what(), std::move(rec), std::move(failing));
    }
    rec.newton_total += adv.newton_iterations;
    rec.failed_attempts += adv.attempts - 1;
    const double used = adv.outcome.dt_used;
    if (hooks.tol_t > 0.0 && !adv.outcome.events.empty() && used > hooks.tol_t) {
      ++rec.failed_attempts;
      dt = std::max(0.5 * used, hooks.tol_t);
      hold = true;
      continue;
    }
    if (last && used == step) adv.state.time = loop.t_end;
    const bool had_events = !adv.outcome.events.empty();
    rec.steps.push_back(std::move(adv.outcome));
    rec.states.push_back(std::move(adv.state));
    if (had_events) hold = false;
    dt = hold ? used : std::min(used * loop.growth_factor, loop.dt_target);
  }
  return rec;
}

}  // namespace

RunRecord run_simulation(const Assembler& assembler, const SystemState& initial, const NewtonConfig& newton,
                         const TimeLoopConfig& loop) {
  return march(assembler, initial, newton, loop, {});
}

RunRecord generate_reference_run(const Assembler& assembler, const SystemState& initial, const NewtonConfig& newton,
                                 const TimeLoopConfig& loop, double tol_t) {
  if (!is_fi_theta(assembler.scheme()))
    throw Error(ErrorCode::InvalidParameter, "reference runs use the FI-Theta scheme");
  if (!(tol_t > 0.0)) throw Error(ErrorCode::InvalidParameter, "reference tol_t must be positive");
  return march(assembler, initial, newton, loop, {tol_t});
}

}  // namespace pnm
