#include "pnm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pnm/csv.hpp"
#include "pnm/error.hpp"
#include "pnm/network_io.hpp"

namespace pnm {

namespace fs = std::filesystem;

Network build_network(const RunConfig& cfg) {
  const double gamma = cfg.fluids.gamma;
  if (const auto* c = std::get_if<LineCase>(&cfg.geometry)) {
    LineNetworkParams p;
    p.pores = c->pores;
    p.pore_radius = c->pore_radius;
    p.throat_radius = c->throat_radius;
    p.spacing = c->spacing;
    p.interfacial_tension = gamma;
    p.injection_rate = c->injection_rate;
    p.outlet_pressure = c->outlet_pressure;
    return build_line_network(p);
  }
  if (const auto* c = std::get_if<BifurcatingCase>(&cfg.geometry)) {
    BifurcatingNetworkParams p;
    p.depth = c->depth;
    p.segment_throats = c->segment_throats;
    p.pore_radius = c->pore_radius;
    p.spacing = c->spacing;
    p.radius_sampler.kind = RadiusDistribution::Uniform;
    p.radius_sampler.a = c->radius_min;
    p.radius_sampler.b = c->radius_max;
    p.seed = cfg.seed;
    p.interfacial_tension = gamma;
    p.injection_rate = c->injection_rate;
    p.outlet_pressure = c->outlet_pressure;
    return build_bifurcating_network(p);
  }
  const auto& c = std::get<LatticeCase>(cfg.geometry);
  LatticeNetworkParams p;
  p.rows = c.rows;
  p.cols = c.cols;
  p.pore_radius = c.pore_radius;
  p.spacing = c.spacing;
  p.radius_sampler = RadiusSampler{RadiusDistribution::Normal, c.radius_mean, c.radius_std, c.radius_clip_min,
                                   c.radius_clip_max, p.radius_sampler.min_relative_gap};
  p.seed = cfg.seed;
  p.interfacial_tension = gamma;
  p.inlet_entry_pressure = c.inlet_entry_pressure;
  p.inlet_pressure = c.inlet_pressure;
  p.outlet_pressure = c.outlet_pressure;
  return build_lattice_network(p);
}

void RunChecks::merge(const RunChecks& o) {
  max_imbalance_w = std::max(max_imbalance_w, o.max_imbalance_w);
  max_imbalance_n = std::max(max_imbalance_n, o.max_imbalance_n);
  sn_min = std::min(sn_min, o.sn_min);
  sn_max = std::max(sn_max, o.sn_max);
  theta_min = std::min(theta_min, o.theta_min);
  theta_max = std::max(theta_max, o.theta_max);
}

RunChecks audit_run(const RunRecord& run) {
  RunChecks c;
  for (const StepOutcome& s : run.steps) {
    c.max_imbalance_w = std::max(c.max_imbalance_w, s.mass_imbalance_w);
    c.max_imbalance_n = std::max(c.max_imbalance_n, s.mass_imbalance_n);
  }
  for (std::size_t k = 1; k < run.states.size(); ++k) {
    for (double sn : run.states[k].sn) {
      c.sn_min = std::min(c.sn_min, sn);
      c.sn_max = std::max(c.sn_max, sn);
    }
    for (const ThroatRegime& r : run.states[k].throats) {
      c.theta_min = std::min(c.theta_min, r.theta);
      c.theta_max = std::max(c.theta_max, r.theta);
    }
  }
  return c;
}

RunOutcome execute_run(const RunConfig& cfg, const Network& net, const RunRecord* reference) {
  const Assembler assembler(net, cfg.fluids, cfg.scheme);
  const SystemState initial = initial_state(net, cfg.fluids, default_initial_pressure(net));
  RunOutcome out;
  try {
    out.record = run_simulation(assembler, initial, cfg.newton, cfg.timeloop);
    out.completed = true;
  } catch (const RunAborted& e) {
    out.record = e.partial();
    out.failing_state = e.failing_state();
    out.message = e.what();
  }
  out.events = detect_invasion_events(out.record, cfg.scheme, cfg.newton.tol_abs_theta);
  out.summary = summarize_run(out.record, out.events, net, out.completed ? reference : nullptr);
  out.checks = audit_run(out.record);
  return out;
}

std::vector<std::size_t> event_coordination(const Network& net, const RunRecord& run,
                                            const std::vector<EventRecord>& events, const FluidPair& fluids) {
  const Assembler a(net, fluids, FiTheta{});
  std::vector<std::size_t> out;
  out.reserve(events.size());
  for (const EventRecord& e : events) {
    const Throat& t = net.throat(e.throat);
    const SystemState& s = run.states.at(e.k);
    const double pci = a.pore_local(t.i, s.pw[t.i], s.sn[t.i]).pc;
    const double pcj = a.pore_local(t.j, s.pw[t.j], s.sn[t.j]).pc;
    out.push_back(net.coordination(pci >= pcj ? t.i : t.j));
  }
  return out;
}

void write_run_csv(std::ostream& out, const Network& net, const RunConfig& cfg, const RunRecord& run,
                   const std::string& echo) {
  const Assembler a(net, cfg.fluids, cfg.scheme);
  CsvWriter w(out, "run", echo);
  std::vector<std::string> cols = {"t", "dt", "newton_iters"};
  for (std::size_t i = 0; i < net.pore_count(); ++i) {
    cols.push_back("pw_" + std::to_string(i));
    cols.push_back("sn_" + std::to_string(i));
    cols.push_back("pc_" + std::to_string(i));
  }
  for (std::size_t t = 0; t < net.throat_count(); ++t) {
    cols.push_back("theta_" + std::to_string(t));
    cols.push_back("invaded_" + std::to_string(t));
  }
  w.header(cols);
  for (std::size_t k = 0; k < run.states.size(); ++k) {
    const SystemState& s = run.states[k];
    w << s.time;
    if (k == 0) w << 0.0 << 0;
    else w << run.steps[k - 1].dt_used << run.steps[k - 1].iterations;
    for (std::size_t i = 0; i < net.pore_count(); ++i) w << s.pw[i] << s.sn[i] << a.pore_local(i, s.pw[i], s.sn[i]).pc;
    for (const ThroatRegime& r : s.throats) w << r.theta << r.invaded;
    w.end_row();
  }
}

void write_events_csv(std::ostream& out, const std::vector<EventRecord>& events, const std::string& echo) {
  CsvWriter w(out, "events", echo);
  w.header({"k", "t", "throat", "dpc", "theta", "t_star", "excluded"});
  for (const EventRecord& e : events) {
    w << e.k << e.t << e.throat << e.delta_pc << e.theta << e.t_star << e.excluded;
    w.end_row();
  }
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return f;
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_config_echo(const fs::path& dir, const std::string& echo) {
  auto f = open_out(dir / "config.ini");
  f << echo;
}

std::string scheme_label(const SchemeKind& s) {
  if (const auto* r = std::get_if<FiR>(&s)) return "fi-r(" + format_double(r->delta) + ")";
  return scheme_name(s);
}

void write_delta(CsvWriter& w, const SchemeKind& s) {
  if (const auto* r = std::get_if<FiR>(&s)) w << r->delta;
  else w << std::string_view("");
}

const StudyConfig& require_study(const Config& cfg) {
  if (!cfg.study) throw Error(ErrorCode::Configuration, "study: section [study] is required for this command");
  return *cfg.study;
}

}  // namespace

CaseResult run_case(const Config& cfg, const fs::path& out_dir) {
  const Network net = build_network(cfg.run);
  CaseResult res;
  res.run = execute_run(cfg.run, net);
  const std::string echo = echo_config(cfg);
  prepare_dir(out_dir);
  write_config_echo(out_dir, echo);
  {
    auto f = open_out(out_dir / "run.csv");
    write_run_csv(f, net, cfg.run, res.run.record, echo);
  }
  {
    auto f = open_out(out_dir / "events.csv");
    write_events_csv(f, res.run.events, echo);
  }
  std::ostringstream line;
  if (!res.run.completed) {
    auto f = open_out(out_dir / "abort_state.csv");
    CsvWriter w(f, "abort", echo);
    w.header({"pore", "pw", "sn"});
    const SystemState& s = res.run.failing_state;
    for (std::size_t i = 0; i < s.pw.size(); ++i) {
      w << i << s.pw[i] << s.sn[i];
      w.end_row();
    }
    line << "aborted: " << res.run.message << "; ";
  }
  const RunRecord& r = res.run.record;
  line << scheme_label(cfg.run.scheme) << " " << case_name(cfg.run.geometry) << ": t = "
       << format_double(r.states.back().time) << " steps " << r.step_count() << " newton " << r.newton_total
       << " retries " << r.failed_attempts << " events " << res.run.events.size() << " invaded "
       << res.run.summary.invaded_count << " E_pce " << format_double(res.run.summary.e_pce) << " E_max "
       << format_double(res.run.summary.e_max);
  res.summary = line.str();
  return res;
}

fs::path write_case_network(const Config& cfg, const fs::path& out_dir) {
  const Network net = build_network(cfg.run);
  prepare_dir(out_dir);
  const fs::path path = out_dir / "network.txt";
  write_network_file(path, net);
  return path;
}

EnsembleResult run_ensemble(const Config& cfg, const fs::path& out_dir) {
  const StudyConfig& study = require_study(cfg);
  if (!std::holds_alternative<BifurcatingCase>(cfg.run.geometry))
    throw Error(ErrorCode::Configuration, "case.kind: ensembles need the bifurcating case");
  EnsembleResult res;
  std::vector<Network> nets;
  std::vector<std::vector<std::size_t>> truths;
  for (std::size_t n = 0; n < study.seed_count; ++n) {
    RunConfig rc = cfg.run;
    rc.seed = study.seed_first + n;
    nets.push_back(build_network(rc));
    truths.push_back(bifurcating_ground_truth(nets.back()));
  }
  for (std::size_t si = 0; si < study.schemes.size(); ++si) {
    for (double dt : study.dt_levels) {
      EnsembleRow row;
      row.scheme = si;
      row.dt_max = dt;
      double sum_match = 0.0, sum_all = 0.0;
      std::size_t completed = 0;
      for (std::size_t n = 0; n < study.seed_count; ++n) {
        RunConfig rc = cfg.run;
        rc.seed = study.seed_first + n;
        rc.scheme = study.schemes[si];
        rc.timeloop.dt_target = dt;
        rc.timeloop.dt_initial = 0.0;
        RunOutcome run = execute_run(rc, nets[n]);
        EnsembleMember m;
        m.scheme = si;
        m.dt_max = dt;
        m.seed = rc.seed;
        m.completed = run.completed;
        m.match = run.completed && invasion_sequence_match(run.events, truths[n]);
        m.e_pce = run.summary.e_pce;
        m.coordination = event_coordination(nets[n], run.record, run.events, rc.fluids);
        m.events = std::move(run.events);
        m.checks = run.checks;
        ++row.seeds;
        row.newton_total += run.record.newton_total;
        if (!m.completed) {
          ++row.failures;
        } else {
          ++completed;
          sum_all += m.e_pce;
        }
        if (m.match) {
          ++row.matches;
          sum_match += m.e_pce;
        }
        res.members.push_back(std::move(m));
      }
      row.fraction = static_cast<double>(row.matches) / static_cast<double>(row.seeds);
      if (row.matches > 0) row.mean_e_pce_matching = sum_match / static_cast<double>(row.matches);
      if (completed > 0) row.mean_e_pce_all = sum_all / static_cast<double>(completed);
      res.rows.push_back(row);
    }
  }

  std::ostringstream sum;
  for (const EnsembleRow& r : res.rows) {
    sum << scheme_label(study.schemes[r.scheme]) << " dt_max " << format_double(r.dt_max) << ": match "
        << r.matches << "/" << r.seeds << " mean E_pce " << format_double(r.mean_e_pce_matching) << " (all "
        << format_double(r.mean_e_pce_all) << ") failures " << r.failures << '\n';
  }
  res.summary = sum.str();

  if (!out_dir.empty()) {
    const std::string echo = echo_config(cfg);
    prepare_dir(out_dir);
    write_config_echo(out_dir, echo);
    auto f = open_out(out_dir / "ensemble.csv");
    CsvWriter w(f, "ensemble", echo);
    w.header({"scheme", "delta", "dt_max", "seeds", "matches", "fraction", "mean_E_pce_matching", "mean_E_pce_all",
              "failures", "newton_total"});
    for (const EnsembleRow& r : res.rows) {
      w << std::string_view(scheme_name(study.schemes[r.scheme]));
      write_delta(w, study.schemes[r.scheme]);
      w << r.dt_max << r.seeds << r.matches << r.fraction << r.mean_e_pce_matching << r.mean_e_pce_all << r.failures
        << static_cast<std::int64_t>(r.newton_total);
      w.end_row();
    }
  }
  return res;
}

ConvergenceResult run_convergence_study(const Config& cfg, const fs::path& out_dir) {
  const StudyConfig& study = require_study(cfg);
  if (std::holds_alternative<BifurcatingCase>(cfg.run.geometry))
    throw Error(ErrorCode::Configuration, "case.kind: convergence studies need the line or lattice case");
  ConvergenceResult res;
  const double ref_dt = study.reference.dt_target > 0.0 ? study.reference.dt_target : study.dt_levels.back() / 10.0;

  for (std::size_t n = 0; n < study.seed_count; ++n) {
    RunConfig base = cfg.run;
    base.seed = study.seed_first + n;
    const Network net = build_network(base);

    RunConfig ref_cfg = base;
    ref_cfg.scheme = FiTheta{};
    ref_cfg.timeloop.dt_target = ref_dt;
    ref_cfg.timeloop.dt_min = std::min(ref_cfg.timeloop.dt_min, study.reference.tol_t);
    ref_cfg.timeloop.dt_initial = 0.0;
    const Assembler ref_asm(net, ref_cfg.fluids, ref_cfg.scheme);
    const RunRecord reference =
        generate_reference_run(ref_asm, initial_state(net, ref_cfg.fluids, default_initial_pressure(net)),
                               ref_cfg.newton, ref_cfg.timeloop, study.reference.tol_t);
    ReferenceInfo info;
    info.seed = base.seed;
    info.steps = reference.step_count();
    info.event_records = detect_invasion_events(reference, ref_cfg.scheme, ref_cfg.newton.tol_abs_theta);
    info.events = info.event_records.size();
    info.checks = audit_run(reference);
    std::vector<std::size_t> truth;
    for (const EventRecord& e : info.event_records) truth.push_back(e.throat);
    res.references.push_back(info);

    for (std::size_t si = 0; si < study.schemes.size(); ++si) {
      std::vector<std::pair<double, double>> sw_points, max_points;
      for (double dt : study.dt_levels) {
        RunConfig rc = base;
        rc.scheme = study.schemes[si];
        rc.timeloop.dt_target = dt;
        rc.timeloop.dt_initial = 0.0;
        RunOutcome run = execute_run(rc, net, &reference);
        LevelResult lv;
        lv.seed = base.seed;
        lv.scheme = si;
        lv.dt_target = dt;
        lv.completed = run.completed;
        lv.mean_dt = run.record.step_count() > 0 ? mean_time_step(run.record) : 0.0;
        lv.summary = run.summary;
        lv.newton_total = run.record.newton_total;
        lv.sequence_ok = run.completed && invasion_sequence_match(run.events, truth) &&
                         run.summary.invasion_sequence.size() == truth.size();
        lv.coordination = event_coordination(net, run.record, run.events, rc.fluids);
        lv.events = std::move(run.events);
        lv.checks = run.checks;
        lv.message = run.message;
        if (lv.completed) {
          sw_points.emplace_back(dt, lv.summary.e_sw);
          max_points.emplace_back(dt, lv.summary.e_max);
        }
        res.levels.push_back(std::move(lv));
      }
      for (const auto& [metric, points] : {std::pair{"E_Sw", &sw_points}, std::pair{"E_max", &max_points}}) {
        SlopeResult s;
        s.seed = base.seed;
        s.scheme = si;
        s.metric = metric;
        try {
          s.fit = convergence_order(*points);
          s.fitted = true;
        } catch (const Error& e) {
          s.fit.notes.push_back(e.what());
        }
        res.slopes.push_back(std::move(s));
      }
    }
  }

  std::ostringstream sum;
  for (const SlopeResult& s : res.slopes) {
    if (s.metric != "E_Sw") continue;
    sum << "seed " << s.seed << " " << scheme_label(study.schemes[s.scheme]) << ": E_Sw slope "
        << (s.fitted ? format_double(s.fit.slope) : std::string("n/a")) << '\n';
  }
  res.summary = sum.str();

  if (!out_dir.empty()) {
    const std::string echo = echo_config(cfg);
    prepare_dir(out_dir);
    write_config_echo(out_dir, echo);
    {
      auto f = open_out(out_dir / "errors.csv");
      CsvWriter w(f, "errors", echo);
      w.header({"seed", "scheme", "delta", "dt", "mean_dt", "E_Sw", "E_pce", "E_max", "invaded_count", "newton_total",
                "sequence_ok", "completed"});
      for (const LevelResult& l : res.levels) {
        w << static_cast<std::int64_t>(l.seed) << std::string_view(scheme_name(study.schemes[l.scheme]));
        write_delta(w, study.schemes[l.scheme]);
        w << l.dt_target << l.mean_dt << l.summary.e_sw << l.summary.e_pce << l.summary.e_max << l.summary.invaded_count
          << static_cast<std::int64_t>(l.newton_total) << l.sequence_ok << l.completed;
        w.end_row();
      }
    }
    {
      auto f = open_out(out_dir / "slopes.csv");
      CsvWriter w(f, "slopes", echo);
      w.header({"seed", "scheme", "delta", "metric", "slope", "levels_used", "notes"});
      for (const SlopeResult& s : res.slopes) {
        w << static_cast<std::int64_t>(s.seed) << std::string_view(scheme_name(study.schemes[s.scheme]));
        write_delta(w, study.schemes[s.scheme]);
        w << std::string_view(s.metric);
        if (s.fitted) w << s.fit.slope;
        else w << std::string_view("");
        w << s.fit.levels_used;
        std::string notes;
        for (const std::string& note : s.fit.notes) notes += (notes.empty() ? "" : "; ") + note;
        w << std::string_view(notes);
        w.end_row();
      }
    }
  }
  return res;
}

}  // namespace pnm
