#include "pnm/pnm.h"

#include <algorithm>
#include <cstring>
#include <new>
#include <string>

#include "pnm/error.hpp"
#include "pnm/harness.hpp"
#include "pnm/network_io.hpp"

struct pnm_config {
  pnm::Config cfg;
};

struct pnm_network {
  pnm::Network net;
};

struct pnm_run {
  pnm::RunOutcome outcome;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_report;

pnm_status status_of(pnm::ErrorCode code) {
  using pnm::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidParameter:
    case ErrorCode::InvalidInput:
    case ErrorCode::OutOfRange:
    case ErrorCode::Configuration: return PNM_ERR_CONFIG;
    case ErrorCode::Assembly:
    case ErrorCode::Solver: return PNM_ERR_SOLVER;
    case ErrorCode::UnsupportedTopology: return PNM_ERR_TOPOLOGY;
    case ErrorCode::Io: return PNM_ERR_IO;
  }
  return PNM_ERR_INTERNAL;
}

pnm_status fail(pnm_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <class F>
pnm_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const pnm::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PNM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PNM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PNM_ERR_INTERNAL, "unknown exception");
  }
}

std::filesystem::path out_dir_for(const pnm_config* cfg, const char* out_dir) {
  return out_dir ? std::filesystem::path(out_dir) : std::filesystem::path(cfg->cfg.run.output);
}

}  // namespace

extern "C" {

const char* pnm_version(void) { return "1.0.0"; }
const char* pnm_last_error(void) { return g_last_error.c_str(); }
const char* pnm_last_report(void) { return g_last_report.c_str(); }

pnm_status pnm_config_load(const char* path, pnm_config** out) {
  if (!path || !out) return fail(PNM_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new pnm_config{pnm::parse_config_file(path)};
    return PNM_OK;
  });
}

pnm_status pnm_config_parse(const char* text, pnm_config** out) {
  if (!text || !out) return fail(PNM_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new pnm_config{pnm::parse_config_text(text)};
    return PNM_OK;
  });
}

void pnm_config_free(pnm_config* cfg) { delete cfg; }

pnm_status pnm_config_set_seed(pnm_config* cfg, unsigned long long seed) {
  if (!cfg) return fail(PNM_ERR_ARGUMENT, "null config");
  cfg->cfg.run.seed = seed;
  if (cfg->cfg.study) cfg->cfg.study->seed_first = seed;
  g_last_error.clear();
  return PNM_OK;
}

pnm_status pnm_config_set_scheme(pnm_config* cfg, const char* name) {
  if (!cfg || !name) return fail(PNM_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string n = name;
    if (n != "fi-n" && n != "fi-r" && n != "fi-theta")
      return fail(PNM_ERR_CONFIG, "scheme.kind: expected fi-n, fi-r or fi-theta, got '" + n + "'");
    pnm::Config next = cfg->cfg;
    next.run.scheme = pnm::parse_scheme(n);
    if (next.study) next.study->schemes = {next.run.scheme};
    pnm::validate(next);
    cfg->cfg = std::move(next);
    return PNM_OK;
  });
}

pnm_status pnm_config_set_delta(pnm_config* cfg, double delta) {
  if (!cfg) return fail(PNM_ERR_ARGUMENT, "null config");
  return guarded([&] {
    pnm::Config next = cfg->cfg;
    auto* r = std::get_if<pnm::FiR>(&next.run.scheme);
    if (!r) return fail(PNM_ERR_CONFIG, "scheme.delta: only valid for scheme fi-r");
    r->delta = delta;
    if (next.study) {
      for (pnm::SchemeKind& s : next.study->schemes) {
        auto* sr = std::get_if<pnm::FiR>(&s);
        if (!sr) return fail(PNM_ERR_CONFIG, "study.schemes: delta override needs fi-r only");
        sr->delta = delta;
      }
    }
    pnm::validate(next);
    cfg->cfg = std::move(next);
    return PNM_OK;
  });
}

pnm_status pnm_config_set_output(pnm_config* cfg, const char* dir) {
  if (!cfg || !dir || !*dir) return fail(PNM_ERR_ARGUMENT, "empty output directory");
  cfg->cfg.run.output = dir;
  g_last_error.clear();
  return PNM_OK;
}

const char* pnm_config_output(const pnm_config* cfg) { return cfg ? cfg->cfg.run.output.c_str() : ""; }

pnm_status pnm_config_echo(const pnm_config* cfg, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return fail(PNM_ERR_ARGUMENT, "null config");
  return guarded([&] {
    const std::string text = pnm::echo_config(cfg->cfg);
    if (needed) *needed = text.size() + 1;
    if (!buf || cap < text.size() + 1) return fail(PNM_ERR_ARGUMENT, "buffer too small");
    std::memcpy(buf, text.c_str(), text.size() + 1);
    return PNM_OK;
  });
}

pnm_status pnm_network_build(const pnm_config* cfg, pnm_network** out) {
  if (!cfg || !out) return fail(PNM_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new pnm_network{pnm::build_network(cfg->cfg.run)};
    return PNM_OK;
  });
}

void pnm_network_free(pnm_network* net) { delete net; }
size_t pnm_network_pore_count(const pnm_network* net) { return net ? net->net.pore_count() : 0; }
size_t pnm_network_throat_count(const pnm_network* net) { return net ? net->net.throat_count() : 0; }

pnm_status pnm_network_write(const pnm_network* net, const char* path) {
  if (!net || !path) return fail(PNM_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    pnm::write_network_file(path, net->net);
    return PNM_OK;
  });
}

pnm_status pnm_run_execute(const pnm_config* cfg, pnm_run** out) {
  if (!cfg || !out) return fail(PNM_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const pnm::Network net = pnm::build_network(cfg->cfg.run);
    *out = new pnm_run{pnm::execute_run(cfg->cfg.run, net)};
    if (!(*out)->outcome.completed) return fail(PNM_ERR_SOLVER, (*out)->outcome.message);
    return PNM_OK;
  });
}

void pnm_run_free(pnm_run* run) { delete run; }

pnm_status pnm_run_get_summary(const pnm_run* run, pnm_run_summary* out) {
  if (!run || !out) return fail(PNM_ERR_ARGUMENT, "null argument");
  const pnm::RunOutcome& o = run->outcome;
  out->t_final = o.record.states.empty() ? 0.0 : o.record.states.back().time;
  out->steps = o.record.step_count();
  out->newton_total = o.record.newton_total;
  out->failed_attempts = o.record.failed_attempts;
  out->events = o.events.size();
  out->invaded_count = o.summary.invaded_count;
  out->e_pce = o.summary.e_pce;
  out->e_max = o.summary.e_max;
  out->max_imbalance = std::max(o.checks.max_imbalance_w, o.checks.max_imbalance_n);
  out->completed = o.completed ? 1 : 0;
  g_last_error.clear();
  return PNM_OK;
}

pnm_status pnm_run_saturation(const pnm_run* run, size_t state, double* sn, size_t n) {
  if (!run || !sn) return fail(PNM_ERR_ARGUMENT, "null argument");
  const auto& states = run->outcome.record.states;
  if (state >= states.size()) return fail(PNM_ERR_ARGUMENT, "state index out of range");
  if (n != states[state].sn.size()) return fail(PNM_ERR_ARGUMENT, "buffer length must equal the pore count");
  std::memcpy(sn, states[state].sn.data(), n * sizeof(double));
  g_last_error.clear();
  return PNM_OK;
}

pnm_status pnm_run_time(const pnm_run* run, size_t state, double* t) {
  if (!run || !t) return fail(PNM_ERR_ARGUMENT, "null argument");
  const auto& states = run->outcome.record.states;
  if (state >= states.size()) return fail(PNM_ERR_ARGUMENT, "state index out of range");
  *t = states[state].time;
  g_last_error.clear();
  return PNM_OK;
}

pnm_status pnm_cmd_run(const pnm_config* cfg, const char* out_dir) {
  if (!cfg) return fail(PNM_ERR_ARGUMENT, "null config");
  return guarded([&] {
    const pnm::CaseResult r = pnm::run_case(cfg->cfg, out_dir_for(cfg, out_dir));
    g_last_report = r.summary;
    if (!r.run.completed) return fail(PNM_ERR_SOLVER, r.run.message);
    return PNM_OK;
  });
}

pnm_status pnm_cmd_ensemble(const pnm_config* cfg, const char* out_dir) {
  if (!cfg) return fail(PNM_ERR_ARGUMENT, "null config");
  return guarded([&] {
    const pnm::EnsembleResult r = pnm::run_ensemble(cfg->cfg, out_dir_for(cfg, out_dir));
    g_last_report = r.summary;
    std::size_t failures = 0;
    for (const auto& row : r.rows) failures += row.failures;
    if (failures > 0) return fail(PNM_ERR_SOLVER, std::to_string(failures) + " ensemble run(s) aborted");
    return PNM_OK;
  });
}

pnm_status pnm_cmd_converge(const pnm_config* cfg, const char* out_dir) {
  if (!cfg) return fail(PNM_ERR_ARGUMENT, "null config");
  return guarded([&] {
    const pnm::ConvergenceResult r = pnm::run_convergence_study(cfg->cfg, out_dir_for(cfg, out_dir));
    g_last_report = r.summary;
    std::size_t failures = 0;
    for (const auto& l : r.levels) failures += l.completed ? 0 : 1;
    if (failures > 0) return fail(PNM_ERR_SOLVER, std::to_string(failures) + " level run(s) aborted");
    return PNM_OK;
  });
}

pnm_status pnm_cmd_network(const pnm_config* cfg, const char* out_dir) {
  if (!cfg) return fail(PNM_ERR_ARGUMENT, "null config");
  return guarded([&] {
    const auto path = pnm::write_case_network(cfg->cfg, out_dir_for(cfg, out_dir));
    g_last_report = "wrote " + path.string();
    return PNM_OK;
  });
}

}  // extern "C"
