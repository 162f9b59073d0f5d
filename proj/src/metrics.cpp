#include "pnm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pnm/csv.hpp"

namespace pnm {

std::vector<EventRecord> detect_invasion_events(const RunRecord& run, const SchemeKind& scheme, double tol_event) {
  std::vector<EventRecord> out;
  for (std::size_t s = 0; s < run.steps.size(); ++s) {
    const StepOutcome& step = run.steps[s];
    std::vector<StepEvent> evs = step.events;
    std::sort(evs.begin(), evs.end(), [](const StepEvent& a, const StepEvent& b) { return a.throat < b.throat; });
    for (const StepEvent& e : evs) {
      EventRecord r;
      r.k = s + 1;
      r.t = run.states[s + 1].time;
      r.throat = e.throat;
      r.delta_pc = e.delta_pc;
      r.theta = e.theta;
      r.t_star = r.t - e.theta * step.dt_used;
      r.excluded = is_fi_theta(scheme) && e.theta >= 1.0 - kThetaCommit && e.delta_pc > tol_event;
      out.push_back(r);
    }
  }
  return out;
}

double prediction_error_rms(const std::vector<EventRecord>& events) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const EventRecord& e : events) {
    if (e.excluded) continue;
    sum += e.delta_pc * e.delta_pc;
    ++n;
  }
  return n == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(n));
}

double prediction_error_max(const std::vector<EventRecord>& events, const Network& net) {
  double worst = 0.0;
  for (const EventRecord& e : events) {
    if (e.excluded) continue;
    worst = std::max(worst, std::abs(e.delta_pc) / net.throat(e.throat).entry_pressure);
  }
  return worst;
}

namespace {

// Wetting saturation of pore i, linearly interpolated in time.
std::vector<double> reference_sw(const RunRecord& ref, double t) {
  const auto& st = ref.states;
  const double t_first = st.front().time;
  const double t_last = st.back().time;
  const double slack = 1e-9 * std::max(1.0, std::abs(t_last));
  if (t < t_first - slack || t > t_last + slack)
    throw Error(ErrorCode::OutOfRange, "reference run does not cover t = " + format_double(t));
  auto it = std::lower_bound(st.begin(), st.end(), t, [](const SystemState& s, double v) { return s.time < v; });
  std::vector<double> sw(st.front().sn.size());
  if (it == st.end()) it = st.end() - 1;
  if (it == st.begin() || it->time == t) {
    for (std::size_t i = 0; i < sw.size(); ++i) sw[i] = 1.0 - it->sn[i];
    return sw;
  }
  const SystemState& b = *it;
  const SystemState& a = *(it - 1);
  const double w = (t - a.time) / (b.time - a.time);
  for (std::size_t i = 0; i < sw.size(); ++i) sw[i] = 1.0 - ((1.0 - w) * a.sn[i] + w * b.sn[i]);
  return sw;
}

}  // namespace

double l2_saturation_error(const RunRecord& run, const RunRecord& reference) {
  if (run.states.empty() || reference.states.empty()) throw Error(ErrorCode::InvalidInput, "empty run record");
  const std::size_t n = run.states.front().sn.size();
  if (reference.states.front().sn.size() != n)
    throw Error(ErrorCode::InvalidInput, "run and reference have different pore counts");
  double sum = 0.0;
  for (std::size_t k = 1; k < run.states.size(); ++k) {
    const SystemState& s = run.states[k];
    const double dt = s.time - run.states[k - 1].time;
    const std::vector<double> ref = reference_sw(reference, s.time);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (1.0 - s.sn[i]) - ref[i];
      sq += d * d;
    }
    sum += dt * sq;
  }
  return std::sqrt(sum / static_cast<double>(n));
}

bool invasion_sequence_match(const std::vector<EventRecord>& events, const std::vector<std::size_t>& ground_truth) {
  std::size_t pos = 0;
  std::size_t i = 0;
  while (i < events.size()) {
    std::size_t j = i;
    std::multiset<std::size_t> got;
    while (j < events.size() && events[j].k == events[i].k) got.insert(events[j++].throat);
    const std::size_t m = j - i;
    if (pos + m > ground_truth.size()) return false;
    const std::multiset<std::size_t> want(ground_truth.begin() + static_cast<std::ptrdiff_t>(pos),
                                          ground_truth.begin() + static_cast<std::ptrdiff_t>(pos + m));
    if (got != want) return false;
    pos += m;
    i = j;
  }
  return true;
}

std::vector<std::size_t> bifurcating_ground_truth(const Network& net) {
  if (net.throat_count() + 1 != net.pore_count())
    throw Error(ErrorCode::UnsupportedTopology, "invasion ground truth needs a tree network");
  std::vector<bool> pore_in(net.pore_count(), false);
  std::vector<bool> throat_in(net.throat_count(), false);
  bool any = false;
  for (const Pore& p : net.pores()) {
    if (std::holds_alternative<FluxInlet>(p.boundary)) pore_in[p.id] = any = true;
  }
  if (!any) throw Error(ErrorCode::UnsupportedTopology, "invasion ground truth needs a flux inlet");
  std::vector<std::size_t> order;
  while (true) {
    std::size_t best = net.throat_count();
    for (const Throat& t : net.throats()) {
      if (throat_in[t.id] || pore_in[t.i] == pore_in[t.j]) continue;
      if (best == net.throat_count() || t.radius > net.throat(best).radius) best = t.id;
    }
    if (best == net.throat_count()) break;
    const Throat& t = net.throat(best);
    throat_in[best] = true;
    order.push_back(best);
    const std::size_t reached = pore_in[t.i] ? t.j : t.i;
    pore_in[reached] = true;
    if (std::holds_alternative<PressureOutlet>(net.pore(reached).boundary)) break;
  }
  return order;
}

double FillingOracle::sw_at(std::size_t m, double t) const {
  if (m + 1 >= chain.size()) return 1.0;  // outlet
  const double start = m == 0 ? 0.0 : invasion_times[m - 1];
  if (t <= start) return 1.0;
  if (t >= invasion_times[m]) return sw_star[m];
  return 1.0 - rate * (t - start) / pore_volume[m];
}

std::size_t FillingOracle::invaded_by(double t) const {
  return static_cast<std::size_t>(std::upper_bound(invasion_times.begin(), invasion_times.end(), t) - invasion_times.begin());
}

FillingOracle sequential_filling_oracle_1d(const Network& net, const FluidPair& fluids, double mass_rate) {
  if (!(mass_rate > 0.0)) throw Error(ErrorCode::InvalidParameter, "oracle needs a positive injection rate");
  if (net.throat_count() + 1 != net.pore_count())
    throw Error(ErrorCode::UnsupportedTopology, "filling oracle needs a chain network");
  std::size_t start = net.pore_count();
  for (const Pore& p : net.pores()) {
    if (net.coordination(p.id) > 2) throw Error(ErrorCode::UnsupportedTopology, "filling oracle needs a chain network");
    if (std::holds_alternative<FluxInlet>(p.boundary)) start = p.id;
  }
  if (start == net.pore_count() || net.coordination(start) != 1)
    throw Error(ErrorCode::UnsupportedTopology, "filling oracle needs a flux inlet at a chain end");
  FillingOracle o;
  o.rate = mass_rate / fluids.rho_n;
  std::size_t prev_throat = net.throat_count();
  std::size_t cur = start;
  while (true) {
    o.chain.push_back(cur);
    std::size_t next_throat = net.throat_count();
    for (const Neighbor& nb : net.neighbors(cur)) {
      if (nb.throat != prev_throat) next_throat = nb.throat;
    }
    if (next_throat == net.throat_count()) break;
    o.throats.push_back(next_throat);
    prev_throat = next_throat;
    cur = net.throat(next_throat).other(cur);
  }
  double t = 0.0;
  for (std::size_t m = 0; m < o.throats.size(); ++m) {
    const Pore& p = net.pore(o.chain[m]);
    const double sw = sw_of_pc(fluids.gamma, p.radius, net.throat(o.throats[m]).entry_pressure);
    o.sw_star.push_back(sw);
    o.pore_volume.push_back(p.volume);
    t += p.volume * (1.0 - sw) / o.rate;
    o.invasion_times.push_back(t);
  }
  o.sw_star.push_back(1.0);
  o.pore_volume.push_back(net.pore(o.chain.back()).volume);
  return o;
}

ConvergenceFit convergence_order(const std::vector<std::pair<double, double>>& dt_error) {
  ConvergenceFit fit;
  std::vector<double> x, y;
  for (const auto& [dt, e] : dt_error) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidInput, "convergence levels need positive time steps");
    if (!(e > 0.0)) {
      fit.notes.push_back("level dt = " + format_double(dt) + " has zero error (solver-tolerance floor), excluded");
      continue;
    }
    x.push_back(std::log(dt));
    y.push_back(std::log(e));
  }
  fit.levels_used = x.size();
  if (x.size() < 3) throw Error(ErrorCode::InvalidInput, "convergence fit needs at least three levels with non-zero error");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::InvalidInput, "convergence levels need distinct time steps");
  fit.slope = sxy / sxx;
  return fit;
}

ErrorSummary summarize_run(const RunRecord& run, const std::vector<EventRecord>& events, const Network& net,
                           const RunRecord* reference) {
  ErrorSummary s;
  if (reference) s.e_sw = l2_saturation_error(run, *reference);
  s.e_pce = prediction_error_rms(events);
  s.e_max = prediction_error_max(events, net);
  for (const EventRecord& e : events) {
    s.invasion_sequence.push_back(e.throat);
    if (e.excluded) ++s.excluded_events;
  }
  // Throats invaded from the start are not counted.
  const auto& first = run.states.front().throats;
  const auto& last = run.states.back().throats;
  for (std::size_t t = 0; t < last.size(); ++t) s.invaded_count += last[t].invaded && !first[t].invaded ? 1 : 0;
  return s;
}

double mean_time_step(const RunRecord& run) {
  if (run.steps.empty()) return 0.0;
  return (run.states.back().time - run.states.front().time) / static_cast<double>(run.steps.size());
}

}  // namespace pnm
