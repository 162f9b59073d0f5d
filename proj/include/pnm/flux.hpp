#pragma once

#include <string>
#include <variant>

namespace pnm {

/// Invasion state switched inside the Newton loop, frozen after the first switch.
struct FiN {
  friend bool operator==(const FiN&, const FiN&) = default;
};
/// Regularized Heaviside; `delta` is a fraction of the throat entry pressure.
struct FiR {
  double delta = 0.4;
  friend bool operator==(const FiR&, const FiR&) = default;
};
/// Additional throat unknown theta with its complementarity residual.
struct FiTheta {
  friend bool operator==(const FiTheta&, const FiTheta&) = default;
};

using SchemeKind = std::variant<FiN, FiR, FiTheta>;

/// "fi-n", "fi-r", "fi-theta".
std::string scheme_name(const SchemeKind& scheme);
/// Parses "fi-n", "fi-theta", "fi-r" (delta 0.4) or "fi-r:<delta>".
SchemeKind parse_scheme(const std::string& text);
void validate(const SchemeKind& scheme);

inline bool is_fi_theta(const SchemeKind& s) { return std::holds_alternative<FiTheta>(s); }

/// Throats newer than this theta count as not invaded when a step is committed.
inline constexpr double kThetaCommit = 1e-10;

/// Per-throat state owned by a single run. `invaded` is the committed state from previous
/// steps and never reverts; `theta` is the current value (fraction of the step spent invaded).
struct ThroatRegime {
  bool invaded = false;
  double theta = 0.0;

  friend bool operator==(const ThroatRegime&, const ThroatRegime&) = default;
};

/// C^1 cosine-regularized Heaviside on [0, width].
double h_delta(double s, double width);
double h_delta_derivative(double s, double width);

/// (1 - theta) max(0, dpc) - theta min(0, dpc). Zero for any theta at dpc = 0.
inline double theta_residual(double delta_pc, double theta) {
  const double pos = delta_pc > 0.0 ? delta_pc : 0.0;
  const double neg = delta_pc < 0.0 ? delta_pc : 0.0;
  return (1.0 - theta) * pos - theta * neg;
}

/// g_greater * theta + g_less * (1 - theta).
inline double effective_conductance(double g_less, double g_greater, double theta) {
  return g_greater * theta + g_less * (1.0 - theta);
}

/// Volume flux from i to j [m^3/s].
inline double generalized_flux(double g_eff, double p_i, double p_j) { return g_eff * (p_i - p_j); }

/// Theta entering the flux of one throat.
///  FI-R: H_delta(dpc) with width delta * p_ce.
///  FI-Theta: the throat unknown.
///  FI-N: the in-step invasion flag stored as 0/1 in theta_value.
/// Throats committed as invaded in an earlier step are pinned to 1 for every scheme.
double theta_for_scheme(const SchemeKind& scheme, double delta_pc, double theta_value, const ThroatRegime& regime,
                        double entry_pressure);

}  // namespace pnm
