#include "pnm/flux.hpp"

#include <cmath>
#include <numbers>

#include "pnm/csv.hpp"
#include "pnm/error.hpp"

namespace pnm {

std::string scheme_name(const SchemeKind& scheme) {
  if (std::holds_alternative<FiN>(scheme)) return "fi-n";
  if (std::holds_alternative<FiR>(scheme)) return "fi-r";
  return "fi-theta";
}

SchemeKind parse_scheme(const std::string& text) {
  if (text == "fi-n") return FiN{};
  if (text == "fi-theta") return FiTheta{};
  if (text == "fi-r") return FiR{};
  if (text.rfind("fi-r:", 0) == 0) {
    FiR r{parse_double(text.substr(5))};
    validate(r);
    return r;
  }
  throw Error(ErrorCode::Configuration, "unknown scheme '" + text + "' (expected fi-n, fi-r[:delta], fi-theta)");
}

void validate(const SchemeKind& scheme) {
  if (const auto* r = std::get_if<FiR>(&scheme); r && !(r->delta > 0.0 && std::isfinite(r->delta)))
    throw Error(ErrorCode::InvalidParameter, "FI-R regularization delta must be positive");
}

double h_delta(double s, double width) {
  if (s <= 0.0) return 0.0;
  if (s >= width) return 1.0;
  return 0.5 * (1.0 - std::cos(std::numbers::pi * s / width));
}

double h_delta_derivative(double s, double width) {
  if (s <= 0.0 || s >= width) return 0.0;
  return 0.5 * std::numbers::pi / width * std::sin(std::numbers::pi * s / width);
}

double theta_for_scheme(const SchemeKind& scheme, double delta_pc, double theta_value, const ThroatRegime& regime,
                        double entry_pressure) {
  if (regime.invaded) return 1.0;
  if (const auto* r = std::get_if<FiR>(&scheme)) return h_delta(delta_pc, r->delta * entry_pressure);
  if (std::holds_alternative<FiTheta>(scheme)) return theta_value;
  return theta_value >= 0.5 ? 1.0 : 0.0;
}

}  // namespace pnm
