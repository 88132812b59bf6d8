#include "balo/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "balo/errors.hpp"

namespace balo {

namespace detail {

void throw_negative_density(const char* what, double m) {
  std::ostringstream os;
  os << what << ": density must be >= 0, got " << m;
  throw DomainError(os.str());
}

void throw_damage_above_one(double d) {
  std::ostringstream os;
  os << "damage_rate: d = " << d << " exceeds 1";
  throw DomainError(os.str());
}

void throw_tau_zero() {
  throw ConfigError("tau = 0 (parabolic-elliptic limit) is not supported");
}

}  // namespace detail

namespace {

void require_nonnegative(double m, const char* what) {
  if (!(m >= 0.0)) [[unlikely]] detail::throw_negative_density(what, m);
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw ConfigError(std::string("parameter '") + name + "' must be finite");
  }
}

}  // namespace

std::string_view to_string(DiffusionMode mode) {
  return mode == DiffusionMode::Linear ? "linear" : "porous";
}

DiffusionMode diffusion_mode_from_string(std::string_view name) {
  if (name == "linear") return DiffusionMode::Linear;
  if (name == "porous" || name == "porous-medium") return DiffusionMode::PorousMedium;
  throw ConfigError("unknown diffusion_mode '" + std::string(name) +
                    "' (expected linear|porous)");
}

double cond_gamma_threshold(int dimension) {
  if (dimension < 1 || dimension > 3) {
    throw ConfigError("exponent condition is stated for dimensions 1..3, got " +
                      std::to_string(dimension));
  }
  return std::max(2.0 - 2.0 / dimension, 1.0);
}

void ModelParams::validate(int dimension) const {
  const std::pair<const char*, double> all[] = {
      {"gamma", gamma}, {"chi", chi},       {"mu", mu},         {"delta", delta},
      {"tau", tau},     {"alpha", alpha},   {"lambda", lambda}, {"beta", beta},
      {"r", r},         {"epsilon", epsilon}, {"eta_floor", eta_floor}};
  for (const auto& [name, value] : all) require_finite(value, name);

  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (chi < 0.0) throw ConfigError("chi must be >= 0");
  if (mu < 0.0) throw ConfigError("mu must be >= 0");
  if (delta < 0.0) throw ConfigError("delta must be >= 0");
  if (tau == 0.0) {
    throw ConfigError("tau = 0 (parabolic-elliptic limit) is not supported");
  }
  if (tau < 0.0) throw ConfigError("tau must be > 0");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (lambda < 0.0 || beta < 0.0 || r < 0.0) {
    throw ConfigError("lambda, beta and r must be >= 0");
  }
  if (epsilon < 0.0 || epsilon >= 1.0) throw ConfigError("epsilon must lie in [0, 1)");
  if (eta_floor < 0.0) throw ConfigError("eta_floor must be >= 0");
  if (diffusion_mode == DiffusionMode::PorousMedium && gamma == 1.0) {
    throw ConfigError(
        "gamma = 1 with diffusion_mode = porous is degenerate; use diffusion_mode = linear");
  }
  if (diffusion_mode == DiffusionMode::Linear && epsilon + eta_floor <= 0.0) {
    throw ConfigError("linear diffusion needs epsilon + eta_floor > 0");
  }
  if (strict_cond_gamma && diffusion_mode == DiffusionMode::PorousMedium) {
    const double threshold = cond_gamma_threshold(dimension);
    if (!(gamma > threshold)) {
      std::ostringstream os;
      os << "cond-gamma violated: gamma = " << gamma << " must exceed max{2 - 2/n, 1} = "
         << threshold << " for n = " << dimension;
      throw ConfigError(os.str());
    }
  }
}

double diffusion_enthalpy(double m, const ModelParams& p) {
  require_nonnegative(m, "diffusion_enthalpy");
  if (p.diffusion_mode == DiffusionMode::Linear) {
    return std::log(m + p.epsilon + p.eta_floor);
  }
  if (p.gamma == 1.0) {
    throw ConfigError("porous-medium enthalpy is undefined for gamma = 1");
  }
  const double u = m + p.epsilon;
  if (p.gamma == 2.0) return 2.0 * u;
  return p.gamma / (p.gamma - 1.0) * std::pow(u, p.gamma - 1.0);
}

double diffusivity(double m, const ModelParams& p) {
  require_nonnegative(m, "diffusivity");
  if (p.diffusion_mode == DiffusionMode::Linear) return 1.0;
  const double u = m + p.epsilon;
  if (p.gamma == 2.0) return 2.0 * u;
  return p.gamma * std::pow(u, p.gamma - 1.0);
}

double diffusion_primitive(double m, const ModelParams& p) {
  require_nonnegative(m, "diffusion_primitive");
  if (p.diffusion_mode == DiffusionMode::Linear) return m;
  return std::pow(m + p.epsilon, p.gamma) - std::pow(p.epsilon, p.gamma);
}

}  // namespace balo
