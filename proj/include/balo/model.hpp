#pragma once

#include <string>
#include <string_view>

namespace balo {

enum class DiffusionMode { Linear, PorousMedium };

std::string_view to_string(DiffusionMode mode);
DiffusionMode diffusion_mode_from_string(std::string_view name);

/// Physical and constitutive constants of the macrophage / cytokine /
/// oligodendrocyte system.
///
///   m_t = div(D(m) grad m - chi f(m) grad c) + mu m (1 - m)
///   tau c_t = alpha lap c + lambda d - c + beta m
///   d_t = r m f(m) (1 - d),            f(m) = m / (1 + delta m)
///
/// PorousMedium uses D(m) = gamma m^(gamma-1); Linear uses D = 1.
/// epsilon shifts the diffusivity argument, D_eps(s) = D(s + eps).
struct ModelParams {
  double gamma = 2.0;
  double chi = 4.0;
  double mu = 1.0;
  double delta = 1.0;
  double tau = 1.0;
  double alpha = 1.0;
  double lambda = 1.0;
  double beta = 1.0;
  double r = 1.0;
  double epsilon = 0.0;
  /// Keeps ln() finite at vacuum in Linear mode.
  double eta_floor = 1e-12;
  DiffusionMode diffusion_mode = DiffusionMode::PorousMedium;
  /// Require gamma > max(2 - 2/n, 1) for the run's dimension n.
  bool strict_cond_gamma = false;

  /// Throws ConfigError on any sign/finiteness violation.  When
  /// strict_cond_gamma is set, also checks the exponent condition for
  /// `dimension` (1, 2 or 3).
  void validate(int dimension) const;
};

/// max{2 - 2/n, 1}; exponents strictly above it give bounded global
/// solutions in dimension n.
double cond_gamma_threshold(int dimension);

/// H(m) with diffusive velocity -(H(m_R) - H(m_L))/dx.
double diffusion_enthalpy(double m, const ModelParams& p);

/// D_eps(m).
double diffusivity(double m, const ModelParams& p);

namespace detail {
[[noreturn]] void throw_negative_density(const char* what, double m);
[[noreturn]] void throw_damage_above_one(double d);
[[noreturn]] void throw_tau_zero();
inline constexpr double kDamageTolerance = 1e-10;
}  // namespace detail

/// Formula bodies without argument checks, for kernels that validate a
/// whole array up front.
namespace unchecked {
inline double chemo_sensitivity(double m, double delta) { return 1.0 / (1.0 + delta * m); }
inline double reaction_m(double m, double mu) { return mu * m * (1.0 - m); }
inline double reaction_c(double m, double c, double d, double lambda, double beta,
                         double tau) {
  return (lambda * d - c + beta * m) / tau;
}
/// `sensitivity` is 1/(1 + delta m).
inline double damage_rate(double m, double d, double r, double sensitivity) {
  return r * m * (m * sensitivity) * (1.0 - d);
}
}  // namespace unchecked

/// f(m)/m = 1/(1 + delta m).
inline double chemo_sensitivity(double m, const ModelParams& p) {
  if (!(m >= 0.0)) [[unlikely]] detail::throw_negative_density("chemo_sensitivity", m);
  return unchecked::chemo_sensitivity(m, p.delta);
}

/// mu m (1 - m).
inline double reaction_m(double m, const ModelParams& p) {
  if (!(m >= 0.0)) [[unlikely]] detail::throw_negative_density("reaction_m", m);
  return unchecked::reaction_m(m, p.mu);
}

/// (lambda d - c + beta m) / tau.
inline double reaction_c(double m, double c, double d, const ModelParams& p) {
  if (p.tau == 0.0) [[unlikely]] detail::throw_tau_zero();
  return unchecked::reaction_c(m, c, d, p.lambda, p.beta, p.tau);
}

/// r m f(m) (1 - d).  d above 1 (beyond roundoff) signals a broken
/// invariant upstream and throws DomainError.
inline double damage_rate(double m, double d, const ModelParams& p) {
  if (!(m >= 0.0)) [[unlikely]] detail::throw_negative_density("damage_rate", m);
  if (d > 1.0 + detail::kDamageTolerance) [[unlikely]] detail::throw_damage_above_one(d);
  return unchecked::damage_rate(m, d, p.r, unchecked::chemo_sensitivity(m, p.delta));
}

/// Phi_eps(m) = Phi(m + eps) - Phi(eps), Phi' = D.
double diffusion_primitive(double m, const ModelParams& p);

}  // namespace balo
