// Closed-form quantum-noise quantities for a signal-recycled Michelson:
// SQL strain, optomechanical coupling constants, sloshing resonance,
// filter bandwidth target, quadrature rotation angle and the resulting
// sensitivity with imperfect rotation.
#pragma once

#include <cmath>
#include <stdexcept>

#include "eprsq/constants.hpp"
#include "eprsq/params.hpp"

namespace eprsq {

// Wrap an angle to (-pi, pi].
inline double wrap_pi(double x) {
  double y = std::fmod(x, 2.0 * pi);
  if (y <= -pi) y += 2.0 * pi;
  if (y > pi) y -= 2.0 * pi;
  return y;
}

// Wrap an angle modulo pi to (-pi/2, pi/2]. Quadrature rotations are
// pi-periodic, so angle mismatches are compared on this interval.
inline double wrap_half_pi(double x) {
  double y = std::fmod(x, pi);
  if (y <= -0.5 * pi) y += pi;
  if (y > 0.5 * pi) y -= pi;
  return y;
}

// Square root of the standard quantum limit, h_SQL = sqrt(8 hbar / (m W^2 L^2)).
// Strain amplitude per sqrt(Hz).
inline double h_sql(const InterferometerParams& p, double omega) {
  if (!(omega > 0.0)) throw std::domain_error("h_sql: omega must be positive");
  return std::sqrt(8.0 * hbar /
                   (p.mirror_mass * omega * omega * p.L_arm * p.L_arm));
}

// Optomechanical coupling constant in the compound-mirror (short SRC) limit,
//   K = 32 w0 P_arm / (m L^2 W^2 (W^2 + gamma^2)),
// with gamma the detection bandwidth of the effective two-mirror cavity.
// gamma is an explicit argument: it depends on the effective SRC transmission,
// which is a configuration choice rather than a derived quantity here.
inline double kappa_klmtv(const InterferometerParams& p, double omega,
                          double gamma) {
  if (!(omega > 0.0))
    throw std::domain_error("kappa_klmtv: omega must be positive");
  if (!(gamma > 0.0))
    throw std::domain_error("kappa_klmtv: gamma must be positive");
  return 32.0 * p.omega0() * p.P_arm /
         (p.mirror_mass * p.L_arm * p.L_arm * omega * omega *
          (omega * omega + gamma * gamma));
}

struct SloshingMode {
  double omega_s = 0.0;  // rad/s
  double gamma_s = 0.0;  // rad/s
};

// Sloshing resonance of the coupled arm/SRC system. omega_s follows the
// selected convention; gamma_s = c T_srm / (4 L_src) in both.
inline SloshingMode sloshing(const InterferometerParams& p) {
  const double t = p.sloshing == SloshingConvention::AsPrinted
                       ? p.T_itm
                       : std::sqrt(p.T_itm);
  SloshingMode mode;
  mode.omega_s = speed_of_light * t / (2.0 * std::sqrt(p.L_arm * p.L_src));
  mode.gamma_s = speed_of_light * p.T_srm / (4.0 * p.L_src);
  return mode;
}

// Coupling constant for a long-baseline interferometer where the sloshing
// resonance is resolved:
//   K = 2 h_SQL^2 L w0 P_arm gamma_s omega_s^2
//       / (hbar c [gamma_s^2 W^2 + (W^2 - omega_s^2)^2]).
inline double kappa_lbi(const InterferometerParams& p, double omega) {
  if (!(omega > 0.0))
    throw std::domain_error("kappa_lbi: omega must be positive");
  const SloshingMode s = sloshing(p);
  const double hs = h_sql(p, omega);
  const double d = s.gamma_s * s.gamma_s * omega * omega +
                   (omega * omega - s.omega_s * s.omega_s) *
                       (omega * omega - s.omega_s * s.omega_s);
  return 2.0 * hs * hs * p.L_arm * p.omega0() * p.P_arm * s.gamma_s *
         s.omega_s * s.omega_s / (hbar * speed_of_light * d);
}

// Required filter bandwidth for broadband rotation, with delta_f = -gamma_f.
// This is the DC limit of sqrt(W^2 K_lbi / 2):
//   gamma_f = sqrt(8 w0 P_arm gamma_s / (m c L_arm omega_s^2)),
// which reduces to sqrt(8 w0 P_arm T_srm / (m c^2 T_itm)) in the SqrtT
// convention (and with T_itm^2 in the denominator for AsPrinted).
inline FilterTarget target_gamma_f(const InterferometerParams& p) {
  const SloshingMode s = sloshing(p);
  const double g =
      std::sqrt(8.0 * p.omega0() * p.P_arm * s.gamma_s /
                (p.mirror_mass * speed_of_light * p.L_arm * s.omega_s * s.omega_s));
  return FilterTarget{g, -g};
}

// Frequency-dependent rotation of the idler noise ellipse produced by a
// detuned cavity with bandwidth gamma_f and detuning delta_f:
//   Phi_rot = arctan((W + delta_f)/gamma_f) + arctan((-W + delta_f)/gamma_f).
// For delta_f = -gamma_f this equals -arctan(2 gamma_f^2 / W^2), running
// monotonically from -pi/2 at DC to 0 at high frequency.
inline double phi_rot(double omega, const FilterTarget& t) {
  if (!(t.gamma_f > 0.0))
    throw std::domain_error("phi_rot: gamma_f must be positive");
  return std::atan((omega + t.delta_f) / t.gamma_f) +
         std::atan((-omega + t.delta_f) / t.gamma_f);
}

// Rotation-angle error: mismatch, modulo pi, between the rotation the cavity
// realizes and the rotation that aligns the fixed idler readout with the
// signal's correlated quadrature. The required angle is -arctan(K) modulo pi
// (the detuning sign convention of phi_rot makes the realized angle negative),
// so a filter with gamma_f = sqrt(W^2 K / 2) and delta_f = -gamma_f gives
// exactly zero error at every frequency where that matching holds.
inline double delta_phi(const InterferometerParams& p, double omega,
                        const FilterTarget& t) {
  if (!(omega > 0.0))
    throw std::domain_error("delta_phi: omega must be positive");
  const double required = -std::atan(kappa_lbi(p, omega));
  return wrap_half_pi(phi_rot(omega, t) - required);
}

// Sensitivity with exact ellipse rotation: S_h = h_SQL^2 (K + 1/K) / (2 cosh 2r).
inline double sensitivity_ideal(const InterferometerParams& p, double omega) {
  const double k = kappa_lbi(p, omega);
  const double hs = h_sql(p, omega);
  return hs * hs * (k + 1.0 / k) / (2.0 * std::cosh(2.0 * p.squeeze_r));
}

// Sensitivity with rotation error dphi, to quadratic order:
//   S_h = S_ideal * (1 + sinh^2(2r) dphi^2).
inline double sensitivity(const InterferometerParams& p, double omega,
                          double dphi) {
  const double sh2 = std::sinh(2.0 * p.squeeze_r);
  return sensitivity_ideal(p, omega) * (1.0 + sh2 * sh2 * dphi * dphi);
}

}  // namespace eprsq
