// Signal-recycling cavity treated as a compound mirror for the idler beam:
// complex amplitude reflectivity/transmissivity, effective bandwidth as a
// function of the round-trip phase, closed-form phase inversion, candidate
// enumeration over (phi, n), the idler resonance residual, and microscopic
// length tuning on the carrier-resonant lattice.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "eprsq/constants.hpp"
#include "eprsq/params.hpp"
#include "eprsq/physics.hpp"

namespace eprsq {

struct SrcResponse {
  std::complex<double> r_eff;  // amplitude reflectivity seen from the arm
  std::complex<double> t_eff;  // amplitude transmissivity
  double phi_src = 0.0;        // one-way idler propagation phase, rad
};

// Compound-mirror response of the ITM+SRM cavity for a beam picking up
// one-way phase phi_src. Lossless two-mirror form,
//   r = (sqrt(R1) - sqrt(R2) e^{2i phi}) / (1 - sqrt(R1 R2) e^{2i phi}),
//   t = sqrt(T1 T2) e^{i phi}       / (1 - sqrt(R1 R2) e^{2i phi}),
// which satisfies |r|^2 + |t|^2 = 1 exactly.
inline SrcResponse src_response(double phi_src, double T_itm, double T_srm) {
  if (!(T_itm > 0.0 && T_itm < 1.0) || !(T_srm > 0.0 && T_srm < 1.0))
    throw std::domain_error("src_response: transmissivities must be in (0,1)");
  const double r1 = std::sqrt(1.0 - T_itm);
  const double r2 = std::sqrt(1.0 - T_srm);
  const std::complex<double> e1 = std::polar(1.0, phi_src);
  const std::complex<double> e2 = e1 * e1;
  const std::complex<double> den = 1.0 - r1 * r2 * e2;
  SrcResponse out;
  out.r_eff = (r1 - r2 * e2) / den;
  out.t_eff = std::sqrt(T_itm * T_srm) * e1 / den;
  out.phi_src = phi_src;
  return out;
}

// Effective idler bandwidth gamma_f = c |t_src|^2 / (4 L_arm).
// |t|^2 is evaluated in closed form; pi-periodic in phi_src.
inline double gamma_f_of_phi(double phi_src, double T_itm, double T_srm,
                             double L_arm) {
  if (!(T_itm > 0.0 && T_itm < 1.0) || !(T_srm > 0.0 && T_srm < 1.0))
    throw std::domain_error("gamma_f_of_phi: transmissivities must be in (0,1)");
  if (!(L_arm > 0.0))
    throw std::domain_error("gamma_f_of_phi: L_arm must be positive");
  const double a = std::sqrt((1.0 - T_itm) * (1.0 - T_srm));
  const double t2 =
      T_itm * T_srm / (1.0 - 2.0 * a * std::cos(2.0 * phi_src) + a * a);
  return speed_of_light * t2 / (4.0 * L_arm);
}

// Invert gamma_f_of_phi on the principal branch phi in [0, pi/2):
//   cos 2phi = (1 + R1 R2 - T1 T2 c / (4 L gamma_f)) / (2 sqrt(R1 R2)).
// Throws when the requested bandwidth is outside the reachable interval
// [gamma_f(pi/2), gamma_f(0)].
inline double solve_phi_exact(double gamma_f_target, double T_itm,
                              double T_srm, double L_arm) {
  if (!(gamma_f_target > 0.0))
    throw std::domain_error("solve_phi_exact: target must be positive");
  const double R1 = 1.0 - T_itm;
  const double R2 = 1.0 - T_srm;
  const double a = std::sqrt(R1 * R2);
  const double c2 = (1.0 + R1 * R2 -
                     T_itm * T_srm * speed_of_light /
                         (4.0 * L_arm * gamma_f_target)) /
                    (2.0 * a);
  if (c2 > 1.0 || c2 < -1.0)
    throw std::domain_error(
        "solve_phi_exact: bandwidth unreachable for these mirrors");
  return 0.5 * std::acos(c2);
}

// One grid cell of the working-point search: macroscopic lengths, the
// approximate SRC phase, and the FSR index selecting the pump detuning.
struct TuningCandidate {
  double L_arm = 0.0;      // m
  double L_src = 0.0;      // m
  double phi_approx = 0.0; // rad
  int n_fsr = 0;
  double delta = 0.0;      // pump detuning, rad/s: (phi + n pi) c / L_src
  double gamma_f = 0.0;    // rad/s, from gamma_f_of_phi(phi_approx)
  double delta_f = 0.0;    // rad/s, always -gamma_f
};

inline TuningCandidate make_candidate(const InterferometerParams& p,
                                      double L_arm, double L_src, double phi,
                                      int n) {
  TuningCandidate c;
  c.L_arm = L_arm;
  c.L_src = L_src;
  c.phi_approx = phi;
  c.n_fsr = n;
  c.delta = (phi + n * pi) * speed_of_light / L_src;
  c.gamma_f = gamma_f_of_phi(phi, p.T_itm, p.T_srm, L_arm);
  c.delta_f = -c.gamma_f;
  return c;
}

struct NRange {
  int n_min = 0;
  int n_max = -1;  // empty when n_max < n_min
};

// FSR indices admissible across a whole L_src interval: the smallest n that
// still reaches delta_min at the longest SRC, and the largest n that stays
// below delta_max at the shortest SRC.
inline NRange admissible_n_range(double phi, double L_src_min,
                                 double L_src_max, double delta_min,
                                 double delta_max) {
  NRange r;
  r.n_min = static_cast<int>(
      std::ceil((delta_min * L_src_max / speed_of_light - phi) / pi));
  r.n_max = static_cast<int>(
      std::floor((delta_max * L_src_min / speed_of_light - phi) / pi));
  return r;
}

// Enumerate every (phi_approx, n) on the centered step lattice around
// phi_exact whose pump detuning lands inside [delta_min, delta_max].
// phi_exact is recovered from the bandwidth target for the given params.
inline void enumerate_candidates(
    const InterferometerParams& p, double phi_window, double phi_step,
    double delta_min, double delta_max,
    const std::function<void(const TuningCandidate&)>& sink) {
  if (!(phi_window >= 0.0))
    throw std::domain_error("enumerate_candidates: phi_window must be >= 0");
  if (!(phi_step > 0.0))
    throw std::domain_error("enumerate_candidates: phi_step must be positive");
  const FilterTarget target = target_gamma_f(p);
  const double phi_exact =
      solve_phi_exact(target.gamma_f, p.T_itm, p.T_srm, p.L_arm);
  const long half = static_cast<long>(std::floor(phi_window / phi_step + 1e-9));
  for (long j = -half; j <= half; ++j) {
    const double phi = phi_exact + static_cast<double>(j) * phi_step;
    const int n_lo = static_cast<int>(
        std::ceil((delta_min * p.L_src / speed_of_light - phi) / pi));
    const int n_hi = static_cast<int>(
        std::floor((delta_max * p.L_src / speed_of_light - phi) / pi));
    for (int n = n_lo; n <= n_hi; ++n) {
      TuningCandidate c = make_candidate(p, p.L_arm, p.L_src, phi, n);
      if (c.delta >= delta_min && c.delta <= delta_max) sink(c);
    }
  }
}

inline std::vector<TuningCandidate> enumerate_candidates(
    const InterferometerParams& p, double phi_window, double phi_step,
    double delta_min, double delta_max) {
  std::vector<TuningCandidate> out;
  enumerate_candidates(p, phi_window, phi_step, delta_min, delta_max,
                       [&out](const TuningCandidate& c) { out.push_back(c); });
  return out;
}

namespace detail {

// 2 omega L / c reduced modulo 2 pi. The raw phase is ~1e11 rad, so the
// reduction runs in extended precision to keep the wrapped value good to
// ~1e-8 rad instead of ~1e-5.
inline double round_trip_phase_mod_2pi(double omega, double length) {
  constexpr long double two_pi_l = 6.283185307179586476925286766559L;
  const long double x = 2.0L * static_cast<long double>(omega) *
                        static_cast<long double>(length) /
                        static_cast<long double>(speed_of_light);
  long double w = fmodl(x, two_pi_l);
  if (w < 0.0L) w += two_pi_l;
  return static_cast<double>(w);
}

}  // namespace detail

// Idler resonance residual at microscopic offsets (dL_arm, dL_src) from the
// candidate's macroscopic lengths:
//   wrap( 2 (w0 + Delta + delta_f) (L_arm + dL_arm) / c + arg r_src ) in (-pi, pi].
// The SRC offset enters through the idler phase, phi = phi_approx +
// Delta dL_src / c, from which gamma_f and delta_f are recomputed. Zero means
// the effective cavity is resonant at w0 + Delta + delta_f for some integer
// mode number.
inline double resonance_residual_at(const TuningCandidate& c,
                                    const InterferometerParams& p,
                                    double dL_arm, double dL_src) {
  const double phi_eff = c.phi_approx + c.delta * dL_src / speed_of_light;
  const double gf = gamma_f_of_phi(phi_eff, p.T_itm, p.T_srm, c.L_arm);
  const double omega_res = p.omega0() + c.delta - gf;  // delta_f = -gamma_f
  const double carrier =
      detail::round_trip_phase_mod_2pi(omega_res, c.L_arm + dL_arm);
  const std::complex<double> r =
      src_response(phi_eff, p.T_itm, p.T_srm).r_eff;
  return wrap_pi(carrier + std::arg(r));
}

inline double resonance_residual(const TuningCandidate& c,
                                 const InterferometerParams& p) {
  return resonance_residual_at(c, p, 0.0, 0.0);
}

// Microscopic corrections attached to an accepted candidate. Both lengths sit
// on the lambda0/2 lattice so the carrier stays resonant in the arm and the
// carrier SRC condition (w0 L_src / c = 0 mod pi) is preserved.
struct MicroTuning {
  double dL_arm = 0.0;         // m
  double dL_src = 0.0;         // m
  double residual_phase = 0.0; // rad, idler resonance residual after tuning
};

struct Tolerances {
  double resonance_phase_rad = 1e-4;  // accepted |residual| after tuning
  double dphi_budget_rad = 0.02;      // rotation-error budget over the band
  double micro_bound_m = 0.01;        // strict bound on |dL_arm|, |dL_src|
  double phi_src_budget_rad = 0.002;  // |phi_src(after) - phi_exact| bound
};

namespace detail {

// Largest step count j with |j| * step strictly below bound.
inline long max_lattice_steps(double bound, double step) {
  long j = static_cast<long>(std::floor(bound / step));
  while (j > 0 && static_cast<double>(j) * step >= bound) --j;
  return j;
}

}  // namespace detail

// Search for carrier-quantized microscopic corrections that bring the idler
// resonance residual below tolerance.
//
// Both knobs move on the lambda0/2 lattice. An arm step changes the residual
// by exactly p = (Delta + delta_f) lambda0 / c (the carrier part of the
// round-trip phase advances by a full 2 pi), so for a fixed SRC step count k
// the best arm count j is computed directly, not searched. An SRC step
// changes the residual indirectly, through arg r_src(phi) and delta_f(phi);
// the scan over k walks outward from k = 0 (ordered by |k|, positive first)
// and is restricted to the k-interval where a linear model of the residual
// says the arm knob can reach zero, padded and capped so the scan stays
// bounded. Selection is deterministic: the smallest |k| whose exactly
// re-evaluated residual passes tolerance wins, with j already optimal for
// that k. Every constraint on the returned tuning is re-checked against the
// exact residual, never trusted from the model.
inline std::optional<MicroTuning> micro_tune(const TuningCandidate& c,
                                             const InterferometerParams& p,
                                             const Tolerances& tol) {
  const double half_wave = 0.5 * p.lambda0;
  const long j_max = detail::max_lattice_steps(tol.micro_bound_m, half_wave);
  if (j_max < 0) return std::nullopt;

  const FilterTarget target = target_gamma_f(p);
  double phi_exact;
  try {
    phi_exact = solve_phi_exact(target.gamma_f, p.T_itm, p.T_srm, c.L_arm);
  } catch (const std::domain_error&) {
    return std::nullopt;
  }

  // SRC step range: inside the 1 cm bound and keeping phi_src within budget
  // of phi_exact.
  const double phi_per_src_step = c.delta * half_wave / speed_of_light;
  long k_lo = -j_max, k_hi = j_max;
  if (phi_per_src_step > 0.0) {
    const double lo =
        (phi_exact - tol.phi_src_budget_rad - c.phi_approx) / phi_per_src_step;
    const double hi =
        (phi_exact + tol.phi_src_budget_rad - c.phi_approx) / phi_per_src_step;
    k_lo = std::max(k_lo, static_cast<long>(std::ceil(lo - 1e-9)));
    k_hi = std::min(k_hi, static_cast<long>(std::floor(hi + 1e-9)));
  }
  if (k_lo > k_hi) return std::nullopt;

  const auto arm_step_phase = [&](long k) {
    const double phi_eff =
        c.phi_approx + c.delta * (static_cast<double>(k) * half_wave) /
                           speed_of_light;
    const double gf = gamma_f_of_phi(phi_eff, p.T_itm, p.T_srm, c.L_arm);
    return (c.delta - gf) * p.lambda0 / speed_of_light;
  };

  const auto exact = [&](long j, long k) {
    return resonance_residual_at(c, p, static_cast<double>(j) * half_wave,
                                 static_cast<double>(k) * half_wave);
  };

  // Residual slope per SRC step, from a two-point probe.
  const double b0 = exact(0, std::min(std::max<long>(0, k_lo), k_hi));
  const long k_probe_base = std::min(std::max<long>(0, k_lo), k_hi);
  const long k_probe = (k_probe_base + 1 <= k_hi) ? k_probe_base + 1
                                                  : k_probe_base - 1;
  double slope = 0.0;
  if (k_probe >= k_lo && k_probe <= k_hi && k_probe != k_probe_base)
    slope = (exact(0, k_probe) - b0) / static_cast<double>(k_probe - k_probe_base);

  // k-interval where the arm knob can plausibly cancel the residual.
  const double p0 = arm_step_phase(k_probe_base);
  const double reach = static_cast<double>(j_max) * p0;
  long scan_lo = k_lo, scan_hi = k_hi;
  if (std::abs(slope) > 1e-18) {
    const double a = (-reach - b0) / slope + k_probe_base;
    const double b = (reach - b0) / slope + k_probe_base;
    scan_lo = std::max(k_lo, static_cast<long>(std::floor(std::min(a, b))) - 16);
    scan_hi = std::min(k_hi, static_cast<long>(std::ceil(std::max(a, b))) + 16);
    if (scan_lo > scan_hi) return std::nullopt;
  } else if (std::abs(b0) > reach + 16.0 * p0) {
    return std::nullopt;
  }

  const auto try_k = [&](long k) -> std::optional<MicroTuning> {
    const double base = exact(0, k);
    const double step = arm_step_phase(k);
    long j = static_cast<long>(std::llround(-base / step));
    if (j > j_max) j = j_max;
    if (j < -j_max) j = -j_max;
    double res = exact(j, k);
    for (int iter = 0; iter < 4; ++iter) {
      const long adjust = static_cast<long>(std::llround(-res / step));
      if (adjust == 0) break;
      long j2 = j + adjust;
      if (j2 > j_max) j2 = j_max;
      if (j2 < -j_max) j2 = -j_max;
      if (j2 == j) break;
      j = j2;
      res = exact(j, k);
    }
    if (std::abs(res) > tol.resonance_phase_rad) return std::nullopt;
    MicroTuning m;
    m.dL_arm = static_cast<double>(j) * half_wave;
    m.dL_src = static_cast<double>(k) * half_wave;
    m.residual_phase = res;
    // Re-check every acceptance condition on the exact values.
    if (!(std::abs(m.dL_arm) < tol.micro_bound_m)) return std::nullopt;
    if (!(std::abs(m.dL_src) < tol.micro_bound_m)) return std::nullopt;
    const double phi_after = c.phi_approx + c.delta * m.dL_src / speed_of_light;
    if (std::abs(phi_after - phi_exact) > tol.phi_src_budget_rad)
      return std::nullopt;
    return m;
  };

  // Walk k outward by |k| (positive first) so the smallest |dL_src| wins.
  int budget = 256;
  const long max_radius = std::max(std::labs(scan_lo), std::labs(scan_hi));
  for (long radius = 0; radius <= max_radius && budget > 0; ++radius) {
    for (const long k : {radius, -radius}) {
      if (k < scan_lo || k > scan_hi) continue;
      if (auto m = try_k(k)) return m;
      if (--budget <= 0) break;
      if (radius == 0) break;  // +0 and -0 coincide
    }
  }
  return std::nullopt;
}

}  // namespace eprsq
