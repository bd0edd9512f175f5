// Gaussian-state oracle in the two-photon formalism: EPR covariance over the
// signal/idler quadratures (a1, a2, b1, b2), ponderomotive shear on the
// signal, ellipse rotation on the idler, and conditioning of the signal phase
// quadrature on an idler homodyne measurement. Vacuum variance is 1 per
// quadrature. Used to cross-check the closed-form sensitivity.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "eprsq/params.hpp"
#include "eprsq/physics.hpp"

namespace eprsq {

struct GaussianState {
  Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();

  bool is_symmetric(double tol = 1e-12) const {
    return (cov - cov.transpose()).cwiseAbs().maxCoeff() <= tol;
  }

  bool is_positive_semidefinite(double tol = 1e-10) const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(cov);
    return es.eigenvalues().minCoeff() >= -tol;
  }

  // Heisenberg bound cov + iJ >= 0, with J the symplectic form
  // diag([[0,1],[-1,0]], [[0,1],[-1,0]]) matching vacuum variance 1.
  bool satisfies_uncertainty(double tol = 1e-10) const {
    Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
    J(0, 1) = 1.0; J(1, 0) = -1.0;
    J(2, 3) = 1.0; J(3, 2) = -1.0;
    Eigen::Matrix4cd m =
        cov.cast<std::complex<double>>() +
        std::complex<double>(0.0, 1.0) * J.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
    return es.eigenvalues().minCoeff() >= -tol;
  }
};

// Rotation acting on a quadrature pair: x_theta = x1 cos(theta) + x2 sin(theta)
// as the first row.
inline Eigen::Matrix2d rotate_quadrature(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), std::sin(theta),
      -std::sin(theta), std::cos(theta);
  return r;
}

inline Eigen::Matrix2d signal_shear(double kappa) {
  Eigen::Matrix2d m;
  m << 1.0, 0.0,
      -kappa, 1.0;
  return m;
}

// Two-mode squeezed vacuum over (a1, a2, b1, b2): the joint quadratures
// a1 - b1 and a2 + b2 carry variance 2 e^{-2r}.
inline GaussianState epr_state(double r) {
  if (!(r >= 0.0)) throw std::domain_error("epr_state: r must be >= 0");
  const double ch = std::cosh(2.0 * r);
  const double sh = std::sinh(2.0 * r);
  GaussianState s;
  s.cov << ch, 0.0, sh, 0.0,
           0.0, ch, 0.0, -sh,
           sh, 0.0, ch, 0.0,
           0.0, -sh, 0.0, ch;
  return s;
}

// Block-diagonal transfer: ponderomotive shear (A2 = a2 - K a1) on the signal,
// ellipse rotation by phi_rot on the idler.
inline GaussianState apply_transfer(const GaussianState& s, double kappa,
                                    double phi_rot) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.block<2, 2>(0, 0) = signal_shear(kappa);
  m.block<2, 2>(2, 2) = rotate_quadrature(phi_rot);
  GaussianState out;
  out.cov = m * s.cov * m.transpose();
  return out;
}

// Variance of the signal phase quadrature A2 after a homodyne measurement of
// the idler quadrature b_theta = b1 cos(theta) + b2 sin(theta).
inline double conditional_signal_variance(const GaussianState& s,
                                          double theta_measure) {
  const Eigen::Vector2d u(std::cos(theta_measure), std::sin(theta_measure));
  const double var_meas = u.dot(s.cov.block<2, 2>(2, 2) * u);
  if (!(var_meas > 1e-300))
    throw std::domain_error(
        "conditional_signal_variance: measured quadrature is degenerate");
  const Eigen::Vector2d cross = s.cov.block<2, 2>(0, 2) * u;  // Cov((A1,A2), b_theta)
  return s.cov(1, 1) - cross(1) * cross(1) / var_meas;
}

// Idler readout policy for the oracle.
//   PhaseQuadrature: fixed homodyne of B2, the configuration the scheme runs
//                    with; rotation errors show up as excess noise.
//   Optimal:         per-frequency angle maximizing the squared correlation
//                    with A2; absorbs any rotation error and returns the
//                    conditional-squeezing bound.
enum class IdlerReadout { PhaseQuadrature, Optimal };

// Angle of the idler quadrature most correlated with A2 (maximizes
// Cov(A2, b_theta)^2 / Var(b_theta)).
inline double optimal_idler_angle(const GaussianState& s) {
  const Eigen::Matrix2d b = s.cov.block<2, 2>(2, 2);
  const Eigen::Vector2d v(s.cov(1, 2), s.cov(1, 3));  // Cov(A2, (b1,b2))
  const Eigen::Vector2d u = b.inverse() * v;
  if (u.norm() < 1e-300) return 0.5 * pi;  // no correlation; angle irrelevant
  return std::atan2(u(1), u(0));
}

// Strain-referred noise at angular frequency omega from the full Gaussian
// chain: EPR state -> [shear K, rotation phi_rot] -> idler conditioning.
// The signal gain sqrt(2K)/h_SQL converts the conditional variance of A2 to
// a one-sided strain power spectral density.
inline double oracle_sensitivity_with_rotation(
    const InterferometerParams& p, double omega, double rotation,
    IdlerReadout readout = IdlerReadout::PhaseQuadrature) {
  if (!(omega > 0.0))
    throw std::domain_error("oracle_sensitivity: omega must be positive");
  const double kappa = kappa_lbi(p, omega);
  const GaussianState out = apply_transfer(epr_state(p.squeeze_r), kappa, rotation);
  const double theta = readout == IdlerReadout::PhaseQuadrature
                           ? 0.5 * pi
                           : optimal_idler_angle(out);
  const double var = conditional_signal_variance(out, theta);
  const double hs = h_sql(p, omega);
  return var * hs * hs / (2.0 * kappa);
}

inline double oracle_sensitivity(
    const InterferometerParams& p, double omega, const FilterTarget& target,
    IdlerReadout readout = IdlerReadout::PhaseQuadrature) {
  return oracle_sensitivity_with_rotation(p, omega, phi_rot(omega, target),
                                          readout);
}

}  // namespace eprsq
