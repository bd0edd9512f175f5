// Interferometer description and the frequency-dependent filter target.
#pragma once

#include <stdexcept>
#include <string>

#include "eprsq/constants.hpp"

namespace eprsq {

// Convention for the sloshing frequency omega_s of the coupled arm/SRC system.
//   AsPrinted : omega_s = c T_itm / (2 sqrt(L_arm L_src))
//   SqrtT     : omega_s = c sqrt(T_itm) / (2 sqrt(L_arm L_src))
// The two differ by 1/sqrt(T_itm) (5x for T_itm = 0.04). SqrtT is the standard
// amplitude-transmissivity form and is the default; AsPrinted is kept selectable
// because published tables sometimes quote the other one.
enum class SloshingConvention { AsPrinted, SqrtT };

inline const char* to_string(SloshingConvention c) {
  return c == SloshingConvention::AsPrinted ? "as-printed" : "sqrt-t";
}

struct InterferometerParams {
  double L_arm = 1.0e4;     // arm cavity length, m
  double L_src = 100.0;     // signal recycling cavity length, m
  double mirror_mass = 150.0;  // kg
  double T_itm = 0.04;      // ITM power transmissivity
  double T_srm = 0.04;      // SRM power transmissivity
  double P_arm = 3.0e6;     // intra-cavity power, W
  double lambda0 = 1064e-9; // carrier wavelength, m
  double squeeze_r = 1.73;  // squeezing parameter (15 dB)
  SloshingConvention sloshing = SloshingConvention::SqrtT;

  double omega0() const { return 2.0 * pi * speed_of_light / lambda0; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0))
        throw std::invalid_argument(std::string(name) + " must be positive");
    };
    positive(L_arm, "L_arm");
    positive(L_src, "L_src");
    positive(mirror_mass, "mirror_mass");
    positive(P_arm, "P_arm");
    positive(lambda0, "lambda0");
    if (!(T_itm > 0.0 && T_itm < 1.0))
      throw std::invalid_argument("T_itm must be in (0,1)");
    if (!(T_srm > 0.0 && T_srm < 1.0))
      throw std::invalid_argument("T_srm must be in (0,1)");
    if (!(squeeze_r >= 0.0))
      throw std::invalid_argument("squeeze_r must be non-negative");
  }
};

// Effective bandwidth/detuning of the interferometer seen by the idler.
// delta_f = -gamma_f for the broadband single-filter operating point.
struct FilterTarget {
  double gamma_f = 0.0;  // rad/s, > 0
  double delta_f = 0.0;  // rad/s
};

}  // namespace eprsq
