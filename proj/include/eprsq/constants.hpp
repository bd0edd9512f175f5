// Physical constants (CODATA 2018). Fixed values, never configurable:
// digit-level reproducibility of every derived quantity depends on them.
#pragma once

namespace eprsq {

inline constexpr double speed_of_light = 299792458.0;   // m/s, exact
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double pi = 3.14159265358979323846;

}  // namespace eprsq
