#pragma once

// Physical constants (SI). CODATA values, kept to at least 7 significant
// figures so derived interaction strengths are stable across rebuilds.
namespace pbsim::constants {

inline constexpr double hbar = 1.054571817e-34;    // J s
inline constexpr double he4_mass = 6.6464731e-27;  // kg
inline constexpr double standard_gravity = 9.81;   // m s^-2

}  // namespace pbsim::constants
