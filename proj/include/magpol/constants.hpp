#pragma once

#include <numbers>

namespace magpol::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * pi;

// vacuum permeability [T m / A]
inline constexpr double mu0 = 4.0 * pi * 1e-7;

// Bohr magneton [J / T], CODATA 2018
inline constexpr double bohr_magneton = 9.2740100783e-24;

// default electron-like gyromagnetic ratio gamma/2pi [Hz/T]
inline constexpr double gamma_default = 28.0e9;

} // namespace magpol::constants
