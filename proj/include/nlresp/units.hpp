#pragma once

#include <numbers>

// Internal unit system: time in fs, angular frequency in rad/fs, hbar = 1.
namespace nlresp::units {

inline constexpr double speed_of_light_cm_per_fs = 2.99792458e-5;
inline constexpr double boltzmann_cm_per_kelvin = 0.6950348;

/// rad/fs per cm^-1
inline constexpr double wavenumber_to_angular = 2.0 * std::numbers::pi * speed_of_light_cm_per_fs;

constexpr double from_wavenumber(double cm) { return cm * wavenumber_to_angular; }
constexpr double to_wavenumber(double rad_per_fs) { return rad_per_fs / wavenumber_to_angular; }

/// k_B T / hbar in rad/fs.
constexpr double thermal_frequency(double kelvin)
{
    return from_wavenumber(boltzmann_cm_per_kelvin * kelvin);
}

} // namespace nlresp::units
