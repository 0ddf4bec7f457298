#pragma once

#include "nlresp/bath.hpp"
#include "nlresp/cumulant.hpp"
#include "nlresp/units.hpp"

#include <vector>

namespace nlresp::testing {

/// lambda = 100 cm^-1, tau_corr = 100 fs, 300 K.
inline ObOParams reference_bath() { return ObOParams{100.0, 100.0, 300.0}; }

inline ObOParams no_bath() { return ObOParams{0.0, 100.0, 300.0}; }

/// Single two-level transition at `omega_cm`, rotating frame at `frame_cm`.
inline SystemSpec single_level(const LineBroadening& bath, double omega_cm = 10000.0, double frame_cm = 10000.0,
                               double dipole = 1.0)
{
    return SystemSpec{{units::from_wavenumber(omega_cm)},
                      {dipole},
                      CorrelationMatrix(bath, 1),
                      units::from_wavenumber(frame_cm)};
}

inline SystemSpec two_levels(const LineBroadening& bath, double c12, double w1_cm = 10000.0,
                             double w2_cm = 10300.0, double frame_cm = 10000.0)
{
    return SystemSpec{{units::from_wavenumber(w1_cm), units::from_wavenumber(w2_cm)},
                      {1.0, 1.0},
                      CorrelationMatrix(bath, 2, {1.0, c12, c12, 1.0}),
                      units::from_wavenumber(frame_cm)};
}

} // namespace nlresp::testing
