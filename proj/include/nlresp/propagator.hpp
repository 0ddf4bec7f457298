#pragma once

// Interval-specific time-local master equations for the R2 pathway.
//
// Each interval of the third-order response gets its own projector and hence
// its own scalar equation d rho / dt = a(t) rho:
//   first  (tau): d rho_gi / dtau = [ i w_ig - gdot*_ii(tau) ] rho_gi
//   second (T):   d rho_ji / dT   = [-i(w_jg - w_ig) + K2(T, tau)] rho_ji
//   third  (t):   d rho_jg / dt   = [-i w_jg + K3(t, T, tau)] rho_jg
// With the parametric projectors these reproduce the second-cumulant R2
// exactly; chaining the three reduced propagators rebuilds the full field.
// The bare oscillation -i w is propagated exactly and RK4 handles the bath
// part, so without a bath the propagated field is exact in any frame.

#include "nlresp/cumulant.hpp"

#include <functional>
#include <string>
#include <string_view>

namespace nlresp {

enum class Interval { First, Second, Third };

/// A relaxation coefficient together with the arguments it was evaluated at.
struct RelaxationCoeff {
    complex value;
    Interval interval;
    double t_fs = 0.0;
    double waiting_fs = 0.0;
    double tau_fs = 0.0;
};

/// K3^(ji)(t,T,tau) = -gdot*_ij(t) + gdot*_ij(t+T+tau) - gdot_jj(t+T).
complex k3(const SystemSpec& sys, const PathwaySpec& pathway, double t_fs, double waiting_fs, double tau_fs);

/// K2^(ji)(T,tau) = gdot_ij(T) - gdot*_ii(T+tau) - gdot_jj(T) + gdot*_ij(T+tau).
/// Vanishes identically for i == j.
complex k2(const SystemSpec& sys, const PathwaySpec& pathway, double waiting_fs, double tau_fs);

/// Second-cumulant value of the projector coefficient I_{T+tau}(t) for level i:
///   gdot_ii(t+T) - gdot_ii(t) - gdot*_ii(t+T+tau) + gdot*_ii(t).
/// The normalization beta_tau = exp(g*_ii(tau)) of the second-coherence
/// projector has already cancelled against Tr{U_gi(tau) W_eq} here.
complex coeff_I(const SystemSpec& sys, std::size_t level, double t_fs, double waiting_fs, double tau_fs);

/// Second-cumulant value of M_{T+tau}(t) = gdot_ii(t); independent of T, tau.
complex coeff_M(const SystemSpec& sys, std::size_t level, double t_fs);

/// Full rate a(.) of the given interval including the oscillating part,
/// evaluated at the interval's running time `s`.
RelaxationCoeff relaxation(const SystemSpec& sys, const PathwaySpec& pathway, Interval interval, double s_fs,
                           double waiting_fs, double tau_fs);

struct OdeSolution {
    TimeGrid axis;
    std::vector<complex> values;
    std::string scheme = "rk4";
    double step_fs = 0.0; ///< RK4 step actually used (last full step)
};

/// Fixed-step classical RK4 for y' = [free_rate + rate(s)] y from y(0) = initial,
/// reported on `grid`. The constant free_rate (the bare oscillation) is
/// integrated exactly: RK4 runs on z = exp(-free_rate s) y. The step is shrunk
/// to divide the grid spacing when rk_step is finer than the grid; when it is
/// coarser, grid points between RK nodes come from cubic Hermite interpolation
/// using z' = rate * z.
OdeSolution integrate_linear(const std::function<complex(double)>& rate, complex initial, const TimeGrid& grid,
                             double rk_step_fs, complex free_rate = {});

/// First interval from rho_gi(0) = 1; analytic solution exp(i w_ig tau - g*_ii(tau)).
OdeSolution propagate_first(const SystemSpec& sys, std::size_t level, const TimeGrid& tau_grid,
                            double rk_step_fs = 1.0);

/// Second interval at fixed tau from the supplied initial coherence.
OdeSolution propagate_second(const SystemSpec& sys, const PathwaySpec& pathway, const TimeGrid& waiting_grid,
                             double tau_fs, complex initial, double rk_step_fs = 1.0);

/// Third interval from the supplied initial value.
OdeSolution propagate_third(const SystemSpec& sys, const PathwaySpec& pathway, const TimeGrid& t_grid,
                            double waiting_fs, double tau_fs, complex initial, double rk_step_fs = 1.0);

/// Third interval seeded with r2_initial(tau, T).
OdeSolution propagate_third(const SystemSpec& sys, const PathwaySpec& pathway, const TimeGrid& t_grid,
                            double waiting_fs, double tau_fs, double rk_step_fs = 1.0);

struct MasterOptions {
    double rk_step_fs = 1.0;
    unsigned jobs = 1;
    /// Relative mismatch between the chained seed and r2_initial above which
    /// the closed-form initial condition is used instead.
    double seed_tolerance = 1e-4;
    /// Receives seed-mismatch diagnostics; called under a lock.
    std::function<void(std::string_view)> on_diagnostic;
};

/// Rebuilds R2 on the (tau, t) grid by chaining the three propagations:
/// |d_i|^2 |d_j|^2 * U_third(t) U_second(T) U_first(tau) applied to rho_0 = 1.
ResponseField r2_via_master(const SystemSpec& sys, const PathwaySpec& pathway, const TimeGrid& tau_axis,
                            const TimeGrid& t_axis, double waiting_fs, const MasterOptions& options = {});

} // namespace nlresp
