#pragma once

// Closed-form second-cumulant response functions for pure-dephasing
// multilevel systems (no resonance coupling).

#include "nlresp/bath.hpp"
#include "nlresp/grid.hpp"

#include <string_view>
#include <vector>

namespace nlresp {

/// Electronic levels |i> with transition frequencies omega_ig (rad/fs) and
/// dipole magnitudes d_i, all coupled to one bath through `correlation`.
struct SystemSpec {
    std::vector<double> omega;
    std::vector<double> dipole;
    CorrelationMatrix correlation;
    /// Rotating-frame carrier subtracted from every omega_ig, rad/fs.
    double carrier = 0.0;

    std::size_t num_levels() const { return omega.size(); }
    double frame_omega(std::size_t i) const { return omega.at(i) - carrier; }
    void validate() const;
};

/// Level indices of the R2^(ji) pathway (0-based): i is the first-interval
/// coherence, j the third-interval coherence.
struct PathwaySpec {
    std::size_t i = 0;
    std::size_t j = 0;
};

enum class Provenance { Exact, Rdm, Propagated };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view name);

/// R2(tau, t) on a (tau, t) grid at fixed waiting time T, row-major in tau.
class ResponseField {
public:
    ResponseField(TimeGrid tau_axis, TimeGrid t_axis, double waiting_fs, PathwaySpec pathway, Provenance provenance);

    const TimeGrid& tau_axis() const { return m_tau; }
    const TimeGrid& t_axis() const { return m_t; }
    double waiting_time() const { return m_waiting; }
    const PathwaySpec& pathway() const { return m_pathway; }
    Provenance provenance() const { return m_provenance; }

    complex& operator()(std::size_t tau_index, std::size_t t_index) { return m_values[tau_index * m_t.count + t_index]; }
    complex operator()(std::size_t tau_index, std::size_t t_index) const
    {
        return m_values[tau_index * m_t.count + t_index];
    }
    const std::vector<complex>& values() const { return m_values; }

private:
    TimeGrid m_tau;
    TimeGrid m_t;
    double m_waiting;
    PathwaySpec m_pathway;
    Provenance m_provenance;
    std::vector<complex> m_values;
};

/// rho_ig(t) = exp(-i omega_ig t - g_ii(t)).
complex linear_coherence(const SystemSpec& sys, std::size_t level, double t_fs);

/// I(t) = sum_i |d_i|^2 rho_ig(t) + c.c. sampled on `grid`.
std::vector<complex> linear_response(const SystemSpec& sys, const TimeGrid& grid);

/// Exact second-cumulant R2^(ji)(t, T, tau):
///   |d_i|^2 |d_j|^2 exp(-i(w_jg t + (w_jg - w_ig) T - w_ig tau))
///   * exp(-g*_ii(tau+T) - g_jj(T+t) + g*_ij(t+T+tau))
///   * exp(-g*_ij(t) - g*_ij(tau) + g_ij(T)).
complex r2_exact(const SystemSpec& sys, const PathwaySpec& pathway, double tau_fs, double waiting_fs, double t_fs);

/// R2 obtained with the ground-state equilibrium projector in every interval:
///   |d_i|^4 exp(-i w_ig (t - tau)) exp(-g*_ii(tau) - g_ii(t)).
/// Defined for i == j only; throws UnsupportedPathway otherwise. The waiting
/// time is accepted for interface symmetry and does not enter.
complex r2_rdm(const SystemSpec& sys, const PathwaySpec& pathway, double tau_fs, double waiting_fs, double t_fs);

/// r2_exact at t = 0: the initial condition of the third interval.
complex r2_initial(const SystemSpec& sys, const PathwaySpec& pathway, double tau_fs, double waiting_fs);

ResponseField field_exact(const SystemSpec& sys, const PathwaySpec& pathway, const TimeGrid& tau_axis,
                          const TimeGrid& t_axis, double waiting_fs, unsigned jobs = 1);

ResponseField field_rdm(const SystemSpec& sys, const PathwaySpec& pathway, const TimeGrid& tau_axis,
                        const TimeGrid& t_axis, double waiting_fs, unsigned jobs = 1);

} // namespace nlresp
