#include "nlresp/cumulant.hpp"

#include "nlresp/errors.hpp"
#include "nlresp/parallel.hpp"

#include <cmath>
#include <string>

namespace nlresp {

namespace {

constexpr complex I{0.0, 1.0};

void require_times(double tau, double waiting, double t)
{
    if (!(tau >= 0.0) || !(waiting >= 0.0) || !(t >= 0.0)) {
        throw DomainError("response function times must be non-negative");
    }
}

void require_pathway(const SystemSpec& sys, const PathwaySpec& p)
{
    if (p.i >= sys.num_levels() || p.j >= sys.num_levels()) {
        throw DomainError("pathway level index out of range (i=" + std::to_string(p.i + 1) +
                          ", j=" + std::to_string(p.j + 1) + ")");
    }
}

template <typename Point>
ResponseField sweep(const SystemSpec& sys, const PathwaySpec& pathway, const TimeGrid& tau_axis,
                    const TimeGrid& t_axis, double waiting, Provenance provenance, unsigned jobs, Point point)
{
    ResponseField field(tau_axis, t_axis, waiting, pathway, provenance);
    require_pathway(sys, pathway);
    parallel_for(tau_axis.count, jobs, [&](std::size_t m) {
        for (std::size_t n = 0; n < t_axis.count; ++n) {
            field(m, n) = point(tau_axis.at(m), t_axis.at(n));
        }
    });
    return field;
}

} // namespace

void TimeGrid::validate() const
{
    if (!(step_fs > 0.0) || !std::isfinite(step_fs)) {
        throw DomainError("time grid step must be > 0");
    }
    if (count == 0) {
        throw DomainError("time grid must have at least one point");
    }
}

void SystemSpec::validate() const
{
    if (omega.size() != dipole.size() || omega.size() != correlation.size()) {
        throw DomainError("system: omega, dipole and correlation sizes differ");
    }
    if (omega.empty()) {
        throw DomainError("system needs at least one excited level");
    }
    for (std::size_t k = 0; k < omega.size(); ++k) {
        if (!std::isfinite(omega[k])) {
            throw DomainError("system: non-finite transition frequency");
        }
        if (!(dipole[k] >= 0.0) || !std::isfinite(dipole[k])) {
            throw DomainError("system: dipole magnitudes must be finite and >= 0");
        }
    }
    if (!std::isfinite(carrier)) {
        throw DomainError("system: non-finite rotating-frame frequency");
    }
}

std::string_view to_string(Provenance p)
{
    switch (p) {
    case Provenance::Exact:
        return "exact";
    case Provenance::Rdm:
        return "rdm";
    case Provenance::Propagated:
        return "propagated";
    }
    return "unknown";
}

Provenance provenance_from_string(std::string_view name)
{
    if (name == "exact") {
        return Provenance::Exact;
    }
    if (name == "rdm") {
        return Provenance::Rdm;
    }
    if (name == "propagated") {
        return Provenance::Propagated;
    }
    throw DomainError("unknown provenance '" + std::string(name) + "'");
}

ResponseField::ResponseField(TimeGrid tau_axis, TimeGrid t_axis, double waiting_fs, PathwaySpec pathway,
                             Provenance provenance)
    : m_tau(tau_axis), m_t(t_axis), m_waiting(waiting_fs), m_pathway(pathway), m_provenance(provenance)
{
    m_tau.validate();
    m_t.validate();
    if (!(waiting_fs >= 0.0)) {
        throw DomainError("waiting time must be non-negative");
    }
    m_values.assign(m_tau.count * m_t.count, complex{});
}

complex linear_coherence(const SystemSpec& sys, std::size_t level, double t)
{
    if (level >= sys.num_levels()) {
        throw DomainError("level index out of range");
    }
    if (!(t >= 0.0)) {
        throw DomainError("linear coherence needs t >= 0");
    }
    return std::exp(-I * sys.frame_omega(level) * t - sys.correlation.g(level, level, t));
}

std::vector<complex> linear_response(const SystemSpec& sys, const TimeGrid& grid)
{
    grid.validate();
    std::vector<complex> out(grid.count, complex{});
    for (std::size_t k = 0; k < grid.count; ++k) {
        complex sum{};
        for (std::size_t i = 0; i < sys.num_levels(); ++i) {
            sum += sys.dipole[i] * sys.dipole[i] * linear_coherence(sys, i, grid.at(k));
        }
        out[k] = sum + std::conj(sum);
    }
    return out;
}

complex r2_exact(const SystemSpec& sys, const PathwaySpec& p, double tau, double waiting, double t)
{
    require_times(tau, waiting, t);
    require_pathway(sys, p);
    const auto& g = sys.correlation;
    const double wi = sys.frame_omega(p.i);
    const double wj = sys.frame_omega(p.j);
    const double weight = sys.dipole[p.i] * sys.dipole[p.i] * sys.dipole[p.j] * sys.dipole[p.j];

    const complex phase = -I * (wj * t + (wj - wi) * waiting - wi * tau);
    const complex memory = -std::conj(g.g(p.i, p.i, tau + waiting)) - g.g(p.j, p.j, waiting + t) +
                           std::conj(g.g(p.i, p.j, t + waiting + tau));
    const complex local =
        -std::conj(g.g(p.i, p.j, t)) - std::conj(g.g(p.i, p.j, tau)) + g.g(p.i, p.j, waiting);
    return weight * std::exp(phase + memory + local);
}

complex r2_rdm(const SystemSpec& sys, const PathwaySpec& p, double tau, double waiting, double t)
{
    require_times(tau, waiting, t);
    require_pathway(sys, p);
    if (p.i != p.j) {
        throw UnsupportedPathway("RDM response is defined only for i == j pathways");
    }
    const auto& g = sys.correlation;
    const double w = sys.frame_omega(p.i);
    const double d2 = sys.dipole[p.i] * sys.dipole[p.i];
    return d2 * d2 * std::exp(-I * w * (t - tau) - std::conj(g.g(p.i, p.i, tau)) - g.g(p.i, p.i, t));
}

complex r2_initial(const SystemSpec& sys, const PathwaySpec& pathway, double tau, double waiting)
{
    return r2_exact(sys, pathway, tau, waiting, 0.0);
}

ResponseField field_exact(const SystemSpec& sys, const PathwaySpec& pathway, const TimeGrid& tau_axis,
                          const TimeGrid& t_axis, double waiting, unsigned jobs)
{
    return sweep(sys, pathway, tau_axis, t_axis, waiting, Provenance::Exact, jobs,
                 [&](double tau, double t) { return r2_exact(sys, pathway, tau, waiting, t); });
}

ResponseField field_rdm(const SystemSpec& sys, const PathwaySpec& pathway, const TimeGrid& tau_axis,
                        const TimeGrid& t_axis, double waiting, unsigned jobs)
{
    if (pathway.i != pathway.j) {
        throw UnsupportedPathway("RDM response is defined only for i == j pathways");
    }
    return sweep(sys, pathway, tau_axis, t_axis, waiting, Provenance::Rdm, jobs,
                 [&](double tau, double t) { return r2_rdm(sys, pathway, tau, waiting, t); });
}

} // namespace nlresp
