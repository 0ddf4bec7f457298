#include "nlresp/propagator.hpp"

#include "nlresp/errors.hpp"
#include "nlresp/parallel.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

namespace nlresp {

namespace {

constexpr complex I{0.0, 1.0};

void require_nonnegative(double a, double b, double c)
{
    if (!(a >= 0.0) || !(b >= 0.0) || !(c >= 0.0)) {
        throw DomainError("relaxation coefficients need non-negative times");
    }
}

void require_level(const SystemSpec& sys, std::size_t level)
{
    if (level >= sys.num_levels()) {
        throw DomainError("level index out of range");
    }
}

void require_pathway(const SystemSpec& sys, const PathwaySpec& p)
{
    require_level(sys, p.i);
    require_level(sys, p.j);
}

complex rk4_step(const std::function<complex(double)>& rate, double s, complex y, double h)
{
    const complex a0 = rate(s);
    const complex a_half = rate(s + 0.5 * h);
    const complex a1 = rate(s + h);
    const complex k1 = a0 * y;
    const complex k2 = a_half * (y + 0.5 * h * k1);
    const complex k3 = a_half * (y + 0.5 * h * k2);
    const complex k4 = a1 * (y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

complex k3(const SystemSpec& sys, const PathwaySpec& p, double t, double waiting, double tau)
{
    require_nonnegative(t, waiting, tau);
    require_pathway(sys, p);
    const auto& g = sys.correlation;
    return -std::conj(g.gdot(p.i, p.j, t)) + std::conj(g.gdot(p.i, p.j, t + waiting + tau)) -
           g.gdot(p.j, p.j, t + waiting);
}

complex k2(const SystemSpec& sys, const PathwaySpec& p, double waiting, double tau)
{
    require_nonnegative(0.0, waiting, tau);
    require_pathway(sys, p);
    const auto& g = sys.correlation;
    // Grouped so the i == j case cancels exactly.
    return (g.gdot(p.i, p.j, waiting) - g.gdot(p.j, p.j, waiting)) +
           (std::conj(g.gdot(p.i, p.j, waiting + tau)) - std::conj(g.gdot(p.i, p.i, waiting + tau)));
}

complex coeff_I(const SystemSpec& sys, std::size_t level, double t, double waiting, double tau)
{
    require_nonnegative(t, waiting, tau);
    require_level(sys, level);
    const auto& g = sys.correlation;
    const std::size_t i = level;
    return g.gdot(i, i, t + waiting) - g.gdot(i, i, t) - std::conj(g.gdot(i, i, t + waiting + tau)) +
           std::conj(g.gdot(i, i, t));
}

complex coeff_M(const SystemSpec& sys, std::size_t level, double t)
{
    require_nonnegative(t, 0.0, 0.0);
    require_level(sys, level);
    return sys.correlation.gdot(level, level, t);
}

RelaxationCoeff relaxation(const SystemSpec& sys, const PathwaySpec& p, Interval interval, double s,
                           double waiting, double tau)
{
    switch (interval) {
    case Interval::First:
        require_nonnegative(s, 0.0, 0.0);
        require_level(sys, p.i);
        return {I * sys.frame_omega(p.i) - std::conj(sys.correlation.gdot(p.i, p.i, s)), interval, 0.0, 0.0, s};
    case Interval::Second:
        return {-I * (sys.frame_omega(p.j) - sys.frame_omega(p.i)) + k2(sys, p, s, tau), interval, 0.0, s, tau};
    case Interval::Third:
        return {-I * sys.frame_omega(p.j) + k3(sys, p, s, waiting, tau), interval, s, waiting, tau};
    }
    throw DomainError("unknown interval");
}

OdeSolution integrate_linear(const std::function<complex(double)>& rate, complex initial, const TimeGrid& grid,
                             double rk_step, complex free_rate)
{
    if (free_rate != complex{0.0, 0.0}) {
        OdeSolution sol = integrate_linear(rate, initial, grid, rk_step);
        for (std::size_t k = 1; k < grid.count; ++k) {
            sol.values[k] *= std::exp(free_rate * grid.at(k));
        }
        return sol;
    }
    if (!(rk_step > 0.0) || !std::isfinite(rk_step)) {
        throw DomainError("RK4 step must be > 0");
    }
    grid.validate();

    OdeSolution sol{grid, std::vector<complex>(grid.count), "rk4", 0.0};
    sol.values[0] = initial;
    if (grid.count == 1) {
        sol.step_fs = rk_step;
        return sol;
    }

    if (rk_step <= grid.step_fs * (1.0 + 1e-12)) {
        const auto substeps = static_cast<std::size_t>(std::ceil(grid.step_fs / rk_step - 1e-9));
        const double h = grid.step_fs / static_cast<double>(substeps);
        sol.step_fs = h;
        complex y = initial;
        for (std::size_t k = 1; k < grid.count; ++k) {
            const double s0 = grid.at(k - 1);
            for (std::size_t q = 0; q < substeps; ++q) {
                y = rk4_step(rate, s0 + h * static_cast<double>(q), y, h);
            }
            sol.values[k] = y;
        }
        return sol;
    }

    // RK mesh coarser than the output grid: one RK step spans `stride` grid
    // intervals; interior grid points come from the Hermite interpolant.
    const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(rk_step / grid.step_fs + 1e-9)));
    sol.step_fs = grid.step_fs * static_cast<double>(stride);
    complex y = initial;
    std::size_t k0 = 0;
    while (k0 + 1 < grid.count) {
        const std::size_t span = std::min(stride, grid.count - 1 - k0);
        const double s0 = grid.at(k0);
        const double h = grid.step_fs * static_cast<double>(span);
        const complex y1 = rk4_step(rate, s0, y, h);
        const complex d0 = rate(s0) * y;
        const complex d1 = rate(s0 + h) * y1;
        for (std::size_t q = 1; q < span; ++q) {
            const double u = static_cast<double>(q) / static_cast<double>(span);
            const double u2 = u * u;
            const double u3 = u2 * u;
            sol.values[k0 + q] = (2.0 * u3 - 3.0 * u2 + 1.0) * y + (u3 - 2.0 * u2 + u) * h * d0 +
                                 (-2.0 * u3 + 3.0 * u2) * y1 + (u3 - u2) * h * d1;
        }
        sol.values[k0 + span] = y1;
        y = y1;
        k0 += span;
    }
    return sol;
}

OdeSolution propagate_first(const SystemSpec& sys, std::size_t level, const TimeGrid& tau_grid, double rk_step)
{
    require_level(sys, level);
    return integrate_linear(
        [&](double s) { return -std::conj(sys.correlation.gdot(level, level, s)); }, complex{1.0, 0.0}, tau_grid,
        rk_step, I * sys.frame_omega(level));
}

OdeSolution propagate_second(const SystemSpec& sys, const PathwaySpec& pathway, const TimeGrid& waiting_grid,
                             double tau, complex initial, double rk_step)
{
    require_pathway(sys, pathway);
    return integrate_linear(
        [&](double s) { return k2(sys, pathway, s, tau); }, initial, waiting_grid, rk_step,
        -I * (sys.frame_omega(pathway.j) - sys.frame_omega(pathway.i)));
}

OdeSolution propagate_third(const SystemSpec& sys, const PathwaySpec& pathway, const TimeGrid& t_grid,
                            double waiting, double tau, complex initial, double rk_step)
{
    require_pathway(sys, pathway);
    require_nonnegative(0.0, waiting, tau);
    return integrate_linear(
        [&](double s) { return k3(sys, pathway, s, waiting, tau); }, initial, t_grid, rk_step,
        -I * sys.frame_omega(pathway.j));
}

OdeSolution propagate_third(const SystemSpec& sys, const PathwaySpec& pathway, const TimeGrid& t_grid,
                            double waiting, double tau, double rk_step)
{
    return propagate_third(sys, pathway, t_grid, waiting, tau, r2_initial(sys, pathway, tau, waiting), rk_step);
}

ResponseField r2_via_master(const SystemSpec& sys, const PathwaySpec& pathway, const TimeGrid& tau_axis,
                            const TimeGrid& t_axis, double waiting, const MasterOptions& options)
{
    require_pathway(sys, pathway);
    ResponseField field(tau_axis, t_axis, waiting, pathway, Provenance::Propagated);

    const double weight = sys.dipole[pathway.i] * sys.dipole[pathway.i] * sys.dipole[pathway.j] *
                          sys.dipole[pathway.j];
    const OdeSolution first = propagate_first(sys, pathway.i, tau_axis, options.rk_step_fs);
    const TimeGrid waiting_grid = waiting > 0.0 ? TimeGrid{waiting, 2} : TimeGrid{1.0, 1};

    std::mutex diag_mutex;
    parallel_for(tau_axis.count, options.jobs, [&](std::size_t m) {
        const double tau = tau_axis.at(m);
        const OdeSolution second =
            propagate_second(sys, pathway, waiting_grid, tau, first.values[m], options.rk_step_fs);
        complex seed = weight * second.values.back();

        const complex stated = r2_initial(sys, pathway, tau, waiting);
        if (std::abs(seed - stated) > options.seed_tolerance * std::abs(stated) + 1e-300) {
            if (options.on_diagnostic) {
                std::ostringstream msg;
                msg << "chained seed " << seed << " differs from R2(0,T,tau) " << stated << " at tau=" << tau
                    << " fs, T=" << waiting << " fs; using the closed-form initial condition";
                std::lock_guard lock(diag_mutex);
                options.on_diagnostic(msg.str());
            }
            seed = stated;
        }

        const OdeSolution third = propagate_third(sys, pathway, t_axis, waiting, tau, seed, options.rk_step_fs);
        for (std::size_t n = 0; n < t_axis.count; ++n) {
            field(m, n) = third.values[n];
        }
    });
    return field;
}

} // namespace nlresp
