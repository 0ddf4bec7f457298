#include "nlresp/spectra.hpp"

#include "nlresp/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace nlresp {

namespace {

std::size_t next_power_of_two(std::size_t n)
{
    std::size_t p = 1;
    while (p < n) {
        p <<= 1;
    }
    return p;
}

// In-place 1D complex transform of fixed length on an owned aligned buffer.
class Fft1D {
public:
    Fft1D(std::size_t n, int sign) : m_n(n)
    {
        m_buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        m_plan = fftw_plan_dft_1d(static_cast<int>(n), m_buf, m_buf, sign, FFTW_ESTIMATE);
    }
    ~Fft1D()
    {
        fftw_destroy_plan(m_plan);
        fftw_free(m_buf);
    }
    Fft1D(const Fft1D&) = delete;
    Fft1D& operator=(const Fft1D&) = delete;

    complex* data() { return reinterpret_cast<complex*>(m_buf); }
    std::size_t size() const { return m_n; }
    void run() { fftw_execute(m_plan); }

private:
    std::size_t m_n;
    fftw_complex* m_buf = nullptr;
    fftw_plan m_plan = nullptr;
};

// Ascending axis carrier + 2 pi k / (n dt), k = -n/2 .. n/2-1.
std::vector<double> frequency_axis(std::size_t n, double dt, double carrier)
{
    std::vector<double> axis(n);
    const double dw = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
    const auto half = static_cast<long long>(n / 2);
    for (std::size_t k = 0; k < n; ++k) {
        axis[k] = carrier + dw * static_cast<double>(static_cast<long long>(k) - half);
    }
    return axis;
}

// FFT output index of the shifted (ascending) position k.
std::size_t unshift(std::size_t k, std::size_t n) { return (k + n - n / 2) % n; }

std::vector<double> sample_weights(Window window, std::size_t count)
{
    auto w = window_weights(window, count);
    w[0] *= 0.5;
    return w;
}

} // namespace

std::string_view to_string(Window w) { return w == Window::None ? "none" : "cos2"; }

Window window_from_string(std::string_view name)
{
    if (name == "none") {
        return Window::None;
    }
    if (name == "cos2") {
        return Window::Cos2;
    }
    throw DomainError("unknown window '" + std::string(name) + "' (expected none or cos2)");
}

std::vector<double> window_weights(Window window, std::size_t count)
{
    std::vector<double> w(count, 1.0);
    if (window == Window::None) {
        return w;
    }
    const std::size_t taper = count / 5;
    if (taper == 0) {
        return w;
    }
    const std::size_t start = count - taper;
    for (std::size_t n = start; n < count; ++n) {
        const double x = 0.5 * std::numbers::pi * static_cast<double>(n - start + 1) / static_cast<double>(taper);
        const double c = std::cos(x);
        w[n] = c * c;
    }
    return w;
}

Spectrum1D absorption(const SystemSpec& sys, const TimeGrid& t_grid, Window window)
{
    t_grid.validate();
    if (t_grid.count < 8) {
        throw DomainError("absorption needs at least 8 time samples");
    }
    sys.validate();
    const std::size_t n = next_power_of_two(4 * t_grid.count);
    const auto weights = sample_weights(window, t_grid.count);

    Fft1D fft(n, FFTW_BACKWARD);
    std::fill(fft.data(), fft.data() + n, complex{});
    for (std::size_t k = 0; k < t_grid.count; ++k) {
        complex sum{};
        for (std::size_t i = 0; i < sys.num_levels(); ++i) {
            sum += sys.dipole[i] * sys.dipole[i] * linear_coherence(sys, i, t_grid.at(k));
        }
        fft.data()[k] = weights[k] * sum;
    }
    fft.run();

    Spectrum1D out{frequency_axis(n, t_grid.step_fs, sys.carrier), std::vector<double>(n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = t_grid.step_fs * fft.data()[unshift(k, n)].real();
    }
    return out;
}

Spectrum2D spectrum2d(const ResponseField& field, Window window, double carrier, unsigned padding)
{
    if (padding == 0) {
        throw DomainError("zero-padding factor must be >= 1");
    }
    const TimeGrid& tau = field.tau_axis();
    const TimeGrid& t = field.t_axis();
    const std::size_t n_tau = next_power_of_two(padding * tau.count);
    const std::size_t n_t = next_power_of_two(padding * t.count);
    const auto w_tau = sample_weights(window, tau.count);
    const auto w_t = sample_weights(window, t.count);

    // Rows (fixed tau): e^{+i w t}. Only the populated rows need a transform.
    std::vector<complex> work(n_tau * n_t, complex{});
    {
        Fft1D row(n_t, FFTW_BACKWARD);
        for (std::size_t m = 0; m < tau.count; ++m) {
            std::fill(row.data(), row.data() + n_t, complex{});
            for (std::size_t n = 0; n < t.count; ++n) {
                row.data()[n] = w_tau[m] * w_t[n] * field(m, n);
            }
            row.run();
            std::copy(row.data(), row.data() + n_t, work.begin() + static_cast<std::ptrdiff_t>(m * n_t));
        }
    }
    // Columns: e^{-i w tau}.
    {
        Fft1D col(n_tau, FFTW_FORWARD);
        for (std::size_t l = 0; l < n_t; ++l) {
            for (std::size_t m = 0; m < n_tau; ++m) {
                col.data()[m] = work[m * n_t + l];
            }
            col.run();
            for (std::size_t m = 0; m < n_tau; ++m) {
                work[m * n_t + l] = col.data()[m];
            }
        }
    }

    Spectrum2D out;
    out.omega_tau = frequency_axis(n_tau, tau.step_fs, carrier);
    out.omega_t = frequency_axis(n_t, t.step_fs, carrier);
    out.real.resize(n_tau * n_t);
    out.magnitude.resize(n_tau * n_t);
    out.waiting_fs = field.waiting_time();
    out.provenance = field.provenance();
    const double scale = tau.step_fs * t.step_fs;
    for (std::size_t r = 0; r < n_tau; ++r) {
        for (std::size_t c = 0; c < n_t; ++c) {
            const complex s = scale * work[unshift(r, n_tau) * n_t + unshift(c, n_t)];
            out.real[r * n_t + c] = s.real();
            out.magnitude[r * n_t + c] = std::abs(s);
        }
    }
    return out;
}

LineshapeMetrics lineshape_metrics(const std::vector<double>& values, const std::vector<double>& omega_tau,
                                   const std::vector<double>& omega_t)
{
    const std::size_t rows = omega_tau.size();
    const std::size_t cols = omega_t.size();
    if (values.size() != rows * cols || rows == 0 || cols == 0) {
        throw DomainError("lineshape map does not match its axes");
    }
    const auto peak_it = std::max_element(values.begin(), values.end());
    const double peak = *peak_it;
    if (!(peak > 0.0)) {
        throw DomainError("lineshape map has no positive maximum");
    }
    const auto peak_index = static_cast<std::size_t>(peak_it - values.begin());
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k != peak_index && values[k] >= peak * (1.0 - 1e-9)) {
            throw AmbiguousPeakError("lineshape map has several maxima within 1e-9 of the peak");
        }
    }
    const std::size_t pr = peak_index / cols;
    const std::size_t pc = peak_index % cols;
    if (pr == 0 || pc == 0 || pr + 1 == rows || pc + 1 == cols) {
        throw PeakOnBoundaryError("spectral peak lies on the map boundary");
    }

    // Flood fill the half-maximum region around the peak.
    const double threshold = 0.5 * peak;
    std::vector<char> seen(values.size(), 0);
    std::vector<std::size_t> stack{peak_index};
    seen[peak_index] = 1;
    const double x0 = omega_t[pc];
    const double y0 = omega_tau[pr];
    std::vector<std::size_t> region;
    while (!stack.empty()) {
        const std::size_t k = stack.back();
        stack.pop_back();
        const std::size_t r = k / cols;
        const std::size_t c = k % cols;
        if (r == 0 || c == 0 || r + 1 == rows || c + 1 == cols) {
            throw PeakOnBoundaryError("half-maximum region reaches the map boundary");
        }
        region.push_back(k);
        for (const std::size_t next : {k - cols, k + cols, k - 1, k + 1}) {
            if (!seen[next] && values[next] >= threshold) {
                seen[next] = 1;
                stack.push_back(next);
            }
        }
    }

    // Weights are the excess over the threshold, so samples enter the region
    // continuously as the sampling is refined; moments are central.
    double sum_w = 0.0;
    double sum_x = 0.0;
    double sum_y = 0.0;
    for (const std::size_t k : region) {
        const double w = values[k] - threshold;
        sum_w += w;
        sum_x += w * (omega_t[k % cols] - x0);
        sum_y += w * (omega_tau[k / cols] - y0);
    }
    const double cx = x0 + sum_x / sum_w;
    const double cy = y0 + sum_y / sum_w;
    double sum_uu = 0.0;
    double sum_vv = 0.0;
    for (const std::size_t k : region) {
        const double w = values[k] - threshold;
        const double dx = omega_t[k % cols] - cx;
        const double dy = omega_tau[k / cols] - cy;
        const double u = (dx + dy) / std::numbers::sqrt2;
        const double v = (dx - dy) / std::numbers::sqrt2;
        sum_uu += w * u * u;
        sum_vv += w * v * v;
    }

    LineshapeMetrics m;
    m.peak_omega_tau = y0;
    m.peak_omega_t = x0;
    m.peak_amplitude = peak;
    const double a2 = sum_uu / sum_w;
    const double b2 = sum_vv / sum_w;
    m.diagonal_width = std::sqrt(a2);
    m.antidiagonal_width = std::sqrt(b2);
    m.ellipticity = (a2 + b2) > 0.0 ? (a2 - b2) / (a2 + b2) : 0.0;
    return m;
}

LineshapeMetrics lineshape_metrics(const Spectrum2D& spec, SpectrumPart part)
{
    return lineshape_metrics(spec.part(part), spec.omega_tau, spec.omega_t);
}

ComparisonReport compare(const Spectrum2D& first, const Spectrum2D& second, SpectrumPart part)
{
    if (first.omega_tau != second.omega_tau || first.omega_t != second.omega_t) {
        throw DomainError("cannot compare spectra on different frequency axes");
    }
    ComparisonReport r;
    r.first = lineshape_metrics(first, part);
    r.second = lineshape_metrics(second, part);
    r.d_peak_omega_tau = r.first.peak_omega_tau - r.second.peak_omega_tau;
    r.d_peak_omega_t = r.first.peak_omega_t - r.second.peak_omega_t;
    r.d_peak_amplitude = r.first.peak_amplitude - r.second.peak_amplitude;
    r.d_ellipticity = r.first.ellipticity - r.second.ellipticity;
    return r;
}

} // namespace nlresp
