#pragma once

#include "nlresp/cumulant.hpp"

#include <stdexcept>
#include <string_view>
#include <vector>

namespace nlresp {

enum class Window {
    None,
    Cos2, ///< cos^2 taper over the final 20% of each time axis
};

std::string_view to_string(Window w);
Window window_from_string(std::string_view name);

/// Taper weights for `count` samples; all ones for Window::None.
std::vector<double> window_weights(Window w, std::size_t count);

struct Spectrum1D {
    std::vector<double> omega; ///< absolute angular frequency, rad/fs, ascending
    std::vector<double> values;
};

/// Which real quantity of the complex 2D transform a metric looks at.
enum class SpectrumPart { Real, Magnitude };

/// 2D rephasing spectrum on absolute frequency axes (rad/fs, ascending).
/// `real` holds Re S, `magnitude` holds |S|; both row-major in omega_tau.
struct Spectrum2D {
    std::vector<double> omega_tau;
    std::vector<double> omega_t;
    std::vector<double> real;
    std::vector<double> magnitude;
    double waiting_fs = 0.0;
    Provenance provenance = Provenance::Exact;

    std::size_t rows() const { return omega_tau.size(); }
    std::size_t cols() const { return omega_t.size(); }
    const std::vector<double>& part(SpectrumPart p) const { return p == SpectrumPart::Real ? real : magnitude; }
};

/// Re of the one-sided transform sum_i |d_i|^2 rho_ig(t) e^{i w t} dt, first
/// sample half-weighted, zero-padded to the next power of two >= 4x samples.
/// Throws DomainError for grids shorter than 8 samples.
Spectrum1D absorption(const SystemSpec& sys, const TimeGrid& t_grid, Window window = Window::Cos2);

/// S(w_tau, w_t) = sum_{m,n} c_m c_n R(tau_m, t_n) e^{-i w_tau tau_m} e^{+i w_t t_n} dtau dt,
/// with c the window weights and the first sample of each axis half-weighted.
/// The tau transform uses e^{-i w tau}, i.e. the rephasing axis already
/// flipped, so a coherence e^{+i w_ig tau} e^{-i w_jg t} peaks at (w_ig, w_jg).
/// Each axis is zero-padded to the next power of two >= padding * count.
/// `carrier` is added back to both axes.
Spectrum2D spectrum2d(const ResponseField& field, Window window = Window::Cos2, double carrier = 0.0,
                      unsigned padding = 2);

class PeakOnBoundaryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AmbiguousPeakError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LineshapeMetrics {
    double peak_omega_tau = 0.0;
    double peak_omega_t = 0.0;
    double peak_amplitude = 0.0;
    double diagonal_width = 0.0;     ///< sqrt of the diagonal second moment, rad/fs
    double antidiagonal_width = 0.0; ///< sqrt of the antidiagonal second moment, rad/fs
    double ellipticity = 0.0;        ///< (a^2 - b^2) / (a^2 + b^2)
};

/// Moment-based lineshape of the global maximum. The region is the
/// 4-connected set of samples >= 50% of the peak that contains the peak.
/// Second moments along the diagonal (a) and antidiagonal (b) are central
/// (about the region centroid) and weighted by the amplitude in excess of the
/// 50% threshold, which keeps them stable under finer frequency sampling. Throws PeakOnBoundaryError when the peak or the
/// region touches the map edge, AmbiguousPeakError when another sample is
/// within 1e-9 (relative) of the maximum, DomainError for an all-zero map.
LineshapeMetrics lineshape_metrics(const Spectrum2D& spec, SpectrumPart part = SpectrumPart::Magnitude);

/// Same, on a bare row-major map with explicit axes.
LineshapeMetrics lineshape_metrics(const std::vector<double>& values, const std::vector<double>& omega_tau,
                                   const std::vector<double>& omega_t);

struct ComparisonReport {
    LineshapeMetrics first;
    LineshapeMetrics second;
    double d_peak_omega_tau = 0.0;
    double d_peak_omega_t = 0.0;
    double d_peak_amplitude = 0.0;
    double d_ellipticity = 0.0; ///< first - second
};

/// Throws DomainError when the frequency axes differ.
ComparisonReport compare(const Spectrum2D& first, const Spectrum2D& second,
                         SpectrumPart part = SpectrumPart::Magnitude);

} // namespace nlresp
