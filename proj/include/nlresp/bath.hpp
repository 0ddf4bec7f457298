#pragma once

#include <complex>
#include <filesystem>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace nlresp {

using complex = std::complex<double>;

/// Overdamped Brownian oscillator parameters in spectroscopic units.
struct ObOParams {
    double lambda_reorg_cm = 0.0; ///< reorganization energy, cm^-1 (0 = no bath)
    double tau_corr_fs = 100.0;   ///< bath correlation time, fs
    double temperature_k = 300.0; ///< K

    void validate() const;
};

/// OBO line-broadening function
///   g(t) = (lambda theta tau^2 - i lambda tau) [exp(-t/tau) - 1 + t/tau],
/// lambda in rad/fs and theta = k_B T / hbar in rad/fs. Implemented as written,
/// without the factor 2 some high-temperature textbook forms carry.
complex obo_g(const ObOParams& params, double t_fs);

/// d g / dt = (lambda theta tau - i lambda)(1 - exp(-t/tau)), rad/fs.
complex obo_gdot(const ObOParams& params, double t_fs);

/// Energy-gap correlation function C(t) = d^2 g / dt^2 in rad^2/fs^2.
complex egcf_from_obo(const ObOParams& params, double t_fs);

/// Correlation function sampled on t = 0, h, 2h, ... in rad^2/fs^2.
struct TabulatedEgcf {
    double step_fs = 0.0;
    std::vector<complex> values;

    /// Validates uniform spacing starting at zero and Re C(0) >= 0.
    static TabulatedEgcf from_samples(std::span<const double> times_fs, std::span<const complex> values);

    /// Samples egcf_from_obo on [0, t_max].
    static TabulatedEgcf sample_obo(const ObOParams& params, double step_fs, double t_max_fs);

    double max_time() const { return step_fs * static_cast<double>(values.size() - 1); }
};

/// Reads a "t_fs,re,im" CSV. The units live in the sidecar "<path>.json":
/// {"units": "cm-2"} or {"units": "rad2/fs2"}, optionally per column as
/// {"units": {"re": ..., "im": ...}}. Mixed column units are rejected.
TabulatedEgcf load_egcf_csv(const std::filesystem::path& path);

enum class BathModel { AnalyticObo, TabulatedQuadrature };

/// g(t) and its derivative for one bath model. Immutable, cheap to copy.
class LineBroadening {
public:
    /// Zero bath: g == 0.
    LineBroadening();

    static LineBroadening obo(const ObOParams& params);

    /// Cumulative double quadrature of a tabulated correlation function.
    /// gdot = int C uses the three-point rule h/12 (5 f0 + 8 f1 - f2) per
    /// sub-interval; g = int gdot uses the corrected trapezoid
    /// h/2 (f0 + f1) + h^2/12 (f0' - f1') with f' = C. Between nodes g and
    /// gdot are cubic Hermite interpolants using the node derivatives.
    static LineBroadening from_egcf(const TabulatedEgcf& egcf);

    complex g(double t_fs) const;
    complex gdot(double t_fs) const;

    /// Same model multiplied by a real correlation coefficient.
    LineBroadening scaled(double factor) const;

    BathModel model() const;
    double scale() const { return m_scale; }
    /// Largest admissible argument; infinity for the analytic model.
    double max_time() const;

private:
    struct Analytic {
        complex amplitude; // lambda theta tau^2 - i lambda tau
        double tau_corr;
    };
    struct Tabulated {
        double step;
        std::vector<complex> g, gdot, egcf;
    };

    std::variant<Analytic, std::shared_ptr<const Tabulated>> m_impl;
    double m_scale = 1.0;
};

/// Pairwise line-broadening functions g_ij = c_ij g_base for M levels that
/// share one bath model. c is symmetric with unit diagonal and |c_ij| <= 1.
class CorrelationMatrix {
public:
    /// Identity correlation: uncorrelated levels.
    CorrelationMatrix(LineBroadening base, std::size_t size);
    /// coefficients in row-major order, size * size entries.
    CorrelationMatrix(LineBroadening base, std::size_t size, std::vector<double> coefficients);

    std::size_t size() const { return m_size; }
    double coefficient(std::size_t i, std::size_t j) const;
    const LineBroadening& base() const { return m_base; }

    complex g(std::size_t i, std::size_t j, double t_fs) const;
    complex gdot(std::size_t i, std::size_t j, double t_fs) const;

private:
    void check(std::size_t i, std::size_t j) const;

    LineBroadening m_base;
    std::size_t m_size;
    std::vector<double> m_coeff;
};

} // namespace nlresp
