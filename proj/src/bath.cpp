#include "nlresp/bath.hpp"

#include "nlresp/errors.hpp"
#include "nlresp/units.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace nlresp {

namespace {

void require_nonnegative(double t)
{
    if (!(t >= 0.0)) {
        throw DomainError("line broadening evaluated at negative time " + std::to_string(t));
    }
}

// exp(-x) - 1 + x without cancellation near zero.
double obo_bracket(double x)
{
    if (x < 1e-3) {
        return x * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x / 120.0)));
    }
    return std::expm1(-x) + x;
}

// -expm1(-x) = 1 - exp(-x)
double obo_rise(double x) { return -std::expm1(-x); }

struct ObOCoefficients {
    double lambda;
    double theta;
    double tau;
};

ObOCoefficients coefficients(const ObOParams& p)
{
    p.validate();
    return {units::from_wavenumber(p.lambda_reorg_cm), units::thermal_frequency(p.temperature_k), p.tau_corr_fs};
}

// Cumulative integral of uniformly sampled f, exact for quadratics on each interval.
std::vector<complex> cumulative_integral(const std::vector<complex>& f, double h)
{
    const std::size_t n = f.size();
    std::vector<complex> out(n, complex{});
    if (n == 2) {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        complex piece;
        if (k + 2 < n) {
            piece = (h / 12.0) * (5.0 * f[k] + 8.0 * f[k + 1] - f[k + 2]);
        } else {
            piece = (h / 12.0) * (-f[k - 1] + 8.0 * f[k] + 5.0 * f[k + 1]);
        }
        out[k + 1] = out[k] + piece;
    }
    return out;
}

// Cumulative integral of f with known derivative df (corrected trapezoid,
// exact for cubics on each interval).
std::vector<complex> cumulative_hermite_integral(const std::vector<complex>& f, const std::vector<complex>& df,
                                                 double h)
{
    std::vector<complex> out(f.size(), complex{});
    for (std::size_t k = 0; k + 1 < f.size(); ++k) {
        out[k + 1] = out[k] + 0.5 * h * (f[k] + f[k + 1]) + (h * h / 12.0) * (df[k] - df[k + 1]);
    }
    return out;
}

// Cubic Hermite interpolation on [0, h] with end values y0, y1 and slopes d0, d1.
complex hermite(double s, double h, complex y0, complex y1, complex d0, complex d1)
{
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
}

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, const std::filesystem::path& path, std::size_t line)
{
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || trim(text.substr(used)) != "") {
        throw FormatError(path.string() + ":" + std::to_string(line) + ": not a number: '" + text + "'");
    }
    return value;
}

double unit_factor(const std::string& unit, const std::filesystem::path& sidecar)
{
    if (unit == "cm-2") {
        return units::wavenumber_to_angular * units::wavenumber_to_angular;
    }
    if (unit == "rad2/fs2") {
        return 1.0;
    }
    throw FormatError(sidecar.string() + ": unknown units '" + unit + "' (expected cm-2 or rad2/fs2)");
}

} // namespace

void ObOParams::validate() const
{
    if (!(lambda_reorg_cm >= 0.0) || !std::isfinite(lambda_reorg_cm)) {
        throw DomainError("OBO reorganization energy must be >= 0");
    }
    if (!(tau_corr_fs > 0.0) || !std::isfinite(tau_corr_fs)) {
        throw DomainError("OBO correlation time must be > 0");
    }
    if (!(temperature_k > 0.0) || !std::isfinite(temperature_k)) {
        throw DomainError("OBO temperature must be > 0");
    }
}

complex obo_g(const ObOParams& params, double t_fs)
{
    require_nonnegative(t_fs);
    const auto [lambda, theta, tau] = coefficients(params);
    const complex amplitude{lambda * theta * tau * tau, -lambda * tau};
    return amplitude * obo_bracket(t_fs / tau);
}

complex obo_gdot(const ObOParams& params, double t_fs)
{
    require_nonnegative(t_fs);
    const auto [lambda, theta, tau] = coefficients(params);
    return complex{lambda * theta * tau, -lambda} * obo_rise(t_fs / tau);
}

complex egcf_from_obo(const ObOParams& params, double t_fs)
{
    require_nonnegative(t_fs);
    const auto [lambda, theta, tau] = coefficients(params);
    return complex{lambda * theta, -lambda / tau} * std::exp(-t_fs / tau);
}

TabulatedEgcf TabulatedEgcf::from_samples(std::span<const double> times_fs, std::span<const complex> values)
{
    if (times_fs.size() != values.size()) {
        throw FormatError("EGCF table: times and values differ in length");
    }
    if (times_fs.size() < 2) {
        throw FormatError("EGCF table needs at least two samples");
    }
    const double step = times_fs[1] - times_fs[0];
    if (!(step > 0.0)) {
        throw FormatError("EGCF table times must be strictly increasing");
    }
    if (std::abs(times_fs[0]) > 1e-9 * step) {
        throw FormatError("EGCF table must start at t = 0");
    }
    for (std::size_t k = 1; k < times_fs.size(); ++k) {
        const double expected = step * static_cast<double>(k);
        if (std::abs(times_fs[k] - expected) > 1e-6 * step) {
            throw FormatError("EGCF table is not uniformly spaced at sample " + std::to_string(k));
        }
    }
    if (values[0].real() < 0.0) {
        throw FormatError("EGCF table: Re C(0) must be non-negative");
    }
    return TabulatedEgcf{step, std::vector<complex>(values.begin(), values.end())};
}

TabulatedEgcf TabulatedEgcf::sample_obo(const ObOParams& params, double step_fs, double t_max_fs)
{
    if (!(step_fs > 0.0)) {
        throw DomainError("EGCF sampling step must be > 0");
    }
    const auto n = static_cast<std::size_t>(std::llround(t_max_fs / step_fs)) + 1;
    TabulatedEgcf table{step_fs, {}};
    table.values.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        table.values.push_back(egcf_from_obo(params, step_fs * static_cast<double>(k)));
    }
    return table;
}

TabulatedEgcf load_egcf_csv(const std::filesystem::path& path)
{
    std::filesystem::path sidecar = path;
    sidecar += ".json";
    std::ifstream meta_in(sidecar);
    if (!meta_in) {
        throw FormatError("missing units sidecar " + sidecar.string());
    }
    nlohmann::json meta;
    try {
        meta_in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(sidecar.string() + ": " + e.what());
    }
    if (!meta.is_object() || !meta.contains("units")) {
        throw FormatError(sidecar.string() + ": missing \"units\"");
    }
    std::string unit;
    const auto& u = meta["units"];
    if (u.is_string()) {
        unit = u.get<std::string>();
    } else if (u.is_object() && u.contains("re") && u.contains("im") && u["re"].is_string() && u["im"].is_string()) {
        if (u["re"] != u["im"]) {
            throw FormatError(sidecar.string() + ": mixed units for re and im columns");
        }
        unit = u["re"].get<std::string>();
    } else {
        throw FormatError(sidecar.string() + ": \"units\" must be a string or {re, im}");
    }
    const double factor = unit_factor(unit, sidecar);

    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open EGCF table " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> times;
    std::vector<complex> values;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line_no == 1) {
            if (line != "t_fs,re,im") {
                throw FormatError(path.string() + ": expected header 't_fs,re,im'");
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        std::stringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c) ||
            c.find(',') != std::string::npos) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected three columns");
        }
        times.push_back(parse_number(a, path, line_no));
        values.emplace_back(factor * parse_number(b, path, line_no), factor * parse_number(c, path, line_no));
    }
    return TabulatedEgcf::from_samples(times, values);
}

LineBroadening::LineBroadening() : m_impl(Analytic{complex{}, 1.0}) {}

LineBroadening LineBroadening::obo(const ObOParams& params)
{
    const auto [lambda, theta, tau] = coefficients(params);
    LineBroadening lb;
    lb.m_impl = Analytic{complex{lambda * theta * tau * tau, -lambda * tau}, tau};
    return lb;
}

LineBroadening LineBroadening::from_egcf(const TabulatedEgcf& egcf)
{
    if (egcf.values.size() < 2 || !(egcf.step_fs > 0.0)) {
        throw FormatError("EGCF table needs at least two uniformly spaced samples");
    }
    auto tab = std::make_shared<Tabulated>();
    tab->step = egcf.step_fs;
    tab->egcf = egcf.values;
    tab->gdot = cumulative_integral(tab->egcf, tab->step);
    tab->g = cumulative_hermite_integral(tab->gdot, tab->egcf, tab->step);
    LineBroadening lb;
    lb.m_impl = std::shared_ptr<const Tabulated>(std::move(tab));
    return lb;
}

complex LineBroadening::g(double t) const
{
    require_nonnegative(t);
    if (const auto* a = std::get_if<Analytic>(&m_impl)) {
        return m_scale * a->amplitude * obo_bracket(t / a->tau_corr);
    }
    const auto& tab = *std::get<std::shared_ptr<const Tabulated>>(m_impl);
    const double x = t / tab.step;
    const double last = static_cast<double>(tab.g.size() - 1);
    if (x > last * (1.0 + 1e-12)) {
        throw RangeError("g(t) requested at t = " + std::to_string(t) + " fs beyond the tabulated range");
    }
    auto k = static_cast<std::size_t>(std::floor(x));
    if (k >= tab.g.size() - 1) {
        k = tab.g.size() - 2;
    }
    const double s = x - static_cast<double>(k);
    if (s == 0.0) {
        return m_scale * tab.g[k];
    }
    return m_scale * hermite(s, tab.step, tab.g[k], tab.g[k + 1], tab.gdot[k], tab.gdot[k + 1]);
}

complex LineBroadening::gdot(double t) const
{
    require_nonnegative(t);
    if (const auto* a = std::get_if<Analytic>(&m_impl)) {
        return m_scale * (a->amplitude / a->tau_corr) * obo_rise(t / a->tau_corr);
    }
    const auto& tab = *std::get<std::shared_ptr<const Tabulated>>(m_impl);
    const double x = t / tab.step;
    const double last = static_cast<double>(tab.gdot.size() - 1);
    if (x > last * (1.0 + 1e-12)) {
        throw RangeError("gdot(t) requested at t = " + std::to_string(t) + " fs beyond the tabulated range");
    }
    auto k = static_cast<std::size_t>(std::floor(x));
    if (k >= tab.gdot.size() - 1) {
        k = tab.gdot.size() - 2;
    }
    const double s = x - static_cast<double>(k);
    if (s == 0.0) {
        return m_scale * tab.gdot[k];
    }
    return m_scale * hermite(s, tab.step, tab.gdot[k], tab.gdot[k + 1], tab.egcf[k], tab.egcf[k + 1]);
}

LineBroadening LineBroadening::scaled(double factor) const
{
    LineBroadening out = *this;
    out.m_scale *= factor;
    return out;
}

BathModel LineBroadening::model() const
{
    return std::holds_alternative<Analytic>(m_impl) ? BathModel::AnalyticObo : BathModel::TabulatedQuadrature;
}

double LineBroadening::max_time() const
{
    if (std::holds_alternative<Analytic>(m_impl)) {
        return std::numeric_limits<double>::infinity();
    }
    const auto& tab = *std::get<std::shared_ptr<const Tabulated>>(m_impl);
    return tab.step * static_cast<double>(tab.g.size() - 1);
}

CorrelationMatrix::CorrelationMatrix(LineBroadening base, std::size_t size)
    : m_base(std::move(base)), m_size(size), m_coeff(size * size, 0.0)
{
    for (std::size_t i = 0; i < size; ++i) {
        m_coeff[i * size + i] = 1.0;
    }
}

CorrelationMatrix::CorrelationMatrix(LineBroadening base, std::size_t size, std::vector<double> coefficients)
    : m_base(std::move(base)), m_size(size), m_coeff(std::move(coefficients))
{
    if (m_coeff.size() != size * size) {
        throw DomainError("correlation matrix needs " + std::to_string(size * size) + " coefficients");
    }
    for (std::size_t i = 0; i < size; ++i) {
        if (m_coeff[i * size + i] != 1.0) {
            throw DomainError("correlation matrix diagonal must be 1");
        }
        for (std::size_t j = 0; j < size; ++j) {
            const double c = m_coeff[i * size + j];
            if (!(std::abs(c) <= 1.0)) {
                throw DomainError("correlation coefficients must lie in [-1, 1]");
            }
            if (c != m_coeff[j * size + i]) {
                throw DomainError("correlation matrix must be symmetric");
            }
        }
    }
}

void CorrelationMatrix::check(std::size_t i, std::size_t j) const
{
    if (i >= m_size || j >= m_size) {
        throw DomainError("level index out of range");
    }
}

double CorrelationMatrix::coefficient(std::size_t i, std::size_t j) const
{
    check(i, j);
    return m_coeff[i * m_size + j];
}

complex CorrelationMatrix::g(std::size_t i, std::size_t j, double t) const
{
    return coefficient(i, j) * m_base.g(t);
}

complex CorrelationMatrix::gdot(std::size_t i, std::size_t j, double t) const
{
    return coefficient(i, j) * m_base.gdot(t);
}

} // namespace nlresp
