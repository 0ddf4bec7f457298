#pragma once

// Workflows behind the command-line subcommands. Each writes its outputs into
// cfg.output_dir (created if needed) and pairs every data file with a
// "<file>.json" sidecar carrying the effective config, its hash and units.

#include "nlresp/config.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace nlresp {

inline constexpr const char* code_version = "nlresp 1.0.0";

/// Exit codes shared by all subcommands.
enum ExitCode : int { exit_ok = 0, exit_verification_failed = 1, exit_usage = 2 };

struct VerificationCheck {
    std::string name;
    double max_abs_deviation = 0.0;
    double max_rel_deviation = 0.0;
    double tolerance = 0.0;
    /// "abs" or "rel": which deviation is held against the tolerance.
    std::string measure = "rel";
    bool passed = false;
    double runtime_s = 0.0;
    std::string detail;
};

struct VerificationReport {
    std::vector<VerificationCheck> checks;

    bool all_passed() const;
    nlohmann::json to_json() const;
};

/// linear_response.csv ("t_fs,re,im") and absorption.csv ("omega_cm,value").
void cmd_linear(const ExperimentConfig& cfg, std::ostream& log);

/// response_<provenance>_T<T>.csv ("tau_fs,t_fs,re,im") per waiting time.
void cmd_response(const ExperimentConfig& cfg, Provenance provenance, std::ostream& log);

/// Per waiting time and provenance: spectrum2d_<prov>_T<T>.csv
/// ("omega_tau_cm,omega_t_cm,re,abs", cropped to the display window),
/// a P5 heatmap of |S| and a metrics JSON.
void cmd_spectrum2d(const ExperimentConfig& cfg, std::ostream& log);

/// Exact vs RDM lineshape comparison per waiting time, compare.json.
void cmd_compare(const ExperimentConfig& cfg, std::ostream& log);

/// Runs the oracle checks at config scale and writes verification_report.json.
VerificationReport cmd_verify(const ExperimentConfig& cfg, std::ostream& log);

/// Writes an 8-bit binary PGM; pixel = round(255 (v - lo) / (hi - lo)), or 0
/// everywhere when hi == lo. Row 0 of the image is the last row of `values`.
void write_pgm(const std::filesystem::path& path, const std::vector<double>& values, std::size_t rows,
               std::size_t cols, double lo, double hi);

} // namespace nlresp
