#pragma once

#include "nlresp/bath.hpp"
#include "nlresp/cumulant.hpp"
#include "nlresp/spectra.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlresp {

/// Invalid experiment configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Experiment description as read from a JSON file. Frequencies are cm^-1 and
/// times fs; conversion to rad/fs happens in build_system(). Level indices in
/// the file are 1-based and stored 0-based here.
struct ExperimentConfig {
    struct Level {
        double omega_cm = 0.0;
        double dipole = 1.0;
    };

    // system
    std::vector<Level> levels;
    double rotating_frame_cm = 0.0;
    PathwaySpec pathway;

    // bath
    std::string bath_model = "obo"; ///< "obo" or "tabulated"
    ObOParams obo;
    std::string egcf_csv;                         ///< tabulated model only
    std::vector<std::vector<double>> correlation; ///< empty: identity

    // grids
    TimeGrid tau{2.0, 251};
    TimeGrid t{2.0, 251};
    std::vector<double> waiting_fs{0.0};

    // run
    double rk_step_fs = 1.0;
    Window window = Window::Cos2;
    std::string output_dir = "out";
    std::vector<std::string> formats{"csv", "pgm"};
    double display_half_width_cm = 1500.0;
    unsigned jobs = 0;

    /// Directory relative paths (egcf_csv) resolve against.
    std::filesystem::path base_dir;

    /// Strict parse: unknown keys, wrong types and out-of-range values throw
    /// ConfigError naming the block and field.
    static ExperimentConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
    static ExperimentConfig load(const std::filesystem::path& path);

    /// Effective configuration with every default filled in; from_json of the
    /// result reproduces this object.
    nlohmann::json to_json() const;

    /// FNV-1a 64 of the canonical dump of to_json(), as 16 hex digits.
    std::string hash() const;

    bool wants(std::string_view format) const;

    SystemSpec build_system() const;
};

} // namespace nlresp
