#include "nlresp/commands.hpp"
#include "nlresp/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    int jobs = -1;
    std::string window;
    double rk_step = 0.0;
};

void add_common(CLI::App* cmd, CommonFlags& flags)
{
    cmd->add_option("--config", flags.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", flags.out, "output directory (overrides run.output_dir)");
    cmd->add_option("--jobs", flags.jobs, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    cmd->add_option("--window", flags.window, "apodization window")->check(CLI::IsMember({"none", "cos2"}));
    cmd->add_option("--rk-step", flags.rk_step, "RK4 step in fs")->check(CLI::PositiveNumber);
}

nlresp::ExperimentConfig load(const CommonFlags& flags)
{
    auto cfg = nlresp::ExperimentConfig::load(flags.config);
    if (!flags.out.empty()) {
        cfg.output_dir = flags.out;
    }
    if (flags.jobs >= 0) {
        cfg.jobs = static_cast<unsigned>(flags.jobs);
    }
    if (!flags.window.empty()) {
        cfg.window = nlresp::window_from_string(flags.window);
    }
    if (flags.rk_step > 0.0) {
        cfg.rk_step_fs = flags.rk_step;
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Third-order response functions from cumulant closed forms and interval-specific master equations"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string provenance = "exact";

    auto* linear = app.add_subcommand("linear", "linear response and absorption spectrum");
    auto* response = app.add_subcommand("response", "R2 response field per waiting time");
    auto* spectrum = app.add_subcommand("spectrum2d", "2D spectra, heatmaps and lineshape metrics");
    auto* verify = app.add_subcommand("verify", "oracle checks; exit 1 on any failure");
    auto* compare = app.add_subcommand("compare", "exact vs RDM lineshape comparison");
    for (auto* cmd : {linear, response, spectrum, verify, compare}) {
        add_common(cmd, flags);
    }
    response->add_option("--provenance", provenance, "exact, rdm or propagated")
        ->check(CLI::IsMember({"exact", "rdm", "propagated"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? nlresp::exit_ok : nlresp::exit_usage;
    }

    try {
        const auto cfg = load(flags);
        if (linear->parsed()) {
            nlresp::cmd_linear(cfg, std::cout);
        } else if (response->parsed()) {
            nlresp::cmd_response(cfg, nlresp::provenance_from_string(provenance), std::cout);
        } else if (spectrum->parsed()) {
            nlresp::cmd_spectrum2d(cfg, std::cout);
        } else if (compare->parsed()) {
            nlresp::cmd_compare(cfg, std::cout);
        } else if (verify->parsed()) {
            const auto report = nlresp::cmd_verify(cfg, std::cout);
            return report.all_passed() ? nlresp::exit_ok : nlresp::exit_verification_failed;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return nlresp::exit_usage;
    }
    return nlresp::exit_ok;
}
