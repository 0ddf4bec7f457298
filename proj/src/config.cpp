#include "nlresp/config.hpp"

#include "nlresp/errors.hpp"
#include "nlresp/units.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>

namespace nlresp {

namespace {

using nlohmann::json;

// Tracks which keys of one JSON object were consumed so leftovers are fatal.
class Block {
public:
    Block(const json& doc, std::string name) : m_doc(doc), m_name(std::move(name))
    {
        if (!m_doc.is_object()) {
            throw ConfigError("config: '" + m_name + "' must be an object");
        }
    }

    bool has(const std::string& key) const { return m_doc.contains(key); }

    const json& raw(const std::string& key)
    {
        if (!m_doc.contains(key)) {
            throw ConfigError("config: missing '" + path(key) + "'");
        }
        m_used.insert(key);
        return m_doc.at(key);
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt)
    {
        if (!has(key)) {
            if (fallback) {
                return *fallback;
            }
            throw ConfigError("config: missing '" + path(key) + "'");
        }
        const json& v = raw(key);
        if (!v.is_number()) {
            throw ConfigError("config: '" + path(key) + "' must be a number");
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            throw ConfigError("config: '" + path(key) + "' must be finite");
        }
        return x;
    }

    std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt)
    {
        if (!has(key)) {
            if (fallback) {
                return *fallback;
            }
            throw ConfigError("config: missing '" + path(key) + "'");
        }
        const json& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw ConfigError("config: '" + path(key) + "' must be a non-negative integer");
        }
        return v.get<std::size_t>();
    }

    std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt)
    {
        if (!has(key)) {
            if (fallback) {
                return *fallback;
            }
            throw ConfigError("config: missing '" + path(key) + "'");
        }
        const json& v = raw(key);
        if (!v.is_string()) {
            throw ConfigError("config: '" + path(key) + "' must be a string");
        }
        return v.get<std::string>();
    }

    void finish() const
    {
        for (const auto& [key, value] : m_doc.items()) {
            if (!m_used.contains(key)) {
                throw ConfigError("config: unknown key '" + path(key) + "'");
            }
        }
    }

    std::string path(const std::string& key) const { return m_name.empty() ? key : m_name + "." + key; }

private:
    const json& m_doc;
    std::string m_name;
    std::set<std::string> m_used;
};

TimeGrid read_grid(Block& parent, const std::string& key)
{
    Block b(parent.raw(key), parent.path(key));
    TimeGrid g{b.number("step_fs"), b.count("count")};
    b.finish();
    if (!(g.step_fs > 0.0)) {
        throw ConfigError("config: '" + b.path("step_fs") + "' must be > 0");
    }
    if (g.count == 0) {
        throw ConfigError("config: '" + b.path("count") + "' must be >= 1");
    }
    return g;
}

std::size_t read_level_index(Block& b, const std::string& key, std::size_t num_levels)
{
    const std::size_t v = b.count(key, 1);
    if (v < 1 || v > num_levels) {
        throw ConfigError("config: '" + b.path(key) + "' must be in 1.." + std::to_string(num_levels));
    }
    return v - 1;
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc, const std::filesystem::path& base_dir)
{
    ExperimentConfig cfg;
    cfg.base_dir = base_dir;
    Block root(doc, "");

    if (!root.has("system")) {
        throw ConfigError("config: missing 'system' block");
    }
    if (!root.has("bath")) {
        throw ConfigError("config: missing 'bath' block");
    }
    if (!root.has("grids")) {
        throw ConfigError("config: missing 'grids' block");
    }

    {
        Block sys(root.raw("system"), "system");
        const json& levels = sys.raw("levels");
        if (!levels.is_array() || levels.empty()) {
            throw ConfigError("config: 'system.levels' must be a non-empty array");
        }
        for (std::size_t k = 0; k < levels.size(); ++k) {
            Block lv(levels[k], "system.levels[" + std::to_string(k) + "]");
            Level level{lv.number("omega_cm"), lv.number("dipole", 1.0)};
            lv.finish();
            if (level.dipole < 0.0) {
                throw ConfigError("config: '" + lv.path("dipole") + "' must be >= 0");
            }
            cfg.levels.push_back(level);
        }
        cfg.rotating_frame_cm = sys.number("rotating_frame_cm", 0.0);
        if (sys.has("pathway")) {
            Block pw(sys.raw("pathway"), "system.pathway");
            cfg.pathway.i = read_level_index(pw, "i", cfg.levels.size());
            cfg.pathway.j = read_level_index(pw, "j", cfg.levels.size());
            pw.finish();
        }
        sys.finish();
    }

    {
        Block bath(root.raw("bath"), "bath");
        cfg.bath_model = bath.text("model");
        if (cfg.bath_model == "obo") {
            cfg.obo.lambda_reorg_cm = bath.number("lambda_cm");
            cfg.obo.tau_corr_fs = bath.number("tau_corr_fs");
            cfg.obo.temperature_k = bath.number("temperature_k");
            try {
                cfg.obo.validate();
            } catch (const DomainError& e) {
                throw ConfigError(std::string("config: bath: ") + e.what());
            }
        } else if (cfg.bath_model == "tabulated") {
            cfg.egcf_csv = bath.text("egcf_csv");
        } else {
            throw ConfigError("config: 'bath.model' must be \"obo\" or \"tabulated\"");
        }
        if (bath.has("correlation")) {
            const json& c = bath.raw("correlation");
            const std::size_t m = cfg.levels.size();
            if (!c.is_array() || c.size() != m) {
                throw ConfigError("config: 'bath.correlation' must be a " + std::to_string(m) + "x" +
                                  std::to_string(m) + " array");
            }
            for (const auto& row : c) {
                if (!row.is_array() || row.size() != m) {
                    throw ConfigError("config: 'bath.correlation' rows must have " + std::to_string(m) + " entries");
                }
                std::vector<double> values;
                for (const auto& x : row) {
                    if (!x.is_number()) {
                        throw ConfigError("config: 'bath.correlation' entries must be numbers");
                    }
                    values.push_back(x.get<double>());
                }
                cfg.correlation.push_back(std::move(values));
            }
        }
        bath.finish();
    }

    {
        Block grids(root.raw("grids"), "grids");
        cfg.tau = read_grid(grids, "tau");
        cfg.t = read_grid(grids, "t");
        if (grids.has("waiting_fs")) {
            const json& w = grids.raw("waiting_fs");
            if (!w.is_array() || w.empty()) {
                throw ConfigError("config: 'grids.waiting_fs' must be a non-empty array");
            }
            cfg.waiting_fs.clear();
            for (const auto& x : w) {
                if (!x.is_number() || !(x.get<double>() >= 0.0)) {
                    throw ConfigError("config: 'grids.waiting_fs' entries must be numbers >= 0");
                }
                cfg.waiting_fs.push_back(x.get<double>());
            }
        }
        grids.finish();
    }

    if (root.has("run")) {
        Block run(root.raw("run"), "run");
        cfg.rk_step_fs = run.number("rk_step_fs", cfg.rk_step_fs);
        if (!(cfg.rk_step_fs > 0.0)) {
            throw ConfigError("config: 'run.rk_step_fs' must be > 0");
        }
        try {
            cfg.window = window_from_string(run.text("window", std::string(to_string(cfg.window))));
        } catch (const DomainError& e) {
            throw ConfigError(std::string("config: run.window: ") + e.what());
        }
        cfg.output_dir = run.text("output_dir", cfg.output_dir);
        if (run.has("formats")) {
            const json& f = run.raw("formats");
            if (!f.is_array()) {
                throw ConfigError("config: 'run.formats' must be an array");
            }
            cfg.formats.clear();
            for (const auto& x : f) {
                if (!x.is_string() || (x != "csv" && x != "pgm")) {
                    throw ConfigError("config: 'run.formats' entries must be \"csv\" or \"pgm\"");
                }
                cfg.formats.push_back(x.get<std::string>());
            }
        }
        cfg.display_half_width_cm = run.number("display_half_width_cm", cfg.display_half_width_cm);
        if (!(cfg.display_half_width_cm > 0.0)) {
            throw ConfigError("config: 'run.display_half_width_cm' must be > 0");
        }
        cfg.jobs = static_cast<unsigned>(run.count("jobs", cfg.jobs));
        run.finish();
    }
    root.finish();

    try {
        (void)cfg.build_system();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return from_json(doc, path.parent_path());
}

json ExperimentConfig::to_json() const
{
    json levels_json = json::array();
    for (const auto& l : levels) {
        levels_json.push_back({{"omega_cm", l.omega_cm}, {"dipole", l.dipole}});
    }
    json bath = {{"model", bath_model}};
    if (bath_model == "obo") {
        bath["lambda_cm"] = obo.lambda_reorg_cm;
        bath["tau_corr_fs"] = obo.tau_corr_fs;
        bath["temperature_k"] = obo.temperature_k;
    } else {
        bath["egcf_csv"] = egcf_csv;
    }
    if (!correlation.empty()) {
        bath["correlation"] = correlation;
    }
    return {
        {"system",
         {{"levels", levels_json},
          {"rotating_frame_cm", rotating_frame_cm},
          {"pathway", {{"i", pathway.i + 1}, {"j", pathway.j + 1}}}}},
        {"bath", bath},
        {"grids",
         {{"tau", {{"step_fs", tau.step_fs}, {"count", tau.count}}},
          {"t", {{"step_fs", t.step_fs}, {"count", t.count}}},
          {"waiting_fs", waiting_fs}}},
        {"run",
         {{"rk_step_fs", rk_step_fs},
          {"window", std::string(to_string(window))},
          {"output_dir", output_dir},
          {"formats", formats},
          {"display_half_width_cm", display_half_width_cm},
          {"jobs", jobs}}},
    };
}

std::string ExperimentConfig::hash() const
{
    const std::string text = to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool ExperimentConfig::wants(std::string_view format) const
{
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

SystemSpec ExperimentConfig::build_system() const
{
    LineBroadening base;
    if (bath_model == "obo") {
        base = LineBroadening::obo(obo);
    } else {
        std::filesystem::path p = egcf_csv;
        if (p.is_relative()) {
            p = base_dir / p;
        }
        try {
            base = LineBroadening::from_egcf(load_egcf_csv(p));
        } catch (const FormatError& e) {
            throw ConfigError(std::string("config: bath.egcf_csv: ") + e.what());
        }
    }

    const std::size_t m = levels.size();
    std::optional<CorrelationMatrix> corr;
    if (correlation.empty()) {
        corr.emplace(base, m);
    } else {
        std::vector<double> flat;
        for (const auto& row : correlation) {
            flat.insert(flat.end(), row.begin(), row.end());
        }
        try {
            corr.emplace(base, m, std::move(flat));
        } catch (const DomainError& e) {
            throw ConfigError(std::string("config: bath.correlation: ") + e.what());
        }
    }

    SystemSpec sys{{}, {}, *corr, units::from_wavenumber(rotating_frame_cm)};
    for (const auto& l : levels) {
        sys.omega.push_back(units::from_wavenumber(l.omega_cm));
        sys.dipole.push_back(l.dipole);
    }
    sys.validate();
    return sys;
}

} // namespace nlresp
