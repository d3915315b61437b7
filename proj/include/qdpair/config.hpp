#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "qdpair/errors.hpp"
#include "qdpair/histogram.hpp"
#include "qdpair/io.hpp"
#include "qdpair/mle.hpp"
#include "qdpair/qkd.hpp"
#include "qdpair/sim.hpp"

namespace qdpair {

using nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;

/// Everything one batch run needs; serialized as a versioned JSON document.
/// Unknown keys are rejected so stale configs fail loudly.
struct RunConfig {
    sim::SourceModel source;
    sim::DetectorModel detector;
    HistogramGrid grid;
    double t_exp_s = 300.0;
    double window_ps = 50.0;
    tomo::MleConfig mle;
    qkd::SixStateConfig six_state;
    double keyrate_tau_min_ps = 0.0;
    std::optional<double> keyrate_tau_max_ps;  // default: 5 lifetimes
    bool optimize_basis = false;
    bool sampling_enabled = false;
    unsigned long long seed = 1;
    std::string output_dir = "out";
    std::string output_format = "csv";

    double keyrate_tau_max_or_default_ps() const {
        return keyrate_tau_max_ps.value_or(5.0 * ns_to_ps(source.lifetime_ns));
    }

    void validate() const {
        source.validate();
        detector.validate();
        grid.validate();
        if (t_exp_s < 0.0) throw config_error("t_exp_s must be >= 0");
        if (window_ps <= 0.0) throw config_error("window_ps must be > 0");
        six_state.validate();
        if (output_format != "csv" && output_format != "json")
            throw config_error("output format must be csv or json");
    }
};

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw config_error("unknown key '" + it.key() + "' in " + where);
}

inline double finite_or_inf(const json& j, const std::string& key, double dflt) {
    if (!j.contains(key) || j.at(key).is_null()) return dflt;
    return j.at(key).get<double>();
}

}  // namespace detail

inline json to_json(const RunConfig& c) {
    json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["source"] = {
        {"fss_uev", c.source.fss_uev},
        {"lifetime_ns", c.source.lifetime_ns},
        {"multiphoton_prob", c.source.multiphoton_prob},
        {"x_rate_hz", c.source.x_rate_hz},
        {"xx_rate_hz", c.source.xx_rate_hz},
        {"rep_rate_hz", c.source.rep_rate_hz},
        {"blink_on_prob", c.source.blink_on_prob}};
    if (std::isfinite(c.source.spin_scatter_ns))
        j["source"]["spin_scatter_ns"] = c.source.spin_scatter_ns;
    if (std::isfinite(c.source.cross_dephase_ns))
        j["source"]["cross_dephase_ns"] = c.source.cross_dephase_ns;
    const char* resp = c.detector.response == sim::ResponseKind::Gaussian
                           ? "gaussian"
                           : c.detector.response == sim::ResponseKind::Sech2
                                 ? "sech2"
                                 : "delta";
    j["detector"] = {{"response", resp},
                     {"width_ps", c.detector.width_ps},
                     {"dark_x_hz", c.detector.dark_x_hz},
                     {"dark_xx_hz", c.detector.dark_xx_hz}};
    j["grid"] = {{"bin_width_ps", c.grid.bin_width_ps},
                 {"n_bins", c.grid.n_bins},
                 {"tau_start_ps", c.grid.tau_start_ps}};
    j["acquisition"] = {{"t_exp_s", c.t_exp_s}};
    j["tomography"] = {
        {"window_ps", c.window_ps},
        {"max_iterations", c.mle.max_iterations},
        {"tolerance", c.mle.tolerance},
        {"likelihood",
         c.mle.likelihood == tomo::MleConfig::Likelihood::Poisson ? "poisson"
                                                                  : "gaussian"}};
    j["qkd"] = {{"p_z_alice", c.six_state.p_z_alice},
                {"p_z_bob", c.six_state.p_z_bob},
                {"f_ec", c.six_state.error_correction_efficiency},
                {"tau_min_ps", c.keyrate_tau_min_ps},
                {"optimize_basis", c.optimize_basis}};
    if (c.keyrate_tau_max_ps) j["qkd"]["tau_max_ps"] = *c.keyrate_tau_max_ps;
    j["sampling"] = {{"enabled", c.sampling_enabled}, {"seed", c.seed}};
    j["output"] = {{"directory", c.output_dir}, {"format", c.output_format}};
    return j;
}

inline RunConfig config_from_json(const json& j) {
    detail::reject_unknown_keys(j, {"schema_version", "source", "detector",
                                    "grid", "acquisition", "tomography", "qkd",
                                    "sampling", "output"},
                                "config root");
    if (!j.contains("schema_version"))
        throw config_error("config is missing schema_version");
    if (j.at("schema_version").get<int>() != kConfigSchemaVersion)
        throw config_error("unsupported schema_version (expected " +
                           std::to_string(kConfigSchemaVersion) + ")");
    RunConfig c;
    if (j.contains("source")) {
        const json& s = j.at("source");
        detail::reject_unknown_keys(
            s, {"fss_uev", "lifetime_ns", "multiphoton_prob", "x_rate_hz",
                "xx_rate_hz", "rep_rate_hz", "blink_on_prob", "spin_scatter_ns",
                "cross_dephase_ns"},
            "source");
        c.source.fss_uev = s.value("fss_uev", c.source.fss_uev);
        c.source.lifetime_ns = s.value("lifetime_ns", c.source.lifetime_ns);
        c.source.multiphoton_prob =
            s.value("multiphoton_prob", c.source.multiphoton_prob);
        c.source.x_rate_hz = s.value("x_rate_hz", c.source.x_rate_hz);
        c.source.xx_rate_hz = s.value("xx_rate_hz", c.source.xx_rate_hz);
        c.source.rep_rate_hz = s.value("rep_rate_hz", c.source.rep_rate_hz);
        c.source.blink_on_prob = s.value("blink_on_prob", c.source.blink_on_prob);
        c.source.spin_scatter_ns =
            detail::finite_or_inf(s, "spin_scatter_ns", sim::kInfTime);
        c.source.cross_dephase_ns =
            detail::finite_or_inf(s, "cross_dephase_ns", sim::kInfTime);
    }
    if (j.contains("detector")) {
        const json& d = j.at("detector");
        detail::reject_unknown_keys(
            d, {"response", "width_ps", "dark_x_hz", "dark_xx_hz"}, "detector");
        const std::string resp = d.value("response", "delta");
        if (resp == "gaussian")
            c.detector.response = sim::ResponseKind::Gaussian;
        else if (resp == "sech2")
            c.detector.response = sim::ResponseKind::Sech2;
        else if (resp == "delta")
            c.detector.response = sim::ResponseKind::Delta;
        else
            throw config_error("unknown detector response '" + resp + "'");
        c.detector.width_ps = d.value("width_ps", 0.0);
        c.detector.dark_x_hz = d.value("dark_x_hz", 0.0);
        c.detector.dark_xx_hz = d.value("dark_xx_hz", 0.0);
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        detail::reject_unknown_keys(g, {"bin_width_ps", "n_bins", "tau_start_ps"},
                                    "grid");
        c.grid.bin_width_ps = g.value("bin_width_ps", c.grid.bin_width_ps);
        c.grid.n_bins = g.value("n_bins", c.grid.n_bins);
        c.grid.tau_start_ps = g.value("tau_start_ps", c.grid.tau_start_ps);
    }
    if (j.contains("acquisition")) {
        detail::reject_unknown_keys(j.at("acquisition"), {"t_exp_s"},
                                    "acquisition");
        c.t_exp_s = j.at("acquisition").value("t_exp_s", c.t_exp_s);
    }
    if (j.contains("tomography")) {
        const json& t = j.at("tomography");
        detail::reject_unknown_keys(
            t, {"window_ps", "max_iterations", "tolerance", "likelihood"},
            "tomography");
        c.window_ps = t.value("window_ps", c.window_ps);
        c.mle.max_iterations = t.value("max_iterations", c.mle.max_iterations);
        c.mle.tolerance = t.value("tolerance", c.mle.tolerance);
        const std::string lk = t.value("likelihood", "poisson");
        if (lk == "poisson")
            c.mle.likelihood = tomo::MleConfig::Likelihood::Poisson;
        else if (lk == "gaussian")
            c.mle.likelihood = tomo::MleConfig::Likelihood::Gaussian;
        else
            throw config_error("unknown likelihood '" + lk + "'");
    }
    if (j.contains("qkd")) {
        const json& q = j.at("qkd");
        detail::reject_unknown_keys(q, {"p_z_alice", "p_z_bob", "f_ec",
                                        "tau_min_ps", "tau_max_ps",
                                        "optimize_basis"},
                                    "qkd");
        c.six_state.p_z_alice = q.value("p_z_alice", c.six_state.p_z_alice);
        c.six_state.p_z_bob = q.value("p_z_bob", c.six_state.p_z_bob);
        c.six_state.error_correction_efficiency =
            q.value("f_ec", c.six_state.error_correction_efficiency);
        c.keyrate_tau_min_ps = q.value("tau_min_ps", c.keyrate_tau_min_ps);
        if (q.contains("tau_max_ps") && !q.at("tau_max_ps").is_null())
            c.keyrate_tau_max_ps = q.at("tau_max_ps").get<double>();
        c.optimize_basis = q.value("optimize_basis", c.optimize_basis);
    }
    if (j.contains("sampling")) {
        detail::reject_unknown_keys(j.at("sampling"), {"enabled", "seed"},
                                    "sampling");
        c.sampling_enabled = j.at("sampling").value("enabled", false);
        c.seed = j.at("sampling").value("seed", 1ULL);
    }
    if (j.contains("output")) {
        detail::reject_unknown_keys(j.at("output"), {"directory", "format"},
                                    "output");
        c.output_dir = j.at("output").value("directory", c.output_dir);
        c.output_format = j.at("output").value("format", c.output_format);
    }
    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config: " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw config_error("config JSON parse error in " + path + ": " +
                           e.what());
    }
    return config_from_json(j);
}

inline void save_config(const RunConfig& c, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw config_error("cannot open for writing: " + path);
    f << to_json(c).dump(2) << '\n';
}

}  // namespace qdpair
